"""normstab: stability classification near manifolds of equilibria.

Numerical tools for the generalized linearized-stability picture: given a
vector field with a whole manifold of equilibria, classify a point on it as
normally stable or normally hyperbolic, build the graph-map reduction to
normal form, and verify the predicted convergence behavior by simulation.
Includes two PDE-flavored case studies at desk scale: a quasilinear
traveling wave and a two-phase interface model.
"""

__version__ = "0.1.0"

from .errors import (
    NormstabError,
    ConfigError,
    NonConvergence,
    IllConditioned,
    NotAnEquilibrium,
    RankDeficientChart,
    NewtonDiverged,
    RadiusTooLarge,
    OutOfChart,
    StepSizeUnderflow,
    DomainExit,
    SingularBand,
    BracketInvalid,
    TailsTooFat,
    GridTooCoarse,
    InvalidRadius,
    BlowUp,
    NoStablePart,
)
from .tolerances import Tolerances, DEFAULT_TOL
from .spectral import (
    SpectrumReport,
    SpectralSplit,
    KernelReport,
    eigen_decompose,
    spectral_projections,
    semisimple_zero,
)
from .normal_form import (
    VectorFieldSpec,
    ManifoldChart,
    Classification,
    GraphMap,
    fd_jacobian,
    linearize,
    tangent_kernel_check,
    classify,
    solve_graph_map,
    to_normal_form,
    from_normal_form,
    normal_form_rhs,
)
from .odesim import (
    Trajectory,
    ConvergenceReport,
    integrate,
    dist_to_manifold,
    assess_convergence,
    estimate_rate_vs_gap,
)
from .examples_ode import (
    BuiltinProblem,
    PolarRelation,
    example_field,
    hyperbolic_field,
    builtin_problem,
    polar_history,
    polar_relation_residual,
    lyapunov_check,
)
from .wave import (
    WaveProblem,
    WaveProfile,
    ShootResult,
    EnergyReport,
    Discretization,
    WaveSpectrumReport,
    WaveSimReport,
    wave_problem,
    saddle_rates,
    phase_field,
    shoot,
    find_speed,
    energy_residual,
    discretize_linearization,
    wave_spectrum,
    simulate_perturbation,
)
from .mullins_sekerka import (
    MSConfig,
    SphereChart,
    ModeEigenReport,
    FlatSymbolReport,
    a_sigma_mode,
    dtn_jump_mode,
    l_mode_eigenvalue,
    flat_symbol_check,
    sphere_chart,
    ms_tangent_kernel_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
