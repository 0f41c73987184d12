"""Exception hierarchy.

Every failure mode raised by this package derives from NormstabError so
callers (and the CLI exit-code mapping) can tell numerical failures apart
from programming errors.
"""

from __future__ import annotations


class NormstabError(Exception):
    """Base class for all toolkit failures."""


class ConfigError(NormstabError):
    """Malformed or inconsistent problem configuration."""


class NonConvergence(NormstabError):
    """An iterative method exhausted its budget without converging."""


class IllConditioned(NormstabError):
    """A decomposition or projector failed its accuracy diagnostics."""


class NotAnEquilibrium(NormstabError):
    """The supplied base point does not satisfy the equilibrium equation."""


class RankDeficientChart(NormstabError):
    """The chart derivative does not have full rank m at the base point."""


class NewtonDiverged(NormstabError):
    """Newton iteration for the graph map failed at some center point x."""

    def __init__(self, message: str, x=None):
        super().__init__(message)
        self.x = x


class RadiusTooLarge(NormstabError):
    """No admissible graph-map radius found (contraction bound violated)."""


class OutOfChart(NormstabError):
    """A requested point lies outside the validated chart/graph radius."""


class StepSizeUnderflow(NormstabError):
    """The adaptive integrator's step size collapsed below machine feasibility."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class DomainExit(NormstabError):
    """The trajectory left the vector field's validated domain.

    Carries the partial trajectory up to the exit time so sweeps can still
    assess the truncated run.
    """

    def __init__(self, message: str, trajectory=None, t_exit=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.t_exit = t_exit


class SingularBand(NormstabError):
    """A trajectory entered the excluded band around a relation's singularity."""


class BracketInvalid(NormstabError):
    """A bisection bracket does not straddle the two shooting outcomes."""


class TailsTooFat(NormstabError):
    """Profile tails exceed the tolerance at the requested domain ends."""


class GridTooCoarse(NormstabError):
    """Grid-doubling check failed: the discretization is not converged."""


class InvalidRadius(NormstabError):
    """Geometric radii violate their ordering or positivity constraints."""


class BlowUp(NormstabError):
    """The simulated solution exceeded the blow-up guard."""


class NoStablePart(NormstabError):
    """The spectral split has no stable part, so no decay rate is defined."""
