"""Central tolerance set.

All thresholds used across the toolkit live in one dataclass so that every
report can embed the resolved values and configs can override them by name.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace

from .errors import ConfigError


@dataclass(frozen=True)
class Tolerances:
    # an eigenvalue counts as zero iff |lambda| <= tol_zero (modulus test);
    # also the SVD rank threshold, relative to the largest singular value
    tol_zero: float = 1e-9
    # stable/unstable classification needs |Re lambda| >= gap
    gap: float = 1e-6
    # projector diagnostics: idempotence, commutation, partition of identity
    eps_proj: float = 1e-8
    # equilibrium / chart residuals
    eps_eq: float = 1e-8
    # Newton termination for the graph map
    eps_newton: float = 1e-11
    # |phi(0)| and |phi'(0)| bound after construction
    eps_graph: float = 1e-8
    # profile tail mass allowed at truncated domain ends
    eps_tail: float = 1e-8
    # slack for the essential-spectrum lower bound in wave spectra
    eps_spec: float = 0.05

    def replace(self, **kw) -> "Tolerances":
        unknown = set(kw) - set(asdict(self))
        if unknown:
            raise ConfigError(f"unknown tolerance name(s): {sorted(unknown)}")
        for name, value in kw.items():
            if not isinstance(value, (int, float)) or not value >= 0:
                raise ConfigError(f"tolerance {name!r} must be a nonnegative number")
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = Tolerances()
