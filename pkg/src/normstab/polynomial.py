"""Polynomial vector fields from plain coefficient tables.

The one serializable field format the command line accepts: each component
is a list of monomials ``{"coef": c, "powers": [p_1, ..., p_n]}`` meaning
``c * u_1^{p_1} * ... * u_n^{p_n}``, capped at total degree 6.  Jacobians
are exact (the tables are differentiated term by term), so classification
of table-defined fields does not rest on finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .normal_form import VectorFieldSpec

__all__ = ["MAX_TOTAL_DEGREE", "PolynomialField", "polynomial_field"]

MAX_TOTAL_DEGREE = 6


def _parse_monomial(entry, n: int, where: str):
    if not isinstance(entry, dict) or set(entry) - {"coef", "powers"}:
        raise ConfigError(f"{where}: each monomial is an object with "
                          f"'coef' and 'powers', got {entry!r}")
    try:
        coef = float(entry["coef"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{where}: missing or non-numeric 'coef'") from None
    if not np.isfinite(coef):
        raise ConfigError(f"{where}: coefficient must be finite")
    powers = entry.get("powers")
    if (not isinstance(powers, (list, tuple)) or len(powers) != n
            or any(not isinstance(p, int) or isinstance(p, bool) or p < 0
                   for p in powers)):
        raise ConfigError(f"{where}: 'powers' must be {n} nonnegative integers")
    if sum(powers) > MAX_TOTAL_DEGREE:
        raise ConfigError(f"{where}: total degree {sum(powers)} exceeds "
                          f"{MAX_TOTAL_DEGREE}")
    return coef, tuple(powers)


@dataclass(frozen=True)
class PolynomialField:
    """n polynomial components over n variables, as (coef, powers) tuples."""

    n: int
    components: tuple    # tuple of tuples of (coef, powers)

    def eval(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros(self.n)
        for i, comp in enumerate(self.components):
            acc = 0.0
            for coef, powers in comp:
                term = coef
                for j, p in enumerate(powers):
                    if p:
                        term *= u[j] ** p
                acc += term
            out[i] = acc
        return out

    def jacobian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        jac = np.zeros((self.n, self.n))
        for i, comp in enumerate(self.components):
            for coef, powers in comp:
                for j, p in enumerate(powers):
                    if p == 0:
                        continue
                    term = coef * p
                    for k, q in enumerate(powers):
                        e = q - 1 if k == j else q
                        if e:
                            term *= u[k] ** e
                    jac[i, j] += term
        return jac


def polynomial_field(table: dict, name: str = "polynomial") -> VectorFieldSpec:
    """Build a VectorFieldSpec from a parsed coefficient table.

    ``table`` is {"n": int, "components": [[monomial, ...], ...]} with one
    monomial list per component.
    """
    if not isinstance(table, dict):
        raise ConfigError("polynomial table must be an object")
    n = table.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("polynomial table needs a positive integer 'n'")
    comps = table.get("components")
    if not isinstance(comps, (list, tuple)) or len(comps) != n:
        raise ConfigError(f"'components' must list exactly n={n} monomial lists")
    parsed = []
    for i, comp in enumerate(comps):
        if not isinstance(comp, (list, tuple)):
            raise ConfigError(f"component {i} must be a list of monomials")
        parsed.append(tuple(_parse_monomial(e, n, f"component {i}") for e in comp))
    pf = PolynomialField(n=n, components=tuple(parsed))
    return VectorFieldSpec(n=n, f=pf.eval, jacobian=pf.jacobian, name=name)
