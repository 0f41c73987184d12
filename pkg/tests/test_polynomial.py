"""Polynomial vector fields declared as coefficient tables."""

import numpy as np
import pytest

from normstab import classify, fd_jacobian
from normstab.errors import ConfigError
from normstab.examples_ode import builtin_problem
from normstab.polynomial import MAX_TOTAL_DEGREE, polynomial_field


def circle_cubic_table():
    # ((x+y)(1 - x^2 - y^2), (y-x)(1 - x^2 - y^2)) expanded monomially
    def expand(sx, sy):
        # (sx x + sy y) - (sx x + sy y)(x^2 + y^2)
        return [
            {"coef": sx, "powers": [1, 0]},
            {"coef": sy, "powers": [0, 1]},
            {"coef": -sx, "powers": [3, 0]},
            {"coef": -sx, "powers": [1, 2]},
            {"coef": -sy, "powers": [2, 1]},
            {"coef": -sy, "powers": [0, 3]},
        ]

    return {"n": 2, "components": [expand(1.0, 1.0), expand(-1.0, 1.0)]}


def test_eval_matches_factored_form():
    fs = polynomial_field(circle_cubic_table())
    rng = np.random.default_rng(9)
    for _ in range(20):
        x, y = rng.uniform(-1.5, 1.5, size=2)
        s = 1.0 - x * x - y * y
        got = fs.eval(np.array([x, y]))
        assert np.allclose(got, [(x + y) * s, (y - x) * s], atol=1e-13)


def test_jacobian_matches_finite_differences():
    fs = polynomial_field(circle_cubic_table())
    rng = np.random.default_rng(10)
    for _ in range(5):
        u = rng.uniform(-1.0, 1.0, size=2)
        assert np.max(np.abs(fs.jac(u) - fd_jacobian(fs.eval, u))) <= 1e-7


def test_classify_polynomial_on_builtin_chart():
    # same circle of equilibria as the planar builtins; the linearization at
    # (0, 1) is [[0, 2], [0, 2]] after sign flip, so the verdict is stable
    fs = polynomial_field(circle_cubic_table())
    cl = classify(fs, builtin_problem("Ex1").chart)
    assert cl.verdict == "NormallyStable"
    assert cl.dims == (1, 1, 0)


def test_table_validation():
    assert MAX_TOTAL_DEGREE == 6
    with pytest.raises(ConfigError):
        polynomial_field({"n": 2, "components": [[{"coef": 1.0, "powers": [7, 0]}], []]})
    with pytest.raises(ConfigError):
        polynomial_field({"n": 2, "components": [[{"coef": 1.0, "powers": [1]}], []]})
    with pytest.raises(ConfigError):
        polynomial_field({"n": 2, "components": [[{"coef": 1.0, "powers": [1, -1]}], []]})
    with pytest.raises(ConfigError):
        polynomial_field({"n": 2, "components": [[{"coef": 1.0, "powers": [True, 0]}], []]})
    with pytest.raises(ConfigError):
        polynomial_field({"n": 2, "components": [[{"coef": 1.0}], []]})
    with pytest.raises(ConfigError):
        polynomial_field({"n": 2, "components": [[]]})  # one component short
