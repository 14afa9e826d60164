import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from oscphase.coefficients import make_problem  # noqa: E402


@pytest.fixture
def cubic_problem():
    """f = x^2 + x^3 on an interval where f'' > 0 and gamma = 0 is the only
    stationary point (the second zero of f' sits at -2/3, outside)."""
    return make_problem("x^2 + x^3", "1", -0.25, 0.5, n=2, T=0.89)


@pytest.fixture
def canonical_family():
    """The convergence-study family: gamma = 0, f'' > 0 on [-1/2, 1/2]."""
    def build(T, n=2):
        return make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5,
                            n=n, T=float(T))
    return build
