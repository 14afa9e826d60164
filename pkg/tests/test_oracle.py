import math

import mpmath
import pytest

from oscphase.coefficients import compute_coefficients, make_problem
from oscphase.errors import QuadratureNonConvergence
from oscphase.exprs import parse
from oscphase.oracle import (QuadratureSettings, _panels_dd, _panels_dd_numpy,
                             build_breakpoints, fd_derivatives,
                             numeric_reversion_oracle, oscillatory_quadrature)


def fresnel_series(t: float, terms: int = 60) -> complex:
    """C(t) + i S(t) by the alternating power series (independent oracle).

    C(t) = sum (-1)^n (pi/2)^(2n) t^(4n+1) / ((2n)! (4n+1)),
    S(t) = sum (-1)^n (pi/2)^(2n+1) t^(4n+3) / ((2n+1)! (4n+3)).
    """
    c = s = 0.0
    for n in range(terms):
        c += (-1) ** n * (math.pi / 2) ** (2 * n) * t ** (4 * n + 1) / (
            math.factorial(2 * n) * (4 * n + 1))
        s += (-1) ** n * (math.pi / 2) ** (2 * n + 1) * t ** (4 * n + 3) / (
            math.factorial(2 * n + 1) * (4 * n + 3))
    return complex(c, s)


# Frozen from fresnel_series(2.0) and double-checked against mpmath below.
FRESNEL_2 = 0.48825340607534075 + 0.34341567836369824j


def test_fresnel_series_oracle_self_check():
    got = fresnel_series(2.0)
    assert got == pytest.approx(FRESNEL_2, abs=3e-15)
    with mpmath.workdps(30):
        assert abs(complex(mpmath.fresnelc(2)) - FRESNEL_2.real) < 1e-16
        assert abs(complex(mpmath.fresnels(2)) - FRESNEL_2.imag) < 1e-16


class TestOscillatoryQuadrature:
    def test_fresnel(self):
        p = make_problem("x^2", "1", -1.0, 1.0, n=2)
        value = oscillatory_quadrature(p)
        assert value == pytest.approx(FRESNEL_2, abs=1e-12)

    def test_full_period_is_zero(self):
        p = make_problem("x", "1", 0.0, 1.0, n=1, T=1.0, M=1.0)
        assert abs(oscillatory_quadrature(p)) < 1e-14

    def test_interval_additivity(self):
        settings = QuadratureSettings(tol=1e-12)
        left = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.1,
                            n=2, T=300.0, M=1.0)
        right = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", 0.1, 0.5,
                             n=2, T=300.0, M=1.0)
        full = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5,
                            n=2, T=300.0)
        v = (oscillatory_quadrature(left, settings)
             + oscillatory_quadrature(right, settings))
        assert abs(v - oscillatory_quadrature(full, settings)) < 2e-12

    def test_self_consistency_across_tolerances(self):
        p = make_problem("T*(x^2 + x^3/3)", "1", -0.5, 0.5, n=2, T=200.0)
        coarse = oscillatory_quadrature(p, QuadratureSettings(tol=1e-10))
        fine = oscillatory_quadrature(p, QuadratureSettings(tol=1e-11))
        assert abs(coarse - fine) < 1e-10

    def test_unattainable_tolerance(self):
        p = make_problem("x^2", "1", -1.0, 1.0, n=2)
        with pytest.raises(QuadratureNonConvergence):
            oscillatory_quadrature(p, QuadratureSettings(tol=1e-30))

    def test_max_panels_exceeded(self):
        p = make_problem("T*x^2", "1", -1.0, 1.0, n=2, T=5000.0)
        with pytest.raises(QuadratureNonConvergence):
            oscillatory_quadrature(p, QuadratureSettings(max_panels=64))

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            QuadratureSettings(nodes_per_panel=4)
        with pytest.raises(ValueError):
            QuadratureSettings(tol=-1.0)

    def test_panel_phase_cap(self):
        p = make_problem("T*(x^2 + x^3/3)", "1", -0.5, 0.5, n=2, T=500.0)
        edges = build_breakpoints(p)
        f_vals = [p.f_value(float(x)) for x in edges]
        for a, b in zip(f_vals[:-1], f_vals[1:]):
            assert abs(b - a) <= 0.5 + 1e-9

    def test_numba_and_numpy_paths_agree(self):
        p = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5,
                         n=2, T=64.0)
        edges = build_breakpoints(p)
        re_a, im_a = _panels_dd(p, edges, 16)
        re_b, im_b = _panels_dd_numpy(p, edges, 16)

        def as_mp(dd):
            return mpmath.mpf(float(dd[0])) + mpmath.mpf(float(dd[1]))

        with mpmath.workdps(40):
            assert abs(as_mp(re_a) - as_mp(re_b)) < 1e-25
            assert abs(as_mp(im_a) - as_mp(im_b)) < 1e-25

    def test_transcendental_phase_falls_back(self):
        # sin in the phase exercises the float64 fallback inside eval_dd
        p = make_problem("T*(x + sin(x)/10)", "1", 0.5, 1.5, n=1, T=40.0, M=1.0)
        with mpmath.workdps(30):
            ref = mpmath.quad(
                lambda x: mpmath.e ** (2j * mpmath.pi * 40 * (x + mpmath.sin(x) / 10)),
                mpmath.linspace(0.5, 1.5, 90))
            got = oscillatory_quadrature(p)
            assert abs(got - complex(ref)) < 1e-9


class TestFdDerivatives:
    def test_cube(self):
        got = fd_derivatives(parse("x^3"), 1.0, 2)
        assert got[0] == pytest.approx(3.0, abs=1e-6)
        assert got[1] == pytest.approx(6.0, abs=1e-6)

    def test_exp(self):
        got = fd_derivatives(parse("exp(x)"), 0.0, 3)
        for v in got:
            assert v == pytest.approx(1.0, abs=1e-5)

    def test_sin_first_derivative(self):
        got = fd_derivatives(parse("sin(x)"), 0.0, 1)
        assert got[0] == pytest.approx(1.0, abs=1e-8)

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            fd_derivatives(parse("x"), 0.0, 7)


class TestNumericReversionOracle:
    def test_pure_quadratic(self):
        p = make_problem("2*x^2", "1", -1.0, 1.0, n=2, T=4.0)
        w = numeric_reversion_oracle(p, 0.0, 3)
        assert w[0] == pytest.approx(1.0, abs=1e-10)
        for v in w[1:]:
            assert abs(v) < 1e-10

    def test_cubic_matches_series_route(self, cubic_problem):
        cs = compute_coefficients(cubic_problem)
        w = numeric_reversion_oracle(cubic_problem, cs.gamma, 4)
        for got, want in zip(w, cs.varpi):
            assert abs(got - want) <= 1e-6 * max(1.0, abs(want))

    def test_linearity_in_weight(self, cubic_problem):
        import dataclasses
        p7 = dataclasses.replace(cubic_problem, g=parse("7"))
        w1 = numeric_reversion_oracle(cubic_problem, 0.0, 2)
        w7 = numeric_reversion_oracle(p7, 0.0, 2)
        for a, b in zip(w1, w7):
            assert b == pytest.approx(7 * a, rel=1e-8, abs=1e-9)

    def test_randomized_polynomial_problems_agree_with_series_route(self):
        # Build polynomial f, g from random tame coefficient sets and check
        # the fit recovers the series-route varpi to 1e-6 relative.
        import numpy as np

        from oscphase.coefficients import compute_coefficients

        rng = np.random.default_rng(41)
        for _ in range(8):
            n = int(rng.integers(1, 4))
            lam2 = float(rng.uniform(0.7, 1.5))
            lam = [0.0, 0.0, lam2] + [float(rng.uniform(-0.25, 0.25)) * lam2
                                      for _ in range(2 * n)]
            eta = [float(rng.uniform(0.2, 1.0))] + \
                  [float(rng.uniform(-1.0, 1.0)) for _ in range(2 * n)]
            f_text = "+".join(f"{c!r}*x^{k}" for k, c in enumerate(lam) if c)
            g_text = "+".join(f"{c!r}*x^{k}" for k, c in enumerate(eta) if c)
            p = make_problem(f_text, g_text, -0.3, 0.3, n=n, T=2.0 * lam2)
            cs = compute_coefficients(p)
            w_hat = numeric_reversion_oracle(p, cs.gamma, 2 * n)
            for got, want in zip(w_hat, cs.varpi):
                assert abs(got - want) <= 1e-6 * max(1.0, abs(want))
