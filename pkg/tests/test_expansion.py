import dataclasses
import math

import pytest

from oscphase.coefficients import make_problem
from oscphase.errors import (SignChangeDetected, StationaryPointError,
                             StationaryTooCloseToEndpoint)
from oscphase.expansion import (boundary_terms, double_factorial_odd,
                                error_scale_terms, fdt_error_terms,
                                first_derivative_test, hypothesis_audit,
                                stationary_phase_expand, unit_phase)
from oscphase.oracle import oscillatory_quadrature


class TestDoubleFactorial:
    def test_values(self):
        assert double_factorial_odd(0) == 1  # empty product
        assert double_factorial_odd(1) == 1
        assert double_factorial_odd(3) == 15
        assert double_factorial_odd(4) == 105


class TestBoundaryTerms:
    def test_h1_quadratic(self):
        p = make_problem("x^2", "1", 0.5, 2.0, n=3, T=8.0)
        h = boundary_terms(p, 1.0, 1)
        assert h[0] == pytest.approx(-1j / (4 * math.pi), abs=1e-15)

    def test_h2_quadratic(self):
        # H2 = -H1'/(2 pi i f'); with H1 = 1/(4 pi i x) and f' = 2x this is
        # 1/(16 pi^2 i^2 x^3) = -1/(16 pi^2) at x = 1.  Cross-checked below
        # by finite differences of H1.
        p = make_problem("x^2", "1", 0.5, 2.0, n=3, T=8.0)
        h = boundary_terms(p, 1.0, 2)
        assert h[1] == pytest.approx(-1.0 / (16 * math.pi ** 2), abs=1e-15)

    def test_h2_matches_finite_difference_of_h1(self):
        p = make_problem("x^2", "1", 0.5, 2.0, n=3, T=8.0)
        eps = 1e-6
        h1 = lambda x: boundary_terms(p, x, 1)[0]
        h1_prime = (h1(1.0 + eps) - h1(1.0 - eps)) / (2 * eps)
        expected = -h1_prime / (2j * math.pi * 2.0)
        assert boundary_terms(p, 1.0, 2)[1] == pytest.approx(expected, rel=1e-8)

    def test_zero_weight(self):
        p = make_problem("x^2", "0", 0.5, 2.0, n=3, T=8.0)
        assert all(v == 0 for v in boundary_terms(p, 1.0, 3))

    def test_vanishing_fprime_rejected(self):
        p = make_problem("x^2", "1", -1.0, 2.0, n=2, T=8.0)
        with pytest.raises(SignChangeDetected):
            boundary_terms(p, 0.0, 2)


class TestFirstDerivativeTest:
    def test_integer_frequency_linear_phase(self):
        p = make_problem("100*x", "1", 1.0, 2.0, n=2, T=100.0)
        res = first_derivative_test(p)
        assert res.value == 0j
        assert res.theorem == "fdt"
        assert res.main_term == 0j
        assert res.per_order_main == ()

    @pytest.mark.parametrize("T", [1024.0, 1e4, 16384.0])
    def test_against_oracle(self, T):
        p = make_problem("T*(x + x^2/10)", "1/x", 1.0, 2.0, n=3, T=T)
        res = first_derivative_test(p)
        oracle = oscillatory_quadrature(p)
        assert abs(res.value - oracle) <= 10 * res.error_scale

    def test_zero_weight(self):
        p = make_problem("T*(x + x^2/10)", "0", 1.0, 2.0, n=3, T=100.0)
        res = first_derivative_test(p)
        assert res.value == 0j
        assert res.error_scale == 0.0

    def test_stationary_point_rejected(self):
        p = make_problem("x^2", "1", -1.0, 1.0, n=2)
        with pytest.raises(SignChangeDetected):
            first_derivative_test(p)

    def test_splitting_consistency_exact(self):
        p = make_problem("T*(x + x^2/10)", "1/x", 1.0, 2.0, n=3, T=1e4)
        left = first_derivative_test(dataclasses.replace(p, beta=1.5))
        right = first_derivative_test(dataclasses.replace(p, alpha=1.5))
        full = first_derivative_test(p)
        assert left.boundary_beta == right.boundary_alpha
        assert left.value + right.value == full.value

    def test_error_terms_n1_has_empty_first_sum(self):
        p = make_problem("T*(x + x^2/10)", "1/x", 1.0, 2.0, n=1, T=100.0)
        e1, e2, e3 = fdt_error_terms(p, min(abs(p.fprime(1.0)), abs(p.fprime(2.0))))
        assert e1 == 0.0
        assert e2 > 0 and e3 > 0


class TestStationaryPhaseExpand:
    def test_pure_quadratic_main_term(self):
        p = make_problem("T*x^2", "1", -1.0, 1.0, n=2, T=1.0, M=2.0)
        res = stationary_phase_expand(p)
        expected = complex(0.5, 0.5)  # e(1/8)/sqrt(2)
        assert abs(res.main_term - expected) <= 1e-14 * abs(expected)
        assert all(abs(t) == 0 for t in res.per_order_main[1:])
        assert res.orientation == "min"
        assert res.theorem == "wsp"

    def test_value_decomposition_identity(self):
        p = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2, T=4096.0)
        res = stationary_phase_expand(p)
        assert res.value == res.main_term + res.boundary_beta - res.boundary_alpha
        assert res.main_term == sum(res.per_order_main)

    def test_against_oracle_moderate_T(self):
        p = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2,
                         T=float(2 ** 12))
        res = stationary_phase_expand(p)
        oracle = oscillatory_quadrature(p)
        assert abs(res.value - oracle) <= 10 * res.error_scale

    def test_orientation_duality_is_exact_conjugation(self):
        pmin = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2,
                            T=2048.0)
        pmax = make_problem("-(T*(x^2 + x^3/3))", "1/(1+x^2)", -0.5, 0.5, n=2,
                            T=2048.0)
        rmin = stationary_phase_expand(pmin)
        rmax = stationary_phase_expand(pmax)
        assert rmax.orientation == "max"
        assert rmax.value == rmin.value.conjugate()
        assert rmax.main_term == rmin.main_term.conjugate()

    def test_max_orientation_against_oracle(self):
        pmax = make_problem("-(T*(x^2 + x^3/3))", "1/(1+x^2)", -0.5, 0.5, n=2,
                            T=2048.0)
        res = stationary_phase_expand(pmax)
        oracle = oscillatory_quadrature(pmax)
        assert abs(res.value - oracle) <= 10 * res.error_scale

    def test_near_endpoint_guard(self):
        p = make_problem("(x - 1e-8)^2 + (x - 1e-8)^3", "1", -1e-7, 1.0,
                         n=1, T=3.0, M=2.0)
        with pytest.raises((StationaryTooCloseToEndpoint, StationaryPointError)):
            stationary_phase_expand(p)

    def test_n1_flagged(self):
        p = make_problem("T*(x^2 + x^3/3)", "1", -0.5, 0.5, n=1, T=512.0)
        res = stationary_phase_expand(p)
        assert any("n = 1" in w for w in res.warnings)

    def test_per_order_dominance_when_valid(self):
        p = make_problem("T*(x^2 + x^3/100)", "1/(2+x)", -0.5, 0.5, n=2,
                         T=float(2 ** 22))
        res = stationary_phase_expand(p)
        assert res.audit.validity_ok
        mags = [abs(t) for t in res.per_order_main]
        assert mags[1] < mags[0] and mags[2] < mags[1]

    def test_mp_matches_float_pipeline(self):
        p = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2,
                         T=1024.0)
        res_f = stationary_phase_expand(p)
        res_mp = stationary_phase_expand(p, mp_dps=35)
        assert complex(res_mp.value) == pytest.approx(res_f.value, rel=1e-13)


class TestErrorScaleTerms:
    def test_fourth_term_example(self):
        p = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2, T=1e4)
        terms = error_scale_terms(p, 0.0)
        assert terms[3] == pytest.approx(2e-12, rel=1e-12)

    def test_doubling_T_shrinks_every_term(self):
        p1 = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2, T=1e4)
        p2 = dataclasses.replace(p1, T=2e4)
        t1 = error_scale_terms(p1, 0.0)
        t2 = error_scale_terms(p2, 0.0)
        for a, b in zip(t1, t2):
            assert b <= a * 2.0 ** -(p1.n + 1) * 1.0000001

    def test_endpoint_divergence(self):
        p = make_problem("T*(x^2 + x^3/3)", "1/(1+x^2)", -0.5, 0.5, n=2, T=1e4)
        near = error_scale_terms(p, -0.5 + 1e-4)
        far = error_scale_terms(p, 0.0)
        assert near[1] > far[1] * 1e10

    def test_gamma_at_endpoint_rejected(self):
        p = make_problem("T*(x^2 + x^3/3)", "1", -0.5, 0.5, n=2, T=1e4)
        with pytest.raises(StationaryTooCloseToEndpoint):
            error_scale_terms(p, -0.5)


class TestHypothesisAudit:
    def test_worked_quadratic_example(self):
        p = make_problem("T*x^2", "1", -1.0, 1.0, n=2, T=50.0, M=2.0)
        a = hypothesis_audit(p)
        assert a.C_f[2] == pytest.approx(8.0)
        assert a.Delta == pytest.approx(1.0 / 512.0)
        assert a.r1 == pytest.approx(1.0, rel=1e-12)
        assert a.r2 == pytest.approx(1.0, rel=1e-12)
        assert a.r == pytest.approx(min(1.0, 2.0 / 512.0))
        assert a.M_ok

    def test_validity_condition(self):
        base = make_problem("T*x^2", "1", -1.0, 1.0, n=2, T=50.0, M=2.0)
        # Delta = 1/512: validity needs T^(1/7) > 512, false even at T = 2^20
        a = hypothesis_audit(dataclasses.replace(base, T=float(2 ** 20)))
        assert a.Delta == pytest.approx(1.0 / 512.0)
        assert not a.validity_ok
        a1 = hypothesis_audit(dataclasses.replace(base, T=1.0))
        assert not a1.validity_ok

    def test_fpp_sign_violation_reported_not_thrown(self):
        p = make_problem("x^2 + x^3", "1", -0.35, 0.5, n=1, T=1.0, M=1.0)
        a = hypothesis_audit(p)  # f'' < 0 near -0.35
        assert not a.C2_lower_ok

    def test_monotone_profile(self):
        p = make_problem("100*x", "1", 1.0, 2.0, n=2, T=100.0)
        a = hypothesis_audit(p)
        assert "f' > 0" in a.sign_profile
        assert math.isnan(a.r)

    def test_abs_kink_flagged(self):
        p = make_problem("T*(x^2 + x^3/3)", "abs(x - 0.21)", -0.5, 0.5,
                         n=2, T=100.0)
        a = hypothesis_audit(p)
        assert any("kink" in w for w in a.warnings)


class TestUnitPhase:
    def test_large_integer_phase_is_exact(self):
        p = make_problem("100*x", "1", 1.0, 2.0, n=2, T=100.0)
        assert unit_phase(p, 2.0) == 1.0 + 0.0j

    def test_eighth_offset(self):
        p = make_problem("x", "1", 0.0, 1.0, n=1, T=1.0, M=1.0)
        val = unit_phase(p, 0.0, extra=0.125)
        expected = complex(math.sqrt(0.5), math.sqrt(0.5))
        assert val == pytest.approx(expected, rel=1e-15)
