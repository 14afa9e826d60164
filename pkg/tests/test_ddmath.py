import mpmath
import numpy as np
import pytest

from oscphase import ddmath


def to_mp(dd, i=None):
    if i is None:
        return mpmath.mpf(float(dd[0])) + mpmath.mpf(float(dd[1]))
    return mpmath.mpf(float(dd[0][i])) + mpmath.mpf(float(dd[1][i]))


@pytest.fixture(autouse=True)
def _mp_context():
    with mpmath.workdps(45):
        yield


def test_mul_and_add_are_error_free_for_doubles():
    rng = np.random.default_rng(0)
    a = rng.uniform(-1e6, 1e6, 40)
    b = rng.uniform(-1e3, 1e3, 40)
    prod = ddmath.mul(ddmath.from_float(a), ddmath.from_float(b))
    tot = ddmath.add(ddmath.from_float(a), ddmath.from_float(b))
    for i in range(40):
        assert to_mp(prod, i) == mpmath.mpf(a[i]) * mpmath.mpf(b[i])
        assert to_mp(tot, i) == mpmath.mpf(a[i]) + mpmath.mpf(b[i])


def test_div_sqrt_powi_reach_dd_accuracy():
    rng = np.random.default_rng(1)
    a = rng.uniform(0.5, 1e5, 40)
    b = rng.uniform(0.5, 1e3, 40)
    quot = ddmath.div(ddmath.from_float(a), ddmath.from_float(b))
    root = ddmath.sqrt(ddmath.from_float(a))
    pw = ddmath.powi(ddmath.from_float(b), 7)
    for i in range(40):
        assert abs(to_mp(quot, i) / (mpmath.mpf(a[i]) / mpmath.mpf(b[i])) - 1) < 1e-30
        assert abs(to_mp(root, i) / mpmath.sqrt(mpmath.mpf(a[i])) - 1) < 1e-30
        assert abs(to_mp(pw, i) / mpmath.mpf(b[i]) ** 7 - 1) < 1e-29


def test_frac_half_reduces_exactly():
    rng = np.random.default_rng(2)
    a = rng.uniform(-3e5, 3e5, 30)
    b = rng.uniform(-0.5, 0.5, 30)
    x = ddmath.add(ddmath.from_float(a), ddmath.from_float(b * 1e-12))
    fr = ddmath.frac_half(x)
    for i in range(30):
        truth = to_mp(x, i)
        reduced = truth - mpmath.nint(truth)
        assert abs(to_mp(fr, i) - reduced) < 1e-32
        assert abs(float(fr[0][i])) <= 0.5 + 1e-12


def test_e_unit_accuracy_at_large_phase():
    rng = np.random.default_rng(3)
    vals = rng.uniform(1e4, 2.7e5, 25)
    f = ddmath.mul(ddmath.from_float(vals), ddmath.from_float(1.0 / 3.0))
    re_dd, im_dd = ddmath.e_unit_dd(f)
    for i in range(25):
        truth = mpmath.expjpi(2 * to_mp(f, i))
        err = abs((to_mp(re_dd, i) + 1j * to_mp(im_dd, i)) - truth)
        assert err < 1e-30


def test_e_unit_exact_at_integers():
    f = ddmath.from_float(np.array([0.0, 1.0, 100.0, -250000.0]))
    vals = ddmath.e_unit(f)
    assert np.all(vals == 1.0 + 0.0j)


def test_sum_pairwise_matches_exact_sum():
    rng = np.random.default_rng(4)
    vals = rng.uniform(-1.0, 1.0, 1023)
    s = ddmath.sum_pairwise(ddmath.from_float(vals))
    exact = mpmath.fsum([mpmath.mpf(v) for v in vals])
    assert abs(to_mp(s) - exact) < 1e-28


def test_gauss_legendre_dd():
    (xh, xl), (wh, wl) = ddmath.gauss_legendre_dd(24)
    total = mpmath.fsum(mpmath.mpf(float(wh[i])) + mpmath.mpf(float(wl[i]))
                        for i in range(24))
    assert abs(total - 2) < 1e-30
    assert np.allclose(xh, -xh[::-1])
    # degree-47 exactness: integrate x^46 on [-1, 1]
    acc = mpmath.mpf(0)
    for i in range(24):
        x = mpmath.mpf(float(xh[i])) + mpmath.mpf(float(xl[i]))
        w = mpmath.mpf(float(wh[i])) + mpmath.mpf(float(wl[i]))
        acc += w * x ** 46
    assert abs(acc - mpmath.mpf(2) / 47) < 1e-28
