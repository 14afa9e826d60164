"""Stationary-point location and the coefficient machinery.

Everything downstream of the change of variables f(x) - f(gamma) = lam2 * y^2
lives here: the Taylor data lam_k, eta_k at gamma, the forward series
y(x - gamma), its reversion x(y), dx/dy (rho_k), the weight-times-Jacobian
coefficients varpi_k, and the independent recursion route (mu_jk, eta'_m)
that cross-checks them.  A residual diagnostic Q(y) measures how fast the
truncated expansion of g(x) dx/dy approaches the real thing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import mpmath
import numpy as np

from . import scalars
from .errors import (DegenerateStationaryPoint, MultipleSignChanges,
                     NewtonError, NoSignChange, StationaryAtEndpoint)
from .exprs import Expr, Neg, eval_jet, eval_real, parse, symbols
from .jets import (Jet, jet_compose, jet_differentiate, jet_map, jet_mul,
                   jet_revert, jet_truncate, jet_variable)

SCAN_POINTS = 512  # sign-change scan density; CLI-overridable


@dataclass(frozen=True)
class PhaseProblem:
    """One integral: f, g, the interval, and the size parameters M, N, T, U.

    n is the expansion order.  The error theory is certified for n >= 2;
    n = 1 is accepted and flagged by reports.
    """

    f: Expr
    g: Expr
    alpha: float
    beta: float
    n: int
    T: float
    M: float
    N: float = 1.0
    U: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ValueError("alpha must be less than beta")
        if self.M < self.beta - self.alpha:
            raise ValueError("M must be at least beta - alpha")
        for name in ("M", "N", "T", "U"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def bindings(self) -> dict:
        return {**self.params, "T": self.T, "M": self.M,
                "N": self.N, "U": self.U}

    def negated(self) -> "PhaseProblem":
        return replace(self, f=Neg(self.f))

    # -- pointwise helpers -------------------------------------------------

    def f_jet(self, x, degree: int) -> Jet:
        return eval_jet(self.f, jet_variable(x, degree), self.bindings)

    def g_jet(self, x, degree: int) -> Jet:
        return eval_jet(self.g, jet_variable(x, degree), self.bindings)

    def f_value(self, x: float) -> float:
        return eval_real(self.f, x, self.bindings)

    def g_value(self, x: float) -> float:
        return eval_real(self.g, x, self.bindings)

    def fprime(self, x):
        return scalars.real_part(self.f_jet(x, 1).coeffs[1])

    def fprime2(self, x):
        jet = self.f_jet(x, 2)
        return (scalars.real_part(jet.coeffs[1]),
                2.0 * scalars.real_part(jet.coeffs[2]))


def make_problem(f: str, g: str, alpha: float, beta: float, n: int,
                 T: float | None = None, M: float | None = None,
                 N: float = 1.0, U: float = 1.0,
                 params: dict | None = None) -> PhaseProblem:
    """Convenience constructor from expression strings with the standard
    defaults (M = beta - alpha, N = U = 1, T inferred from curvature)."""
    f_expr, g_expr = parse(f), parse(g)
    params = dict(params or {})
    if M is None:
        M = beta - alpha
    if T is None:
        if "T" in symbols(f_expr) and "T" not in params:
            raise ValueError("T is required: f references the parameter T")
        T = infer_T(f_expr, alpha, beta,
                    {**params, "M": M, "N": N, "U": U}, M)
    return PhaseProblem(f=f_expr, g=g_expr, alpha=alpha, beta=beta, n=n,
                        T=float(T), M=float(M), N=float(N), U=float(U),
                        params=params)


def infer_T(f_expr: Expr, alpha: float, beta: float, bindings: dict,
            M: float, scan_points: int = SCAN_POINTS) -> float:
    """Default phase scale: max |f''| over the scan grid, times M^2."""
    worst = 0.0
    for x in np.linspace(alpha, beta, scan_points):
        jet = eval_jet(f_expr, jet_variable(float(x), 2), bindings)
        worst = max(worst, abs(2.0 * scalars.real_part(jet.coeffs[2])))
    if worst == 0.0:
        raise ValueError("cannot infer T: f'' vanishes on the grid")
    return worst * M * M


def find_stationary_point(p: PhaseProblem,
                          scan_points: int = SCAN_POINTS) -> float:
    """Locate the single interior zero of f', or raise.

    Scans f' on a uniform grid, then refines the bracketed sign change by
    bisection followed by Newton (f'' from jets).  Newton runs to stagnation,
    well past the guaranteed |f'(gamma)| <= 1e-12 * max(1, T/M).
    """
    xs = np.linspace(p.alpha, p.beta, scan_points)
    vals = [p.fprime(float(x)) for x in xs]
    brackets = []
    last_sign = 0
    last_idx = 0
    for i, v in enumerate(vals):
        s = (v > 0) - (v < 0)
        if s == 0:
            continue
        if last_sign != 0 and s != last_sign:
            brackets.append((last_idx, i))
        last_sign, last_idx = s, i
    if not brackets:
        raise NoSignChange("f' does not change sign on the scan grid")
    if len(brackets) > 1:
        raise MultipleSignChanges(
            f"f' changes sign {len(brackets)} times on the scan grid")

    i, j = brackets[0]
    lo, hi = float(xs[i]), float(xs[j])
    flo = vals[i]
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        fm = p.fprime(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    gamma = 0.5 * (lo + hi)
    for _ in range(60):
        d1, d2 = p.fprime2(gamma)
        if d2 == 0.0:
            break
        step = d1 / d2
        new = gamma - step
        if not (p.alpha <= new <= p.beta):
            break
        if new == gamma:
            break
        gamma = new
        if abs(step) <= 1e-17 * max(abs(gamma), p.beta - p.alpha):
            break

    width = p.beta - p.alpha
    if min(gamma - p.alpha, p.beta - gamma) < 1e-9 * width:
        raise StationaryAtEndpoint(
            f"stationary point {gamma!r} within 1e-9*(beta-alpha) of an endpoint")
    tol = 1e-12 * max(1.0, p.T / p.M)
    if abs(p.fprime(gamma)) > tol:
        raise NewtonError(
            f"|f'(gamma)| = {abs(p.fprime(gamma)):.3e} exceeds tolerance {tol:.3e}")
    return gamma


def taylor_data(p: PhaseProblem, gamma: float):
    """Taylor coefficients of f (to degree 2n+2) and g (to 2n) at gamma.

    Returns (lam, eta) with lam[k] = f^(k)(gamma)/k! for k = 0..2n+2 and
    eta[k] = g^(k)(gamma)/k! for k = 0..2n.  lam[2] < 0 signals the
    maximum orientation (handled by the expansion engine via negation).
    """
    mp_mode = scalars.is_mp(gamma)
    deg_f, deg_g = 2 * p.n + 2, 2 * p.n
    f_jet = p.f_jet(gamma, deg_f)
    g_jet = p.g_jet(gamma, deg_g)
    if mp_mode:
        lam = tuple(c for c in f_jet.coeffs)
        eta = tuple(c for c in g_jet.coeffs)
    else:
        lam = tuple(scalars.real_part(c) for c in f_jet.coeffs)
        eta = tuple(scalars.real_part(c) for c in g_jet.coeffs)
    tol = 1e-12 * p.T / (p.M * p.M)
    if abs(lam[2]) <= tol:
        raise DegenerateStationaryPoint(
            f"lambda_2 = {float(lam[2]):.3e} within tolerance {tol:.3e} of zero")
    return lam, eta


def _bracket_series(lam: Sequence, order: int) -> Jet:
    """1 + sum_{k=1..order} (lam_{k+2}/lam_2) t^k as a formal jet at 0."""
    lam2 = lam[2]
    one = scalars.one_like(lam2) if scalars.is_mp(lam2) else complex(1.0)
    coeffs = [one]
    for k in range(1, order + 1):
        idx = k + 2
        val = lam[idx] / lam2 if idx < len(lam) else 0.0 * one
        coeffs.append(val if scalars.is_mp(lam2) else complex(val))
    return Jet(0.0, tuple(coeffs))


def _realify(values, mp_mode: bool):
    if mp_mode:
        return tuple(v if isinstance(v, mpmath.mpf) else mpmath.re(v)
                     for v in values)
    return tuple(scalars.real_part(v) for v in values)


def amplitude_series(lam: Sequence, eta: Sequence, order: int):
    """Series route to the expansion coefficients.

    Builds y(t) = t * sqrt(1 + sum (lam_{k+2}/lam_2) t^k) on the branch with
    y'(0) = 1 (y shares the sign of x - gamma), reverts it to get
    x(y) - gamma, differentiates for dx/dy = sum rho_k y^k, and composes the
    weight series to get g(x) dx/dy = sum varpi_k y^k.

    Returns (x_of_y, rho, varpi): x_of_y to degree order+1, the others to
    degree `order` (= 2n).
    """
    lam2 = lam[2]
    if scalars.real_part(lam2) <= 0:
        raise DegenerateStationaryPoint(
            "amplitude_series requires lambda_2 > 0 (negate f for a maximum)")
    mp_mode = scalars.is_mp(lam2)
    bracket = _bracket_series(lam, order)
    root = jet_map(bracket, "sqrt")
    zero = scalars.zero_like(lam2) if mp_mode else 0j
    y_series = Jet(0.0, (zero,) + root.coeffs)  # multiply by t
    x_of_y = jet_revert(y_series)
    rho_jet = jet_differentiate(x_of_y)
    eta_jet = Jet(0.0, tuple(eta[k] if mp_mode else complex(eta[k])
                             for k in range(order + 1)))
    g_of_y = jet_compose(eta_jet, jet_truncate(x_of_y, order))
    varpi_jet = jet_mul(g_of_y, rho_jet)
    return (_realify(x_of_y.coeffs, mp_mode),
            _realify(rho_jet.coeffs, mp_mode),
            _realify(varpi_jet.coeffs, mp_mode))


def recursion_coefficients(lam: Sequence, eta: Sequence, order: int):
    """Recursion route: mu_jk, eta'_m, and varpi reassembled from them.

    mu_jk are the coefficients of the (j/2)-power of the bracket series;
    eta'_m solves eta_m = sum_{k+l=m, k>=1} eta'_k mu_kl recursively; the
    check sequence is varpi_k = sum_l eta'_l rho_{k-l} with rho taken from
    amplitude_series.
    """
    lam2 = lam[2]
    mp_mode = scalars.is_mp(lam2)
    bracket = _bracket_series(lam, order)
    mu_rows = [None] * (order + 2)
    for j in range(1, order + 2):
        mu_rows[j] = _realify(jet_map(bracket, "pow", exponent=j / 2).coeffs,
                              mp_mode)
    identity = tuple((1.0 if k == 0 else 0.0) for k in range(order + 1))
    mu_rows[0] = identity
    mu = tuple(mu_rows)

    eta_prime = [eta[0]]
    for m in range(1, order + 1):
        total = eta[m]
        for k in range(1, m):
            total = total - eta_prime[k] * mu[k][m - k]
        eta_prime.append(total)

    _, rho, _ = amplitude_series(lam, eta, order)
    varpi_check = []
    for k in range(order + 1):
        s = eta_prime[0] * rho[k]
        for ell in range(1, k + 1):
            s = s + eta_prime[ell] * rho[k - ell]
        varpi_check.append(s)
    return mu, tuple(eta_prime), tuple(varpi_check)


@dataclass(frozen=True)
class CoefficientSet:
    """gamma plus every coefficient sequence of the change of variables.

    lam[k] = lambda_k (index 0 is f(gamma), index 1 is f'(gamma) ~ 0);
    eta, rho, eta_prime, varpi, varpi_check are indexed 0..2n; mu[j][k] for
    j = 0..2n+1, k = 0..2n.  varpi comes from the series route and
    varpi_check from the recursion route.
    """

    gamma: float
    order: int
    lam: tuple
    eta: tuple
    rho: tuple
    eta_prime: tuple
    mu: tuple
    varpi: tuple
    varpi_check: tuple
    x_of_y: tuple


def compute_coefficients(p: PhaseProblem, gamma: float | None = None) -> CoefficientSet:
    """Full coefficient pipeline for a minimum-orientation problem."""
    if gamma is None:
        gamma = find_stationary_point(p)
    lam, eta = taylor_data(p, gamma)
    order = 2 * p.n
    x_of_y, rho, varpi = amplitude_series(lam, eta, order)
    mu, eta_prime, varpi_check = recursion_coefficients(lam, eta, order)
    return CoefficientSet(gamma=gamma, order=order, lam=lam, eta=eta,
                          rho=rho, eta_prime=eta_prime, mu=mu, varpi=varpi,
                          varpi_check=varpi_check, x_of_y=x_of_y)


def solve_x_of_y(p: PhaseProblem, gamma, lam2, y, f_gamma=None):
    """Solve f(x) - f(gamma) = lam2 * y^2 on the side matching sign(y).

    Safeguarded Newton with a bisection fallback; 1e-14 relative tolerance,
    60-iteration cap.  Works over floats and mpmath numbers alike.
    """
    if y == 0:
        return gamma
    mp_mode = scalars.is_mp(y)

    def fboth(x):
        if mp_mode:
            jet = p.f_jet(x, 1)
            return jet.coeffs[0], jet.coeffs[1]
        jet = p.f_jet(x, 1)
        return scalars.real_part(jet.coeffs[0]), scalars.real_part(jet.coeffs[1])

    if f_gamma is None:
        f_gamma = fboth(gamma)[0]
    target = f_gamma + lam2 * y * y
    far = p.beta if y > 0 else p.alpha
    if mp_mode:
        far = mpmath.mpf(far)
    if fboth(far)[0] - target < 0:
        raise NewtonError(f"y = {float(y)} is outside the substitution range")

    # Bracket ends by residual sign: F(gamma) < 0 <= F(far).
    neg_end, pos_end = gamma, far

    def inside(value):
        lo, hi = (neg_end, pos_end) if neg_end <= pos_end else (pos_end, neg_end)
        return lo <= value <= hi

    x = gamma + y  # first-order seed: x - gamma ~ y near gamma
    if not inside(x):
        x = (gamma + far) / 2
    tol_rel = mpmath.mpf(10) ** (-mpmath.mp.dps + 4) if mp_mode else 1e-14
    max_iter = 200 if mp_mode else 60
    for _ in range(max_iter):
        fx, dfx = fboth(x)
        resid = fx - target
        if resid == 0:
            return x
        if resid > 0:
            pos_end = x
        else:
            neg_end = x
        new = x - resid / dfx if dfx != 0 else None
        if new is None or not inside(new):
            new = (neg_end + pos_end) / 2
        if abs(new - x) <= tol_rel * max(abs(x - gamma), abs(y)):
            return new
        x = new
    raise NewtonError("x(y) Newton did not converge")


def residual_Q(p: PhaseProblem, cs: CoefficientSet, y: float) -> float:
    """Q(y) = g(x) dx/dy - sum_k varpi_k y^k with dx/dy = 2 lam2 y / f'(x).

    The truncation property says Q(y) = O(|y|^{2n+1}) as y -> 0; this is the
    measurable residual behind that claim.  y = 0 is rejected (x(0) = gamma
    and Q(0) = 0 by definition).
    """
    if y == 0:
        raise ValueError("residual_Q is defined for nonzero y only")
    lam2 = cs.lam[2]
    if scalars.real_part(lam2) <= 0:
        raise DegenerateStationaryPoint("residual_Q requires lambda_2 > 0")
    mp_mode = scalars.is_mp(y)
    x = solve_x_of_y(p, cs.gamma, lam2, y, f_gamma=cs.lam[0])
    if mp_mode:
        fj = p.f_jet(x, 1)
        gj = p.g_jet(x, 1)
        gx, fpx = gj.coeffs[0], fj.coeffs[1]
    else:
        gx = p.g_value(x)
        fpx = p.fprime(x)
    dxdy = 2 * lam2 * y / fpx
    series = cs.varpi[cs.order]
    for k in range(cs.order - 1, -1, -1):
        series = series * y + cs.varpi[k]
    q = gx * dxdy - series
    return q if mp_mode else float(q)


def mp_refine_gamma(p: PhaseProblem, gamma: float) -> mpmath.mpf:
    """Polish a float stationary point to working mpmath precision."""
    g = mpmath.mpf(gamma)
    for _ in range(12):
        jet = p.f_jet(g, 2)
        d1, d2 = jet.coeffs[1], 2 * jet.coeffs[2]
        if d2 == 0:
            break
        step = d1 / d2
        g = g - step
        if abs(step) <= mpmath.mpf(10) ** (-mpmath.mp.dps) * max(1, abs(g)):
            break
    return g


def mp_coefficients(p: PhaseProblem, dps: int = 40) -> CoefficientSet:
    """CoefficientSet with mpmath-precision entries (diagnostic pipeline).

    Needed because the residual Q(y) ~ y^{2n+1} dives below float64
    resolution long before the asymptotic slope is measurable.
    """
    with mpmath.workdps(dps):
        gamma_f = find_stationary_point(p)
        gamma = mp_refine_gamma(p, gamma_f)
        lam, eta = taylor_data(p, gamma)
        order = 2 * p.n
        x_of_y, rho, varpi = amplitude_series(lam, eta, order)
        mu, eta_prime, varpi_check = recursion_coefficients(lam, eta, order)
        return CoefficientSet(gamma=gamma, order=order, lam=lam, eta=eta,
                              rho=rho, eta_prime=eta_prime, mu=mu,
                              varpi=varpi, varpi_check=varpi_check,
                              x_of_y=x_of_y)
