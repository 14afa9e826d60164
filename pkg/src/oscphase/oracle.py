"""Independent ground truth for the expansion engine.

Three oracles live here:

* oscillatory_quadrature -- direct adaptive Gauss-Legendre integration of
  g(x) e(f(x)), with panels sized so each carries at most half a unit of
  phase variation.  Deliberately free of any asymptotic machinery.  The
  integrand is evaluated in double-double so the result stays trustworthy
  at phase scales (T ~ 2^18) where plain float64 drowns in phase jitter.
* fd_derivatives -- central finite differences, the classic cross-check for
  the jet engine.
* numeric_reversion_oracle -- brute-force recovery of the varpi coefficients
  by solving the change of variables pointwise in mpmath and fitting a
  polynomial, bypassing all series algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import ddmath, ddnumba
from .coefficients import PhaseProblem, mp_refine_gamma, solve_x_of_y
from .errors import OracleFitError, QuadratureNonConvergence
from .exprs import Expr, eval_array, eval_dd, eval_real
from .expansion import hypothesis_audit

_PHASE_PER_PANEL = 0.45  # units of f (turns); contract cap is 1/2
_MAX_WIDTH_FRACTION = 1 / 16  # panels also stay narrow so g is resolved


@dataclass(frozen=True)
class QuadratureSettings:
    """Adaptive-quadrature knobs.

    tol is the absolute Richardson stopping tolerance; values much below
    1e-14 are generally unattainable and end in QuadratureNonConvergence.
    """

    tol: float = 1e-12
    max_panels: int = 4_000_000
    nodes_per_panel: int = 24

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.nodes_per_panel < 8:
            raise ValueError("nodes_per_panel must be at least 8")
        if self.max_panels < 8:
            raise ValueError("max_panels must be at least 8")


def _fprime_sign_roots(p: PhaseProblem, scan_points: int = 512) -> list[float]:
    """Zeros of f' bracketed on the scan grid, refined by bisection."""
    xs = np.linspace(p.alpha, p.beta, scan_points)
    vals = [p.fprime(float(x)) for x in xs]
    roots = []
    last_sign, last_idx = 0, 0
    for i, v in enumerate(vals):
        s = (v > 0) - (v < 0)
        if s == 0:
            continue
        if last_sign != 0 and s != last_sign:
            lo, hi = float(xs[last_idx]), float(xs[i])
            flo = vals[last_idx]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = p.fprime(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
        last_sign, last_idx = s, i
    return roots


def _piece_breakpoints(p: PhaseProblem, a: float, b: float) -> np.ndarray:
    """Panel edges on a monotone-phase piece: equal phase increments."""
    fa = p.f_value(a)
    fb = p.f_value(b)
    total = abs(fb - fa)
    n_panels = max(1, int(math.ceil(total / _PHASE_PER_PANEL)))
    max_width = (p.beta - p.alpha) * _MAX_WIDTH_FRACTION
    n_panels = max(n_panels, int(math.ceil((b - a) / max_width)))
    if n_panels == 1:
        return np.array([a, b])
    k = max(257, min(4 * n_panels + 1, 4_000_000))
    xs = np.linspace(a, b, k)
    cum = np.abs(eval_array(p.f, xs, p.bindings) - fa)
    cum = np.maximum.accumulate(cum)  # guard tiny non-monotonicity
    levels = np.linspace(0.0, cum[-1], n_panels + 1)
    edges = np.interp(levels, cum, xs)
    edges[0], edges[-1] = a, b
    edges = np.unique(edges)
    # Enforce the width cap (phase-flat stretches can make wide panels).
    widths = np.diff(edges)
    if np.any(widths > max_width):
        pieces = [np.array([edges[0]])]
        for left, right, w in zip(edges[:-1], edges[1:], widths):
            m = int(math.ceil(w / max_width))
            pieces.append(np.linspace(left, right, m + 1)[1:])
        edges = np.concatenate(pieces)
    return edges


def build_breakpoints(p: PhaseProblem, scan_points: int = 512) -> np.ndarray:
    """Initial panel edges: split at f' sign changes, then by phase."""
    cuts = [p.alpha] + _fprime_sign_roots(p, scan_points) + [p.beta]
    parts = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        edges = _piece_breakpoints(p, a, b)
        parts.append(edges if not parts else edges[1:])
    return np.concatenate(parts)


def _panels_dd(p: PhaseProblem, edges: np.ndarray, order: int):
    """Integrate over the given panels; returns (re, im) as dd scalars."""
    (xi_hi, xi_lo), (w_hi, w_lo) = ddmath.gauss_legendre_dd(order)
    param_names = tuple(sorted(p.bindings))
    kernel = None
    try:
        kernel = ddnumba.get_kernel(p.f, p.g, param_names)
    except Exception:
        kernel = None  # any codegen hiccup falls back to the numpy path
    if kernel is not None:
        pv = np.array([float(p.bindings[name]) for name in param_names])
        re_h, re_l, im_h, im_l = kernel(
            edges, xi_hi, xi_lo, w_hi, w_lo, pv,
            ddmath.TAB_SIN_HI, ddmath.TAB_SIN_LO,
            ddmath.TAB_COS_HI, ddmath.TAB_COS_LO)
        if not (np.all(np.isfinite(re_h)) and np.all(np.isfinite(im_h))):
            raise QuadratureNonConvergence(
                "integrand produced non-finite values (domain violation?)")
        return (ddmath.sum_pairwise((re_h, re_l)),
                ddmath.sum_pairwise((im_h, im_l)))
    return _panels_dd_numpy(p, edges, order)


def _panels_dd_numpy(p: PhaseProblem, edges: np.ndarray, order: int):
    """Pure-numpy dd panel integration (reference / fallback path)."""
    (xi_hi, xi_lo), (w_hi, w_lo) = ddmath.gauss_legendre_dd(order)
    bindings = p.bindings
    n_panels = len(edges) - 1
    chunk = max(1, (1 << 21) // order)
    re_parts_hi, re_parts_lo = [], []
    im_parts_hi, im_parts_lo = [], []
    for start in range(0, n_panels, chunk):
        stop = min(start + chunk, n_panels)
        a = edges[start:stop]
        b = edges[start + 1:stop + 1]
        mid = ddmath.mul(ddmath.add(ddmath.from_float(a), ddmath.from_float(b)),
                         ddmath.from_float(0.5))
        half = ddmath.mul(ddmath.sub(ddmath.from_float(b), ddmath.from_float(a)),
                          ddmath.from_float(0.5))
        mid2 = (mid[0][:, None], mid[1][:, None])
        half2 = (half[0][:, None], half[1][:, None])
        x = ddmath.add(mid2, ddmath.mul(half2, (xi_hi, xi_lo)))
        f = eval_dd(p.f, x, bindings)
        e_re, e_im = ddmath.e_unit_dd(f)
        g = eval_dd(p.g, x, bindings)
        w = (w_hi, w_lo)
        node_re = ddmath.mul(ddmath.mul(g, e_re), w)
        node_im = ddmath.mul(ddmath.mul(g, e_im), w)
        panel_re = ddmath.mul(ddmath.sum_nodes(node_re), half)
        panel_im = ddmath.mul(ddmath.sum_nodes(node_im), half)
        s_re = ddmath.sum_pairwise(panel_re)
        s_im = ddmath.sum_pairwise(panel_im)
        re_parts_hi.append(s_re[0]); re_parts_lo.append(s_re[1])
        im_parts_hi.append(s_im[0]); im_parts_lo.append(s_im[1])
    total_re = ddmath.sum_pairwise((np.array(re_parts_hi), np.array(re_parts_lo)))
    total_im = ddmath.sum_pairwise((np.array(im_parts_hi), np.array(im_parts_lo)))
    return total_re, total_im


def _double_edges(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    re_dd: tuple
    im_dd: tuple
    panels: int
    doublings: int

    def mp_value(self) -> mpmath.mpc:
        return (mpmath.mpf(float(self.re_dd[0])) + mpmath.mpf(float(self.re_dd[1]))
                + 1j * (mpmath.mpf(float(self.im_dd[0])) + mpmath.mpf(float(self.im_dd[1]))))


def oscillatory_quadrature_detail(p: PhaseProblem,
                                  settings: QuadratureSettings | None = None,
                                  scan_points: int = 512) -> QuadratureResult:
    """Full-detail quadrature result (dd parts exposed for the studies)."""
    settings = settings or QuadratureSettings()
    edges = build_breakpoints(p, scan_points)
    prev = None
    prev_diff = None
    stagnant = 0
    doublings = 0
    while True:
        if len(edges) - 1 > settings.max_panels:
            raise QuadratureNonConvergence(
                f"needed more than max_panels = {settings.max_panels} panels "
                f"to reach tol = {settings.tol:g}")
        re_dd, im_dd = _panels_dd(p, edges, settings.nodes_per_panel)
        value = complex(ddmath.to_float(re_dd), ddmath.to_float(im_dd))
        if prev is not None:
            # Compare at dd precision; the collapsed doubles would agree
            # exactly long before fine tolerances are actually certified.
            d_re = ddmath.to_float(ddmath.add(re_dd, (-prev[0][0], -prev[0][1])))
            d_im = ddmath.to_float(ddmath.add(im_dd, (-prev[1][0], -prev[1][1])))
            diff = float(np.hypot(d_re, d_im))
            floor = 1e-28 * max(1.0, abs(value))
            if settings.tol < floor:
                raise QuadratureNonConvergence(
                    f"tol = {settings.tol:g} is below the attainable "
                    f"certification floor {floor:.1e}")
            if diff < settings.tol:
                return QuadratureResult(value=value, re_dd=re_dd, im_dd=im_dd,
                                        panels=len(edges) - 1,
                                        doublings=doublings)
            if prev_diff is not None and diff >= 0.5 * prev_diff:
                stagnant += 1
                if stagnant >= 2:
                    raise QuadratureNonConvergence(
                        f"panel doubling stagnated at diff = {diff:.3e} "
                        f"(tol = {settings.tol:g} unattainable)")
            else:
                stagnant = 0
            prev_diff = diff
        prev = (re_dd, im_dd)
        edges = _double_edges(edges)
        doublings += 1


def oscillatory_quadrature(p: PhaseProblem,
                           settings: QuadratureSettings | None = None) -> complex:
    """Converged value of the integral of g(x) e(f(x)) over [alpha, beta]."""
    return oscillatory_quadrature_detail(p, settings).value


# --- finite differences ------------------------------------------------------

# central stencils as (offset -> coefficient, order of accuracy)
_FD_STENCILS = {
    1: ({-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}, 4),
    2: ({-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12}, 4),
    3: ({-3: 1 / 8, -2: -1.0, -1: 13 / 8, 1: -13 / 8, 2: 1.0, 3: -1 / 8}, 4),
    4: ({-3: -1 / 6, -2: 2.0, -1: -13 / 2, 0: 28 / 3, 1: -13 / 2, 2: 2.0,
         3: -1 / 6}, 4),
    5: ({-3: -0.5, -2: 2.0, -1: -2.5, 1: 2.5, 2: -2.0, 3: 0.5}, 2),
    6: ({-3: 1.0, -2: -6.0, -1: 15.0, 0: -20.0, 1: 15.0, 2: -6.0, 3: 1.0}, 2),
}

_EPS = float(np.finfo(np.float64).eps)


def fd_derivatives(e: Expr, x0: float, order: int, h: float | None = None,
                   params: dict | None = None) -> list[float]:
    """Central-difference estimates of derivatives 1..order at x0.

    Fourth-order-accurate stencils for k <= 4, second-order above.  With h
    omitted, each order k uses the balanced step eps^(1/(k+acc)) * max(1,
    |x0|); accuracy then runs from ~1e-12 (k = 1) to ~1e-8 (k = 4), fading
    gracefully for k = 5, 6.
    """
    if order > 6 or order < 1:
        raise ValueError("fd_derivatives supports orders 1..6")
    out = []
    for k in range(1, order + 1):
        stencil, accuracy = _FD_STENCILS[k]
        hk = (h if h is not None
              else _EPS ** (1.0 / (k + accuracy)) * max(1.0, abs(x0)))
        acc = 0.0
        for offset, coeff in sorted(stencil.items()):
            acc += coeff * eval_real(e, x0 + offset * hk, params)
        out.append(acc / hk ** k)
    return out


# --- numeric reversion oracle ------------------------------------------------

def numeric_reversion_oracle(p: PhaseProblem, gamma: float, order: int,
                             dps: int = 50) -> list[float]:
    """Recover varpi_0..varpi_order without any series algebra.

    Samples G(y) = g(x(y)) * 2*lam2*y / f'(x(y)) at Chebyshev nodes on
    [-r/8, r/8] (r from the hypothesis audit), solving x(y) pointwise by
    Newton, then least-squares fits a degree-(order+2) polynomial.  Runs in
    mpmath because the k-th coefficient of a fit on a radius-h interval is
    conditioned like h^(-k).
    """
    audit = hypothesis_audit(p)
    r = audit.r
    if not (r > 0) or not math.isfinite(r):
        raise OracleFitError("audit produced no usable substitution radius", float("inf"))
    with mpmath.workdps(dps):
        g_mp = mp_refine_gamma(p, gamma)
        fj = p.f_jet(g_mp, 2)
        f_gamma, lam2 = fj.coeffs[0], fj.coeffs[2]
        if lam2 <= 0:
            raise OracleFitError("numeric reversion needs lambda_2 > 0", float("inf"))
        h = mpmath.mpf(r) / 8
        degree = order + 2
        m = 2 * (degree + 1)
        us = [mpmath.cos(mpmath.pi * (2 * i - 1) / (2 * m)) for i in range(1, m + 1)]
        gs = []
        for u in us:
            y = h * u
            x = solve_x_of_y(p, g_mp, lam2, y, f_gamma=f_gamma)
            fpx = p.f_jet(x, 1).coeffs[1]
            gx = p.g_jet(x, 1).coeffs[0]
            gs.append(gx * 2 * lam2 * y / fpx)
        # Chebyshev-basis least squares via normal equations (cond ~ O(1)).
        basis = []
        for u in us:
            row = [mpmath.mpf(1), u]
            for j in range(2, degree + 1):
                row.append(2 * u * row[-1] - row[-2])
            basis.append(row)
        a_float = np.array([[float(v) for v in row] for row in basis])
        condition = float(np.linalg.cond(a_float))
        if condition > 1e10:
            raise OracleFitError("reversion fit is ill-conditioned", condition)
        ata = mpmath.matrix(degree + 1, degree + 1)
        atg = mpmath.matrix(degree + 1, 1)
        for i in range(m):
            for j in range(degree + 1):
                atg[j, 0] += basis[i][j] * gs[i]
                for l in range(degree + 1):
                    ata[j, l] += basis[i][j] * basis[i][l]
        coef = mpmath.lu_solve(ata, atg)
        # Chebyshev -> power basis in u, then rescale u = y/h.
        power = [[mpmath.mpf(0)] * (degree + 1) for _ in range(degree + 1)]
        power[0][0] = mpmath.mpf(1)
        if degree >= 1:
            power[1][1] = mpmath.mpf(1)
        for j in range(2, degree + 1):
            for k in range(j + 1):
                val = 2 * (power[j - 1][k - 1] if k >= 1 else 0) - power[j - 2][k]
                power[j][k] = val
        out = []
        for k in range(order + 1):
            acc = mpmath.mpf(0)
            for j in range(k, degree + 1):
                acc += coef[j, 0] * power[j][k]
            out.append(float(acc / h ** k))
    return out
