"""The two expansion theorems and their diagnostics.

first_derivative_test evaluates the boundary-only expansion valid when f'
keeps one sign; stationary_phase_expand evaluates the full expansion around
the interior stationary point, including the H_i boundary corrections and a
four-term error scale.  hypothesis_audit fits the size constants the
theorems assume and reports the validity condition T^(1/(2n+3)) * Delta > 1.

Phase factors e(f(x)) are evaluated through the double-double path so the
boundary terms stay accurate at large T; with `mp_dps` set, the whole
computation runs in mpmath (used by the convergence studies, where the
defect being measured sits far below double-precision resolution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import ddmath, scalars
from .coefficients import (SCAN_POINTS, CoefficientSet, PhaseProblem,
                           compute_coefficients, find_stationary_point,
                           mp_coefficients)
from .errors import (DegenerateStationaryPoint, SignChangeDetected,
                     StationaryPointError, StationaryTooCloseToEndpoint)
from .exprs import Call, Expr, eval_array, eval_dd
from .jets import jet_differentiate, jet_div, jet_truncate


def double_factorial_odd(j: int) -> int:
    """(2j-1)!! with the empty product (j = 0) equal to 1."""
    out = 1
    for m in range(1, j + 1):
        out *= 2 * m - 1
    return out


def unit_phase(p: PhaseProblem, x: float, extra: float = 0.0,
               mp_mode: bool = False):
    """e(f(x) + extra) with the phase reduced mod 1 before exponentiation."""
    if mp_mode:
        f = p.f_jet(mpmath.mpf(x), 1).coeffs[0]
        return mpmath.expjpi(2 * (f + extra))
    f_dd = eval_dd(p.f, ddmath.from_float(np.float64(x)), p.bindings)
    if extra:
        f_dd = ddmath.add(f_dd, ddmath.from_float(np.float64(extra)))
    return complex(ddmath.e_unit(f_dd))


@dataclass(frozen=True)
class ExpansionResult:
    """Expansion output: value = main_term + boundary_beta - boundary_alpha."""

    value: complex
    main_term: complex
    boundary_alpha: complex
    boundary_beta: complex
    per_order_main: tuple
    error_scale: float
    orientation: str  # "min" or "max"
    theorem: str  # "fdt" or "wsp"
    gamma: float | None = None
    coefficients: CoefficientSet | None = None
    audit: "AuditReport | None" = None
    warnings: tuple = ()


@dataclass(frozen=True)
class AuditReport:
    """Fitted size constants and the expansion-validity diagnostics.

    C_f maps r -> fitted constant for f (r = 2..2n+3, with C_f[2] enlarged
    by the lower second-derivative bound); C_g maps s -> fitted constant for
    g (s = 0..2n+1).
    """

    C_f: dict
    C_g: dict
    C2_lower_ok: bool
    Delta: float
    validity_ok: bool
    r1: float
    r2: float
    r: float
    M_ok: bool
    sign_profile: str
    warnings: tuple = ()


def _grid(p: PhaseProblem, scan_points: int) -> np.ndarray:
    return np.linspace(p.alpha, p.beta, scan_points)


def _weight_scale(p: PhaseProblem, s_max: int,
                  scan_points: int = SCAN_POINTS) -> float:
    """Effective weight size: U capped by the fitted sup of |g^(s)| N^s.

    Keeps the error scale honest when the weight is much smaller than the
    declared U (a weight that is identically zero has zero error scale).
    """
    fitted = 0.0
    for x in _grid(p, scan_points):
        jet = p.g_jet(float(x), s_max)
        for s in range(s_max + 1):
            val = abs(scalars.real_part(jet.coeffs[s])) * math.factorial(s)
            fitted = max(fitted, val * p.N ** s)
    return min(p.U, fitted)


def boundary_terms(p: PhaseProblem, x0: float, count: int,
                   mp_mode: bool = False) -> list:
    """H_1(x0)..H_count(x0): H_1 = g/(2 pi i f'), H_i = -H_{i-1}'/(2 pi i f').

    Computed as jet quotients at x0; each recursion step differentiates the
    previous jet, so degrees shrink by one per order.
    """
    if count < 1:
        return []
    tol = 1e-12 * p.T / p.M
    x_val = mpmath.mpf(x0) if mp_mode else x0
    f_jet = p.f_jet(x_val, count + 1)
    g_jet = p.g_jet(x_val, count)
    fp = jet_differentiate(f_jet)  # degree count
    if abs(scalars.real_part(fp.coeffs[0])) <= tol:
        raise SignChangeDetected(
            f"f'({x0}) = {float(scalars.real_part(fp.coeffs[0])):.3e} vanishes; "
            "boundary terms are undefined")
    two_pi_i = 2j * mpmath.pi if mp_mode else complex(0.0, 2.0 * math.pi)
    h = jet_div(g_jet, fp * two_pi_i)
    values = [h.coeffs[0]]
    for _ in range(2, count + 1):
        dh = jet_differentiate(h)
        den = jet_truncate(fp, dh.degree) * two_pi_i
        h = -(jet_div(dh, den))
        values.append(h.coeffs[0])
    return values


def fdt_error_terms(p: PhaseProblem, min_fprime: float,
                    scan_points: int = SCAN_POINTS) -> list[float]:
    """The three error-term magnitudes of the first-derivative test with all
    constants set to one; min_fprime is min(|f'(alpha)|, |f'(beta)|)."""
    n, M, N, T = p.n, p.M, p.N, p.T
    u_eff = _weight_scale(p, n + 1, scan_points)
    m = min_fprime
    e1 = 0.0
    for j in range(1, n // 2 + 1):
        inner = sum(1.0 / (N ** (n - j - t) * M ** t) for t in range(j, n - j + 1))
        e1 += u_eff * T ** j / (m ** (n + j + 1) * M ** (2 * j)) * inner
    e1 *= M / N
    e2 = (M / N + 1.0) * u_eff / (N ** n * m ** (n + 1))
    e3 = 0.0
    for j in range(1, n + 1):
        inner = sum(1.0 / (N ** (n - j - t) * M ** t) for t in range(0, n - j + 1))
        e3 += u_eff * T ** j / (m ** (n + j + 1) * M ** (2 * j)) * inner
    return [e1, e2, e3]


def first_derivative_test(p: PhaseProblem, scan_points: int = SCAN_POINTS,
                          mp_dps: int | None = None) -> ExpansionResult:
    """Boundary-only expansion, valid when f' and f'' keep constant signs."""
    xs = _grid(p, scan_points)
    d1_signs, d2_signs = set(), set()
    for x in xs:
        d1, d2 = p.fprime2(float(x))
        d1_signs.add((d1 > 0) - (d1 < 0))
        d2_signs.add((d2 > 0) - (d2 < 0))
    if 0 in d1_signs or len(d1_signs) != 1:
        raise SignChangeDetected(
            "f' changes sign or vanishes on the grid; use the stationary path")
    d2_strict = d2_signs - {0}
    if len(d2_strict) > 1:
        raise SignChangeDetected("f'' changes sign on the grid")

    mp_mode = mp_dps is not None
    if mp_mode:
        with mpmath.workdps(mp_dps):
            return _fdt_core(p, scan_points, True, d2_strict)
    return _fdt_core(p, scan_points, False, d2_strict)


def _fdt_core(p: PhaseProblem, scan_points: int, mp_mode: bool,
              d2_strict: set) -> ExpansionResult:
    h_beta = boundary_terms(p, p.beta, p.n, mp_mode)
    h_alpha = boundary_terms(p, p.alpha, p.n, mp_mode)
    e_beta = unit_phase(p, p.beta, mp_mode=mp_mode)
    e_alpha = unit_phase(p, p.alpha, mp_mode=mp_mode)
    b_beta = e_beta * _ordered_sum(h_beta)
    b_alpha = e_alpha * _ordered_sum(h_alpha)
    value = b_beta - b_alpha
    min_fp = min(abs(p.fprime(p.alpha)), abs(p.fprime(p.beta)))
    error_scale = float(sum(fdt_error_terms(p, min_fp, scan_points)))
    warnings = ("n = 1: the expansion is certified for n >= 2 only",) if p.n == 1 else ()
    orientation = "min" if d2_strict == {1} else "max"
    return ExpansionResult(value=value, main_term=0j if not mp_mode else mpmath.mpc(0),
                           boundary_alpha=b_alpha, boundary_beta=b_beta,
                           per_order_main=(), error_scale=error_scale,
                           orientation=orientation, theorem="fdt",
                           warnings=warnings)


def _ordered_sum(values):
    total = values[0]
    for v in values[1:]:
        total = total + v
    return total


def error_scale_terms(p: PhaseProblem, gamma: float,
                      scan_points: int = SCAN_POINTS) -> list[float]:
    """The four O-term magnitudes of the stationary-phase expansion, in the
    fixed reporting order, with implied constants set to one."""
    if not (p.alpha < gamma < p.beta):
        raise StationaryTooCloseToEndpoint("gamma must lie strictly inside")
    n, M, N, T = p.n, p.M, p.N, p.T
    u_eff = _weight_scale(p, 2 * n + 1, scan_points)
    da, db = gamma - p.alpha, p.beta - gamma
    t1 = (u_eff * M ** (2 * n + 5) / (T ** (n + 2) * N ** (n + 2))
          * (da ** -(n + 2) + db ** -(n + 2)))
    t2 = (u_eff * M ** (2 * n + 4) / T ** (n + 2)
          * (da ** -(2 * n + 3) + db ** -(2 * n + 3)))
    t3 = (u_eff * M ** (2 * n + 4) / (T ** (n + 2) * N ** (2 * n))
          * (da ** -3 + db ** -3))
    t4 = u_eff / T ** (n + 1) * (M ** (2 * n + 2) / N ** (2 * n + 1) + M)
    return [t1, t2, t3, t4]


def stationary_phase_expand(p: PhaseProblem, scan_points: int = SCAN_POINTS,
                            mp_dps: int | None = None,
                            run_audit: bool = True) -> ExpansionResult:
    """Full stationary-phase expansion around the single interior zero of f'.

    Minimum orientation (f'' > 0 at gamma) is the native path; a maximum is
    handled by expanding the negated phase and conjugating, which realizes
    the sign flip of the 1/8 phase offset.
    """
    gamma = find_stationary_point(p, scan_points)
    width = p.beta - p.alpha
    if min(gamma - p.alpha, p.beta - gamma) < 1e-6 * width:
        raise StationaryTooCloseToEndpoint(
            "gamma within 1e-6*(beta-alpha) of an endpoint; the error terms "
            "diverge like (gamma-alpha)^-(2n+3)")
    _, d2 = p.fprime2(gamma)
    tol = 1e-12 * p.T / (p.M * p.M)
    if abs(d2) <= tol:
        raise DegenerateStationaryPoint(
            f"f''(gamma) = {d2:.3e} within tolerance of zero")
    if d2 < 0:
        neg = stationary_phase_expand(p.negated(), scan_points, mp_dps,
                                      run_audit=False)
        audit = hypothesis_audit(p, scan_points) if run_audit else None
        warnings = neg.warnings + (
            "maximum orientation: expansion computed for -f and conjugated",)
        if audit is not None and not audit.validity_ok:
            warnings += ("audit: T^(1/(2n+3)) * Delta <= 1 "
                         "(asymptotic regime not certified)",)
        conj = mpmath.conj if mp_dps is not None else (lambda z: z.conjugate())
        return ExpansionResult(
            value=conj(neg.value), main_term=conj(neg.main_term),
            boundary_alpha=conj(neg.boundary_alpha),
            boundary_beta=conj(neg.boundary_beta),
            per_order_main=tuple(conj(t) for t in neg.per_order_main),
            error_scale=neg.error_scale, orientation="max", theorem="wsp",
            gamma=neg.gamma, coefficients=neg.coefficients, audit=audit,
            warnings=warnings)

    audit = hypothesis_audit(p, scan_points) if run_audit else None
    warnings = []
    if p.n == 1:
        warnings.append("n = 1: the expansion is certified for n >= 2 only")
    if audit is not None:
        if not audit.C2_lower_ok:
            warnings.append("audit: f'' <= 0 somewhere on the grid")
        if not audit.validity_ok:
            warnings.append("audit: T^(1/(2n+3)) * Delta <= 1 "
                            "(asymptotic regime not certified)")
        warnings.extend(audit.warnings)

    if mp_dps is not None:
        with mpmath.workdps(mp_dps):
            cs = mp_coefficients(p, mp_dps)
            result = _wsp_core(p, cs, True, scan_points)
    else:
        cs = compute_coefficients(p, gamma=gamma)
        result = _wsp_core(p, cs, False, scan_points)
    return ExpansionResult(value=result.value, main_term=result.main_term,
                           boundary_alpha=result.boundary_alpha,
                           boundary_beta=result.boundary_beta,
                           per_order_main=result.per_order_main,
                           error_scale=result.error_scale,
                           orientation="min", theorem="wsp", gamma=float(cs.gamma),
                           coefficients=cs, audit=audit,
                           warnings=tuple(warnings))


def _wsp_core(p: PhaseProblem, cs: CoefficientSet, mp_mode: bool,
              scan_points: int) -> ExpansionResult:
    n = p.n
    lam2 = cs.lam[2]
    if mp_mode:
        pi = mpmath.pi
        sqrt_fpp = mpmath.sqrt(2 * lam2)
        i_unit = mpmath.mpc(0, 1)
    else:
        pi = math.pi
        sqrt_fpp = math.sqrt(2.0 * lam2)
        i_unit = 1j
    prefactor = unit_phase(p, cs.gamma, extra=0.125, mp_mode=mp_mode) / sqrt_fpp

    per_order = [prefactor * cs.varpi[0]]
    for j in range(1, n + 1):
        coeff = cs.varpi[2 * j] * (-1) ** j * double_factorial_odd(j)
        denom = (4 * pi * i_unit * lam2) ** j
        per_order.append(prefactor * coeff / denom)
    main = _ordered_sum(per_order)

    h_beta = boundary_terms(p, p.beta, n + 1, mp_mode)
    h_alpha = boundary_terms(p, p.alpha, n + 1, mp_mode)
    b_beta = unit_phase(p, p.beta, mp_mode=mp_mode) * _ordered_sum(h_beta)
    b_alpha = unit_phase(p, p.alpha, mp_mode=mp_mode) * _ordered_sum(h_alpha)
    value = main + b_beta - b_alpha
    error_scale = float(sum(error_scale_terms(p, float(cs.gamma), scan_points)))
    return ExpansionResult(value=value, main_term=main, boundary_alpha=b_alpha,
                           boundary_beta=b_beta, per_order_main=tuple(per_order),
                           error_scale=error_scale, orientation="min",
                           theorem="wsp", gamma=float(cs.gamma), coefficients=cs)


def _abs_kink_warnings(p: PhaseProblem, expr: Expr, label: str,
                       xs: np.ndarray) -> list[str]:
    """Flag abs(...) whose argument changes sign inside the interval."""
    out = []

    def walk(node):
        if isinstance(node, Call):
            if node.fn == "abs":
                vals = np.asarray(eval_array(node.arg, xs, p.bindings))
                if np.any(vals > 0) and np.any(vals < 0):
                    out.append(
                        f"abs(...) in {label} has a kink inside [alpha, beta] "
                        f"(offset {node.offset}); smoothness hypotheses fail")
            walk(node.arg)
        elif hasattr(node, "left"):
            walk(node.left)
            walk(node.right)
        elif hasattr(node, "child"):
            walk(node.child)

    walk(expr)
    return out


def hypothesis_audit(p: PhaseProblem,
                     scan_points: int = SCAN_POINTS) -> AuditReport:
    """Fit the theorem's size constants on the scan grid and evaluate the
    smallness radius Delta, the validity condition, and the y-ranges r1, r2."""
    n, M, N, T, U = p.n, p.M, p.N, p.T, p.U
    xs = _grid(p, scan_points)
    deg_f, deg_g = 2 * n + 3, 2 * n + 1
    c_f = {r: 0.0 for r in range(2, deg_f + 1)}
    c_g = {s: 0.0 for s in range(0, deg_g + 1)}
    fpp_min = math.inf
    fpp_lower_fit = 0.0
    fprime_signs = []
    for x in xs:
        fj = p.f_jet(float(x), deg_f)
        gj = p.g_jet(float(x), deg_g)
        for r in range(2, deg_f + 1):
            val = abs(scalars.real_part(fj.coeffs[r])) * math.factorial(r)
            c_f[r] = max(c_f[r], val * M ** r / T)
        for s in range(0, deg_g + 1):
            val = abs(scalars.real_part(gj.coeffs[s])) * math.factorial(s)
            c_g[s] = max(c_g[s], val * N ** s / U)
        fpp = 2.0 * scalars.real_part(fj.coeffs[2])
        fpp_min = min(fpp_min, fpp)
        if fpp > 0:
            fpp_lower_fit = max(fpp_lower_fit, T / (M * M * fpp))
        d1 = scalars.real_part(fj.coeffs[1])
        fprime_signs.append((d1 > 0) - (d1 < 0))

    c2_lower_ok = fpp_min > 0
    if c2_lower_ok:
        c_f[2] = max(c_f[2], fpp_lower_fit)
    c_max = max(c_f.values())
    if c_f[2] > 0 and c_max > 0:
        delta = min(math.log(2.0) / c_f[2], 1.0 / (c_f[2] ** 2 * c_max))
    else:
        delta = math.inf if c_f[2] == 0 else math.log(2.0) / c_f[2]
    validity_ok = bool(T ** (1.0 / (2 * n + 3)) * delta > 1.0)

    # sign profile and the substitution ranges r1, r2
    changes = []
    last = 0
    for x, s in zip(xs, fprime_signs):
        if s == 0:
            continue
        if last != 0 and s != last:
            changes.append((last, s, float(x)))
        last = s
    r1 = r2 = r_val = math.nan
    gamma = None
    if len(changes) == 0:
        sign_profile = ("f' > 0 on [alpha, beta]" if last > 0
                        else "f' < 0 on [alpha, beta]" if last < 0
                        else "f' vanishes identically on the grid")
    elif len(changes) == 1:
        frm, to, near = changes[0]
        direction = "- to +" if to > 0 else "+ to -"
        try:
            gamma = find_stationary_point(p, scan_points)
            sign_profile = f"f' changes sign once ({direction}) at gamma = {gamma!r}"
            lam2 = p.fprime2(gamma)[1] / 2.0
            if lam2 != 0:
                fa = p.f_value(p.alpha) - p.f_value(gamma)
                fb = p.f_value(p.beta) - p.f_value(gamma)
                r1 = math.sqrt(max(fa / lam2, 0.0))
                r2 = math.sqrt(max(fb / lam2, 0.0))
                r_val = min(r1, r2, delta * M)
        except StationaryPointError as exc:
            sign_profile = (f"f' changes sign once ({direction}) near x = {near}"
                            f" but refinement failed: {exc}")
    else:
        sign_profile = f"f' changes sign {len(changes)} times on the grid"

    warnings = []
    warnings += _abs_kink_warnings(p, p.f, "f", xs)
    warnings += _abs_kink_warnings(p, p.g, "g", xs)
    if p.n == 1:
        warnings.append("n = 1: the expansion is certified for n >= 2 only")

    return AuditReport(C_f=c_f, C_g=c_g, C2_lower_ok=c2_lower_ok,
                       Delta=delta, validity_ok=validity_ok,
                       r1=r1, r2=r2, r=r_val,
                       M_ok=bool(M >= p.beta - p.alpha),
                       sign_profile=sign_profile, warnings=tuple(warnings))
