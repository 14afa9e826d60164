"""Truncated Taylor-polynomial (jet) arithmetic.

A jet stores the coefficients c_k = h^(k)(x0)/k! of a function h at a base
point x0, up to a fixed degree D.  All arithmetic truncates silently at D,
which is exactly the formal-power-series semantics the coefficient machinery
needs.  Coefficients are complex doubles in normal use; any field-like carrier
(e.g. mpmath numbers) works because the algorithms only use +, -, *, /.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import scalars
from .errors import JetDomainError, JetShapeError

_MAP_FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "pow", "atan")


@dataclass(frozen=True, eq=False)
class Jet:
    """Degree-D truncated Taylor expansion at `base_point`.

    coeffs[k] is h^(k)(base_point)/k!; len(coeffs) == degree + 1.
    """

    base_point: float
    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self) -> str:  # compact float view for debugging
        cs = ", ".join(format(complex(c), ".6g") for c in self.coeffs)
        return f"Jet(x0={self.base_point}, [{cs}])"

    # Operator sugar; scalars lift to constant jets.
    def __add__(self, other):
        return jet_add(self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return jet_sub(self, self._lift(other))

    def __rsub__(self, other):
        return jet_sub(self._lift(other), self)

    def __mul__(self, other):
        return jet_mul(self, self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return jet_div(self, self._lift(other))

    def __rtruediv__(self, other):
        return jet_div(self._lift(other), self)

    def __neg__(self):
        return Jet(self.base_point, tuple(-c for c in self.coeffs))

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return jet_constant(other, self.base_point, self.degree)


def jet_variable(x0: float, degree: int) -> Jet:
    """Jet of the identity function x -> x at x0: [x0, 1, 0, ..., 0]."""
    if degree < 1:
        raise JetShapeError("jet_variable requires degree >= 1")
    if scalars.is_mp(x0):
        zero, one = scalars.zero_like(x0), scalars.one_like(x0)
        coeffs = (x0, one) + (zero,) * (degree - 1)
        return Jet(float(x0), coeffs)
    coeffs = (complex(x0), 1 + 0j) + (0j,) * (degree - 1)
    return Jet(float(x0), coeffs)


def jet_constant(value, x0: float, degree: int) -> Jet:
    zero = scalars.zero_like(value) if scalars.is_mp(value) else 0j
    val = value if scalars.is_mp(value) else complex(value)
    return Jet(x0, (val,) + (zero,) * degree)


def _check_compatible(a: Jet, b: Jet) -> None:
    if a.degree != b.degree:
        raise JetShapeError(f"degree mismatch: {a.degree} != {b.degree}")
    if a.base_point != b.base_point:
        raise JetShapeError(
            f"base-point mismatch: {a.base_point} != {b.base_point}")


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    return Jet(a.base_point, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))


def jet_sub(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    return Jet(a.base_point, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Cauchy product truncated at the common degree."""
    _check_compatible(a, b)
    ac, bc = a.coeffs, b.coeffs
    n = len(ac)
    out = []
    for k in range(n):
        s = ac[0] * bc[k]
        for i in range(1, k + 1):
            s = s + ac[i] * bc[k - i]
        out.append(s)
    return Jet(a.base_point, tuple(out))


def jet_div(a: Jet, b: Jet) -> Jet:
    """Formal long division; requires b's constant term to be nonzero."""
    _check_compatible(a, b)
    if b.coeffs[0] == 0:
        raise JetDomainError("division by a jet with zero constant term")
    ac, bc = a.coeffs, b.coeffs
    q = [ac[0] / bc[0]]
    for k in range(1, len(ac)):
        s = ac[k]
        for j in range(1, k + 1):
            s = s - bc[j] * q[k - j]
        q.append(s / bc[0])
    return Jet(a.base_point, tuple(q))


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Dispatch form of +, -, *, / used by contract-level callers."""
    try:
        fn = {"add": jet_add, "sub": jet_sub, "mul": jet_mul, "div": jet_div}[op]
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None
    return fn(a, b)


def jet_differentiate(a: Jet) -> Jet:
    """Jet of h'; the degree drops by one."""
    if a.degree < 1:
        raise JetShapeError("cannot differentiate a degree-0 jet")
    out = tuple((k + 1) * a.coeffs[k + 1] for k in range(a.degree))
    return Jet(a.base_point, out)


def jet_integrate(a: Jet, constant=0.0) -> Jet:
    """Termwise antiderivative with the given constant term; degree grows."""
    val = constant if scalars.is_mp(constant) else complex(constant)
    out = (val,) + tuple(a.coeffs[k] / (k + 1) for k in range(a.degree + 1))
    return Jet(a.base_point, out)


def jet_truncate(a: Jet, degree: int) -> Jet:
    if degree >= a.degree:
        return a
    return Jet(a.base_point, a.coeffs[: degree + 1])


def jet_extract_derivative(a: Jet, k: int):
    """k-th derivative value at the base point: k! * c_k."""
    if not 0 <= k <= a.degree:
        raise JetShapeError(f"derivative order {k} outside 0..{a.degree}")
    return math.factorial(k) * a.coeffs[k]


def jet_compose(outer: Jet, inner: Jet) -> Jet:
    """Formal composition outer(inner); inner must lack a constant term.

    Both jets are read as formal series in their offset variable; the result
    keeps inner's base point.
    """
    if inner.coeffs[0] != 0:
        raise JetDomainError("composition requires inner constant term = 0")
    if outer.degree != inner.degree:
        raise JetShapeError(
            f"degree mismatch: {outer.degree} != {inner.degree}")
    # Horner evaluation in the series ring.
    x0 = inner.base_point
    deg = inner.degree
    result = jet_constant(outer.coeffs[deg], x0, deg)
    inner_at = Jet(x0, inner.coeffs)
    for k in range(deg - 1, -1, -1):
        result = jet_mul(result, inner_at)
        result = Jet(x0, (result.coeffs[0] + outer.coeffs[k],) + result.coeffs[1:])
    return result


def jet_identity(x0: float, degree: int, like=None) -> Jet:
    """Formal identity series [0, 1, 0, ...] used by compose/revert."""
    one = scalars.one_like(like) if like is not None else 1 + 0j
    zero = scalars.zero_like(like) if like is not None else 0j
    return Jet(x0, (zero, one) + (zero,) * (degree - 1))


def jet_revert(a: Jet) -> Jet:
    """Compositional inverse of a series with a=0 constant term, a1 != 0.

    Newton iteration on the series: each step doubles the number of correct
    coefficients, and correctness is certified by the compose round-trip.
    """
    if a.coeffs[0] != 0:
        raise JetDomainError("reversion requires zero constant term")
    if a.coeffs[1] == 0:
        raise JetDomainError("reversion requires a nonzero linear term")
    deg = a.degree
    like = a.coeffs[1]
    ident = jet_identity(a.base_point, deg, like=like)
    a_prime = jet_truncate(jet_differentiate(a), deg)
    a_prime = Jet(a.base_point, a_prime.coeffs + (scalars.zero_like(like),) * (deg - a_prime.degree))
    # First-order seed y/a1; Newton: b <- b - (a(b) - id)/a'(b).
    b = Jet(a.base_point, tuple(c / a.coeffs[1] for c in ident.coeffs))
    correct = 1
    while correct < deg:
        residual = jet_sub(jet_compose(a, b), ident)
        slope = jet_compose(a_prime, b)
        b = jet_sub(b, jet_div(residual, slope))
        correct *= 2
    return b


def _taylor_of_function(fn: str, c0, degree: int, exponent=None) -> Sequence:
    """Taylor coefficients of the elementary function `fn` about c0."""
    if fn == "exp":
        e0 = scalars.exp(c0)
        return [e0 / math.factorial(k) for k in range(degree + 1)]
    if fn == "log":
        if scalars.real_part(c0) <= 0.0 or abs(scalars.imag_part(c0)) > 1e-12 * (1 + abs(scalars.real_part(c0))):
            raise JetDomainError("log requires a positive constant term")
        out = [scalars.log(c0)]
        inv = 1 / c0
        p = inv
        for k in range(1, degree + 1):
            out.append((-1) ** (k + 1) * p / k)
            p = p * inv
        return out
    if fn in ("sin", "cos"):
        s, c = scalars.sin(c0), scalars.cos(c0)
        cycle = (s, c, -s, -c) if fn == "sin" else (c, -s, -c, s)
        return [cycle[k % 4] / math.factorial(k) for k in range(degree + 1)]
    if fn in ("sqrt", "pow"):
        p = 0.5 if fn == "sqrt" else exponent
        if scalars.real_part(c0) <= 0.0 or abs(scalars.imag_part(c0)) > 1e-12 * (1 + abs(scalars.real_part(c0))):
            raise JetDomainError(f"{fn} requires a positive constant term")
        if fn == "sqrt":
            base = scalars.sqrt(c0)
        else:
            base = scalars.exp(p * scalars.log(c0))
        out = [base]
        binom = scalars.one_like(c0) if scalars.is_mp(c0) else 1.0
        inv = 1 / c0
        pw = base
        for k in range(1, degree + 1):
            binom = binom * (p - (k - 1)) / k
            pw = pw * inv
            out.append(binom * pw)
        return out
    raise ValueError(f"unknown jet function {fn!r}")


def jet_powi(a: Jet, n: int) -> Jet:
    """Integer power by binary exponentiation; valid for any constant term."""
    if n < 0:
        one = jet_constant(scalars.one_like(a.coeffs[0]), a.base_point, a.degree)
        return jet_div(one, jet_powi(a, -n))
    result = None
    base = a
    m = n
    while m:
        if m & 1:
            result = base if result is None else jet_mul(result, base)
        m >>= 1
        if m:
            base = jet_mul(base, base)
    if result is None:
        return jet_constant(scalars.one_like(a.coeffs[0]), a.base_point, a.degree)
    return result


def jet_map(a: Jet, fn: str, exponent=None) -> Jet:
    """Jet of fn(a) for fn in {exp, log, sin, cos, sqrt, pow, atan}.

    pow with an integer exponent reduces to repeated multiplication (exact
    even at zero constant term); otherwise the function's Taylor series at
    the constant term is composed with the tail of `a`.
    """
    if fn not in _MAP_FUNCTIONS:
        raise ValueError(f"unknown jet function {fn!r}")
    if fn == "pow":
        if exponent is None:
            raise ValueError("pow requires an exponent")
        if float(exponent) == int(exponent):
            return jet_powi(a, int(exponent))
    if fn == "atan":
        # atan(a) = atan(c0) + integral of a' / (1 + a^2); exact to degree.
        c0 = a.coeffs[0]
        da = jet_differentiate(a)
        den = jet_truncate(jet_mul(a, a), a.degree - 1)
        one = jet_constant(scalars.one_like(c0), a.base_point, a.degree - 1)
        quot = jet_div(da, jet_add(one, den))
        return jet_integrate(quot, constant=scalars.atan(c0))
    c0 = a.coeffs[0]
    outer = _taylor_of_function(fn, c0, a.degree, exponent=exponent)
    tail = Jet(a.base_point, (scalars.zero_like(c0),) + a.coeffs[1:])
    result = jet_constant(outer[a.degree], a.base_point, a.degree)
    for k in range(a.degree - 1, -1, -1):
        result = jet_mul(result, tail)
        result = Jet(a.base_point, (result.coeffs[0] + outer[k],) + result.coeffs[1:])
    return result
