"""Extended reals and the smoothing functions used to parametrize join lines.

Infinities are carried by a dedicated ``ExtReal`` type so that ``inf - inf``
evaluates to ``0`` instead of IEEE ``nan``.  The scalar helpers accept plain
floats as well; ``float('inf')`` inputs are interpreted with the same
conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Union

INF = math.inf


class InvalidIntervalError(ValueError):
    """Raised when an interval has lo > hi."""


class DomainError(ValueError):
    """Raised when a scalar function is called outside its domain."""


@total_ordering
@dataclass(frozen=True)
class ExtReal:
    """A value in [-inf, +inf] with the join arithmetic conventions.

    * r + (+-inf) = +-inf for real r
    * inf - inf = 0 (and hence |inf - inf| = 0)
    * (+-inf) * l = +-inf for l in (0, inf]
    * exp(inf) = inf, exp(-inf) = 0
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise DomainError("ExtReal cannot hold nan")
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, x: "Number") -> "ExtReal":
        return x if isinstance(x, ExtReal) else cls(float(x))

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value

    def __add__(self, other: "Number") -> "ExtReal":
        return ExtReal(ext_add(self.value, float(ExtReal.of(other))))

    __radd__ = __add__

    def __neg__(self) -> "ExtReal":
        return ExtReal(-self.value)

    def __sub__(self, other: "Number") -> "ExtReal":
        return self + (-ExtReal.of(other))

    def __rsub__(self, other: "Number") -> "ExtReal":
        return ExtReal.of(other) - self

    def __mul__(self, other: "Number") -> "ExtReal":
        return ExtReal(ext_mul(self.value, float(ExtReal.of(other))))

    __rmul__ = __mul__

    def __abs__(self) -> "ExtReal":
        return ExtReal(abs(self.value))

    def __eq__(self, other) -> bool:
        if isinstance(other, (ExtReal, int, float)):
            return self.value == float(other)
        return NotImplemented

    def __lt__(self, other) -> bool:
        if isinstance(other, (ExtReal, int, float)):
            return self.value < float(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def exp(self) -> "ExtReal":
        return ExtReal(ext_exp(self.value))

    def __repr__(self) -> str:
        if self.value == INF:
            return "ExtReal(+inf)"
        if self.value == -INF:
            return "ExtReal(-inf)"
        return f"ExtReal({self.value!r})"


Number = Union[int, float, ExtReal]


def ext_add(x: float, y: float) -> float:
    """Sum with the convention inf - inf = 0."""
    if math.isinf(x) and math.isinf(y) and x != y:
        return 0.0
    return x + y


def ext_mul(x: float, l: float) -> float:
    """Product of an extended real with a positive scalar (possibly inf)."""
    if l < 0:
        raise DomainError("scalar must be non-negative")
    if l == 0:
        if math.isinf(x):
            raise DomainError("inf * 0 is undefined")
        return 0.0
    if math.isinf(x):
        return x
    return x * l


def ext_exp(x: float) -> float:
    if x == INF:
        return INF
    if x == -INF:
        return 0.0
    return math.exp(x)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if lo > hi:
            raise InvalidIntervalError(f"interval [{lo}, {hi}] has lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __contains__(self, t) -> bool:
        return self.lo <= float(t) <= self.hi

    @property
    def length(self) -> float:
        return ext_add(self.hi, -self.lo)


def _check(alpha: float, beta: float) -> None:
    if alpha > beta:
        raise InvalidIntervalError(f"alpha={alpha} > beta={beta}")


def theta(alpha: Number, beta: Number, t: Number) -> float:
    """Clamp ``t`` to ``[alpha, beta]``."""
    a, b, x = float(alpha), float(beta), float(t)
    _check(a, b)
    if x <= a:
        return a
    if x >= b:
        return b
    return x


def _expneg_abs(x: float, c: float) -> float:
    # e^{-|x - c|} with e^{-inf} = 0 and |inf - inf| = 0
    return ext_exp(-abs(ext_add(x, -c)))


def theta_prime(alpha: Number, beta: Number, t: Number) -> float:
    """Smoothed clamp: the clamp averaged against the density e^{-|r|}/2.

    Closed form ``theta + (e^{-|t-alpha|} - e^{-|t-beta|})/2`` for finite t,
    and ``alpha`` / ``beta`` at ``t = -inf`` / ``+inf``.
    """
    a, b, x = float(alpha), float(beta), float(t)
    _check(a, b)
    if x == -INF:
        return a
    if x == INF:
        return b
    return theta(a, b, x) + 0.5 * (_expneg_abs(x, a) - _expneg_abs(x, b))


def theta_prime_deriv(alpha: Number, beta: Number, t: Number) -> float:
    """Derivative of ``theta_prime`` in ``t``; lies in [0, 1]."""
    a, b, x = float(alpha), float(beta), float(t)
    _check(a, b)
    if math.isinf(x):
        # vanishes at both ends, except on the full line where theta' is the identity
        return 1.0 if (a == -INF and b == INF) else 0.0
    if x <= a:
        return 0.5 * (ext_exp(x - a) - ext_exp(ext_add(x, -b)))
    if x >= b:
        return 0.5 * (ext_exp(b - x) - ext_exp(ext_add(a, -x)))
    return 1.0 - 0.5 * (ext_exp(ext_add(a, -x)) + ext_exp(ext_add(x, -b)))


def theta_prime_inv(alpha: Number, beta: Number, s: Number, tol: float = 1e-14) -> float:
    """Inverse of ``t -> theta_prime(alpha, beta, t)`` on the closed interval.

    Endpoints map to -inf / +inf.  For a degenerate interval the preimage of
    the single value is taken to be 0.
    """
    a, b, v = float(alpha), float(beta), float(s)
    _check(a, b)
    if v < a or v > b:
        raise DomainError(f"{v} outside [{a}, {b}]")
    if a == b:
        return 0.0
    if v == a:
        return -INF
    if v == b:
        return INF
    if a == -INF and b == INF:
        return v
    # |theta' - theta| <= 1/2, and theta is the identity on [a, b]
    lo = v - 1.0 if math.isfinite(v) else v
    hi = v + 1.0
    while theta_prime(a, b, lo) > v:
        lo -= 2.0 * (hi - lo)
    while theta_prime(a, b, hi) < v:
        hi += 2.0 * (hi - lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if theta_prime(a, b, mid) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def omega(tau: float) -> float:
    """omega(tau) = tau + 2 e^{-tau/2} - 2, an increasing bijection of [0, inf]."""
    tau = float(tau)
    if tau < 0:
        raise DomainError("omega is defined for tau >= 0")
    if tau == INF:
        return INF
    # expm1 keeps precision near 0
    return tau + 2.0 * math.expm1(-tau / 2.0)


def omega_inv(v: float, tol: float = 1e-12) -> float:
    """Solve omega(tau) = v by bisection on the bracket [v, v + 2]."""
    v = float(v)
    if v < 0:
        raise DomainError("omega_inv is defined for v >= 0")
    if v == INF:
        return INF
    lo, hi = v, v + 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if omega(mid) < v:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def theta_prime_array(alpha: float, beta: float, t) -> "np.ndarray":
    """Vectorized ``theta_prime`` for finite ``t`` values."""
    import numpy as np

    a, b = float(alpha), float(beta)
    _check(a, b)
    t = np.asarray(t, dtype=float)
    base = np.clip(t, a, b)
    with np.errstate(invalid="ignore"):
        ea = np.exp(-np.abs(t - a)) if math.isfinite(a) else np.zeros_like(t)
        eb = np.exp(-np.abs(t - b)) if math.isfinite(b) else np.zeros_like(t)
    return base + 0.5 * (ea - eb)
