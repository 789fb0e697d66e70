"""The symmetric join over a finite metric space.

Every ordered pair (a, b) of points spans a line [[a, b]] whose points are
indexed by a coordinate in the interval [alpha, beta] with
alpha = -<b|x0>_a and beta = <a|x0>_b.  Points may be given in the raw
parametrization (clamping) or the smoothed one (``theta_prime``).

The same code serves the extended join over a graph with boundary: the
``JoinSpace`` subclass in ``boundary`` only changes how Gromov products and
double differences are evaluated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .extsmooth import (
    INF,
    DomainError,
    ext_add,
    theta,
    theta_prime,
    theta_prime_array,
    theta_prime_inv,
)

RAW = "raw"
SMOOTH = "smooth"

GL_ORDER = 10
_GL_X, _GL_W = leggauss(GL_ORDER)
# (n!)^4 / ((2n+1) ((2n)!)^3), the Gauss-Legendre remainder factor on [-1, 1] scaled to width 1
_GL_FACTOR = math.factorial(GL_ORDER) ** 4 / ((2 * GL_ORDER + 1) * math.factorial(2 * GL_ORDER) ** 3)


class JoinError(ValueError):
    """Invalid join input."""


class IsometryError(ValueError):
    """A map that does not preserve the metric."""


@dataclass(frozen=True)
class Line:
    """The line [[a, b]] with endpoint coordinates alpha <= 0 <= beta."""

    a: Hashable
    b: Hashable
    alpha: float
    beta: float

    @property
    def degenerate(self) -> bool:
        return self.alpha == self.beta

    @property
    def length(self) -> float:
        return ext_add(self.beta, -self.alpha)


@dataclass(frozen=True, eq=False)
class JoinPoint:
    """A point of the join: a line plus a coordinate s in [alpha, beta].

    ``pre`` is the smoothed preimage, s = theta_prime(alpha, beta, pre); it is
    what the shift action moves.  A point at an endpoint keeps its line (so
    coordinates can still be transported) but compares equal to the ground
    point it is identified with.
    """

    line: Line
    coord: float
    pre: float
    flavor: str = RAW
    basepoint: Hashable = None

    @property
    def a(self):
        return self.line.a

    @property
    def b(self):
        return self.line.b

    @property
    def ground(self):
        """The ground point this join point is identified with, or None."""
        if self.line.degenerate or self.coord == self.line.alpha:
            return self.line.a
        if self.coord == self.line.beta:
            return self.line.b
        return None

    @property
    def is_ground(self) -> bool:
        return self.ground is not None

    @property
    def param(self) -> float:
        """The parameter in this point's own flavor."""
        return self.coord if self.flavor == RAW else self.pre

    def key(self) -> tuple:
        g = self.ground
        if g is not None:
            return ("ground", g)
        return ("line", self.line.a, self.line.b, self.coord)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JoinPoint):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def to_json(self) -> dict:
        return {
            "a": _jsonable(self.line.a),
            "b": _jsonable(self.line.b),
            "coord": _num(self.param),
            "flavor": self.flavor,
            "basepoint": _jsonable(self.basepoint),
        }

    def __repr__(self) -> str:
        return f"[[{self.line.a},{self.line.b};{self.coord:.6g}]]"


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    return v if isinstance(v, (int, float, str)) or v is None else str(v)


def _num(x: float):
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return float(x)


class Isometry:
    """An isometry of the ground space given by a vertex map and its inverse."""

    def __init__(self, fwd: Callable, inv: Callable, name: str = "g"):
        self.fwd = fwd
        self.inv = inv
        self.name = name

    def __call__(self, v):
        return self.fwd(v)

    def inverse(self) -> "Isometry":
        return Isometry(self.inv, self.fwd, name=f"{self.name}^-1")

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other."""
        return Isometry(lambda v: self.fwd(other.fwd(v)), lambda v: other.inv(self.inv(v)), name=f"{self.name}{other.name}")

    def power(self, n: int) -> "Isometry":
        g = self if n >= 0 else self.inverse()
        out = Isometry(lambda v: v, lambda v: v, name="id")
        for _ in range(abs(n)):
            out = g.compose(out)
        return out

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(lambda v: v, lambda v: v, name="id")

    @classmethod
    def from_permutation(cls, space, mapping: dict, name: str = "g", tol: float = 1e-12) -> "Isometry":
        """Validate a permutation of the points against the metric."""
        pts = list(space.points)
        if set(mapping) != set(pts) or set(mapping.values()) != set(pts):
            raise IsometryError("map is not a permutation of the points")
        for u in pts:
            for v in pts:
                if abs(space.dist(mapping[u], mapping[v]) - space.dist(u, v)) > tol:
                    raise IsometryError(f"distance between {u!r} and {v!r} is not preserved")
        inv = {v: u for u, v in mapping.items()}
        return cls(mapping.__getitem__, inv.__getitem__, name=name)


class JoinSpace:
    """The join *X over a metric space (or hat metric) with basepoint x0."""

    def __init__(self, metric, x0=None, graph=None):
        self.metric = metric
        self.x0 = metric.x0 if x0 is None else x0
        if not self.is_ground_point(self.x0):
            raise JoinError(f"basepoint {self.x0!r} is not a point of the space")
        if graph is None:
            graph = metric if hasattr(metric, "geodesic") else getattr(metric, "graph", None)
        self.graph = graph
        self._arrays: dict = {}

    # -- scalar geometry (overridden for boundary points) -------------------
    def is_ground_point(self, p) -> bool:
        return p in self.metric

    def dist(self, u, v) -> float:
        return self.metric.dist(u, v)

    def gp(self, a, b, c) -> float:
        """Gromov product <a|b>_c."""
        d = self.dist
        return 0.5 * ext_add(ext_add(d(a, c), d(b, c)), -d(a, b))

    def dd(self, a, a2, b, b2) -> float:
        """Double difference <a,a'|b,b'>."""
        d = self.dist
        return 0.5 * ext_add(ext_add(d(a, b), d(a2, b2)), -ext_add(d(a2, b), d(a, b2)))

    def with_basepoint(self, x1) -> "JoinSpace":
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.x0 = x1
        other._arrays = {}
        return other

    @property
    def ground(self) -> list:
        return list(self.metric.points)

    def line_arrays(self, a, b):
        """Arrays over the ground set: <a|b>_u and the projection coordinate of u."""
        key = (a, b)
        if key not in self._arrays:
            ra = np.asarray(self.metric.dist_row(a), dtype=float)
            rb = np.asarray(self.metric.dist_row(b), dtype=float)
            dab = self.dist(a, b)
            K = 0.5 * (ra + rb - dab)
            P = 0.5 * (ra - rb - self.dist(a, self.x0) + self.dist(b, self.x0))
            if len(self._arrays) > 4096:
                self._arrays.clear()
            self._arrays[key] = (K, P)
        return self._arrays[key]

    # -- lines and points ---------------------------------------------------
    def make_line(self, a, b) -> Line:
        if a == b:
            return Line(a, b, 0.0, 0.0)
        alpha = -self.gp(b, self.x0, a) + 0.0
        beta = self.gp(a, self.x0, b) + 0.0
        return Line(a, b, alpha, beta)

    def ground_point(self, a) -> JoinPoint:
        return JoinPoint(Line(a, a, 0.0, 0.0), 0.0, 0.0, RAW, self.x0)

    def point_at(self, a, b, t: float, flavor: str = SMOOTH) -> JoinPoint:
        line = self.make_line(a, b)
        return self._from_param(line, float(t), flavor)

    def _from_param(self, line: Line, t: float, flavor: str) -> JoinPoint:
        if flavor == SMOOTH:
            s = theta_prime(line.alpha, line.beta, t)
            pre = t
        elif flavor == RAW:
            s = theta(line.alpha, line.beta, t)
            pre = theta_prime_inv(line.alpha, line.beta, s)
        else:
            raise JoinError(f"unknown flavor {flavor!r}")
        return self._make(line, s, pre, flavor)

    def from_coord(self, line: Line, s: float, pre: float | None = None, flavor: str = RAW) -> JoinPoint:
        if not (line.alpha <= s <= line.beta):
            raise DomainError(f"coordinate {s} is not appropriate for [{line.alpha}, {line.beta}]")
        if pre is None:
            pre = theta_prime_inv(line.alpha, line.beta, s)
        return self._make(line, s, pre, flavor)

    def _make(self, line: Line, s: float, pre: float, flavor: str, end: str | None = None) -> JoinPoint:
        """Build a point, snapping to an endpoint when ``end`` says so or round-off overshoots."""
        if line.degenerate:
            return JoinPoint(line, line.alpha, 0.0, flavor, self.x0)
        if end == "a" or s <= line.alpha:
            return JoinPoint(line, line.alpha, -INF, flavor, self.x0)
        if end == "b" or s >= line.beta:
            return JoinPoint(line, line.beta, INF, flavor, self.x0)
        return JoinPoint(line, s, pre, flavor, self.x0)

    @staticmethod
    def _end(p: JoinPoint, swap: bool = False):
        if p.line.degenerate:
            return None
        if p.coord == p.line.alpha:
            return "b" if swap else "a"
        if p.coord == p.line.beta:
            return "a" if swap else "b"
        return None

    def from_json(self, obj: dict | str) -> JoinPoint:
        if isinstance(obj, str):
            obj = json.loads(obj)
        a, b = self._lookup(obj["a"]), self._lookup(obj["b"])
        t = _parse_num(obj["coord"])
        flavor = obj.get("flavor", SMOOTH)
        bp = obj.get("basepoint")
        if bp is not None and self._lookup(bp) != self.x0:
            # the parameter was given relative to another basepoint
            other = self.with_basepoint(self._lookup(bp))
            return other.rebase(other.point_at(a, b, t, flavor), self.x0)
        return self.point_at(a, b, t, flavor)

    def _lookup(self, v):
        if self.is_ground_point(v):
            return v
        try:
            iv = int(v)
        except (TypeError, ValueError):
            raise JoinError(f"unknown point {v!r}") from None
        if self.is_ground_point(iv):
            return iv
        raise JoinError(f"unknown point {v!r}")

    # -- change of basepoint ------------------------------------------------
    def basepoint_shift(self, a, b, x1) -> float:
        """Amount added to coordinates on [[a, b]] when moving the basepoint to x1."""
        return -self.dd(a, b, x1, self.x0)

    def change_basepoint(self, p: JoinPoint, x1) -> float:
        """Coordinate of ``p`` in the parametrization based at ``x1``."""
        if p.line.degenerate:
            return p.coord
        return ext_add(p.coord, self.basepoint_shift(p.a, p.b, x1))

    def rebase(self, p: JoinPoint, x1) -> JoinPoint:
        """The same join point expressed in the join space based at ``x1``."""
        other = self.with_basepoint(x1)
        if p.line.degenerate:
            return other.ground_point(p.a)
        shift = self.basepoint_shift(p.a, p.b, x1)
        line = other.make_line(p.a, p.b)
        return other._make(line, ext_add(p.coord, shift), ext_add(p.pre, shift), p.flavor, self._end(p))

    # -- actions ------------------------------------------------------------
    def r_action(self, r: float, p: JoinPoint) -> JoinPoint:
        if p.is_ground or r == 0:
            return p
        t = ext_add(p.pre, r)
        s = theta_prime(p.line.alpha, p.line.beta, t)
        return self._make(p.line, s, t, SMOOTH)

    def star(self, p: JoinPoint) -> JoinPoint:
        if p.line.degenerate:
            return p
        line = Line(p.b, p.a, -p.line.beta, -p.line.alpha)
        return self._make(line, -p.coord, -p.pre, p.flavor, self._end(p, swap=True))

    def isom_action(self, g: Isometry, p: JoinPoint) -> JoinPoint:
        if p.line.degenerate:
            return self.ground_point(self.apply(g, p.a))
        shift = self.dd(p.a, p.b, self.x0, self.apply(g.inverse(), self.x0))
        line = self.make_line(self.apply(g, p.a), self.apply(g, p.b))
        return self._make(line, ext_add(p.coord, shift), ext_add(p.pre, shift), p.flavor, self._end(p))

    def apply(self, g: Isometry, v):
        return g(v)

    # -- projections --------------------------------------------------------
    def project_coord(self, a, a2, b) -> float:
        return self.dd(a, a2, b, self.x0)

    def project(self, a, a2, b) -> JoinPoint:
        line = self.make_line(a, a2)
        return self.from_coord(line, self.project_coord(a, a2, b), flavor=RAW)

    # -- distance cocycle ---------------------------------------------------
    def ell(self, u, p: JoinPoint) -> float:
        g = p.ground
        if g is not None:
            return self.dist(u, g)
        return ext_add(self.gp(p.a, p.b, u), abs(ext_add(p.coord, -self.project_coord(p.a, p.b, u))))

    def beta_cross(self, u, x: JoinPoint, y: JoinPoint) -> float:
        return ext_add(self.ell(u, x), -self.ell(u, y))

    def _ell_array(self, p: JoinPoint) -> np.ndarray:
        g = p.ground
        if g is not None:
            return np.asarray(self.metric.dist_row(g), dtype=float)
        K, P = self.line_arrays(p.a, p.b)
        return K + np.abs(p.coord - P)

    def beta_array(self, x: JoinPoint, y: JoinPoint) -> np.ndarray:
        return self._ell_array(x) - self._ell_array(y)

    def d_cross(self, x: JoinPoint, y: JoinPoint) -> float:
        """sup over ground points u of |beta_u(x, y)| (a finite maximum here)."""
        if x == y:
            return 0.0
        if not x.line.degenerate and not y.line.degenerate:
            if (x.a, x.b) == (y.a, y.b):
                return abs(ext_add(x.coord, -y.coord))
            if (x.a, x.b) == (y.b, y.a):
                return abs(ext_add(x.coord, y.coord))
        if _at_infinity(x) or _at_infinity(y):
            return INF
        return float(np.max(np.abs(self.beta_array(x, y))))

    # -- d* -----------------------------------------------------------------
    def d_star(self, x: JoinPoint, y: JoinPoint, eps: float = 1e-7) -> float:
        return self.d_star_certified(x, y, eps)[0]

    def d_star_certified(self, x: JoinPoint, y: JoinPoint, eps: float = 1e-7):
        """d*(x, y) together with a certified bound on the absolute error."""
        if eps <= 0:
            raise DomainError("eps must be positive")
        if x == y:
            return 0.0, 0.0
        if _at_infinity(x) or _at_infinity(y):
            return INF, 0.0
        if x.is_ground and y.is_ground:
            return self.d_cross(x, y), 0.0
        if _full_line(x.line) and not x.is_ground and not y.is_ground and (x.a, x.b) == (y.a, y.b):
            # theta' is the identity on lines between boundary points
            return abs(x.coord - y.coord), 0.0
        return _OrbitIntegral(self, x, y).integrate(eps)

    def phi(self, p: JoinPoint, eps: float = 1e-7) -> JoinPoint:
        """Average of the shift orbit, as a raw point on the same line."""
        if p.is_ground:
            return p
        a, b, t = p.line.alpha, p.line.beta, p.pre
        if _full_line(p.line):
            return self.from_coord(p.line, t, t, RAW)
        val = _integrate_smooth(lambda r: theta_prime_array(a, b, r + t), [a - t, b - t], eps)
        return self.from_coord(p.line, min(max(val, a), b), flavor=RAW)

    def psi(self, p: JoinPoint):
        """Vertex on the chosen geodesic [a, b] whose projection coordinate is nearest."""
        g = p.ground
        if g is not None:
            return g
        if self.graph is None:
            raise JoinError("psi needs a graph with chosen geodesics")
        best = None
        for v in self.graph.geodesic(p.a, p.b):
            k = (abs(self.project_coord(p.a, p.b, v) - p.coord), _vkey(v))
            if best is None or k < best[0]:
                best = (k, v)
        return best[1]


def _parse_num(v) -> float:
    if isinstance(v, str):
        v = v.strip().lower()
        if v in ("inf", "+inf", "infinity"):
            return INF
        if v in ("-inf", "-infinity"):
            return -INF
    return float(v)


def _vkey(v):
    return (0, v, "") if isinstance(v, int) else (1, len(str(v)), str(v))


def _full_line(line: Line) -> bool:
    return line.alpha == -INF and line.beta == INF


def _at_infinity(p: JoinPoint) -> bool:
    g = p.ground
    return g is not None and getattr(g, "is_boundary", False)


# -- quadrature ---------------------------------------------------------------

def _gl(f, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return half * float(np.dot(_GL_W, f(mid + half * _GL_X)))


def _gl_bound(width: float, sup: float) -> float:
    # remainder of the rule times a bound on the 2n-th derivative of candidate * weight
    n2 = 2 * GL_ORDER
    return _GL_FACTOR * width ** (n2 + 1) * (2.0 ** n2) * max(sup, 2.0)


def _weight(r):
    return 0.5 * np.exp(-np.abs(r))


def _radius(scale: float, eps: float) -> float:
    return max(20.0, scale) + math.log(1.0 / eps)


def _integrate_smooth(f, breaks: Iterable[float], eps: float) -> float:
    """Integral of f(r) e^{-|r|}/2 for f smooth between ``breaks`` and 0."""
    R = _radius(20.0, eps) + 2.0
    pts = sorted({0.0, -R, R} | {float(b) for b in breaks if math.isfinite(b) and -R < b < R})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        k = max(1, math.ceil(hi - lo))
        edges = np.linspace(lo, hi, k + 1)
        for l, h in zip(edges[:-1], edges[1:]):
            total += _gl(lambda r: f(r) * _weight(r), l, h)
    # tails: f grows at most linearly
    tail_lo = f(np.array([-R]))[0] * 0.5 * math.exp(-R)
    tail_hi = f(np.array([R]))[0] * 0.5 * math.exp(-R)
    return total + tail_lo + tail_hi


class _OrbitIntegral:
    """Certified evaluation of d*(x, y) = int d_cross(r+x, r+y) e^{-|r|}/2 dr.

    On every interval where the sign of s_x(r) - P_u and s_y(r) - Q_u is fixed
    for all ground points u, beta_u is c_u + sigma_u s_x(r) - tau_u s_y(r), so
    the integrand is the upper envelope of at most nine smooth candidates
    c + p s_x + q s_y.  The envelope is split at candidate switches with a
    certified test (|s''| <= 1/2), and each smooth piece is integrated with
    Gauss-Legendre using an explicit derivative bound.
    """

    def __init__(self, space: JoinSpace, x: JoinPoint, y: JoinPoint):
        self.space = space
        if x.is_ground:
            x = space.ground_point(x.ground)
        if y.is_ground:
            y = space.ground_point(y.ground)
        self.lx, self.ly = x.line, y.line
        self.tx = 0.0 if x.is_ground else x.pre
        self.ty = 0.0 if y.is_ground else y.pre
        if x.is_ground:
            self.Kx = np.asarray(space.metric.dist_row(x.a), dtype=float)
            self.Px = np.zeros_like(self.Kx)
        else:
            self.Kx, self.Px = space.line_arrays(x.a, x.b)
        if y.is_ground:
            self.Ky = np.asarray(space.metric.dist_row(y.a), dtype=float)
            self.Py = np.zeros_like(self.Ky)
        else:
            self.Ky, self.Py = space.line_arrays(y.a, y.b)
        self.d0 = space.d_cross(x, y)
        self.err = 0.0
        self.budget = 0.0
        # identical smooth coordinates collapse the two slope directions into one
        self.same = (not self.lx.degenerate and (self.lx.alpha, self.lx.beta, self.tx) == (self.ly.alpha, self.ly.beta, self.ty))

    def sx(self, r):
        return self._s(self.lx, self.tx, r)

    def sy(self, r):
        return self._s(self.ly, self.ty, r)

    @staticmethod
    def _s(line: Line, t0: float, r):
        if line.degenerate:
            return line.alpha if np.isscalar(r) else np.full(np.shape(r), line.alpha)
        if np.isscalar(r):
            t = r + t0
            a, b = line.alpha, line.beta
            v = a if t <= a else (b if t >= b else t)
            ea = math.exp(-abs(t - a)) if a != -INF else 0.0
            eb = math.exp(-abs(t - b)) if b != INF else 0.0
            return v + 0.5 * (ea - eb)
        return theta_prime_array(line.alpha, line.beta, np.asarray(r, dtype=float) + t0)

    def _kinks(self, line: Line, t: float, P: np.ndarray, R: float) -> list:
        if line.degenerate:
            return []
        out = [line.alpha - t, line.beta - t]
        for p in np.unique(P):
            if line.alpha < p < line.beta:
                out.append(theta_prime_inv(line.alpha, line.beta, float(p)) - t)
        return [r for r in out if math.isfinite(r) and -R < r < R]

    def _candidates(self, rm: float):
        sx, sy = float(self.sx(rm)), float(self.sy(rm))
        sig = np.sign(sx - self.Px) if not self.lx.degenerate else np.zeros_like(self.Px)
        tau = np.sign(sy - self.Py) if not self.ly.degenerate else np.zeros_like(self.Py)
        # beta_u = C_u + sig_u s_x - tau_u s_y on this interval
        C = (self.Kx - self.Ky) - sig * self.Px + tau * self.Py
        best: dict = {}
        for s_ in (-1.0, 0.0, 1.0):
            for t_ in (-1.0, 0.0, 1.0):
                m = (sig == s_) & (tau == t_)
                if not m.any():
                    continue
                cm = C[m]
                for c, p, q in ((cm.max(), s_, -t_), (-cm.min(), -s_, t_)):
                    if self.same:
                        p, q = p + q, 0.0
                    k = (p, q)
                    if k not in best or c > best[k]:
                        best[k] = float(c)
        return np.array([(c, p, q) for (p, q), c in best.items()])

    def _eval(self, cands: np.ndarray, r: float) -> np.ndarray:
        return cands[:, 0] + cands[:, 1] * float(self.sx(r)) + cands[:, 2] * float(self.sy(r))

    def _cand_fn(self, c):
        return lambda r: c[0] + c[1] * self.sx(r) + c[2] * self.sy(r)

    def integrate(self, eps: float):
        R = _radius(self.d0, eps)
        tail = (self.d0 + 2.0 * R + 2.0) * math.exp(-R)  # both tails, f <= d0 + 2|r|
        while tail > eps / 4:
            R += 1.0
            tail = (self.d0 + 2.0 * R + 2.0) * math.exp(-R)
        # inner breakpoints where the smoothing changes formula or a kink appears
        breaks = {0.0, -R, R}
        breaks.update(self._kinks(self.lx, self.tx, self.Px, R))
        breaks.update(self._kinks(self.ly, self.ty, self.Py, R))
        pts = sorted(breaks)
        total = 0.0
        self.err = tail
        self.budget = eps / (8.0 * R)
        for lo, hi in zip(pts[:-1], pts[1:]):
            if hi - lo <= 0:
                continue
            cands = self._candidates(0.5 * (lo + hi))
            k = max(1, math.ceil(hi - lo))
            edges = np.linspace(lo, hi, k + 1)
            for l, h in zip(edges[:-1], edges[1:]):
                total += self._cell(cands, l, h, 0)
        # the tails are approximated by their endpoint values and bounded by ``tail``
        total += self._tail_estimate(R)
        if self.err > eps:
            raise ArithmeticError(f"d* quadrature error bound {self.err:.3g} exceeds eps={eps:.3g}")
        return float(total), float(self.err)

    def _tail_estimate(self, R: float) -> float:
        out = 0.0
        for r in (-R, R):
            cands = self._candidates(r)
            out += float(np.max(self._eval(cands, r))) * 0.5 * math.exp(-R)
        return out

    def _cell(self, cands: np.ndarray, l: float, h: float, depth: int) -> float:
        sl, sh = float(self.sx(l)), float(self.sx(h))
        yl, yh = float(self.sy(l)), float(self.sy(h))
        vl = cands[:, 0] + cands[:, 1] * sl + cands[:, 2] * yl
        vh = cands[:, 0] + cands[:, 1] * sh + cands[:, 2] * yh
        w = h - l
        il, ih = int(np.argmax(vl)), int(np.argmax(vh))
        if il != ih and depth < 60:
            ci, cj = cands[il], cands[ih]
            D = lambda r: float(self._cand_fn(cj)(r) - self._cand_fn(ci)(r))
            m = 0.5 * (l + h)
            if D(l) < 0 < D(h):
                m = brentq(D, l, h, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            if not l < m < h:
                m = 0.5 * (l + h)
            return self._cell(cands, l, m, depth + 1) + self._cell(cands, m, h, depth + 1)
        i = il
        ci = cands[i]
        # s_x, s_y are non-decreasing, so each difference f_j - f_i is bounded on the cell
        dp, dq = cands[:, 1] - ci[1], cands[:, 2] - ci[2]
        over = (cands[:, 0] - ci[0]) + np.where(dp > 0, dp * sh, dp * sl) + np.where(dq > 0, dq * yh, dq * yl)
        over[i] = -INF
        worst = float(over.max()) if len(over) > 1 else 0.0
        if worst > 0:
            wmax = 0.5 * math.exp(-min(abs(l), abs(h))) if l * h > 0 else 0.5
            if worst * wmax > self.budget and depth < 60:
                m = 0.5 * (l + h)
                return self._cell(cands, l, m, depth + 1) + self._cell(cands, m, h, depth + 1)
            # f_i may undershoot the envelope by at most ``worst`` on this cell
            self.err += worst * wmax * w
        f = self._cand_fn(ci)
        val = _gl(lambda r: f(r) * _weight(r), l, h)
        sup = float(max(abs(vl[i]), abs(vh[i])))
        self.err += _gl_bound(w, sup)
        return val
