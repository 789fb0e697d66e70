"""Finite (generalized) metric spaces, double differences and Gromov products."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .extsmooth import INF, ext_add

Point = Hashable

DENSE_LIMIT = 4096


class MetricError(ValueError):
    """Raised when a candidate distance function violates the metric axioms."""


class FiniteMetricSpace:
    """A finite point set with a symmetric distance, possibly taking value inf.

    Distances are stored as a dense matrix when the space is small; larger
    spaces may be given by an oracle ``dist_fn(u, v)``.
    """

    def __init__(
        self,
        points: Sequence[Point],
        dist: np.ndarray | Callable[[Point, Point], float],
        x0: Point | None = None,
        check: bool = True,
    ):
        self._points = list(points)
        if not self._points:
            raise MetricError("empty point set")
        self.index = {p: i for i, p in enumerate(self._points)}
        if len(self.index) != len(self._points):
            raise MetricError("duplicate point ids")
        self.x0 = self._points[0] if x0 is None else x0
        if self.x0 not in self.index:
            raise MetricError(f"basepoint {self.x0!r} is not a point")
        if callable(dist):
            self._fn = dist
            self._D = None
            if len(self._points) <= DENSE_LIMIT:
                n = len(self._points)
                D = np.zeros((n, n))
                for i, j in itertools.combinations(range(n), 2):
                    D[i, j] = D[j, i] = dist(self._points[i], self._points[j])
                self._D = D
        else:
            self._D = np.asarray(dist, dtype=float)
            self._fn = None
        if check and self._D is not None:
            check_metric(self._D)

    @property
    def points(self) -> list:
        return self._points

    def __len__(self) -> int:
        return len(self._points)

    def __contains__(self, p) -> bool:
        try:
            return p in self.index
        except TypeError:
            return False

    @property
    def matrix(self) -> np.ndarray:
        if self._D is None:
            raise MetricError("space has no dense matrix")
        return self._D

    def dist(self, u: Point, v: Point) -> float:
        if self._D is not None:
            return float(self._D[self.index[u], self.index[v]])
        if u == v:
            return 0.0
        return float(self._fn(u, v))

    def dist_row(self, u: Point) -> np.ndarray:
        """Distances from ``u`` to every point, in ``points`` order."""
        if self._D is not None:
            return self._D[self.index[u]]
        return np.array([self.dist(u, v) for v in self._points])

    def with_basepoint(self, x0: Point) -> "FiniteMetricSpace":
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        if x0 not in self.index:
            raise MetricError(f"basepoint {x0!r} is not a point")
        other.x0 = x0
        return other

    def components(self) -> list[set]:
        """Classes of points at finite distance from each other."""
        seen, comps = set(), []
        for p in self._points:
            if p in seen:
                continue
            row = self.dist_row(p)
            comp = {q for q, d in zip(self._points, row) if math.isfinite(d)}
            seen |= comp
            comps.append(comp)
        return comps

    @classmethod
    def from_matrix(cls, labels: Sequence[Point], matrix, x0=None) -> "FiniteMetricSpace":
        return cls(labels, np.asarray(matrix, dtype=float), x0=x0)


def check_metric(D: np.ndarray, tol: float = 1e-12) -> None:
    """Verify the (generalized) metric axioms on a dense matrix."""
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise MetricError("distance matrix must be square")
    if np.isnan(D).any():
        raise MetricError("nan distance")
    if (D < 0).any():
        raise MetricError("negative distance")
    if np.any(np.diag(D) != 0):
        raise MetricError("non-zero self distance")
    if not np.array_equal(D, D.T):
        raise MetricError("distance is not symmetric")
    n = D.shape[0]
    # triangle inequality row by row; inf + finite = inf is fine here
    for k in range(n):
        via = D[:, k][:, None] + D[k, :][None, :]
        if (D > via + tol).any():
            i, j = np.argwhere(D > via + tol)[0]
            raise MetricError(f"triangle inequality fails at ({i},{k},{j})")


def gromov_product(space: FiniteMetricSpace, a: Point, b: Point, c: Point) -> float:
    """<a|b>_c = (d(a,c) + d(b,c) - d(a,b)) / 2."""
    d = space.dist
    return 0.5 * ext_add(ext_add(d(a, c), d(b, c)), -d(a, b))


def double_difference(space: FiniteMetricSpace, a: Point, a2: Point, b: Point, b2: Point) -> float:
    """<a,a'|b,b'> = (d(a,b) - d(a',b) - d(a,b') + d(a',b')) / 2."""
    d = space.dist
    pos = ext_add(d(a, b), d(a2, b2))
    neg = ext_add(d(a2, b), d(a, b2))
    return 0.5 * ext_add(pos, -neg)


@dataclass(frozen=True)
class ConvexPoint:
    """A finite convex combination of points of a space."""

    support: tuple

    def __init__(self, support: Mapping[Point, float] | Iterable[tuple[Point, float]]):
        items = list(support.items()) if isinstance(support, Mapping) else list(support)
        if any(w < 0 for _, w in items):
            raise ValueError("negative weight")
        total = sum(w for _, w in items)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "support", tuple(items))

    @classmethod
    def vertex(cls, p: Point) -> "ConvexPoint":
        return cls([(p, 1.0)])

    @classmethod
    def midpoint(cls, p: Point, q: Point) -> "ConvexPoint":
        return cls([(p, 0.5), (q, 0.5)])


def linear_extend_dist(space: FiniteMetricSpace, p: ConvexPoint, q: ConvexPoint) -> float:
    """sum_x sum_y alpha_x beta_y d(x, y)."""
    total = 0.0
    for x, wx in p.support:
        for y, wy in q.support:
            if wx and wy:
                total += wx * wy * space.dist(x, y)
    return total


@dataclass(frozen=True)
class EquivReport:
    kind: str
    A: float
    B: float
    max_violation: float


def estimate_equivalence(f, g, kind: str = "plus", tol: float = 1e-12) -> EquivReport:
    """Sample-certified constants relating two sampled functions.

    ``plus``: f in g + [-B, B] with A = 1.
    ``times``: f in [1/A, A] g with B = 0 (zero values must match).
    ``timesplus``: f in [1/A, A] g + [-B, B]; A is searched over a grid and
    B is then exact, picking the pair with the smallest A + B.
    """
    f = np.asarray(list(f), dtype=float)
    g = np.asarray(list(g), dtype=float)
    if f.size == 0:
        raise ValueError("empty sample")
    if f.shape != g.shape:
        raise ValueError("samples have different shapes")
    if kind == "plus":
        B = float(np.max(np.abs(f - g)))
        return EquivReport("plus", 1.0, B, 0.0)
    if kind == "times":
        A = _times_constant(f, g)
        viol = _violation(f, g, A, 0.0)
        return EquivReport("times", A, 0.0, viol)
    if kind == "timesplus":
        best = None
        A_max = max(_times_constant(f, g, allow_inf=True), 1.0)
        grid = [1.0] if not math.isfinite(A_max) else []
        if math.isfinite(A_max):
            grid = list(np.unique(np.concatenate([np.linspace(1.0, A_max, 64), [A_max]])))
        for A in grid:
            B = _plus_for_times(f, g, A)
            if best is None or A + B < best[0] + best[1]:
                best = (A, B)
        A, B = best
        return EquivReport("timesplus", float(A), float(B), _violation(f, g, A, B))
    raise ValueError(f"unknown equivalence kind {kind!r}")


def _times_constant(f, g, allow_inf=False) -> float:
    A = 1.0
    for x, y in zip(f, g):
        if x == 0 and y == 0:
            continue
        if x <= 0 or y <= 0:
            if allow_inf:
                return INF
            raise ValueError("times-equivalence needs positive values")
        A = max(A, x / y, y / x)
    return float(A)


def _plus_for_times(f, g, A) -> float:
    # smallest B with g/A - B <= f <= A g + B
    upper = f - A * g
    lower = g / A - f
    return float(max(0.0, upper.max(), lower.max()))


def _violation(f, g, A, B) -> float:
    over = np.maximum(f - (A * g + B), 0.0)
    under = np.maximum((g / A - B) - f, 0.0)
    return float(max(over.max(), under.max()))
