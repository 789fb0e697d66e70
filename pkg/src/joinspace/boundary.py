"""Boundary points as rays, and the join extended over them.

A boundary point is represented by a geodesic ray from the basepoint inside
a (truncated) graph.  Quantities that involve boundary points are evaluated
by replacing every boundary entry by its ray vertex at a common depth i and
increasing i until the values settle.  The infinite values are produced
structurally from the coincidence pattern of boundary entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .extsmooth import INF, ext_add, ext_exp
from .hypgraph import HypGraph, RaySeed, ray_to
from .join import Isometry, JoinError, JoinPoint, JoinSpace, Line, RAW, SMOOTH


class TruncationError(ArithmeticError):
    """A ray ran out before the iterates settled."""

    def __init__(self, message: str, iterates: Sequence[float] = ()):
        super().__init__(message)
        self.iterates = list(iterates)[-2:]


class InadmissibleError(ValueError):
    """A quadruple with three entries at the same boundary point."""


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A point at infinity given by a geodesic ray from the basepoint.

    Two boundary points are equal when their rays stay within 2*delta of each
    other over their common depth.
    """

    ray: RaySeed
    graph: HypGraph = field(repr=False)
    delta: float = 0.0
    label: str = ""

    is_boundary = True

    @property
    def depth(self) -> int:
        return self.ray.depth

    def at(self, i: int):
        return self.ray.at(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoundaryPoint):
            return False
        k = min(self.depth, other.depth)
        tol = 2.0 * max(self.delta, other.delta) + 1e-12
        return all(self.graph.dist(self.ray.at(i), other.ray.at(i)) <= tol for i in range(k + 1))

    def __hash__(self) -> int:
        # equality is tolerance based, so only the class is hashed
        return hash("BoundaryPoint")

    def __str__(self) -> str:
        return self.label or f"ray {self.ray.vertices[-1]}"

    def __repr__(self) -> str:
        return f"BoundaryPoint({self})"


def is_boundary(p) -> bool:
    return isinstance(p, BoundaryPoint)


def boundary_point(graph: HypGraph, target, label: str = "") -> BoundaryPoint:
    """The boundary point of the chosen geodesic ray from x0 through ``target``."""
    if target not in graph:
        raise JoinError(f"unknown vertex {target!r}")
    ray = ray_to(graph, target)
    if ray.depth < 1:
        raise JoinError("a ray needs at least one step")
    return BoundaryPoint(ray, graph, _delta(graph), label or f"ray {target}")


def _delta(graph) -> float:
    try:
        return float(graph.delta)
    except Exception:  # pragma: no cover - delta is best effort for labels only
        return 0.0


def parse_point(graph: HypGraph, text):
    """``"ray v"`` gives a boundary point, anything else a vertex id."""
    if isinstance(text, str) and text.strip().startswith("ray "):
        return boundary_point(graph, _vertex(graph, text.strip()[4:].strip()))
    return _vertex(graph, text)


def _vertex(graph, v):
    if v in graph:
        return v
    try:
        iv = int(v)
    except (TypeError, ValueError):
        raise JoinError(f"unknown vertex {v!r}") from None
    if iv in graph:
        return iv
    raise JoinError(f"unknown vertex {v!r}")


# -- admissibility ------------------------------------------------------------

def trivial_triple(q: Sequence) -> bool:
    """True when three entries of the quadruple are the same boundary point."""
    bs = [p for p in q if is_boundary(p)]
    for i in range(len(bs)):
        same = sum(1 for j in range(len(bs)) if bs[i] == bs[j])
        if same >= 3:
            return True
    return False


def admissible(q: Sequence) -> bool:
    return not trivial_triple(q)


def structural_infinity(a, a2, b, b2):
    """+inf / -inf when a side pair coincides at a boundary point, else None."""
    if (is_boundary(a) and a == b2) or (is_boundary(a2) and a2 == b):
        return INF
    if (is_boundary(a) and a == b) or (is_boundary(a2) and a2 == b2):
        return -INF
    return None


@dataclass
class Stabilized:
    value: float
    trace: list
    depth: int


def stabilize(fn: Callable[[int], float], max_depth: int, tol: float, start: int = 1) -> Stabilized:
    """Iterate ``fn(i)`` for i = start.. until three consecutive gaps are below tol and non-increasing."""
    trace = []
    for i in range(start, max_depth + 1):
        trace.append(float(fn(i)))
        if len(trace) >= 4:
            g = [abs(trace[-k] - trace[-k - 1]) for k in (3, 2, 1)]
            if all(x < tol for x in g) and g[0] >= g[1] >= g[2]:
                return Stabilized(trace[-1], trace, i)
    raise TruncationError(
        f"iterates did not settle to tol={tol:g} within ray depth {max_depth}; last iterates {trace[-2:]}",
        trace,
    )


class ExtendedSpace(JoinSpace):
    """The join over a graph together with boundary points given as rays."""

    def __init__(self, metric, x0=None, graph=None, tol: float = 1e-9):
        super().__init__(metric, x0, graph)
        if self.graph is None:
            raise JoinError("the extended join needs a graph")
        self.tol = tol
        self.last_depth = 0

    def is_ground_point(self, p) -> bool:
        return is_boundary(p) or p in self.metric

    def boundary(self, target, label: str = "") -> BoundaryPoint:
        return boundary_point(self.graph, target, label)

    # -- substitution -------------------------------------------------------
    def _depth_limit(self, pts) -> int:
        ds = [p.depth for p in pts if is_boundary(p)]
        return min(ds) if ds else 0

    @staticmethod
    def _sub(p, i):
        return p.at(i) if is_boundary(p) else p

    def _stabilize(self, pts, fn, tol=None) -> Stabilized:
        tol = self.tol if tol is None else tol
        res = stabilize(fn, self._depth_limit(pts), tol)
        self.last_depth = max(self.last_depth, res.depth)
        return res

    # -- extended products --------------------------------------------------
    def dist(self, u, v) -> float:
        if is_boundary(u) or is_boundary(v):
            return 0.0 if (is_boundary(u) and is_boundary(v) and u == v) else INF
        return self.metric.dist(u, v)

    def dd_trace(self, a, a2, b, b2, tol=None) -> Stabilized:
        q = (a, a2, b, b2)
        if not any(is_boundary(p) for p in q):
            return Stabilized(JoinSpace.dd(self, a, a2, b, b2), [], 0)
        if trivial_triple(q):
            raise InadmissibleError(f"quadruple {q} has a trivial boundary triple")
        inf = structural_infinity(*q)
        if inf is not None:
            return Stabilized(inf, [], 0)
        d = self.metric.dist
        s = self._sub

        def f(i):
            x, x2, y, y2 = (s(p, i) for p in q)
            return 0.5 * (d(x, y) + d(x2, y2) - d(x2, y) - d(x, y2))

        return self._stabilize(q, f, tol)

    def dd(self, a, a2, b, b2) -> float:
        return self.dd_trace(a, a2, b, b2).value

    def gp(self, a, b, c) -> float:
        """<a|b>_c as the double difference <a,c|c,b>."""
        if trivial_triple((a, c, c, b)):
            raise InadmissibleError(f"triple ({a}, {b}, {c}) is not admissible")
        return self.dd(a, c, c, b)

    def cross_ratio(self, a, a2, b, b2) -> float:
        return ext_exp(self.dd(a, a2, b, b2))

    # -- lines --------------------------------------------------------------
    def make_line(self, a, b) -> Line:
        if a == b:
            return Line(a, b, 0.0, 0.0)
        return super().make_line(a, b)

    def line_arrays(self, a, b):
        if not (is_boundary(a) or is_boundary(b)):
            return super().line_arrays(a, b)
        key = (a, b)
        if key in self._arrays:
            return self._arrays[key]
        pts = self.ground
        rows = {}

        def row(v):
            if v not in rows:
                rows[v] = np.asarray(self.metric.dist_row(v), dtype=float)
            return rows[v]

        d = self.metric.dist
        x0 = self.x0
        limit = self._depth_limit((a, b))
        Ks, Ps = [], []
        for i in range(1, limit + 1):
            ai, bi = self._sub(a, i), self._sub(b, i)
            ra, rb = row(ai), row(bi)
            Ks.append(0.5 * (ra + rb - d(ai, bi)))
            Ps.append(0.5 * (ra - rb - d(ai, x0) + d(bi, x0)))
            if len(Ks) >= 4 and _settled(Ks, self.tol) and _settled(Ps, self.tol):
                self._arrays[key] = (Ks[-1], Ps[-1])
                self.last_depth = max(self.last_depth, i)
                return Ks[-1], Ps[-1]
        bad = int(np.sum(~(_settled_mask(Ks, self.tol) & _settled_mask(Ps, self.tol)))) if len(Ks) >= 4 else len(pts)
        raise TruncationError(
            f"line [[{a},{b}]]: {bad} of {len(pts)} ground points did not settle within ray depth {limit}",
            [float(np.max(Ks[-1])) if Ks else math.nan],
        )

    # -- isometries on boundary points --------------------------------------
    def apply(self, g: Isometry, v):
        if not is_boundary(v):
            return g(v)
        return image_of_ray(self.graph, g, v)

    # -- horofunctions ------------------------------------------------------
    def _ell_at(self, u, x: JoinPoint, i: int) -> float:
        d = self.metric.dist
        s = self._sub
        g = x.ground
        if g is not None:
            return d(s(u, i), s(g, i))
        a, b, ui = s(x.a, i), s(x.b, i), s(u, i)
        gp = 0.5 * (d(a, ui) + d(b, ui) - d(a, b))
        pc = 0.5 * (d(a, ui) - d(b, ui) - d(a, self.x0) + d(b, self.x0))
        return gp + abs(x.coord - pc)

    def horofunction(self, u, x: JoinPoint, y: JoinPoint, tol=None) -> float:
        """beta_u(x, y); for boundary u the limit along the ray of u."""
        for p in (x, y):
            if p.ground is not None and is_boundary(p.ground):
                raise JoinError("horofunction arguments must avoid the boundary")
        if not is_boundary(u) and not any(is_boundary(v) for p in (x, y) for v in (p.a, p.b)):
            return self.beta_cross(u, x, y)
        pts = [u, x.a, x.b, y.a, y.b]
        return self._stabilize(pts, lambda i: self._ell_at(u, x, i) - self._ell_at(u, y, i), tol).value

    def horosphere_check(self, u, a, b, tol=None) -> float:
        """Largest |beta_u| between the four projections of a, b onto lines through u."""
        pts = []
        for p, q, r in ((a, u, b), (b, u, a), (u, a, b), (u, b, a)):
            if p == q:
                pts.append(self.ground_point(p))
            else:
                pts.append(self.project(p, q, r))
        worst = 0.0
        for i in range(4):
            for j in range(i + 1, 4):
                worst = max(worst, abs(self.horofunction(u, pts[i], pts[j], tol)))
        return worst


def _settled(arrs: list, tol: float) -> bool:
    return bool(np.all(_settled_mask(arrs, tol)))


def _settled_mask(arrs: list, tol: float) -> np.ndarray:
    g = [np.abs(arrs[-k] - arrs[-k - 1]) for k in (3, 2, 1)]
    return (g[0] < tol) & (g[1] < tol) & (g[2] < tol) & (g[0] >= g[1]) & (g[1] >= g[2])


def image_of_ray(graph: HypGraph, g: Isometry, p: BoundaryPoint) -> BoundaryPoint:
    """g applied to a ray, re-based to start at x0.

    The image is followed as deep as it stays inside the graph; the new ray
    is the chosen geodesic from x0 to the deepest image vertex.
    """
    last = None
    for v in p.ray.vertices:
        try:
            w = g(v)
        except (KeyError, ArithmeticError, ValueError):
            break
        if w not in graph:
            break
        last = w
    if last is None:
        raise TruncationError(f"image of {p} leaves the ball immediately")
    ray = ray_to(graph, last)
    return BoundaryPoint(ray, graph, p.delta, f"{getattr(g, 'name', 'g')}.{p}")


def extended_line(space: ExtendedSpace, a, b) -> Line:
    return space.make_line(a, b)


def gromov_extended(space: ExtendedSpace, a, b, c) -> float:
    return space.gp(a, b, c)


def dd_extended(space: ExtendedSpace, a, a2, b, b2, tol=None) -> Stabilized:
    return space.dd_trace(a, a2, b, b2, tol)


def cross_ratio(space: ExtendedSpace, a, a2, b, b2) -> float:
    return space.cross_ratio(a, a2, b, b2)
