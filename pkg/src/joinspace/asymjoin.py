"""The asymmetric join of two metric spaces.

The disjoint union Y1 + Y2 carries the metric of shortest admissible
sequences: steps inside Y_i cost d_i, and a step between g.y1 and g.y2 (for
g in the acting group) costs 1.  The asymmetric join consists of the lines
from points of Y1 to points of Y2 in the join of that union; its slices at a
fixed smoothed parameter sweep out from Y1 (t -> -inf) to Y2 (t -> +inf).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, dijkstra

from .extsmooth import INF
from .join import SMOOTH, Isometry, IsometryError, JoinError, JoinPoint, JoinSpace
from .mspace import FiniteMetricSpace


@dataclass
class GroupPair:
    """A generator acting on both spaces by the given permutations."""

    name: str
    perm1: dict
    perm2: dict


class UnionSpace:
    """Y1 + Y2 with the admissible-sequence metric.

    Points are tagged pairs ``(1, p)`` and ``(2, q)``.
    """

    def __init__(self, Y1: FiniteMetricSpace, Y2: FiniteMetricSpace, basepoints: tuple | None = None, actions: Sequence[GroupPair] = ()):
        self.Y1, self.Y2 = Y1, Y2
        if basepoints is None:
            basepoints = (Y1.x0, Y2.x0)
        self.y1, self.y2 = basepoints
        if self.y1 not in Y1 or self.y2 not in Y2:
            raise JoinError("basepoints must lie in Y1 and Y2")
        self.actions = list(actions)
        for g in self.actions:
            _check_perm(Y1, g.perm1, g.name)
            _check_perm(Y2, g.perm2, g.name)
        self.points = [(1, p) for p in Y1.points] + [(2, q) for q in Y2.points]
        self.index = {p: i for i, p in enumerate(self.points)}
        self.cross_pairs = self._orbit_pairs()
        self.matrix = self._solve()

    def _orbit_pairs(self) -> list:
        """The orbit of (y1, y2) under the group generated by the actions."""
        start = (self.y1, self.y2)
        seen = {start}
        todo = [start]
        gens = []
        for g in self.actions:
            gens.append((g.perm1, g.perm2))
            gens.append(({v: k for k, v in g.perm1.items()}, {v: k for k, v in g.perm2.items()}))
        while todo:
            p, q = todo.pop()
            for f1, f2 in gens:
                nxt = (f1[p], f2[q])
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return sorted(seen, key=repr)

    def _solve(self) -> np.ndarray:
        n1, n = len(self.Y1), len(self.points)
        W = np.full((n, n), np.inf)
        W[:n1, :n1] = np.asarray(self.Y1.matrix, dtype=float)
        W[n1:, n1:] = np.asarray(self.Y2.matrix, dtype=float)
        for p, q in self.cross_pairs:
            i, j = self.index[(1, p)], self.index[(2, q)]
            W[i, j] = W[j, i] = min(W[i, j], 1.0)
        np.fill_diagonal(W, np.inf)
        # inf marks a missing edge so zero-length pairs of a pseudometric survive
        D = dijkstra(csgraph_from_dense(W, null_value=np.inf), directed=False)
        np.fill_diagonal(D, 0.0)
        return D

    def dist(self, a, b) -> float:
        return float(self.matrix[self.index[a], self.index[b]])

    def metric_space(self) -> FiniteMetricSpace:
        finite = bool(np.all(np.isfinite(self.matrix)))
        return FiniteMetricSpace.from_matrix(self.points, self.matrix, x0=(1, self.y1)) if finite else FiniteMetricSpace(
            self.points, self.matrix, x0=(1, self.y1), check=False
        )

    def diagonal(self, g: GroupPair) -> Isometry:
        fwd = {(1, p): (1, g.perm1[p]) for p in self.Y1.points}
        fwd.update({(2, q): (2, g.perm2[q]) for q in self.Y2.points})
        inv = {v: k for k, v in fwd.items()}
        return Isometry(fwd.__getitem__, inv.__getitem__, name=g.name)


def _check_perm(Y: FiniteMetricSpace, perm: dict, name: str) -> None:
    pts = list(Y.points)
    if set(perm) != set(pts) or set(perm.values()) != set(pts):
        raise IsometryError(f"{name}: not a permutation of the points")
    for u in pts:
        for v in pts:
            if Y.dist(perm[u], perm[v]) != Y.dist(u, v):
                raise IsometryError(f"{name}: distance between {u!r} and {v!r} is not preserved")


def union_metric(u: UnionSpace, a, b) -> float:
    return u.dist(a, b)


class AsymJoin(JoinSpace):
    """Join of the union restricted to lines running from Y1 to Y2."""

    def __init__(self, union: UnionSpace):
        if not np.all(np.isfinite(union.matrix)):
            raise JoinError("the union metric is infinite between the two spaces")
        super().__init__(union.metric_space(), (1, union.y1))
        self.union = union

    def lines(self) -> list:
        return [self.make_line(p, q) for p in self.y1_points for q in self.y2_points]

    @property
    def y1_points(self) -> list:
        return [(1, p) for p in self.union.Y1.points]

    @property
    def y2_points(self) -> list:
        return [(2, q) for q in self.union.Y2.points]

    def cross_point(self, p, q, t: float, flavor: str = SMOOTH) -> JoinPoint:
        if p[0] != 1 or q[0] != 2:
            raise JoinError("asymmetric join lines run from Y1 to Y2")
        return self.point_at(p, q, t, flavor)


def asym_join(u: UnionSpace) -> AsymJoin:
    return AsymJoin(u)


@dataclass
class Slice:
    t: float
    points: list
    sources: list  # (p, q) for each point


def slice_at(aj: AsymJoin, t: float, sample: int | None = None, seed: int = 0) -> Slice:
    pairs = [(p, q) for p in aj.y1_points for q in aj.y2_points]
    if sample is not None and sample < len(pairs):
        rng = np.random.default_rng(seed)
        pairs = [pairs[i] for i in sorted(rng.choice(len(pairs), sample, replace=False))]
    if t == -INF:
        pts = [aj.ground_point(p) for p, _ in pairs]
    elif t == INF:
        pts = [aj.ground_point(q) for _, q in pairs]
    else:
        pts = [aj.cross_point(p, q, t) for p, q in pairs]
    return Slice(float(t), pts, pairs)


@dataclass
class SliceReport:
    t: float
    size: int
    distortion_y1: float
    distortion_y2: float
    gh_proxy_y1: float = field(init=False)
    gh_proxy_y2: float = field(init=False)

    def __post_init__(self):
        # half the distortion of a correspondence bounds the Gromov-Hausdorff distance
        self.gh_proxy_y1 = 0.5 * self.distortion_y1
        self.gh_proxy_y2 = 0.5 * self.distortion_y2


def distortions(aj: AsymJoin, sl: Slice, eps: float = 1e-7) -> tuple:
    """Distortion of the correspondences [[p,q;t]]' <-> p and <-> q."""
    n = len(sl.points)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = aj.d_star(sl.points[i], sl.points[j], eps)
    Y1, Y2 = aj.union.Y1, aj.union.Y2
    P = np.array([[Y1.dist(a[0][1], b[0][1]) for b in sl.sources] for a in sl.sources])
    Q = np.array([[Y2.dist(a[1][1], b[1][1]) for b in sl.sources] for a in sl.sources])
    return float(np.max(np.abs(D - P))), float(np.max(np.abs(D - Q)))


def sweep_out(u: UnionSpace, ts: Iterable[float], sample: int | None = None, seed: int = 0, eps: float = 1e-7) -> list:
    aj = u if isinstance(u, AsymJoin) else AsymJoin(u)
    out = []
    for t in ts:
        sl = slice_at(aj, float(t), sample, seed)
        d1, d2 = distortions(aj, sl, eps)
        out.append(SliceReport(float(t), len(sl.points), d1, d2))
    return out


def monotone_sweep(reports: Sequence[SliceReport], tol: float = 1e-6) -> bool:
    """Distortion to Y1 grows with t and distortion to Y2 shrinks with t."""
    rs = sorted(reports, key=lambda r: r.t)
    for lo, hi in zip(rs[:-1], rs[1:]):
        if lo.distortion_y1 > hi.distortion_y1 + tol or hi.distortion_y2 > lo.distortion_y2 + tol:
            return False
    return True


# -- bundled examples ------------------------------------------------------------

def worked_example() -> UnionSpace:
    """Y1 = {p0, p1} at distance 1, Y2 = {q0}, trivial group, basepoints p0, q0."""
    Y1 = FiniteMetricSpace.from_matrix(["p0", "p1"], [[0, 1], [1, 0]], x0="p0")
    Y2 = FiniteMetricSpace.from_matrix(["q0"], [[0]], x0="q0")
    return UnionSpace(Y1, Y2, ("p0", "q0"))


def _path_space(n: int, prefix: str) -> FiniteMetricSpace:
    pts = [f"{prefix}{i}" for i in range(n)]
    M = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    return FiniteMetricSpace.from_matrix(pts, M, x0=pts[0])


def _cycle_space(n: int, prefix: str) -> FiniteMetricSpace:
    pts = [f"{prefix}{i}" for i in range(n)]
    k = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    M = np.minimum(k, n - k).astype(float)
    return FiniteMetricSpace.from_matrix(pts, M, x0=pts[0])


def bundled_examples() -> dict:
    """Small union spaces used by the sweep-out checks."""
    out = {"two-point": worked_example()}
    out["path3-path2"] = UnionSpace(_path_space(3, "p"), _path_space(2, "q"), ("p0", "q0"))
    return out


def rotation_counterexample() -> UnionSpace:
    """Two 4-cycles rotated in step by Z/4; its sweep-out is not monotone in t."""
    C1, C2 = _cycle_space(4, "p"), _cycle_space(4, "q")
    rot = GroupPair("r", {f"p{i}": f"p{(i + 1) % 4}" for i in range(4)}, {f"q{i}": f"q{(i + 1) % 4}" for i in range(4)})
    return UnionSpace(C1, C2, ("p0", "q0"), [rot])


def parse_action_spec(text: str, Y1, Y2) -> tuple:
    """JSON ``{pairs: [[name, permY1, permY2], ...], basepoints: [y1, y2]}``."""
    spec = json.loads(text) if isinstance(text, str) else text
    acts = []
    for name, p1, p2 in spec.get("pairs", []):
        acts.append(GroupPair(str(name), _perm(p1, Y1), _perm(p2, Y2)))
    bp = spec.get("basepoints")
    basepoints = None if bp is None else (_pt(bp[0], Y1), _pt(bp[1], Y2))
    return basepoints, acts


def _pt(v, Y):
    if v in Y:
        return v
    try:
        if int(v) in Y:
            return int(v)
    except (TypeError, ValueError):
        pass
    raise JoinError(f"unknown point {v!r}")


def _perm(p, Y) -> dict:
    if isinstance(p, dict):
        return {_pt(k, Y): _pt(v, Y) for k, v in p.items()}
    pts = list(Y.points)
    if len(p) != len(pts):
        raise JoinError("permutation list must have one entry per point")
    return {pts[i]: _pt(v, Y) for i, v in enumerate(p)}
