"""Finite graphs treated as desk-scale hyperbolic complexes.

The graph metric is the word metric with unit edges.  Besides distances the
module provides geodesic enumeration, the delta-fine thinness constant,
inscribed triples, nearest-point projections, half-spaces and Cayley balls
of group presets with rays toward the frontier.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import groups
from .mspace import DENSE_LIMIT, FiniteMetricSpace

Vertex = Hashable

GEODESIC_CAP = 10**6
DELTA_EXHAUSTIVE_LIMIT = 150


class GraphError(ValueError):
    """Malformed or disconnected graph input."""


class GeodesicOverflowError(RuntimeError):
    """More geodesics than the enumeration cap."""


class HypGraph(FiniteMetricSpace):
    """A finite connected graph with its path metric."""

    def __init__(self, adjacency: dict, x0: Vertex | None = None, frontier: Iterable = (), name: str = ""):
        self.adj = {v: sorted(set(ns), key=_key) for v, ns in adjacency.items()}
        for v, ns in list(self.adj.items()):
            for u in ns:
                if u not in self.adj:
                    raise GraphError(f"neighbour {u!r} of {v!r} is not a vertex")
                if v not in self.adj[u]:
                    raise GraphError(f"adjacency is not symmetric at ({v!r}, {u!r})")
        verts = list(self.adj)
        if not verts:
            raise GraphError("empty graph")
        idx = {v: i for i, v in enumerate(verts)}
        rows, cols = [], []
        for v, ns in self.adj.items():
            for u in ns:
                rows.append(idx[v])
                cols.append(idx[u])
        A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(verts), len(verts)))
        self._csr = A
        if len(verts) <= DENSE_LIMIT:
            D = shortest_path(A, unweighted=True, directed=False)
            if np.isinf(D).any():
                raise GraphError("graph is not connected")
            super().__init__(verts, D, x0=x0, check=False)
        else:
            self._rows: dict = {}
            super().__init__(verts, self._bfs_dist, x0=x0, check=False)
            if np.isinf(self.dist_row(verts[0])).any():
                raise GraphError("graph is not connected")
        self.frontier = set(frontier)
        self.name = name
        self._delta = None

    # -- distances for large graphs --------------------------------------
    def _bfs_row(self, u) -> np.ndarray:
        row = self._rows.get(u)
        if row is None:
            row = shortest_path(self._csr, unweighted=True, directed=False, indices=[self.index[u]])[0]
            if len(self._rows) > 2048:
                self._rows.clear()
            self._rows[u] = row
        return row

    def _bfs_dist(self, u, v) -> float:
        return float(self._bfs_row(u)[self.index[v]])

    def dist_row(self, u):
        if self._D is None:
            return self._bfs_row(u)
        return super().dist_row(u)

    # -- structure --------------------------------------------------------
    def neighbors(self, v: Vertex) -> list:
        return self.adj[v]

    def edges(self) -> list:
        out = []
        for v, ns in self.adj.items():
            for u in ns:
                if self.index[v] < self.index[u]:
                    out.append((v, u))
        return out

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.adj)
        G.add_edges_from(self.edges())
        return G

    def is_tree(self) -> bool:
        return len(self.edges()) == len(self) - 1

    @property
    def n_vertices(self) -> int:
        return len(self)

    # -- geodesics --------------------------------------------------------
    def _steps_toward(self, v: Vertex, b: Vertex) -> list:
        d = self.dist(v, b)
        return [u for u in self.neighbors(v) if self.dist(u, b) == d - 1]

    def geodesic(self, a: Vertex, b: Vertex) -> list:
        """The chosen geodesic [a,b]: the lexicographically smallest vertex path."""
        path = [a]
        while path[-1] != b:
            path.append(min(self._steps_toward(path[-1], b), key=_key))
        return path

    def count_geodesics(self, a: Vertex, b: Vertex) -> int:
        memo = {b: 1}

        def count(v):
            if v not in memo:
                memo[v] = sum(count(u) for u in self._steps_toward(v, b))
            return memo[v]

        # iterative deepening keeps the recursion shallow on long paths
        order = sorted(self._interval(a, b), key=lambda v: -self.dist(v, a))
        for v in order:
            count(v)
        return count(a)

    def _interval(self, a, b) -> list:
        dab = self.dist(a, b)
        ra, rb = self.dist_row(a), self.dist_row(b)
        return [v for v, x, y in zip(self.points, ra, rb) if x + y == dab]

    def geodesics(self, a: Vertex, b: Vertex, cap: int = GEODESIC_CAP) -> "GeodesicSet":
        n = self.count_geodesics(a, b)
        if n > cap:
            raise GeodesicOverflowError(f"{n} geodesics between {a!r} and {b!r} exceed the cap {cap}")
        paths = []
        stack = [[a]]
        while stack:
            p = stack.pop()
            if p[-1] == b:
                paths.append(p)
                continue
            for u in sorted(self._steps_toward(p[-1], b), key=_key, reverse=True):
                stack.append(p + [u])
        return GeodesicSet((a, b), paths)

    # -- thinness ---------------------------------------------------------
    @property
    def delta(self) -> float:
        if self._delta is None:
            self._delta = delta_fine(self)
        return self._delta


def _key(v):
    # orders ints numerically, strings shortlex, and mixed ids consistently
    if isinstance(v, (int, np.integer)):
        return (0, int(v), "")
    s = str(v)
    return (1, len(s), s)


@dataclass
class GeodesicSet:
    endpoints: tuple
    geodesics: list

    @property
    def count(self) -> int:
        return len(self.geodesics)

    def chain_weights(self) -> list:
        """Uniform weights 1/#Geod(a,b) of the averaged chain."""
        return [1.0 / self.count] * self.count


@dataclass(frozen=True)
class PathPoint:
    """A point on a vertex path at a half-integer offset from its start."""

    path: tuple
    offset: Fraction

    @property
    def endpoints(self) -> tuple:
        k = self.offset
        lo = math.floor(k)
        if k == lo:
            v = self.path[lo]
            return (v, v)
        return (self.path[lo], self.path[lo + 1])

    @property
    def is_vertex(self) -> bool:
        return self.offset.denominator == 1

    @property
    def vertex(self):
        return self.path[int(self.offset)] if self.is_vertex else None


def point_distance(g: FiniteMetricSpace, p: PathPoint, q: PathPoint) -> float:
    """Distance in the metric graph between vertices or edge midpoints."""
    (u1, v1), (u2, v2) = p.endpoints, q.endpoints
    if p.is_vertex and q.is_vertex:
        return g.dist(u1, u2)
    if p.is_vertex or q.is_vertex:
        w, (a, b) = (u1, (u2, v2)) if p.is_vertex else (u2, (u1, v1))
        return 0.5 + min(g.dist(w, a), g.dist(w, b))
    if {u1, v1} == {u2, v2}:
        return 0.0
    return 1.0 + min(g.dist(x, y) for x in (u1, v1) for y in (u2, v2))


def inscribed_triple(g: HypGraph, a, b, c, alpha=None, beta=None, gamma=None):
    """Inscribed points on the sides alpha=[b,c], beta=[a,c], gamma=[a,b].

    Defaults to the chosen geodesics.  Returns three ``PathPoint`` objects
    (abar on alpha, bbar on beta, cbar on gamma).
    """
    alpha = tuple(alpha or g.geodesic(b, c))
    beta = tuple(beta or g.geodesic(a, c))
    gamma = tuple(gamma or g.geodesic(a, b))
    for path, (s, t) in ((alpha, (b, c)), (beta, (a, c)), (gamma, (a, b))):
        if path[0] != s or path[-1] != t:
            raise GraphError("geodesic does not connect the stated endpoints")

    def gp(x, y, z):
        return Fraction(int(g.dist(x, z) + g.dist(y, z) - g.dist(x, y)), 2)

    abar = PathPoint(alpha, gp(a, c, b))
    bbar = PathPoint(beta, gp(b, c, a))
    cbar = PathPoint(gamma, gp(b, c, a))
    return abar, bbar, cbar


def nearest_point_projection(g: FiniteMetricSpace, path: Sequence, y) -> set:
    row = g.dist_row(y)
    ds = [row[g.index[v]] for v in path]
    m = min(ds)
    return {v for v, d in zip(path, ds) if d == m}


# -- delta-fine constant ------------------------------------------------------

def _level_points(g: HypGraph, ra: np.ndarray, k2: int):
    """Points at distance k2/2 from a: vertices or edges between two levels."""
    if k2 % 2 == 0:
        idx = np.nonzero(ra == k2 // 2)[0]
        return [(int(i), int(i)) for i in idx]
    j = (k2 - 1) // 2
    out = []
    for i in np.nonzero(ra == j)[0]:
        for u in g.adj[g.points[i]]:
            ui = g.index[u]
            if ra[ui] == j + 1:
                out.append((int(i), ui))
    return out


def _points_dist(D: np.ndarray, pts: list) -> np.ndarray:
    P = np.array(pts)
    u, v = P[:, 0], P[:, 1]
    if (u == v).all():
        return D[np.ix_(u, u)]
    m = np.minimum(np.minimum(D[np.ix_(u, u)], D[np.ix_(u, v)]), np.minimum(D[np.ix_(v, u)], D[np.ix_(v, v)]))
    out = 1.0 + m
    same = (u[:, None] == u[None, :]) & (v[:, None] == v[None, :])
    out[same] = 0.0
    return out


def _corner_delta(g: HypGraph, D: np.ndarray, ai: int) -> float:
    ra = D[ai]
    n = len(ra)
    gp = 0.5 * (ra[:, None] + ra[None, :] - D)  # gp[b, c] = <b|c>_a
    worst = 0.0
    maxk2 = int(2 * gp.max())
    for k2 in range(1, maxk2 + 1):
        pts = _level_points(g, ra, k2)
        if not pts:
            continue
        P = np.array(pts)
        # mask[c, x]: point x lies on some geodesic from a to c
        onv = (ra[P[:, 0]][None, :] + D[:, P[:, 0]] == ra[:, None]) & (ra[P[:, 1]][None, :] + D[:, P[:, 1]] == ra[:, None])
        PD = _points_dist(D, pts)
        neg = -np.inf
        Q = np.where(onv[:, None, :], PD[None, :, :], neg).max(axis=2)  # Q[b, x]
        R = np.where(onv[:, None, :], Q[None, :, :], neg).max(axis=2)  # R[c, b]
        valid = gp >= k2 / 2.0
        if valid.any():
            worst = max(worst, float(R[valid].max()))
    return worst


def delta_fine(g: HypGraph, limit: int = DELTA_EXHAUSTIVE_LIMIT, samples: int = 24, seed: int = 0) -> float:
    """Smallest half-integer delta making all geodesic triangles delta-fine.

    Exhaustive over every corner when |V| <= limit; above that the corners
    are sampled (the other two vertices always range over the whole graph).
    """
    D = g.matrix
    n = len(g)
    if n <= limit:
        corners = range(n)
    else:
        rng = random.Random(seed)
        corners = sorted(rng.sample(range(n), min(samples, n)))
    worst = 0.0
    for ai in corners:
        worst = max(worst, _corner_delta(g, D, ai))
    return math.ceil(2 * worst) / 2.0


def delta_fine_bruteforce(g: HypGraph) -> float:
    """Reference oracle: enumerate every triple and every geodesic choice."""
    worst = 0.0
    V = g.points
    for a, b, c in itertools.product(V, repeat=3):
        gpa = (g.dist(a, b) + g.dist(a, c) - g.dist(b, c)) / 2
        for beta in g.geodesics(a, c).geodesics:
            for gamma in g.geodesics(a, b).geodesics:
                k = Fraction(0)
                while k <= gpa:
                    x, y = PathPoint(tuple(beta), k), PathPoint(tuple(gamma), k)
                    worst = max(worst, point_distance(g, x, y))
                    k += Fraction(1, 2)
    return math.ceil(2 * worst) / 2.0


# -- rays and half-spaces -----------------------------------------------------

@dataclass(frozen=True)
class RaySeed:
    """A geodesic vertex sequence from the base vertex, standing for a boundary point."""

    vertices: tuple

    @property
    def base(self):
        return self.vertices[0]

    @property
    def depth(self) -> int:
        return len(self.vertices) - 1

    def at(self, i: int):
        if i > self.depth:
            raise IndexError(f"ray depth {self.depth} exhausted at {i}")
        return self.vertices[i]


def ray_to(g: HypGraph, target, base=None) -> RaySeed:
    """The chosen geodesic from the basepoint to ``target`` as a ray seed."""
    base = g.x0 if base is None else base
    return RaySeed(tuple(g.geodesic(base, target)))


@dataclass
class HalfSpace:
    vertices: set
    truncated: bool = False


def half_space(g: HypGraph, ray: RaySeed, t: float, sign: int = 1) -> HalfSpace:
    """U+(a,t) (sign=+1) or U-(a,t) (sign=-1) relative to the ray's geodesic."""
    path = ray.vertices
    pos = {v: i for i, v in enumerate(path)}
    out = set()
    for x in g.points:
        proj = nearest_point_projection(g, path, x)
        ks = [pos[p] for p in proj]
        if sign > 0 and max(ks) >= t:
            out.add(x)
        elif sign < 0 and min(ks) <= t:
            out.add(x)
    return HalfSpace(out, truncated=t > ray.depth)


# -- builders -----------------------------------------------------------------

def from_edges(edges: Iterable[tuple], x0=None, name: str = "", frontier=()) -> HypGraph:
    adj: dict = {}
    for u, v in edges:
        if u == v:
            continue
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    if not adj:
        raise GraphError("no edges")
    if x0 is None:
        x0 = min(adj, key=_key)
    # keep a deterministic vertex order
    ordered = {v: adj[v] for v in sorted(adj, key=_key)}
    return HypGraph(ordered, x0=x0, name=name, frontier=frontier)


def parse_edge_list(text: str) -> list:
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: vertex ids must be non-negative integers") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: vertex ids must be non-negative integers")
        edges.append((u, v))
    return edges


def write_edge_list(g: HypGraph, labels: bool = True) -> str:
    """Edge-list text with integer ids; non-integer labels are listed in comments."""
    ids = {v: i for i, v in enumerate(g.points)}
    lines = [f"# {g.name or 'graph'}: {len(g)} vertices"]
    if labels and not all(isinstance(v, int) for v in g.points):
        for v, i in ids.items():
            lines.append(f"# vertex {i} = {v}")
    for u, v in g.edges():
        lines.append(f"{ids[u]} {ids[v]}")
    return "\n".join(lines) + "\n"


def path_graph(n: int) -> HypGraph:
    if n < 2:
        raise GraphError("path needs at least 2 vertices")
    return from_edges([(i, i + 1) for i in range(n - 1)], x0=0, name=f"path {n}")


def cycle_graph(n: int) -> HypGraph:
    if n < 3:
        raise GraphError("cycle needs at least 3 vertices")
    return from_edges([(i, (i + 1) % n) for i in range(n)], x0=0, name=f"cycle {n}")


def tripod(leg: int) -> HypGraph:
    """Three legs of length ``leg`` glued at the centre 0.

    Leg ``j`` (j = 0, 1, 2) has vertices ``j*leg + 1, ..., (j+1)*leg``, so its
    end is ``(j+1)*leg``.
    """
    if leg < 1:
        raise GraphError("leg length must be positive")
    edges = []
    for j in range(3):
        prev = 0
        for i in range(1, leg + 1):
            v = j * leg + i
            edges.append((prev, v))
            prev = v
    return from_edges(edges, x0=0, name=f"tripod {leg}")


def tripod_ends(leg: int) -> tuple:
    return (leg, 2 * leg, 3 * leg)


def random_tree(n: int, seed: int) -> HypGraph:
    if n < 2:
        raise GraphError("random tree needs at least 2 vertices")
    if n == 2:
        return from_edges([(0, 1)], x0=0, name="random 2")
    rng = random.Random(seed)
    prufer = [rng.randrange(n) for _ in range(n - 2)]
    T = nx.from_prufer_sequence(prufer)
    return from_edges(T.edges(), x0=0, name=f"random {n} seed {seed}")


def parse_tree_spec(spec: str) -> HypGraph:
    parts = spec.split()
    try:
        if parts[0] == "path" and len(parts) == 2:
            return path_graph(int(parts[1]))
        if parts[0] == "tripod" and len(parts) == 2:
            return tripod(int(parts[1]))
        if parts[0] == "random" and len(parts) == 3:
            return random_tree(int(parts[1]), int(parts[2]))
        if parts[0] == "cycle" and len(parts) == 2:
            return cycle_graph(int(parts[1]))
    except (ValueError, IndexError):
        pass
    raise GraphError(f"bad tree spec {spec!r}; expected 'path n', 'tripod l', 'random n seed' or 'cycle n'")


class CayleyBall(HypGraph):
    """Ball of radius R in the Cayley graph of a free product of cyclic groups.

    Vertices are reduced words (``"e"`` is the identity).  Distances come
    from the normal form, so the vertex list is only materialized when a
    computation needs the whole ground set.
    """

    def __init__(self, group: groups.FreeProduct, radius: int, name: str = ""):
        self.group = group
        self.radius = radius
        self.name = name or f"cayley {group.orders} radius {radius}"
        self._points_cache = None
        self._D = None
        self._fn = self._word_dist
        self.x0 = groups.IDENTITY
        self._delta = None
        self._frontier = None

    # -- lazy ground set ---------------------------------------------------
    def _materialize(self):
        if self._points_cache is None:
            pts = [self.group.to_word(u) for u in self.group.ball(self.radius)]
            self._points_cache = pts
            self.index = {p: i for i, p in enumerate(pts)}
            if len(pts) <= DENSE_LIMIT:
                n = len(pts)
                elems = [self.group.parse(p) for p in pts]
                D = np.zeros((n, n))
                for i in range(n):
                    inv = self.group.inv(elems[i])
                    for j in range(i + 1, n):
                        D[i, j] = D[j, i] = self.group.length(self.group.mul(inv, elems[j]))
                self._D = D
        return self._points_cache

    @property
    def points(self):
        return self._materialize()

    @property
    def _points(self):
        return self._materialize()

    def __len__(self):
        return self.n_vertices

    @property
    def n_vertices(self) -> int:
        if self._points_cache is not None:
            return len(self._points_cache)
        return self.group.count_ball(self.radius)

    @property
    def matrix(self):
        self._materialize()
        return super().matrix

    def __contains__(self, v) -> bool:
        try:
            return self.group.length(self.group.parse(v)) <= self.radius
        except (groups.PresentationError, TypeError, AttributeError):
            return False

    @property
    def index(self):
        self._materialize()
        return self.__dict__["index"]

    @index.setter
    def index(self, value):
        self.__dict__["index"] = value

    def _word_dist(self, u, v) -> float:
        G = self.group
        return float(G.dist(G.parse(u), G.parse(v)))

    def dist(self, u, v) -> float:
        if self._D is not None:
            return float(self._D[self.index[u], self.index[v]])
        return self._word_dist(u, v)

    def dist_row(self, u):
        self._materialize()
        if self._D is not None:
            return self._D[self.index[u]]
        return np.array([self._word_dist(u, v) for v in self._points_cache])

    def neighbors(self, v):
        G = self.group
        u = G.parse(v)
        out = []
        for g in G.generators():
            w = G.mul(u, g)
            if G.length(w) <= self.radius:
                out.append(G.to_word(w))
        return sorted(out, key=_key)

    @property
    def adj(self):
        return {v: self.neighbors(v) for v in self.points}

    @property
    def frontier(self):
        if self._frontier is None:
            self._frontier = {v for v in self.points if self.word_length(v) == self.radius}
        return self._frontier

    @frontier.setter
    def frontier(self, value):
        self._frontier = set(value)

    def word_length(self, v) -> int:
        return self.group.length(self.group.parse(v))

    def multiply(self, u, v) -> str:
        G = self.group
        return G.to_word(G.mul(G.parse(u), G.parse(v)))

    def inverse(self, u) -> str:
        G = self.group
        return G.to_word(G.inv(G.parse(u)))

    def _interval(self, a, b):
        # walk the geodesics instead of scanning the whole ball
        seen, layer = {a}, [a]
        while layer:
            nxt = []
            for v in layer:
                for u in self._steps_toward(v, b):
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            layer = nxt
        return list(seen)

    @property
    def delta(self) -> float:
        if self._delta is None:
            if all(p == 0 for p in self.group.orders):
                self._delta = 0.0
            else:
                self._delta = delta_fine(self)
        return self._delta


def cayley_ball(preset: str, radius: int) -> HypGraph:
    """Cayley ball for a named preset.

    ``f2``, ``f3``, ``z2*z3``, ``z3*z3``, ``z2*z2*z2`` use exact normal forms;
    ``triangle p q r`` uses the reflection representation.
    """
    if radius < 1:
        raise GraphError("radius must be positive")
    key = preset.strip().lower()
    if key in groups.PRESETS:
        return CayleyBall(groups.FreeProduct(groups.PRESETS[key]), radius, name=f"{key} radius {radius}")
    parts = key.replace(",", " ").split()
    if parts and parts[0] == "triangle" and len(parts) == 4:
        p, q, r = (int(x) for x in parts[1:])
        words, edges = groups.triangle_ball(p, q, r, radius)
        return _ball_graph(words, edges, radius, f"triangle {p} {q} {r} radius {radius}")
    raise GraphError(f"unknown preset {preset!r}")


def presentation_graph(spec: dict | str) -> HypGraph:
    """Cayley ball from JSON ``{generators: [...], relators: [...], radius: N}``."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    gens = list(spec["generators"])
    rels = list(spec.get("relators", []))
    radius = int(spec["radius"])
    words, edges = groups.presentation_ball(gens, rels, radius)
    return _ball_graph(words, edges, radius, f"presentation radius {radius}")


def _ball_graph(words, edges, radius, name) -> HypGraph:
    adj = {w: set() for w in words}
    for i, j in edges:
        adj[words[i]].add(words[j])
        adj[words[j]].add(words[i])
    g = HypGraph(adj, x0=groups.IDENTITY, name=name)
    g.frontier = {v for v in g.points if g.dist(groups.IDENTITY, v) == radius}
    return g


def build_graph(source) -> HypGraph:
    """Build from an edge list (text or pairs), a tree spec, a preset or a presentation."""
    if isinstance(source, HypGraph):
        return source
    if isinstance(source, dict):
        if "preset" in source:
            return cayley_ball(source["preset"], int(source["radius"]))
        return presentation_graph(source)
    if isinstance(source, str):
        s = source.strip()
        if s.startswith("{"):
            return build_graph(json.loads(s))
        head = s.split()[0] if s else ""
        if head in ("path", "tripod", "random", "cycle"):
            return parse_tree_spec(s)
        return from_edges(parse_edge_list(s))
    return from_edges(list(source))
