"""The geodesic flow space: lines between boundary points and their shift orbits.

Also translation lengths of isometries of Cayley balls and measurements of
the synchronous exponential convergence of lines sharing an endpoint.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boundary import BoundaryPoint, ExtendedSpace, TruncationError, is_boundary
from .extsmooth import INF
from .groups import IDENTITY
from .join import RAW, Isometry, JoinError, JoinPoint


# -- isometries of Cayley balls -------------------------------------------------

def left_multiplication(ball, word: str) -> Isometry:
    """v -> word * v on a Cayley ball; leaving the ball raises TruncationError."""
    w = ball.multiply(IDENTITY, word)
    winv = ball.inverse(w)

    def mover(h):
        def f(v):
            out = ball.multiply(h, v)
            if out not in ball:
                raise TruncationError(f"{h}*{v} leaves the ball of radius {ball.radius}")
            return out
        return f

    return Isometry(mover(w), mover(winv), name=w)


def letter_swap(ball, perm: Sequence[int], name: str = "swap") -> Isometry:
    """The automorphism permuting generator letters (fixes the identity)."""
    G = ball.group
    f = G.letter_swap(perm)
    inv_perm = [0] * len(perm)
    for i, j in enumerate(perm):
        inv_perm[j] = i
    finv = G.letter_swap(inv_perm)
    return Isometry(lambda v: G.to_word(f(G.parse(v))), lambda v: G.to_word(finv(G.parse(v))), name=name)


def conjugate(h: Isometry, g: Isometry) -> Isometry:
    """h g h^-1."""
    return h.compose(g).compose(h.inverse())


def parse_isometry(ball, spec: str) -> Isometry:
    """``"a"``/``"ab"`` left multiplication, ``"swap"`` the letter swap, ``"conj h g"`` conjugation."""
    parts = spec.split()
    if not parts:
        raise JoinError("empty isometry spec")
    if parts[0] == "swap":
        n = len(ball.group.orders)
        perm = [int(x) for x in parts[1:]] if len(parts) > 1 else [1, 0] + list(range(2, n))
        return letter_swap(ball, perm)
    if parts[0] == "conj" and len(parts) == 3:
        return conjugate(left_multiplication(ball, parts[1]), left_multiplication(ball, parts[2]))
    if len(parts) == 1:
        return left_multiplication(ball, parts[0])
    raise JoinError(f"bad isometry spec {spec!r}")


def _radius(graph) -> int:
    r = getattr(graph, "radius", None)
    if r is not None:
        return int(r)
    return int(np.max(graph.dist_row(graph.x0)))


def _orbit(space: ExtendedSpace, g: Isometry, limit: int, bound: int):
    """x0, g x0, g^2 x0, ... while the orbit stays within ``bound`` of x0."""
    pts = [space.x0]
    for _ in range(limit):
        try:
            v = g(pts[-1])
        except (TruncationError, KeyError):
            break
        if v not in space.graph or space.dist(space.x0, v) > bound:
            break
        pts.append(v)
    return pts


# -- translation length --------------------------------------------------------

@dataclass
class TranslationLength:
    value: float
    method: str
    estimates: list = field(default_factory=list)
    cauchy: float = 0.0
    depth: int = 0


def translation_length(space: ExtendedSpace, g: Isometry, method: str = "limit") -> TranslationLength:
    if method == "limit":
        return _tl_limit(space, g)
    if method == "formula":
        return _tl_formula(space, g)
    raise JoinError(f"unknown method {method!r}")


def _tl_limit(space: ExtendedSpace, g: Isometry) -> TranslationLength:
    R = _radius(space.graph)
    orbit = _orbit(space, g, 4 * R, R)
    D = [space.dist(space.x0, v) for v in orbit]
    N = len(D) - 1
    if N < 2:
        raise TruncationError("orbit leaves the ball before two steps", D)
    ests = []
    for n in range(2, N + 1):
        m = n // 2
        ests.append((D[n] - D[m]) / (n - m))
    cauchy = abs(ests[-1] - ests[-2]) if len(ests) > 1 else INF
    return TranslationLength(ests[-1], "limit", ests, cauchy, N)


def fixed_points(space: ExtendedSpace, g: Isometry):
    """Attracting and repelling rays of g read off the orbit of x0."""
    R = _radius(space.graph)
    rays = []
    for h in (g, g.inverse()):
        orbit = _orbit(space, h, 4 * R, R - 2)
        last = orbit[-1]
        if last == space.x0 or space.dist(space.x0, last) < 2:
            raise JoinError(f"{g.name} does not move x0 far enough to find its fixed rays")
        rays.append(space.boundary(last, f"{h.name}^inf"))
    return rays[1], rays[0]


def _tl_formula(space: ExtendedSpace, g: Isometry) -> TranslationLength:
    gm, gp = fixed_points(space, g)
    res = space.dd_trace(gm, gp, g(space.x0), space.x0)
    return TranslationLength(res.value, "formula", res.trace, 0.0, res.depth)


def axis_point(space: ExtendedSpace, g: Isometry, s: float = 0.0) -> JoinPoint:
    gm, gp = fixed_points(space, g)
    return space.point_at(gm, gp, s, RAW)


# -- flow space ----------------------------------------------------------------

def flow_point(space: ExtendedSpace, a: BoundaryPoint, b: BoundaryPoint, t: float) -> JoinPoint:
    """[[a, b; t]] on a line between distinct boundary points (both parametrizations agree)."""
    if not (is_boundary(a) and is_boundary(b)) or a == b:
        raise JoinError("flow points live on lines between distinct boundary points")
    return space.point_at(a, b, t, RAW)


@dataclass
class OrbitReport:
    shifts: list
    max_deviation: float
    pairs: int


def flow_orbit_check(space: ExtendedSpace, x: JoinPoint, shifts: Iterable[float], eps: float = 1e-7) -> OrbitReport:
    rs = [float(r) for r in shifts]
    pts = [space.r_action(r, x) for r in rs]
    worst = 0.0
    n = 0
    for i in range(len(rs)):
        for j in range(i, len(rs)):
            worst = max(worst, abs(space.d_star(pts[i], pts[j], eps) - abs(rs[j] - rs[i])))
            n += 1
    return OrbitReport(rs, worst, n)


# -- synchronous convergence ---------------------------------------------------

@dataclass
class ConvergenceFit:
    ts: list
    d_cross: list
    d_star: list
    beta_gap: list
    N: float
    lam: float
    certifies: bool

    def bound(self, t: float) -> float:
        return self.N * self.lam ** t


def synchronized(space: ExtendedSpace, a, b, c, t: float, flavor: str = RAW):
    """[[b,c;t]]_a and [[a,c;t]]_b: the two lines into c with origins at the projections of a and b."""
    x = space.point_at(b, c, t + space.dd(b, c, a, space.x0), flavor)
    y = space.point_at(a, c, t + space.dd(a, c, b, space.x0), flavor)
    return x, y


def fit_exponential(ts: Sequence[float], ds: Sequence[float]) -> tuple:
    """(N, lambda) with lambda < 1 and d(t) <= N lambda^t on every sample, as tight as the grid allows."""
    ts = np.asarray(ts, dtype=float)
    ds = np.asarray(ds, dtype=float)
    if np.all(ds <= 0):
        return 0.0, 0.5
    best = None
    for lam in np.linspace(0.05, 0.95, 91):
        w = lam ** ts
        N = float(np.max(ds / w))
        slack = float(np.sum(N * w - ds))
        if best is None or slack < best[0]:
            best = (slack, N, float(lam))
    return best[1], best[2]


def exp_convergence_measure(
    space: ExtendedSpace, a, b, c, t_samples: Iterable[float], flavor: str = RAW, eps: float = 1e-7, with_dstar: bool = True
) -> ConvergenceFit:
    if a == c or b == c:
        raise JoinError("c must differ from a and b")
    ts, dx, ds, gaps = [], [], [], []
    for t in t_samples:
        x, y = synchronized(space, a, b, c, float(t), flavor)
        ts.append(float(t))
        dx.append(space.d_cross(x, y))
        ds.append(space.d_star(x, y, eps) if with_dstar else math.nan)
        gaps.append(abs(space.horofunction(c, x, y)))
    N, lam = fit_exponential(ts, dx)
    ok = all(d <= N * lam ** t * (1 + 1e-12) + 1e-12 for t, d in zip(ts, dx)) and lam < 1
    return ConvergenceFit(ts, dx, ds, gaps, N, lam, ok)


def trajectory_csv(fit: ConvergenceFit) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "d_cross", "d_star", "beta_gap"])
    for row in zip(fit.ts, fit.d_cross, fit.d_star, fit.beta_gap):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
