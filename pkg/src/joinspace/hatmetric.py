"""Hat metrics on graphs: providers and a verifier for the decay contract.

A hat metric is any genuine metric on the vertices of a graph.  The verifier
measures how well it satisfies the properties the join constructions rely
on: exponential decay of double differences of unit pairs, decay for
separated geodesics, quasi-isometry to the word metric, additivity along
geodesics up to a constant, and the projection estimate.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .hypgraph import HypGraph, nearest_point_projection
from .mspace import MetricError, check_metric, estimate_equivalence


class HatMetric:
    """Metric values on the vertices of ``graph``.

    With ``values=None`` the word metric of the graph is used directly (this
    also works for Cayley balls whose vertex list is never materialized).
    """

    def __init__(self, graph: HypGraph, values: np.ndarray | None = None, automorphisms: Iterable = (), check: bool = True):
        self.graph = graph
        self.is_word = values is None
        self._M = None if values is None else np.asarray(values, dtype=float)
        if self._M is not None:
            n = len(graph)
            if self._M.shape != (n, n):
                raise MetricError(f"hat matrix has shape {self._M.shape}, expected {(n, n)}")
            if check:
                check_metric(self._M)
        for g in automorphisms:
            self.check_invariance(g)

    # the FiniteMetricSpace surface used by the join machinery
    @property
    def points(self):
        return self.graph.points

    @property
    def index(self):
        return self.graph.index

    @property
    def x0(self):
        return self.graph.x0

    def __len__(self):
        return len(self.graph)

    def __contains__(self, v):
        return v in self.graph

    @property
    def matrix(self) -> np.ndarray:
        return self.graph.matrix if self._M is None else self._M

    def dist(self, u, v) -> float:
        if self._M is None:
            return self.graph.dist(u, v)
        idx = self.graph.index
        return float(self._M[idx[u], idx[v]])

    def dist_row(self, u) -> np.ndarray:
        if self._M is None:
            return self.graph.dist_row(u)
        return self._M[self.graph.index[u]]

    def with_basepoint(self, x0) -> "HatMetric":
        out = object.__new__(HatMetric)
        out.__dict__.update(self.__dict__)
        out.graph = self.graph.with_basepoint(x0)
        return out

    def check_invariance(self, g, tol: float = 1e-12) -> None:
        """Raise unless d(g x, g y) = d(x, y) for the vertex map ``g``."""
        pts = self.points
        idx = self.graph.index
        perm = np.array([idx[g(v)] for v in pts])
        M = self.matrix
        if np.max(np.abs(M[np.ix_(perm, perm)] - M)) > tol:
            raise MetricError("hat metric is not invariant under the supplied automorphism")

    def scaled(self, factor: float) -> "HatMetric":
        return HatMetric(self.graph, factor * np.asarray(self.matrix), check=False)


def hat_provider_word(graph: HypGraph) -> HatMetric:
    """The word metric as hat metric (exact contract provider on trees)."""
    return HatMetric(graph)


def read_hat_csv(graph: HypGraph, text: str) -> HatMetric:
    """Parse a CSV matrix whose header and first column are vertex ids."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise MetricError("empty hat-metric CSV")
    header = [h.strip() for h in rows[0][1:]]
    lookup = {str(v): v for v in graph.points}
    try:
        cols = [lookup[h] for h in header]
    except KeyError as exc:
        raise MetricError(f"unknown vertex {exc.args[0]!r} in hat-metric CSV") from None
    n = len(graph)
    if len(cols) != n:
        raise MetricError("hat-metric CSV must cover every vertex")
    M = np.full((n, n), np.nan)
    idx = graph.index
    for r in rows[1:]:
        if not r:
            continue
        v = lookup.get(r[0].strip())
        if v is None:
            raise MetricError(f"unknown vertex {r[0]!r} in hat-metric CSV")
        for c, val in zip(cols, r[1:]):
            M[idx[v], idx[c]] = float(val)
    if np.isnan(M).any():
        raise MetricError("hat-metric CSV is missing entries")
    return HatMetric(graph, M)


def write_hat_csv(hat: HatMetric) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    pts = hat.points
    w.writerow([""] + [str(v) for v in pts])
    M = hat.matrix
    for i, v in enumerate(pts):
        w.writerow([str(v)] + [repr(float(x)) for x in M[i]])
    return out.getvalue()


@dataclass
class DecayFit:
    """Constants (C, mu) with profile[n] <= C mu^n for every measured n."""

    C: float
    mu: float
    profile: dict
    zero_from: int | None

    def bound(self, n: float) -> float:
        return self.C * self.mu ** n


def fit_decay(profile: dict, mu_floor: float = 0.05, mu_ceil: float = 0.95) -> DecayFit:
    """Log-linear least squares on positive maxima, then inflate C to certify."""
    ns = sorted(profile)
    pos = [(n, profile[n]) for n in ns if profile[n] > 0]
    if len(pos) >= 2:
        x = np.array([n for n, _ in pos], dtype=float)
        y = np.log([v for _, v in pos])
        slope = np.polyfit(x, y, 1)[0]
        mu = float(np.clip(math.exp(slope), mu_floor, mu_ceil))
    else:
        mu = 0.5
    C = max([0.0] + [v / mu ** n for n, v in pos])
    zero_from = None
    for n in reversed(ns):
        if profile[n] > 0:
            break
        zero_from = n
    return DecayFit(C, mu, dict(profile), zero_from)


@dataclass
class HatContractReport:
    A: float
    B: float
    C: float
    mu: float
    L: float
    mu2: float
    Cprime: float
    P: float
    c_profile: dict
    l_profile: dict
    c_zero_from: int | None
    fit_residuals: dict = field(default_factory=dict)
    exhaustive: bool = True


def _unit_pairs(graph: HypGraph) -> np.ndarray:
    idx = graph.index
    pairs = [(i, i) for i in range(len(graph))]
    for u, v in graph.edges():
        pairs.append((idx[u], idx[v]))
        pairs.append((idx[v], idx[u]))
    return np.array(pairs)


def unit_pair_profile(hat: HatMetric, min_sep: int = 0) -> dict:
    """max |<a,a'|b,b'>| over unit pairs, grouped by the word distance d(a,b)."""
    graph = hat.graph
    W = graph.matrix
    M = hat.matrix
    P = _unit_pairs(graph)
    a, a2 = P[:, 0], P[:, 1]
    profile: dict = {}
    for b, b2 in P:
        dd = 0.5 * np.abs(M[a, b] - M[a2, b] - M[a, b2] + M[a2, b2])
        dist = W[a, b].astype(int)
        for n in np.unique(dist):
            if n < min_sep:
                continue
            v = float(dd[dist == n].max())
            profile[int(n)] = max(profile.get(int(n), 0.0), v)
    return profile


def separated_profile(hat: HatMetric, samples: int = 4000, seed: int = 0) -> dict:
    """max |<a,a'|b,b'>| grouped by the word distance between chosen geodesics."""
    graph = hat.graph
    rng = random.Random(seed)
    pts = graph.points
    W = graph.matrix
    idx = graph.index
    delta = graph.delta
    profile: dict = {}
    geo = {}

    def path(u, v):
        if (u, v) not in geo:
            geo[(u, v)] = np.array([idx[x] for x in graph.geodesic(u, v)])
        return geo[(u, v)]

    for _ in range(samples):
        a, a2, b, b2 = (rng.choice(pts) for _ in range(4))
        pa, pb = path(a, a2), path(b, b2)
        sep = int(W[np.ix_(pa, pb)].min())
        if sep < 2 * delta:
            continue
        v = abs(hat_dd(hat, a, a2, b, b2))
        profile[sep] = max(profile.get(sep, 0.0), v)
    return profile


def hat_dd(hat, a, a2, b, b2) -> float:
    d = hat.dist
    return 0.5 * (d(a, b) - d(a2, b) - d(a, b2) + d(a2, b2))


def hat_gp(hat, a, b, c) -> float:
    d = hat.dist
    return 0.5 * (d(a, c) + d(b, c) - d(a, b))


def geodesic_additivity(hat: HatMetric) -> float:
    """C' = max |d(u,v) - d(u,w) - d(w,v)| over w on word geodesics from u to v."""
    W = hat.graph.matrix
    M = hat.matrix
    worst = 0.0
    for u in range(len(W)):
        on = W[u][:, None] + W == W[u][None, :]  # on[w, v]: w between u and v
        err = np.abs(M[u][None, :] - M[u][:, None] - M)
        if on.any():
            worst = max(worst, float(err[on].max()))
    return worst


def projection_constant(hat: HatMetric, samples: int = 3000, seed: int = 0) -> float:
    """max |<b|b'>_{a0} - d(a0, b0)| for b0 a nearest point of a0 on [b, b']."""
    graph = hat.graph
    rng = random.Random(seed)
    pts = graph.points
    worst = 0.0
    exhaustive = len(pts) ** 3 <= samples
    triples = (
        ((a, b, c) for a in pts for b in pts for c in pts)
        if exhaustive
        else ((rng.choice(pts), rng.choice(pts), rng.choice(pts)) for _ in range(samples))
    )
    for a0, b, b2 in triples:
        path = graph.geodesic(b, b2)
        g = hat_gp(hat, b, b2, a0)
        for b0 in nearest_point_projection(graph, path, a0):
            worst = max(worst, abs(g - hat.dist(a0, b0)))
    return worst


def verify_contract(hat: HatMetric, samples: int = 4000, seed: int = 0, c_min_sep: int = 2) -> HatContractReport:
    """Measure the contract constants of a candidate hat metric.

    The unit-pair decay (C, mu) is fitted on word distances >= ``c_min_sep``;
    the full per-distance profile is reported alongside.
    """
    graph = hat.graph
    W = graph.matrix
    M = hat.matrix
    iu = np.triu_indices(len(W), 1)
    eq = estimate_equivalence(M[iu], W[iu], kind="timesplus")
    cprof = unit_pair_profile(hat)
    cfit = fit_decay({n: v for n, v in cprof.items() if n >= c_min_sep})
    lprof = separated_profile(hat, samples=samples, seed=seed)
    lfit = fit_decay(lprof) if lprof else DecayFit(0.0, 0.5, {}, None)
    return HatContractReport(
        A=eq.A,
        B=eq.B,
        C=cfit.C,
        mu=cfit.mu,
        L=lfit.C,
        mu2=lfit.mu,
        Cprime=geodesic_additivity(hat),
        P=projection_constant(hat, samples=samples, seed=seed),
        c_profile=cprof,
        l_profile=lprof,
        c_zero_from=cfit.zero_from,
        fit_residuals={"equivalence": eq.max_violation},
        exhaustive=len(graph) <= 200,
    )


@dataclass
class AbbaFit:
    lam: float
    T: float
    samples: int
    violations_below_T: int


def fit_abba(hat: HatMetric, lam: float = 0.9, samples: int = 3000, seed: int = 0) -> AbbaFit:
    """Smallest threshold T such that max(<u,a|b,c>, <u,b|a,c>) >= T forces
    |<u,c|a,b>| <= lam^max on the sampled quadruples."""
    rng = random.Random(seed)
    pts = hat.points
    T = 0.0
    below = 0
    for _ in range(samples):
        u, a, b, c = (rng.choice(pts) for _ in range(4))
        m = max(hat_dd(hat, u, a, b, c), hat_dd(hat, u, b, a, c))
        lhs = abs(hat_dd(hat, u, c, a, b))
        if lhs > lam ** m + 1e-12:
            below += 1
            T = max(T, m + 0.5)
    return AbbaFit(lam, T, samples, below)


def dd_separation_constants(hat: HatMetric, A: float, samples: int = 2000, seed: int = 0) -> float:
    """Smallest C with d(alpha, beta) >= max(<b',a|a',b>, <b',a'|a,b>)/A - C on samples."""
    graph = hat.graph
    rng = random.Random(seed)
    pts = graph.points
    W = graph.matrix
    idx = graph.index
    C = 0.0
    for _ in range(samples):
        a, a2, b, b2 = (rng.choice(pts) for _ in range(4))
        pa = [idx[x] for x in graph.geodesic(a, a2)]
        pb = [idx[x] for x in graph.geodesic(b, b2)]
        sep = float(W[np.ix_(pa, pb)].min())
        m = max(hat_dd(hat, b2, a, a2, b), hat_dd(hat, b2, a2, a, b))
        C = max(C, m / A - sep)
    return C
