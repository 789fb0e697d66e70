"""Property suites run by ``joinspace verify`` and by the acceptance tests.

Each suite returns a ``SuiteReport`` holding one entry per check: the largest
violation found and the tolerance it is held to.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

import networkx as nx
import numpy as np
from scipy.integrate import quad

from . import extsmooth as es
from .asymjoin import bundled_examples, monotone_sweep, sweep_out
from .boundary import ExtendedSpace, TruncationError, boundary_point, is_boundary, structural_infinity
from .flow import exp_convergence_measure, parse_isometry, translation_length
from .hatmetric import HatMetric, geodesic_additivity, projection_constant, unit_pair_profile
from .hypgraph import CayleyBall, HypGraph
from .join import RAW, SMOOTH, Isometry, JoinSpace

SUITES: dict = {}


@dataclass
class Check:
    max_violation: float
    tol: float
    cases: int

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


@dataclass
class SuiteReport:
    name: str
    seed: int
    checks: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    skipped: str = ""
    runtime: float = 0.0

    @property
    def cases(self) -> int:
        return sum(c.cases for c in self.checks.values())

    @property
    def max_violation(self) -> float:
        return max((c.max_violation for c in self.checks.values()), default=0.0)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def add(self, name: str, violations, tol: float) -> None:
        v = [float(x) for x in np.ravel(np.asarray(violations, dtype=float))] if np.size(violations) else [0.0]
        if name in self.checks:
            old = self.checks[name]
            self.checks[name] = Check(max(old.max_violation, max(v)), tol, old.cases + len(v))
        else:
            self.checks[name] = Check(max(v), tol, len(v))

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "suite": self.name,
            "seed": self.seed,
            "cases": self.cases,
            "max_violation": self.max_violation,
            "passed": self.passed,
            "checks": {k: {"max_violation": c.max_violation, "tol": c.tol, "cases": c.cases, "passed": c.passed} for k, c in self.checks.items()},
            "constants": self.constants,
        }
        if self.skipped:
            out["skipped"] = self.skipped
        if timing:
            out["runtime"] = self.runtime
        return out


@dataclass
class Context:
    graph: HypGraph | None
    hat: HatMetric | None
    seed: int = 0
    tol: float | None = None
    scale: float = 1.0  # multiplies sample counts

    def n(self, base: int) -> int:
        return max(1, int(round(base * self.scale)))

    def t(self, default: float) -> float:
        return default if self.tol is None else self.tol


def suite(name: str, needs_graph: bool = True):
    def deco(fn: Callable):
        SUITES[name] = (fn, needs_graph)
        return fn
    return deco


def run_suite(name: str, ctx: Context) -> SuiteReport:
    fn, _ = SUITES[name]
    rep = SuiteReport(name, ctx.seed)
    t0 = time.perf_counter()
    fn(ctx, rep)
    rep.runtime = time.perf_counter() - t0
    return rep


# -- helpers -------------------------------------------------------------------

def random_join_point(J: JoinSpace, rng: random.Random, pts=None, flavor=None):
    pts = pts if pts is not None else J.ground
    a, b = rng.choice(pts), rng.choice(pts)
    if a == b:
        return J.ground_point(a)
    line = J.make_line(a, b)
    t = rng.uniform(line.alpha - 1.0, line.beta + 1.0)
    return J.point_at(a, b, t, flavor or rng.choice([RAW, SMOOTH]))


def point_gap(J: JoinSpace, p, q) -> float:
    """0 for the same join point; otherwise d-cross between them."""
    if p == q:
        return 0.0
    return J.d_cross(p, q)


def graph_automorphisms(graph: HypGraph, limit: int = 6) -> list:
    """A few automorphisms found by graph matching (identity excluded when others exist)."""
    if isinstance(graph, CayleyBall):
        out = [parse_isometry(graph, "swap")] if len(graph.group.orders) >= 2 and graph.group.orders[0] == graph.group.orders[1] else []
        return out
    G = graph.to_networkx()
    out = []
    for m in itertools.islice(nx.algorithms.isomorphism.GraphMatcher(G, G).isomorphisms_iter(), limit + 1):
        if all(k == v for k, v in m.items()):
            continue
        out.append(Isometry.from_permutation(graph, dict(m), name=f"aut{len(out)}"))
        if len(out) >= limit:
            break
    return out


def _far_vertices(graph: HypGraph, k: int) -> list:
    """k vertices spread out by farthest-point selection from x0."""
    chosen = []
    row = np.asarray(graph.dist_row(graph.x0), dtype=float)
    dmin = row.copy()
    pts = graph.points
    for _ in range(k):
        i = int(np.argmax(dmin))
        chosen.append(pts[i])
        dmin = np.minimum(dmin, np.asarray(graph.dist_row(pts[i]), dtype=float))
    return chosen


# -- suites --------------------------------------------------------------------

@suite("smoothing", needs_graph=False)
def s_smoothing(ctx: Context, rep: SuiteReport, n: int | None = None):
    rng = np.random.default_rng(ctx.seed)
    n = n or ctx.n(400)
    quad_err, der_err, low_viol, nonexp, shift = [], [], [], [], []
    for _ in range(n):
        a = rng.uniform(-10, 10)
        b = a + rng.exponential(4.0)
        t = rng.uniform(a - 8, b + 8)
        v = es.theta_prime(a, b, t)
        f = lambda r: es.theta(a, b, r + t) * 0.5 * math.exp(-abs(r))
        brk = sorted({0.0, a - t, b - t})
        edges = [-60.0] + brk + [60.0]
        ref = sum(quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:]))
        quad_err.append(abs(v - ref))
        h = 1e-6
        fd = (es.theta_prime(a, b, t + h) - es.theta_prime(a, b, t - h)) / (2 * h)
        der_err.append(abs(fd - es.theta_prime_deriv(a, b, t)))
        eps_max = 0.5 * (1 - math.exp(a - b))
        eps = rng.uniform(0, eps_max)
        if a + eps <= v <= b - eps:
            low_viol.append(max(0.0, eps - es.theta_prime_deriv(a, b, t)))
        s2 = rng.uniform(a - 8, b + 8)
        nonexp.append(max(0.0, abs(es.theta_prime(a, b, s2) - v) - abs(s2 - t)))
        c = rng.uniform(-5, 5)
        shift.append(abs(es.theta_prime(a + c, b + c, t + c) - (v + c)))
        shift.append(abs(es.theta(a + c, b + c, t + c) - (es.theta(a, b, t) + c)))
    rep.add("closed-form-vs-quadrature", quad_err, ctx.t(1e-8))
    rep.add("derivative-vs-central-difference", der_err, ctx.t(1e-5))
    rep.add("lower-bound", low_viol, 0.0)
    rep.add("non-expansion", nonexp, 1e-12)
    rep.add("shift-invariance", shift, 1e-12)
    xs = rng.exponential(3.0, size=(n, 2))
    rep.add("exp-lipschitz", np.maximum(0, np.abs(np.exp(-xs[:, 0]) - np.exp(-xs[:, 1])) - np.abs(xs[:, 0] - xs[:, 1])), 0.0)


def dd_tensor_checks(M: np.ndarray, rep: SuiteReport, tol: float):
    """All double-difference identities over every quadruple (and quintuple) of indices."""
    n = len(M)
    A = M[:, None, :, None]
    A2b = M[None, :, :, None]
    Ab2 = M[:, None, None, :]
    A2b2 = M[None, :, None, :]
    DD = 0.5 * (A - A2b - Ab2 + A2b2)  # DD[a, a2, b, b2]
    rep.add("symmetry", np.abs(DD - DD.transpose(2, 3, 0, 1)), tol)
    rep.add("antisymmetry", np.abs(DD + DD.transpose(1, 0, 2, 3)), tol)
    rep.add("antisymmetry-right", np.abs(DD + DD.transpose(0, 1, 3, 2)), tol)
    idx = np.arange(n)
    rep.add("vanishing", np.concatenate([np.abs(DD[idx, idx]).ravel(), np.abs(DD[:, :, idx, idx]).ravel()]), tol)
    # additivity over a'' : DD[a,a',b,b'] + DD[a',a'',b,b'] = DD[a,a'',b,b']
    worst = 0.0
    for a in range(n):
        lhs = DD[a][:, None, :, :] + DD[:, :, :, :]
        rhs = DD[a][None, :, :, :]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    rep.add("additivity", [worst], tol)
    # cyclic: <a,b|c,x> + <b,c|a,x> + <c,a|b,x> = 0
    cyc = DD + DD.transpose(1, 2, 0, 3) + DD.transpose(2, 0, 1, 3)
    rep.add("cyclic", np.abs(cyc), tol)
    # <a,b|x,y> = <b|x>_a - <b|y>_a
    GP = 0.5 * (M[:, :, None] + M[:, None, :] - M[None, :, :])  # GP[c, a, b] = <a|b>_c
    rel = DD - (GP[:, :, :, None] - GP[:, :, None, :])
    rep.add("gromov-relation", np.abs(rel), tol)
    rep.add("gromov-nonnegative", np.maximum(0, -GP), tol)


@suite("dd-identities")
def s_dd(ctx: Context, rep: SuiteReport):
    pts = list(ctx.hat.points)
    if len(pts) > 24:
        rng = np.random.default_rng(ctx.seed)
        pts = [pts[i] for i in np.sort(rng.choice(len(pts), 24, replace=False))]
        rep.constants["sampled_vertices"] = 24
    M = np.array([[ctx.hat.dist(u, v) for v in pts] for u in pts], dtype=float)
    dd_tensor_checks(M, rep, ctx.t(1e-12))


def _join(ctx: Context) -> JoinSpace:
    return JoinSpace(ctx.hat, ctx.graph.x0, ctx.graph)


@suite("join-coherence")
def s_join(ctx: Context, rep: SuiteReport, pairs: int | None = None, eps: float = 1e-7):
    J = _join(ctx)
    rng = random.Random(ctx.seed)
    pts = J.ground
    pairs = pairs or ctx.n(40)
    ground = []
    for _ in range(min(pairs, 20)):
        a, b = rng.choice(pts), rng.choice(pts)
        x, y = J.ground_point(a), J.ground_point(b)
        d = J.metric.dist(a, b)
        ground.append(max(abs(J.d_star(x, y, eps) - d), abs(J.d_cross(x, y) - d)))
    rep.add("ground-agreement", ground, ctx.t(1e-6))
    gap, omega, bilip, same = [], [], [], []
    for _ in range(pairs):
        x, y = random_join_point(J, rng), random_join_point(J, rng)
        dc, (ds, err) = J.d_cross(x, y), J.d_star_certified(x, y, eps)
        gap.append(max(0.0, abs(ds - dc) - 2.0))
        omega.append(max(0.0, dc - es.omega_inv(ds) - 1e-6))
        r = rng.choice([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
        ds_r = J.d_star(J.r_action(r, x), J.r_action(r, y), eps)
        bilip.append(max(0.0, ds_r - math.exp(abs(r)) * ds - 2e-6))
        a, b = rng.choice(pts), rng.choice(pts)
        if a != b:
            line = J.make_line(a, b)
            s, t = rng.uniform(line.alpha, line.beta), rng.uniform(line.alpha, line.beta)
            p, q = J.point_at(a, b, s, RAW), J.point_at(a, b, t, RAW)
            brute = float(np.max(np.abs(J.beta_array(p, q))))
            same.append(abs(brute - abs(p.coord - q.coord)))
    rep.add("dstar-dcross-gap", gap, 0.0)
    rep.add("omega-comparison", omega, 0.0)
    rep.add("bi-lipschitz", bilip, 0.0)
    rep.add("same-line-isometry", same, ctx.t(1e-12))


@suite("dstar-dcross-gap")
def s_gap(ctx: Context, rep: SuiteReport, pairs: int | None = None):
    J = _join(ctx)
    rng = random.Random(ctx.seed)
    gaps = []
    for _ in range(pairs or ctx.n(60)):
        x, y = random_join_point(J, rng), random_join_point(J, rng)
        gaps.append(abs(J.d_star(x, y) - J.d_cross(x, y)))
    rep.constants["max_gap"] = max(gaps)
    rep.add("gap-at-most-2", [max(0.0, g - 2.0) for g in gaps], 0.0)


@suite("actions")
def s_actions(ctx: Context, rep: SuiteReport, samples: int | None = None):
    J = _join(ctx)
    rng = random.Random(ctx.seed)
    pts = J.ground
    autos = graph_automorphisms(ctx.graph) or [Isometry.identity()]
    rep.constants["automorphisms"] = len(autos)
    comm, anti, star_g, base_r, base_g = [], [], [], [], []
    for _ in range(samples or ctx.n(200)):
        x = random_join_point(J, rng)
        r = rng.uniform(-3, 3)
        g = rng.choice(autos)
        comm.append(point_gap(J, J.isom_action(g, J.r_action(r, x)), J.r_action(r, J.isom_action(g, x))))
        anti.append(point_gap(J, J.star(J.r_action(r, x)), J.r_action(-r, J.star(x))))
        star_g.append(point_gap(J, J.isom_action(g, J.star(x)), J.star(J.isom_action(g, x))))
        x1 = rng.choice(pts)
        J1 = J.with_basepoint(x1)
        xb = J.rebase(x, x1)
        base_r.append(point_gap(J1, J.rebase(J.r_action(r, x), x1), J1.r_action(r, xb)))
        base_g.append(point_gap(J1, J.rebase(J.isom_action(g, x), x1), J1.isom_action(g, xb)))
    tol = ctx.t(1e-9)
    rep.add("r-isom-commute", comm, tol)
    rep.add("star-r-anticommute", anti, tol)
    rep.add("star-isom-commute", star_g, tol)
    rep.add("basepoint-r", base_r, tol)
    rep.add("basepoint-isom", base_g, tol)


@suite("hat-contract")
def s_hat(ctx: Context, rep: SuiteReport):
    g = ctx.graph
    if len(g) > 200:
        rep.skipped = "more than 200 vertices"
        return
    prof = unit_pair_profile(ctx.hat, min_sep=2)
    rep.constants["c_profile"] = {str(k): v for k, v in sorted(prof.items())}
    if g.is_tree():
        rep.add("tree-unit-pairs-vanish", list(prof.values()) or [0.0], ctx.t(1e-12))
        if all(len(g.neighbors(v)) <= 2 for v in g.points):
            rep.add("path-Cprime", [geodesic_additivity(ctx.hat)], ctx.t(1e-12))
            rep.add("path-P", [projection_constant(ctx.hat, samples=len(g) ** 3)], ctx.t(1e-12))
    else:
        rep.constants["Cprime"] = geodesic_additivity(ctx.hat)


def _ray_targets(ctx: Context, k: int = 3) -> list:
    """Up to k vertices whose rays from x0 end at distinct boundary points."""
    g = ctx.graph
    if isinstance(g, CayleyBall) and not any(g.group.orders):
        G = g.group
        words = []
        for i in range(len(G.orders)):
            letter = G.to_word(((i, 1),))
            w = ""
            while G.length(G.parse(w + letter)) <= g.radius and len(w) < g.radius:
                w += letter
                if G.length(G.parse(w)) < len(w):
                    break
            words.append(w)
        return words[:k]
    row = np.asarray(g.dist_row(g.x0), dtype=float)
    order = sorted(range(len(row)), key=lambda i: (-row[i], i))
    out, rays = [], []
    for i in order:
        if row[i] < 1 or len(out) >= k:
            break
        b = boundary_point(g, g.points[i])
        if all(b != r for r in rays):
            out.append(g.points[i])
            rays.append(b)
    return out


@suite("boundary")
def s_boundary(ctx: Context, rep: SuiteReport):
    E = ExtendedSpace(ctx.hat, ctx.graph.x0, ctx.graph, tol=ctx.t(1e-9))
    targets = _ray_targets(ctx, 3)
    B = [boundary_point(ctx.graph, v) for v in targets]
    if len(B) < 2 or B[0] == B[1]:
        rep.skipped = "fewer than two distinct rays"
        return
    A, Bp = B[0], B[1]
    rng = random.Random(ctx.seed)
    pts = [v for v in ctx.graph.points if ctx.graph.dist(ctx.graph.x0, v) <= 1]
    u, v = rng.choice(pts), rng.choice(pts)
    # structural infinities for the trivial side-pair patterns
    patterns = [
        ((A, u, v, A), math.inf), ((u, A, A, v), math.inf), ((A, Bp, Bp, A), math.inf), ((A, Bp, Bp, A), math.inf),
        ((A, u, A, v), -math.inf), ((u, A, v, A), -math.inf), ((A, Bp, A, Bp), -math.inf), ((A, u, A, Bp), -math.inf),
    ]
    wrong = [0.0 if E.dd(*q) == want else 1.0 for q, want in patterns]
    rep.add("structural-infinities", wrong, 0.0)
    # ratio-0 traces on trees: once settled the iterates are constant
    traces, cr = [], []
    trunc = 0
    for q in [(A, u, v, Bp), (A, Bp, u, v), (u, A, Bp, v), (A, ctx.graph.x0, ctx.graph.x0, Bp)]:
        try:
            res = E.dd_trace(*q)
            val = E.cross_ratio(*q)
        except TruncationError:
            trunc += 1
            continue
        if ctx.graph.delta == 0:
            tail = res.trace[-3:]
            traces.append(max(abs(x - tail[-1]) for x in tail))
        cr.append(abs(val - math.exp(res.value)) / max(1.0, abs(val)))
    if traces:
        rep.add("ratio-zero-traces", traces, 0.0)
    rep.add("cross-ratio", cr, 1e-12)
    rep.constants["depth_consumed"] = E.last_depth
    rep.constants["truncated_quadruples"] = trunc


@suite("horofunction")
def s_horo(ctx: Context, rep: SuiteReport, samples: int | None = None):
    g = ctx.graph
    E = ExtendedSpace(ctx.hat, g.x0, g, tol=ctx.t(1e-9))
    targets = _ray_targets(ctx, 2)
    A = boundary_point(g, targets[0])
    B = boundary_point(g, targets[1]) if len(targets) > 1 else None
    rng = random.Random(ctx.seed)
    R = max(1, int(np.max(g.dist_row(g.x0))) // 3)
    core = [v for v in g.points if g.dist(g.x0, v) <= R]
    autos = graph_automorphisms(g) if not isinstance(g, CayleyBall) else []
    cocycle, z2, iso, hs = [], [], [], []
    trunc = 0
    for _ in range(samples or ctx.n(60)):
        u = rng.choice(core + [A])
        x, y, z = (random_join_point(E, rng, core) for _ in range(3))
        try:
            bxy, byz, bxz = E.horofunction(u, x, y), E.horofunction(u, y, z), E.horofunction(u, x, z)
            cocycle.append(abs(bxy + byz - bxz))
            z2.append(abs(E.horofunction(u, E.star(x), y) - bxy))
            if B is None:
                continue
            s, t = rng.uniform(-3, 3), rng.uniform(-3, 3)
            p, q = E.point_at(A, B, s, RAW), E.point_at(A, B, t, RAW)
            iso.append(abs(abs(E.horofunction(A, p, q)) - E.d_cross(p, q)))
        except TruncationError:
            trunc += 1
    for _ in range(max(1, (samples or ctx.n(60)) // 10)):
        a, b = rng.choice(core), rng.choice(core)
        try:
            hs.append(E.horosphere_check(A, a, b))
        except TruncationError:
            trunc += 1
    tol = ctx.t(1e-9)
    rep.add("cocycle", cocycle, tol)
    rep.add("z2-invariance", z2, tol)
    rep.add("line-isometry", iso, tol)
    rep.add("horosphere", hs, tol)
    rep.constants["truncated_samples"] = trunc


@suite("flow")
def s_flow(ctx: Context, rep: SuiteReport):
    g = ctx.graph
    if not isinstance(g, CayleyBall) or any(g.group.orders):
        rep.skipped = "needs a free-group Cayley ball"
        return
    E = ExtendedSpace(ctx.hat, g.x0, g, tol=ctx.t(1e-9))
    from .flow import axis_point, flow_orbit_check, flow_point
    for w, want in (("a", 1.0), ("aa", 2.0), ("ab", 2.0)):
        if g.radius < 2 * len(w) + 4:
            continue
        h = parse_isometry(g, w)
        lim = translation_length(E, h, "limit").value
        form = translation_length(E, h, "formula").value
        rep.add("limit-vs-formula", [abs(lim - form)], ctx.t(1e-6))
        rep.add("oracle-value", [abs(lim - want)], ctx.t(1e-6))
        z = axis_point(E, h, 0.25)
        rep.add("axis-displacement", [abs(E.d_star(z, E.isom_action(h, z)) - lim)], ctx.t(1e-6))
    a, b = _ray_targets(ctx, 2)
    x = flow_point(E, boundary_point(g, a), boundary_point(g, b), 0.0)
    rep.add("orbit-isometry", [flow_orbit_check(E, x, [0, 1, 5]).max_deviation], ctx.t(1e-6))


@suite("expconv")
def s_expconv(ctx: Context, rep: SuiteReport):
    g = ctx.graph
    E = ExtendedSpace(ctx.hat, g.x0, g)
    a, b, c = _far_vertices(g, 3)
    ts = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0]
    fit = exp_convergence_measure(E, a, b, c, ts, with_dstar=False)
    rep.constants.update({"N": fit.N, "lambda": fit.lam, "vertices": [str(a), str(b), str(c)]})
    rep.add("certifies", [0.0 if fit.certifies else 1.0], 0.0)
    if g.is_tree():
        rep.add("tree-zero-for-nonnegative-t", [d for t, d in zip(fit.ts, fit.d_cross) if t >= 0], 0.0)


@suite("asym", needs_graph=False)
def s_asym(ctx: Context, rep: SuiteReport):
    ex = bundled_examples()
    u = ex["two-point"]
    want = [1.0, 2.0, 1.0]
    got = [u.dist((1, "p0"), (2, "q0")), u.dist((1, "p1"), (2, "q0")), u.dist((1, "p0"), (1, "p1"))]
    rep.add("worked-example", [abs(x - y) for x, y in zip(got, want)], 0.0)
    for name, U in ex.items():
        rs = sweep_out(U, [-8, -4, 0, 4, 8])
        rep.add("monotone-sweep", [0.0 if monotone_sweep(rs) else 1.0], 0.0)
        rep.constants[name] = [[r.t, r.distortion_y1, r.distortion_y2] for r in rs]


ORDER = ["smoothing", "dd-identities", "join-coherence", "dstar-dcross-gap", "actions", "hat-contract",
         "boundary", "horofunction", "flow", "expconv", "asym"]
