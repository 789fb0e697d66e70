"""Command-line interface: ``joinspace {gen,query,verify,asym}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .asymjoin import AsymJoin, UnionSpace, parse_action_spec, sweep_out
from .boundary import ExtendedSpace, InadmissibleError, TruncationError, is_boundary, parse_point
from .extsmooth import DomainError
from .flow import exp_convergence_measure, parse_isometry, trajectory_csv, translation_length
from .groups import PRESETS
from .hatmetric import HatMetric, read_hat_csv
from .hypgraph import (
    CayleyBall,
    GraphError,
    HypGraph,
    build_graph,
    cayley_ball,
    cycle_graph,
    path_graph,
    random_tree,
    tripod,
    write_edge_list,
)
from .join import RAW, SMOOTH, JoinPoint
from .mspace import FiniteMetricSpace
from .suites import ORDER, SUITES, Context, run_suite

SCHEMA = "joinspace/1"
EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_TRUNC = 0, 1, 2, 3

# named desk-scale graphs used when no --graph is given to ``verify --bundled``
BUNDLED = {
    "path-11": "path 11",
    "tripod-3": "tripod 3",
    "random-10": "random 10 0",
    "cycle-12": "cycle 12",
    "f2-r10": "f2:10",
    "z2*z3-r6": "z2*z3:6",
    "triangle-334-r6": "triangle 3 3 4:6",
}


class InputError(ValueError):
    pass


# -- number formatting ---------------------------------------------------------

def fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _encode(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        s = fmt(obj)
        return json.dumps(s) if s in ("inf", "-inf", "nan") else s
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item())
    return json.dumps(str(obj))


def dumps(obj) -> str:
    return _encode(obj) + "\n"


# -- graph loading ---------------------------------------------------------------

def _preset_radius(spec: str, radius: int | None):
    """'f2:10', 'f2' with --radius, 'triangle 3 3 4:6' -> (preset, radius) or None."""
    head, _, tail = spec.partition(":")
    key = head.strip().lower()
    if key in PRESETS or key.startswith("triangle"):
        r = int(tail) if tail else radius
        if r is None:
            raise InputError(f"preset {head!r} needs a radius (--radius or '{head}:R')")
        return head.strip(), r
    return None


def load_graph(source: str | None, radius: int | None = None) -> HypGraph | None:
    if source is None:
        return None
    if source.startswith("bundled:"):
        name = source[8:]
        if name not in BUNDLED:
            raise InputError(f"unknown bundled graph {name!r}; choose from {', '.join(BUNDLED)}")
        source = BUNDLED[name]
    p = Path(source)
    if p.is_file():
        text = p.read_text()
        for line in text.splitlines()[:3]:
            parts = line.lstrip("#").split()
            if line.startswith("#") and len(parts) >= 3 and parts[0] == "cayley":
                return cayley_ball(" ".join(parts[1:-1]), int(parts[-1]))
        return build_graph(text)
    pr = _preset_radius(source, radius)
    if pr is not None:
        return cayley_ball(*pr)
    return build_graph(source)


def load_hat(graph: HypGraph, spec: list | None) -> HatMetric:
    if not spec or spec[0] == "word":
        return HatMetric(graph)
    if spec[0] == "csv" and len(spec) == 2:
        return read_hat_csv(graph, Path(spec[1]).read_text())
    raise InputError("--hat takes 'word' or 'csv FILE'")


def _set_x0(graph: HypGraph, x0: str | None) -> None:
    if x0 is None:
        return
    v = parse_point(graph, x0)
    if is_boundary(v):
        raise InputError("--x0 must be a vertex")
    graph.x0 = v


# -- point syntax ----------------------------------------------------------------

def _merge_rays(tokens: list) -> list:
    out, i = [], 0
    while i < len(tokens):
        if tokens[i] == "ray" and i + 1 < len(tokens):
            out.append("ray " + tokens[i + 1])
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return out


def _ground(E: ExtendedSpace, tok: str):
    tok = tok.strip()
    if tok.startswith("~"):
        tok = "ray " + tok[1:]
    return parse_point(E.graph, tok)


def parse_join_point(E: ExtendedSpace, tok: str) -> JoinPoint:
    """``v``, ``ray v``, or ``a:b:t[:raw|smooth]`` (``~v`` for a ray inside the colon form)."""
    if tok.strip().startswith("{"):
        return E.from_json(tok)
    parts = tok.split(":")
    if len(parts) == 1:
        return E.ground_point(_ground(E, tok))
    if len(parts) in (3, 4):
        flavor = parts[3].strip().lower() if len(parts) == 4 else SMOOTH
        if flavor not in (RAW, SMOOTH):
            raise InputError(f"unknown flavor {flavor!r}")
        t = float(parts[2])
        return E.point_at(_ground(E, parts[0]), _ground(E, parts[1]), t, flavor)
    raise InputError(f"bad join point {tok!r}; use v, 'ray v' or a:b:t[:raw]")


def _need(args, n: int, name: str):
    if len(args) != n:
        raise InputError(f"{name} takes {n} arguments, got {len(args)}")


# -- queries ---------------------------------------------------------------------

def run_query(E: ExtendedSpace, name: str, raw_args: list, opts) -> dict:
    args = _merge_rays(list(raw_args))
    g = lambda t: _ground(E, t)
    res: dict = {"query": name, "args": args}
    if name in ("dd", "crossratio"):
        _need(args, 4, name)
        q = [g(t) for t in args]
        if name == "dd":
            tr = E.dd_trace(*q)
            res.update(value=tr.value, trace=list(tr.trace), depth=tr.depth)
        else:
            res["value"] = E.cross_ratio(*q)
    elif name == "gp":
        _need(args, 3, name)
        res["value"] = E.gp(*(g(t) for t in args))
    elif name in ("dcross", "dstar"):
        _need(args, 2, name)
        x, y = (parse_join_point(E, t) for t in args)
        if name == "dcross":
            res["value"] = E.d_cross(x, y)
        else:
            v, err = E.d_star_certified(x, y, opts.eps)
            res.update(value=v, error_bound=err)
    elif name == "project":
        _need(args, 3, name)
        a, a2, b = (g(t) for t in args)
        p = E.project(a, a2, b)
        res.update(value=p.coord, point=p.to_json())
    elif name == "horo":
        _need(args, 3, name)
        u = g(args[0])
        x, y = (parse_join_point(E, t) for t in args[1:])
        res["value"] = E.horofunction(u, x, y)
    elif name == "tl":
        _need(args, 1, name)
        if not isinstance(E.graph, CayleyBall):
            raise InputError("tl needs a Cayley ball graph (--graph f2:R)")
        h = parse_isometry(E.graph, args[0])
        methods = ["limit", "formula"] if opts.method == "both" else [opts.method]
        out = {}
        for m in methods:
            tl = translation_length(E, h, m)
            out[m] = {"value": tl.value, "estimates": list(tl.estimates), "cauchy": tl.cauchy, "depth": tl.depth}
        res.update(value=out[methods[0]]["value"], methods=out)
    elif name == "expconv":
        _need(args, 3, name)
        a, b, c = (g(t) for t in args)
        ts = [float(t) for t in opts.t.split(",")] if opts.t else [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
        fit = exp_convergence_measure(E, a, b, c, ts, opts.flavor, opts.eps, with_dstar=not opts.no_dstar)
        res.update(
            value=fit.certifies,
            N=fit.N,
            lam=fit.lam,
            trajectory=[{"t": t, "d_cross": dx, "d_star": ds, "beta_gap": bg} for t, dx, ds, bg in zip(fit.ts, fit.d_cross, fit.d_star, fit.beta_gap)],
        )
        res["_csv"] = trajectory_csv(fit)
    else:
        raise InputError(f"unknown query {name!r}")
    return res


# -- output ----------------------------------------------------------------------

def emit(obj: dict, fmt_name: str, out_path: str | None, text: str, csv_text: str) -> None:
    if fmt_name == "json":
        body = dumps(obj)
    elif fmt_name == "csv":
        body = csv_text
    else:
        body = text
    if out_path:
        Path(out_path).write_text(body)
    else:
        sys.stdout.write(body)


def _value_text(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, float)):
        return fmt(v)
    return str(v)


def _csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# -- commands --------------------------------------------------------------------

def cmd_gen(opts) -> int:
    if opts.kind == "tree":
        chosen = [x for x in (opts.path, opts.tripod, opts.random, opts.cycle) if x is not None]
        if len(chosen) != 1:
            raise InputError("gen tree takes exactly one of --path, --tripod, --random, --cycle")
        if opts.path is not None:
            g = path_graph(opts.path)
        elif opts.tripod is not None:
            g = tripod(opts.tripod)
        elif opts.cycle is not None:
            g = cycle_graph(opts.cycle)
        else:
            g = random_tree(opts.random, opts.seed)
        header = ""
    elif opts.kind == "cayley":
        if opts.preset is None or opts.radius is None:
            raise InputError("gen cayley needs --preset and --radius")
        g = cayley_ball(opts.preset, opts.radius)
        header = f"# cayley {opts.preset.lower()} {opts.radius}\n"
    else:
        if not opts.input:
            raise InputError("gen file needs an input file")
        g = build_graph(Path(opts.input).read_text())
        header = ""
    text = header + write_edge_list(g)
    info = {"schema": SCHEMA, "command": "gen", "kind": opts.kind, "name": g.name, "vertices": len(g), "edges": len(g.edges())}
    if opts.out:
        Path(opts.out).write_text(text)
        sys.stdout.write(dumps(info) if opts.format == "json" else f"{len(g)} vertices, {len(g.edges())} edges -> {opts.out}\n")
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def _space(opts) -> ExtendedSpace:
    graph = load_graph(opts.graph, opts.radius)
    if graph is None:
        raise InputError("no graph loaded (use --graph)")
    _set_x0(graph, opts.x0)
    hat = load_hat(graph, opts.hat)
    return ExtendedSpace(hat, graph.x0, graph, tol=opts.tol if opts.tol is not None else 1e-9)


def cmd_query(opts) -> int:
    E = _space(opts)
    res = run_query(E, opts.name, opts.args, opts)
    csv_text = res.pop("_csv", None) or _csv([["query", "value"], [opts.name, res["value"] if not isinstance(res["value"], bool) else str(res["value"]).lower()]])
    obj = {"schema": SCHEMA, "graph": E.graph.name, "x0": str(E.x0), **res}
    emit(obj, opts.format, opts.out, _value_text(res["value"]) + "\n", csv_text)
    return EXIT_PASS


def _verify_one(args):
    name, ctx = args
    return run_suite(name, ctx)


def cmd_verify(opts) -> int:
    names = ORDER if opts.suite == "all" else [opts.suite]
    for n in names:
        if n not in SUITES:
            raise InputError(f"unknown suite {n!r}; choose from all, {', '.join(ORDER)}")
    graph = load_graph(opts.graph, opts.radius)
    if graph is None and (opts.suite == "all" or SUITES[names[0]][1]):
        raise InputError("no graph loaded (use --graph)")
    hat = None
    if graph is not None:
        _set_x0(graph, opts.x0)
        hat = load_hat(graph, opts.hat)
    ctx = Context(graph, hat, seed=opts.seed, tol=opts.tol, scale=opts.scale)
    jobs = max(1, min(opts.jobs or os.cpu_count() or 1, len(names)))
    work = [(n, ctx) for n in names]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_verify_one, work))
    else:
        reports = [_verify_one(w) for w in work]
    passed = all(r.passed for r in reports)
    obj = {
        "schema": SCHEMA,
        "version": __version__,
        "graph": graph.name if graph is not None else None,
        "seed": opts.seed,
        "tol": opts.tol,
        "passed": passed,
        "reports": [r.to_json(timing=opts.timing) for r in reports],
    }
    lines = []
    rows = [["suite", "check", "max_violation", "tol", "cases", "passed"]]
    for r in reports:
        status = "skip" if r.skipped and not r.checks else ("pass" if r.passed else "FAIL")
        lines.append(f"{r.name}: {status} cases={r.cases} max_violation={fmt(r.max_violation)}" + (f" ({r.skipped})" if r.skipped else ""))
        for k, c in r.checks.items():
            rows.append([r.name, k, c.max_violation, c.tol, c.cases, str(c.passed).lower()])
    emit(obj, opts.format, opts.out, "\n".join(lines) + "\n", _csv(rows))
    return EXIT_PASS if passed else EXIT_FAIL


def _load_space(path: str) -> FiniteMetricSpace:
    """Graph file/spec, or a JSON object {points: [...], matrix: [[...]]}."""
    p = Path(path)
    text = p.read_text() if p.is_file() else path
    if text.strip().startswith("{") and '"matrix"' in text:
        obj = json.loads(text)
        return FiniteMetricSpace.from_matrix(obj["points"], obj["matrix"], x0=obj.get("x0"))
    return load_graph(path)


def cmd_asym(opts) -> int:
    Y1, Y2 = _load_space(opts.y1), _load_space(opts.y2)
    basepoints, acts = (None, [])
    if opts.action:
        p = Path(opts.action)
        basepoints, acts = parse_action_spec(p.read_text() if p.is_file() else opts.action, Y1, Y2)
    U = UnionSpace(Y1, Y2, basepoints, acts)
    ts = [float(t) for t in opts.t.split(",")]
    reps = sweep_out(AsymJoin(U), ts, sample=opts.sample, seed=opts.seed)
    obj = {
        "schema": SCHEMA,
        "cross_pairs": [[str(a), str(b)] for a, b in U.cross_pairs],
        "slices": [{"t": r.t, "size": r.size, "distortion_y1": r.distortion_y1, "distortion_y2": r.distortion_y2,
                    "gh_proxy_y1": r.gh_proxy_y1, "gh_proxy_y2": r.gh_proxy_y2} for r in reps],
    }
    text = "".join(f"t={fmt(r.t)} dist_Y1={fmt(r.distortion_y1)} dist_Y2={fmt(r.distortion_y2)}\n" for r in reps)
    rows = [["t", "distortion_y1", "distortion_y2"]] + [[r.t, r.distortion_y1, r.distortion_y2] for r in reps]
    emit(obj, opts.format, opts.out, text, _csv(rows))
    return EXIT_PASS


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph file, tree spec ('path 11'), preset ('f2:10') or bundled:NAME")
    common.add_argument("--hat", nargs="+", metavar="SPEC", help="'word' (default) or 'csv FILE'")
    common.add_argument("--x0", help="basepoint vertex")
    common.add_argument("--tol", type=float, help="tolerance (stabilization / suite override)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--radius", type=int, help="radius for Cayley presets")
    common.add_argument("--out", help="write output to FILE")
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")

    ap = argparse.ArgumentParser(prog="joinspace", description="Symmetric and asymmetric joins of metric spaces.")
    ap.add_argument("--version", action="version", version=f"joinspace {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a graph edge-list file")
    g.add_argument("kind", choices=["tree", "cayley", "file"])
    g.add_argument("input", nargs="?", help="input file for 'gen file'")
    g.add_argument("--path", type=int)
    g.add_argument("--tripod", type=int)
    g.add_argument("--random", type=int, metavar="N")
    g.add_argument("--cycle", type=int)
    g.add_argument("--preset")

    q = sub.add_parser("query", parents=[common], help="compute one quantity")
    q.add_argument("name", choices=["dd", "gp", "dcross", "dstar", "project", "horo", "crossratio", "tl", "expconv"])
    q.add_argument("args", nargs="*")
    q.add_argument("--eps", type=float, default=1e-7, help="d* error budget")
    q.add_argument("--method", choices=["limit", "formula", "both"], default="both")
    q.add_argument("--t", help="comma-separated t samples for expconv")
    q.add_argument("--flavor", choices=[RAW, SMOOTH], default=RAW)
    q.add_argument("--no-dstar", action="store_true", help="skip d* in expconv")

    v = sub.add_parser("verify", parents=[common], help="run property suites")
    v.add_argument("--suite", default="all", help="all or one of: " + ", ".join(ORDER))
    v.add_argument("--scale", type=float, default=1.0, help="sample-count multiplier")
    v.add_argument("--jobs", type=int, help="parallel workers (default: cpu count)")
    v.add_argument("--timing", action="store_true", help="include runtimes (makes the report non byte-stable)")

    s = sub.add_parser("asym", parents=[common], help="asymmetric join sweep-out")
    s.add_argument("--y1", required=True)
    s.add_argument("--y2", required=True)
    s.add_argument("--action", help="JSON action spec or file")
    s.add_argument("--t", default="-8,-4,0,4,8")
    s.add_argument("--sample", type=int, help="sample this many lines per slice")
    return ap


def _error(kind: str, exc: BaseException, fmt_name: str, code: int) -> int:
    obj = {"schema": SCHEMA, "error": kind, "message": str(exc)}
    if isinstance(exc, TruncationError):
        obj["iterates"] = [float(x) for x in exc.iterates]
    if fmt_name == "json":
        sys.stdout.write(dumps(obj))
    print(f"error ({kind}): {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    opts = build_parser().parse_args(argv)
    handler = {"gen": cmd_gen, "query": cmd_query, "verify": cmd_verify, "asym": cmd_asym}[opts.command]
    try:
        return handler(opts)
    except TruncationError as exc:
        return _error("truncation", exc, opts.format, EXIT_TRUNC)
    except InadmissibleError as exc:
        return _error("inadmissible", exc, opts.format, EXIT_INPUT)
    except (ValueError, KeyError, OSError, DomainError) as exc:
        return _error("domain", exc, opts.format, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
