"""Command line harness: generate, decompose, solve, color, verify, bench.

Exit codes: 0 when every output verified, 1 on a verification failure,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from .colorings import defective_coloring, frugal_coloring, list_coloring, random_lists, verify_coloring
from .decomp import ball_carve, ball_carve_distributed, validate_decomposition
from .exceptions import DistLLLError, ParameterError, VerificationError
from .families import FAMILIES, make_instance
from .generators import GraphSpec, generate_graph
from .graph import Graph, format_edgelist, parse_edgelist
from .lll import LLLInstance, PartialAssignment, violated_events
from .runtime import RoundLedger, SeedContext
from .solvers import _jsonable, solve

TASKS = ("decompose", "solve", "defective", "frugal", "list")


# --- I/O helpers -------------------------------------------------------------


def read_graph(path) -> Graph:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        try:
            return Graph.from_edges(int(data["n"]), [tuple(e) for e in data["edges"]], strict=True)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed graph JSON: {exc}") from exc
    return parse_edgelist(text)


def graph_to_dict(g: Graph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in g.edges()]}


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True) + "\n"


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = sorted({k for r in rows for k in r})
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: r.get(k, "") for k in fields})
    return buf.getvalue()


def emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _summary_row(result: dict) -> dict:
    return {k: v for k, v in result.items() if not isinstance(v, (list, dict))}


def render(result: dict, fmt: str) -> str:
    if fmt == "csv":
        return rows_to_csv([_summary_row(result)])
    return dumps(result)


# --- experiments -------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """One benchmark sweep: a task run on every (size, seed) pair."""

    task: str
    generator: dict = field(default_factory=lambda: {"family": "random_regular", "d": 3})
    sizes: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ParameterError(f"task must be one of {TASKS}, got {self.task!r}")
        if any(int(n) <= 0 for n in self.sizes):
            raise ParameterError("sizes must be positive")
        if self.format not in ("json", "csv"):
            raise ParameterError("format must be json or csv")
        if self.task == "solve" and self.generator.get("family") not in FAMILIES:
            raise ParameterError(f"solve needs an instance family from {sorted(FAMILIES)}")


def _build_graph(gen: dict, n: int, ctx: SeedContext) -> Graph:
    spec = dict(gen)
    spec["n"] = n
    return generate_graph(GraphSpec(**spec), ctx.derive("graph"))


def run_once(cfg: ExperimentConfig, n: int, seed: int) -> dict:
    ctx = SeedContext(seed)
    run_ctx = ctx.derive("run")
    p = cfg.params
    row = {"n": n, "seed": seed}
    if cfg.task == "solve":
        inst = make_instance(cfg.generator["family"], n, ctx.derive("instance"))
        out = solve(inst, p.get("alg", "base"), lam=p.get("lam", 8), ctx=run_ctx, n_star=p.get("n_star"))
        row["verified"] = len(out.assignment.values) == inst.n_vars and not violated_events(inst, out.assignment)
        row["ledger_total"] = out.ledger.total
        row["events"] = inst.n_events
        return row
    g = _build_graph(cfg.generator, n, ctx)
    row["max_degree"] = g.max_degree
    if cfg.task == "decompose":
        lam = p.get("lam", 2)
        led = RoundLedger()
        nd = ball_carve(g, lam) if p.get("mode", "seq") == "seq" else ball_carve_distributed(g, lam, ledger=led)
        rep = validate_decomposition(g, nd)
        row.update(verified=rep.passed, blocks=rep.block_count, measured_D=rep.measured_D,
                   cleanup_used=nd.cleanup_used, ledger_total=led.total)
        return row
    if cfg.task == "defective":
        res = defective_coloring(g, p.get("f", 2), run_ctx, verify=False)
    elif cfg.task == "frugal":
        res = frugal_coloring(g, p.get("beta", 1), run_ctx, verify=False)
        row["watermark"] = res.stats["watermark"]
        row["clamped"] = res.stats["clamped"]
    else:
        lists = random_lists(g.n, p.get("L", 64), p.get("universe", 96), ctx.derive("lists"))
        res = list_coloring(g, lists, p.get("C", 8.0), run_ctx, verify=False)
    row.update(verified=res.verified, count=res.report.color_count, cap=res.report.cap,
               ledger_total=res.ledger.total)
    return row


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every (n, seed) pair; the report lists per-run rows and per-n aggregates."""
    runs = [run_once(cfg, int(n), int(s)) for n in cfg.sizes for s in cfg.seeds]
    aggregate = []
    for n in cfg.sizes:
        rs = [r for r in runs if r["n"] == int(n)]
        if not rs:
            continue
        totals = [r["ledger_total"] for r in rs]
        aggregate.append({"n": int(n), "runs": len(rs), "verified": sum(r["verified"] for r in rs),
                          "ledger_mean": sum(totals) / len(totals), "ledger_max": max(totals),
                          "log2_n": math.log2(int(n))})
    report = {"config": {k: v for k, v in asdict(cfg).items() if k != "out"}, "runs": runs,
              "aggregate": aggregate, "passed": all(r["verified"] for r in runs)}
    if cfg.out:
        emit(dumps(report) if cfg.format == "json" else rows_to_csv(runs), cfg.out)
    return report


# --- subcommands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    ctx = SeedContext(args.seed)
    if args.kind == "instance":
        inst = make_instance(args.family, args.n, ctx)
        emit(dumps(inst.to_dict()), args.out)
        return 0
    spec = GraphSpec(args.family, n=args.n, d=args.d, p=args.p, cap=args.cap, rows=args.rows, cols=args.cols)
    g = generate_graph(spec, ctx)
    emit(dumps(graph_to_dict(g)) if args.format == "json" else format_edgelist(g), args.out)
    return 0


def cmd_decompose(args) -> int:
    g = read_graph(args.graph)
    led = RoundLedger()
    nd = ball_carve(g, args.lam) if args.mode == "seq" else ball_carve_distributed(g, args.lam, ledger=led)
    rep = validate_decomposition(g, nd)
    result = nd.to_dict(rep.measured_D)
    result.update(valid=rep.passed, bound_D=nd.D, ledger=led.to_dict(), verified=rep.passed)
    emit(render(result, args.format), args.out)
    return 0 if rep.passed else 1


def cmd_solve(args) -> int:
    inst = LLLInstance.from_dict(read_json(args.instance))
    out = solve(inst, args.alg, lam=args.lam, ctx=SeedContext(args.seed), n_star=args.n_star)
    result = out.to_dict(inst)
    emit(render(result, args.format), args.out)
    return 0 if result["verified"] else 1


def cmd_color(args) -> int:
    g = read_graph(args.graph)
    ctx = SeedContext(args.seed)
    if args.problem == "defective":
        res = defective_coloring(g, args.f, ctx, verify=False)
    elif args.problem == "frugal":
        res = frugal_coloring(g, args.beta, ctx, verify=False)
    else:
        lists = _read_lists(args.lists)
        res = list_coloring(g, lists, args.C, ctx, verify=False)
    emit(render(res.to_dict(), args.format), args.out)
    return 0 if res.verified else 1


def _read_lists(path) -> dict:
    data = read_json(path)
    if isinstance(data, list):
        return {v: s for v, s in enumerate(data)}
    return {int(k): v for k, v in data.items()}


def cmd_verify(args) -> int:
    if args.instance:
        inst = LLLInstance.from_dict(read_json(args.instance))
        values = read_json(args.assignment)
        if isinstance(values, dict):
            values = values.get("assignment", values)
        if len(values) != inst.n_vars or any(x is None for x in values):
            result = {"verified": False, "violated": None, "reason": "incomplete assignment"}
        else:
            bad = violated_events(inst, PartialAssignment(dict(enumerate(values))))
            result = {"verified": not bad, "violated": bad}
    else:
        if not args.graph or not args.colors:
            raise ParameterError("verify needs --instance/--assignment or --graph/--colors")
        g = read_graph(args.graph)
        data = read_json(args.colors)
        colors = data.get("colors") if isinstance(data, dict) else data
        lists = _read_lists(args.lists) if args.lists else None
        rep = verify_coloring(g, colors, args.mode, f=args.f, beta=args.beta, lists=lists)
        result = rep.to_dict()
        result["verified"] = rep.passed
    emit(render(result, args.format), args.out)
    return 0 if result["verified"] else 1


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    if args.config:
        data = read_json(args.config)
        data.setdefault("out", args.out)
        data.setdefault("format", args.format)
        cfg = ExperimentConfig(**data)
    else:
        gen = {"family": args.family}
        if args.family == "random_regular":
            gen["d"] = args.d
        elif args.family == "gnp_capped":
            gen.update(p=args.p, cap=args.cap)
        seeds = args.seeds if args.seeds is not None else list(range(args.n_seeds))
        params = {"alg": args.alg, "lam": args.lam, "f": args.f, "beta": args.beta, "C": args.C, "L": args.L,
                  "universe": args.universe, "mode": args.mode}
        if args.n_star is not None:
            params["n_star"] = args.n_star
        cfg = ExperimentConfig(args.task, gen, args.sizes, seeds, params, args.out, args.format)
    report = run_experiment(cfg)
    if not cfg.out:
        sys.stdout.write(dumps(report) if cfg.format == "json" else rows_to_csv(report["runs"]))
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    ap = argparse.ArgumentParser(prog="distlll", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a graph or an LLL instance")
    p.add_argument("kind", choices=("graph", "instance"))
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--cap", type=int, default=4)
    p.add_argument("--rows", type=int, default=0)
    p.add_argument("--cols", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", parents=[common], help="network decomposition of a graph file")
    p.add_argument("graph")
    p.add_argument("--lambda", dest="lam", type=int, default=2)
    p.add_argument("--mode", choices=("seq", "dist"), default="seq")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("solve", parents=[common], help="solve an LLL instance file")
    p.add_argument("instance")
    p.add_argument("--alg", choices=("mt", "base", "bootstrap"), default="base")
    p.add_argument("--lambda", dest="lam", type=int, default=8)
    p.add_argument("--n-star", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("color", parents=[common], help="color a graph file")
    p.add_argument("problem", choices=("defective", "frugal", "list"))
    p.add_argument("graph")
    p.add_argument("--f", type=int, default=2)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--lists", default=None, help="JSON {node: [colors]}")
    p.add_argument("--C", type=float, default=8.0)
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("verify", parents=[common], help="check a coloring or an assignment")
    p.add_argument("--graph")
    p.add_argument("--colors")
    p.add_argument("--mode", choices=("defective", "frugal", "list"), default="defective")
    p.add_argument("--f", type=int, default=None)
    p.add_argument("--beta", type=int, default=None)
    p.add_argument("--lists", default=None)
    p.add_argument("--instance")
    p.add_argument("--assignment")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="run a (size, seed) sweep")
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", default=None, help="JSON ExperimentConfig instead of flags")
    p.add_argument("--family", default="random_regular")
    p.add_argument("--sizes", type=_int_list, default=[100])
    p.add_argument("--seeds", type=_int_list, default=None)
    p.add_argument("--n-seeds", type=int, default=3)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--cap", type=int, default=4)
    p.add_argument("--alg", choices=("mt", "base", "bootstrap"), default="base")
    p.add_argument("--lambda", dest="lam", type=int, default=8)
    p.add_argument("--n-star", type=int, default=None)
    p.add_argument("--mode", choices=("seq", "dist"), default="seq")
    p.add_argument("--f", type=int, default=2)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--C", type=float, default=8.0)
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--universe", type=int, default=96)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"distlll: verification failed: {exc}", file=sys.stderr)
        return 1
    except (DistLLLError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"distlll: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
