"""Defective coloring by iterated random bucketing.

Each level splits every current bucket into at most 2k sub-buckets so that
each node keeps at most Δ' same-bucket neighbors: a uniform draw from k
buckets, then an LLL re-bucketing of the overflowing nodes into k fresh ones.
A node's final color is its path of bucket indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..exceptions import ParameterError, VerificationError
from ..graph import Graph, greedy_coloring
from ..lll import EventSpec, LLLInstance, PartialAssignment, Threshold, VariableSpec
from ..runtime import RoundLedger, SeedContext, charge_parallel
from .common import ColoringResult, solve_residual, verify_coloring


@dataclass
class BucketState:
    bucket_of: dict  # node -> bucket in [0, 2k)
    overflow: frozenset
    k: int
    delta_p: int
    eps: float | None = None


def _same_bucket_counts(adj, bucket, members):
    return {v: sum(1 for u in adj[v] if u in members and bucket[u] == bucket[v]) for v in members}


def bucket_once(g: Graph, delta_p: int, k: int, ctx: SeedContext | None = None,
                ledger: RoundLedger | None = None, *, nodes=None, lam: int = 8, tag=0,
                eps: float | None = None) -> BucketState:
    """Split ``nodes`` (default: all) into at most 2k buckets with at most
    ``delta_p`` same-bucket neighbors each.

    Overflowing nodes are re-bucketed into k fresh buckets by an LLL whose
    event for v says "at least delta_p+1 overflowing neighbors share v's new
    bucket"; that LLL is solved by shattering plus the deterministic solver.
    """
    if k < 1 or delta_p < 1:
        raise ParameterError("bucket_once needs k >= 1 and delta_p >= 1")
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    members = set(range(g.n)) if nodes is None else set(nodes)
    order = sorted(members)
    adj = g.adj
    bucket = {v: ctx.stream(v, ("bucket", tag)).randbelow(k) for v in order}
    ledger.charge(f"bucket{tag}:sample", 1)
    counts = _same_bucket_counts(adj, bucket, members)
    overflow = [v for v in order if counts[v] > delta_p]
    if overflow:
        index = {v: i for i, v in enumerate(overflow)}
        variables = [VariableSpec(i, max(k, 2)) if k >= 2 else VariableSpec(i, 2, (1.0, 0.0))
                     for i in range(len(overflow))]
        events = []
        for v in overflow:
            nb = [index[u] for u in adj[v] if u in index]
            if len(nb) >= delta_p + 1:
                events.append(EventSpec(len(events), [index[v]] + nb, Threshold(delta_p + 1, center=0)))
        inst = LLLInstance(variables, events)
        sub = RoundLedger()
        pa, _ = solve_residual(inst, PartialAssignment(), ctx.derive("bucket-lll", tag), sub,
                               f"bucket{tag}:lll", lam=lam)
        ledger.extend(sub)
        for v in overflow:
            bucket[v] = k + pa.values[index[v]]
    final = _same_bucket_counts(adj, bucket, members)
    worst = max(final.values(), default=0)
    if worst > delta_p:
        raise VerificationError(f"bucketing left a node with {worst} > {delta_p} same-bucket neighbors")
    return BucketState(bucket, frozenset(overflow), k, delta_p, eps)


def defective_schedule(delta: int, f: int):
    """Levels (Δ_prev, Δ_next, ε, k) ending at target f, plus a clamp flag.

    Δ_next = ceil(log2(Δ_prev)^5) is used while it stays strictly between f
    and Δ_prev; when the map stops contracting the schedule jumps to f.
    """
    steps = []
    prev = delta
    clamped = False
    while True:
        nxt = math.ceil(math.log2(prev) ** 5) if prev > 1 else 0
        if f < nxt < prev:
            eps = math.log2(prev) ** 2 / math.sqrt(nxt)
            steps.append((prev, nxt, eps, math.ceil((1 + eps) * prev / nxt)))
            prev = nxt
            continue
        clamped = nxt >= prev
        break
    eps = math.log2(prev) ** 2 / math.sqrt(f)
    steps.append((prev, f, eps, math.ceil((1 + eps) * prev / f)))
    return steps, clamped


def defective_coloring(g: Graph, f: int, ctx: SeedContext | None = None, ledger: RoundLedger | None = None,
                       *, lam: int = 8, proper_below: int = 2, verify: bool = True) -> ColoringResult:
    """f-defective coloring: one color if f >= Δ, greedy proper coloring when
    f < ``proper_below``, iterated bucketing otherwise."""
    if f < 0:
        raise ParameterError("f must be nonnegative")
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    delta = g.max_degree
    stats = {"regime": None, "schedule": [], "clamped": False}
    if f >= delta:
        colors = [0] * g.n
        cap = 1
        stats["regime"] = "single"
    elif f < proper_below:
        colors = greedy_coloring(g)
        ledger.charge("defective:greedy", delta + 1)
        cap = delta + 1
        stats["regime"] = "proper"
    else:
        steps, clamped = defective_schedule(delta, f)
        stats["regime"] = "bucketing"
        stats["schedule"] = [list(s) for s in steps]
        stats["clamped"] = clamped
        path = {v: () for v in range(g.n)}
        overflow_total = 0
        for level, (_, dnext, eps, k) in enumerate(steps):
            groups = {}
            for v in range(g.n):
                groups.setdefault(path[v], []).append(v)
            subs = []
            for key in sorted(groups):
                sub = RoundLedger()
                st = bucket_once(g, dnext, k, ctx, sub, nodes=groups[key], lam=lam, tag=level, eps=eps)
                overflow_total += len(st.overflow)
                for v, b in st.bucket_of.items():
                    path[v] = path[v] + (b,)
                subs.append(sub)
            charge_parallel(ledger, f"defective:level{level}", subs)
        names = {p: i for i, p in enumerate(sorted(set(path.values())))}
        colors = [names[path[v]] for v in range(g.n)]
        cap = math.prod(2 * s[3] for s in steps)
        stats["overflow_nodes"] = overflow_total
    report = verify_coloring(g, colors, "defective", f=f, cap=cap)
    if verify and not report.passed:
        raise VerificationError(f"defective coloring failed verification: {report.violations}")
    return ColoringResult(colors, report, ledger, stats)
