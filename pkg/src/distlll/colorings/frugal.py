"""β-frugal coloring through iterated partial colorings.

Uncolored nodes repeatedly sample tentative colors from fresh palettes and
keep the first one that causes no conflict. Between rounds, nodes that still
see too many uncolored neighbors have those neighbors colored by an LLL over
a fresh palette, so the uncolored degree of every node shrinks on schedule.
Palettes are never reused: ``watermark`` is the next unused color id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..exceptions import ParameterError, VerificationError
from ..graph import Graph
from ..lll import EventSpec, LLLInstance, Multiplicity, PartialAssignment, VariableSpec
from ..runtime import RoundLedger, SeedContext
from .common import ColoringResult, solve_residual, verify_coloring


@dataclass
class PartialFrugal:
    color_of: dict
    uncolored: frozenset
    beta: int
    watermark: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def empty(cls, g: Graph, beta: int) -> "PartialFrugal":
        return cls({}, frozenset(range(g.n)), beta)

    def base_degree(self, g: Graph) -> int:
        """Largest number of uncolored neighbors of any node of g."""
        un = self.uncolored
        return max((sum(1 for u in g.adj[v] if u in un) for v in range(g.n)), default=0)

    def check(self, g: Graph) -> None:
        """Assert properness on colored nodes and β-frugality at every node."""
        col = self.color_of
        for v in range(g.n):
            seen = {}
            cv = col.get(v)
            for u in g.adj[v]:
                cu = col.get(u)
                if cu is None:
                    continue
                if cu == cv:
                    raise AssertionError(f"partial coloring improper at edge {(v, u)}")
                seen[cu] = seen.get(cu, 0) + 1
                if seen[cu] > self.beta:
                    raise AssertionError(f"node {v} sees color {cu} more than {self.beta} times")


def palette_size(delta_p: int, delta: int, beta: int) -> int:
    return math.ceil(20 * max(delta_p, 1) * max(delta, 1) ** (1.0 / beta))


def sample_partial_frugal(g: Graph, state: PartialFrugal, delta_p: int, x: int, ctx: SeedContext | None = None,
                          ledger: RoundLedger | None = None, *, tag=0, check: bool = True) -> PartialFrugal:
    """x sampling steps over x disjoint palettes of size ⌈20·Δ'·Δ^{1/β}⌉.

    In step j every node of the uncolored set draws a color, including nodes
    that already became permanent in an earlier step (they only act as
    conflict sources). A not-yet-permanent node v drops its draw if some
    uncolored neighbor drew the same color, or if some neighbor u of v has β
    other uncolored neighbors that drew v's color; otherwise the draw
    becomes permanent.
    """
    if x < 1:
        raise ParameterError("x must be at least 1")
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    beta = state.beta
    adj = g.adj
    vp = sorted(state.uncolored)
    vset = state.uncolored
    color_of = dict(state.color_of)
    if not vp:
        return PartialFrugal(color_of, frozenset(), beta, state.watermark, list(state.history))
    C = palette_size(delta_p, g.max_degree, beta)
    base = state.watermark
    active = set(vp)
    for j in range(x):
        offset = base + j * C
        draw = {v: offset + ctx.stream(v, ("frugal", tag, j)).randbelow(C) for v in vp}
        drop = set()
        for v in sorted(active):
            c = draw[v]
            if any(u in vset and draw[u] == c for u in adj[v]):
                drop.add(v)
                continue
            for u in adj[v]:
                same = 0
                for w in adj[u]:
                    if w != v and w in vset and draw[w] == c:
                        same += 1
                if same >= beta:
                    drop.add(v)
                    break
        for v in active - drop:
            color_of[v] = draw[v]
        active = drop
        ledger.charge(f"frugal{tag}:step{j}", 2)
        if check:
            PartialFrugal(color_of, frozenset(active), beta).check(g)
        if not active:
            break
    history = list(state.history) + [{"tag": tag, "x": x, "C": C, "uncolored": len(active)}]
    return PartialFrugal(color_of, frozenset(active), beta, base + x * C, history)


def complete_with_lll(g: Graph, state: PartialFrugal, nodes, palette: int, ctx: SeedContext,
                      ledger: RoundLedger, label: str, *, lam: int = 8) -> PartialFrugal:
    """Color every node in ``nodes`` from a fresh palette of size ``palette``.

    Events: a monochromatic edge inside ``nodes``, and for every node w of g
    some color repeated β+1 times among w's neighbors in ``nodes``. The
    fresh palette cannot clash with existing colors, so avoiding these events
    keeps the partial coloring proper and β-frugal.
    """
    nodes = sorted(nodes)
    if not nodes:
        return state
    beta = state.beta
    index = {v: i for i, v in enumerate(nodes)}
    variables = [VariableSpec(i, max(palette, 2)) for i in range(len(nodes))]
    events = []
    for v in nodes:
        for u in g.adj[v]:
            if u in index and u > v:
                events.append(EventSpec(len(events), (index[v], index[u]), Multiplicity(2)))
    for w in range(g.n):
        nb = [index[u] for u in g.adj[w] if u in index]
        if len(nb) > beta:
            events.append(EventSpec(len(events), nb, Multiplicity(beta + 1)))
    inst = LLLInstance(variables, events)
    pa, _ = solve_residual(inst, PartialAssignment(), ctx.derive(label), ledger, label, lam=lam)
    color_of = dict(state.color_of)
    for v in nodes:
        color_of[v] = state.watermark + pa.values[index[v]]
    uncolored = frozenset(state.uncolored - set(nodes))
    return PartialFrugal(color_of, uncolored, beta, state.watermark + palette, list(state.history))


def frugal_progress_step(g: Graph, state: PartialFrugal, delta_p: int, x: int, ctx: SeedContext | None = None,
                         ledger: RoundLedger | None = None, *, tag=0, lam: int = 8,
                         check: bool = True) -> PartialFrugal:
    """Sample, then fix every node whose uncolored degree stays above ⌈5^{-x}Δ'⌉.

    D = nodes still seeing more than Δ'' uncolored neighbors; B = their
    uncolored neighbors. B is colored outright by an LLL over a fresh
    palette of the same budget, which empties the uncolored neighborhood of
    every node in D.
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    if not state.uncolored:
        return state
    target = math.ceil(delta_p / 5 ** x)
    state = sample_partial_frugal(g, state, delta_p, x, ctx, ledger, tag=tag, check=check)
    un = state.uncolored
    heavy = [v for v in range(g.n) if sum(1 for u in g.adj[v] if u in un) > target]
    bad = sorted({u for v in heavy for u in g.adj[v] if u in un})
    ledger.charge(f"frugal{tag}:detect", 2)
    if bad:
        budget = x * palette_size(delta_p, g.max_degree, state.beta)
        state = complete_with_lll(g, state, bad, budget, ctx.derive("frugal-progress", tag), ledger,
                                  f"frugal{tag}:lll", lam=lam)
    if check:
        state.check(g)
    worst = state.base_degree(g)
    assert worst <= target, f"uncolored degree {worst} above {target} after progress step"
    state.history[-1].update({"heavy": len(heavy), "repaired": len(bad), "target": target})
    return state


def frugal_schedule(delta: int, c: float = 1.0):
    """(x_i, Δ_i) pairs of the progress phase and a clamp flag.

    x_0 = 1, x_{i+1} = ⌈(5/4)^{x_i}⌉, Δ_{i+1} = ⌈5^{-x_i} Δ_i⌉, stopping once
    Δ_{i+1} ≤ c·√Δ; if Δ_{i+1} fails to drop the schedule is clamped there.
    """
    steps = []
    x, d = 1, delta
    clamped = False
    stop = c * math.sqrt(delta)
    while d > stop:
        nxt = math.ceil(d / 5 ** x)
        if nxt >= d:
            clamped = True
            break
        steps.append((x, d))
        d = nxt
        x = math.ceil(1.25 ** x)
    return steps, d, clamped


def frugal_coloring(g: Graph, beta: int, ctx: SeedContext | None = None, ledger: RoundLedger | None = None,
                    *, lam: int = 8, c: float = 1.0, check: bool = True, verify: bool = True) -> ColoringResult:
    """Proper coloring in which no node sees any color more than β times."""
    if beta < 1:
        raise ParameterError("beta must be at least 1")
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    delta = g.max_degree
    cap = 120 * delta ** (1 + 1.0 / beta)
    if delta == 0:
        colors = [0] * g.n
        report = verify_coloring(g, colors, "frugal", beta=beta, cap=cap)
        return ColoringResult(colors, report, ledger, {"watermark": 1, "cap": cap, "clamped": False, "schedule": []})
    steps, d_final, clamped = frugal_schedule(delta, c)
    state = PartialFrugal.empty(g, beta)
    for i, (x, d) in enumerate(steps):
        state = frugal_progress_step(g, state, d, x, ctx, ledger, tag=("progress", i), lam=lam, check=check)
    if state.uncolored:
        dp = max(state.base_degree(g), 1)
        x = math.ceil(delta / dp)
        state = sample_partial_frugal(g, state, dp, x, ctx, ledger, tag="complete", check=check)
        if state.uncolored:
            budget = x * palette_size(dp, delta, beta)
            state = complete_with_lll(g, state, state.uncolored, budget, ctx.derive("frugal-complete"), ledger,
                                      "frugal:complete-lll", lam=lam)
    if check:
        state.check(g)
    names = {col: i for i, col in enumerate(sorted(set(state.color_of.values())))}
    colors = [names[state.color_of[v]] for v in range(g.n)]
    report = verify_coloring(g, colors, "frugal", beta=beta, cap=cap)
    if verify and not report.passed:
        raise VerificationError(f"frugal coloring failed verification: {report.violations}")
    stats = {
        "watermark": state.watermark,
        "cap": cap,
        "clamped": clamped,
        "schedule": [list(s) for s in steps],
        "history": state.history,
    }
    return ColoringResult(colors, report, ledger, stats)
