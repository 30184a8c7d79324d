"""Shared pieces of the coloring pipelines: result types, the exact verifier,
and the residual-LLL routine every pipeline uses to repair a bad set."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..decomp import shattered_decomposition
from ..exceptions import ParameterError
from ..graph import Graph
from ..lll import LLLInstance, PartialAssignment
from ..runtime import RoundLedger, SeedContext
from ..solvers import det_lll


@dataclass
class ColoringReport:
    mode: str
    passed: bool
    color_count: int
    cap: float | None = None
    max_defect: int = 0
    proper: bool = True
    max_multiplicity: int = 0
    membership_ok: bool = True
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "color_count": self.color_count,
            "cap": self.cap,
            "max_defect": self.max_defect,
            "proper": self.proper,
            "max_multiplicity": self.max_multiplicity,
            "membership_ok": self.membership_ok,
            "violations": self.violations[:20],
        }


@dataclass
class ColoringResult:
    colors: list
    report: ColoringReport
    ledger: RoundLedger
    stats: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.report.passed

    def to_dict(self) -> dict:
        return {
            "colors": list(self.colors),
            "count": self.report.color_count,
            "cap": self.report.cap,
            "verified": self.report.passed,
            "report": self.report.to_dict(),
            "ledger": self.ledger.to_dict(),
            "stats": self.stats,
        }


def verify_coloring(g: Graph, colors, mode: str, *, f: int | None = None, beta: int | None = None,
                    lists=None, cap: float | None = None) -> ColoringReport:
    """Exact checks for a complete coloring.

    * ``defective``: every node has at most ``f`` same-colored neighbors.
    * ``frugal``: proper, and no node sees any color more than ``beta`` times.
    * ``list``: proper, and every node's color belongs to its list.
    """
    if isinstance(colors, ColoringResult):
        colors = colors.colors
    if isinstance(colors, dict):
        colors = [colors.get(v) for v in range(g.n)]
    colors = list(colors)
    if len(colors) != g.n or any(c is None for c in colors):
        return ColoringReport(mode, False, 0, cap, violations=["incomplete coloring"])
    adj = g.adj
    max_defect = 0
    violations = []
    for v in range(g.n):
        cv = colors[v]
        same = sum(1 for u in adj[v] if colors[u] == cv)
        if same > max_defect:
            max_defect = same
    proper = max_defect == 0
    count = len(set(colors))
    if mode == "defective":
        if f is None or f < 0:
            raise ParameterError("defective mode needs f >= 0")
        passed = max_defect <= f
        if not passed:
            violations.append(f"defect {max_defect} > f={f}")
        return ColoringReport(mode, passed, count, cap, max_defect=max_defect, proper=proper, violations=violations)
    if mode == "frugal":
        if beta is None or beta < 1:
            raise ParameterError("frugal mode needs beta >= 1")
        max_mult = 0
        for v in range(g.n):
            seen = {}
            for u in adj[v]:
                c = colors[u]
                seen[c] = seen.get(c, 0) + 1
            if seen:
                max_mult = max(max_mult, max(seen.values()))
        passed = proper and max_mult <= beta
        if not proper:
            violations.append(f"improper: defect {max_defect}")
        if max_mult > beta:
            violations.append(f"color seen {max_mult} > beta={beta} times")
        return ColoringReport(mode, passed, count, cap, max_defect=max_defect, proper=proper,
                              max_multiplicity=max_mult, violations=violations)
    if mode == "list":
        if lists is None:
            raise ParameterError("list mode needs lists")
        bad = [v for v in range(g.n) if colors[v] not in set(lists[v])]
        passed = proper and not bad
        if not proper:
            violations.append(f"improper: defect {max_defect}")
        if bad:
            violations.append(f"{len(bad)} nodes off-list, e.g. {bad[:5]}")
        return ColoringReport(mode, passed, count, cap, max_defect=max_defect, proper=proper,
                              membership_ok=not bad, violations=violations)
    raise ParameterError(f"unknown verification mode {mode!r}")


def fill_unset(inst: LLLInstance, values: dict, ctx: SeedContext, phase) -> int:
    filled = 0
    for x in range(inst.n_vars):
        if x not in values:
            values[x] = inst.variables[x].sample(ctx.stream(x, phase))
            filled += 1
    return filled


def solve_residual(inst: LLLInstance, pa: PartialAssignment, ctx: SeedContext, ledger: RoundLedger,
                   label: str, *, lam: int = 8, graph=None, owners=None, owner_vars=None,
                   d: int | None = None) -> tuple[PartialAssignment, dict]:
    """Finish a partial assignment of ``inst`` so that no event occurs.

    Unresolved events (an unset variable and positive conditional
    probability) are decomposed with the shattering routine and handed to
    the deterministic solver with its fallbacks enabled. With custom
    ``owners``/``owner_vars``/``graph`` the decomposition runs on that graph
    instead of the squared dependency graph. Variables that only appear in
    impossible events are filled from the tape.
    """
    values = pa.values
    cond = inst.cond_prob_values
    entry_unset = [x for x in range(inst.n_vars) if x not in values]
    if owners is None:
        pending = sorted({b for x in entry_unset for b in inst.var_events[x]})
        pending = [b for b in pending if cond(b, values) > 0.0]
        targets = pending
        graph = inst.dep_square if pending else None
    else:
        targets = sorted(owners)
        pending = sorted({b for o in targets for x in owner_vars(o) if x not in values
                          for b in inst.var_events[x]})
    stats = {"unresolved": len(pending), "owners": len(targets)}
    out_pa = PartialAssignment(values)
    if targets:
        p_eff = max((cond(b, values) for b in pending), default=0.0)
        sub = RoundLedger()
        nd = shattered_decomposition(graph, targets, lam, sub)
        outcome = det_lll(inst, out_pa, nd, max(p_eff, 1e-300), sub, graph=graph, owner_vars=owner_vars,
                          d=d, fallback=True, ctx=ctx.derive(label), check=False, cover_check=False)
        out_pa = outcome.assignment
        stats["blocks"] = len(nd.blocks)
        stats["fallbacks"] = len(outcome.stats["fallbacks"])
        stats["p_eff"] = p_eff
        ledger.extend(sub, f"{label}:")
    stats["filled"] = fill_unset(inst, out_pa.values, ctx, (label, "fill"))
    touched = sorted({b for x in entry_unset for b in inst.var_events[x]})
    bad = [b for b in touched if inst.occurs(b, out_pa.values)]
    assert not bad, f"{label}: residual events still violated: {bad[:5]}"
    return out_pa, stats


def log2c(x: float) -> float:
    return math.log2(x) if x > 1 else 0.0
