"""LLL solvers: Moser-Tardos resampling, randomized partial setting with
freezing, deterministic solving over a network decomposition, the composed
base algorithm, and the bootstrap wrapper that lies about n.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

from .decomp import NetworkDecomposition, shattered_decomposition
from .exceptions import (
    CapacityError,
    InfeasibleComponentError,
    NonconvergenceError,
    ParameterError,
    ValidationError,
    VerificationError,
)
from .graph import bfs_distances, component_diameter, components
from .lll import LLLInstance, PartialAssignment, check_criterion, violated_events
from .runtime import RoundLedger, SeedContext, log_star

DANGER_SLACK = 1e-12  # relative slack on the dangerous test, absorbs float rounding


@dataclass
class SolverOutcome:
    assignment: PartialAssignment
    ledger: RoundLedger
    stats: dict = field(default_factory=dict)
    partial: PartialAssignment | None = None

    def values(self, inst: LLLInstance) -> list[int]:
        return self.assignment.as_list(inst.n_vars)

    def to_dict(self, inst: LLLInstance) -> dict:
        values = self.assignment.values
        verified = len(values) == inst.n_vars and not violated_events(inst, self.assignment)
        return {
            "assignment": [values.get(x) for x in range(inst.n_vars)],
            "stats": _jsonable(self.stats),
            "ledger": self.ledger.to_dict(),
            "verified": verified,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(x) for x in items]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# --- Moser-Tardos ----------------------------------------------------------------


def moser_tardos(inst: LLLInstance, ctx: SeedContext | None = None, *, cap: int = 10**6,
                 check: bool = True, ledger: RoundLedger | None = None) -> SolverOutcome:
    """Sequential resampling: always resample the minimum-id violated event.

    One round is charged per resampling (sequential semantics).
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    if check and not check_criterion(inst.p, inst.d, "epd"):
        warnings.warn("instance does not satisfy e*p*d <= 1; running with an iteration cap", stacklevel=2)
    stream = ctx.stream(0, "mt")
    variables = inst.variables
    values = {x: variables[x].sample(stream) for x in range(inst.n_vars)}
    occurs = inst.occurs
    heap = [e for e in range(inst.n_events) if occurs(e, values)]
    heapq.heapify(heap)
    queued = set(heap)
    adj = inst.dep_graph.adj if heap else None
    resamplings = 0
    while heap:
        e = heapq.heappop(heap)
        queued.discard(e)
        if not occurs(e, values):
            continue
        if resamplings >= cap:
            raise NonconvergenceError(f"Moser-Tardos exceeded {cap} resamplings")
        resamplings += 1
        for x in inst.events[e].scope:
            values[x] = variables[x].sample(stream)
        for b in (e,) + adj[e]:
            if b not in queued and occurs(b, values):
                heapq.heappush(heap, b)
                queued.add(b)
    ledger.charge("mt:resample", resamplings)
    pa = PartialAssignment(values)
    return SolverOutcome(pa, ledger, {"resamplings": resamplings, "frozen_count": 0,
                                      "residual_component_sizes": [], "blocks_processed": 0})


# --- randomized partial setting -----------------------------------------------------


def random_partial_setting(inst: LLLInstance, lam: int = 8, ctx: SeedContext | None = None,
                           ledger: RoundLedger | None = None, *, check: bool = True,
                           active_events=None, initial: PartialAssignment | None = None,
                           phase="rps") -> PartialAssignment:
    """Sample variables event by event, freezing around dangerous events.

    Events are processed by color class of a distance-2 coloring of the
    dependency graph, ascending id inside a class. Each event draws its unset,
    non-frozen variables in ascending id order from its own stream. After a
    draw, every event containing the variable is tested; if one reaches
    conditional probability >= sqrt(p), the draw is undone and the variable
    plus all unset variables of each dangerous event are frozen.

    With ``active_events``, only those events sample (others keep the values
    given in ``initial``).
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    if lam < 1:
        raise ParameterError("lambda must be positive")
    p = inst.p
    if check and not check_criterion(p, inst.d, "poly", 4 * lam):
        warnings.warn("instance does not satisfy p*(e*d)^(4*lambda) < 1", stacklevel=2)
    threshold = math.sqrt(p) * (1.0 - DANGER_SLACK)
    pa = PartialAssignment() if initial is None else initial.copy()
    values, frozen = pa.values, pa.frozen
    events = inst.events
    var_events = inst.var_events
    variables = inst.variables
    cond = inst.cond_prob_values
    n = inst.n_events
    colors = inst.square_coloring if n else []
    ncolors = max(colors, default=-1) + 1
    ledger.charge("rps:square-coloring", 2 * (inst.d + log_star(max(n, 1))))
    classes = [[] for _ in range(ncolors)]
    active = None if active_events is None else set(active_events)
    for e in range(n):
        if active is None or e in active:
            classes[colors[e]].append(e)
    dep_adj = inst.dep_graph.adj
    # an event with conditional probability 0 stays at 0 as more variables get set
    dead = bytearray(n)
    for ci, cls in enumerate(classes):
        if not cls:
            continue
        # members of one class must not share any event with each other
        claimed = {}
        for a in cls:
            for b in (a,) + dep_adj[a]:
                other = claimed.setdefault(b, a)
                assert other == a, f"color class {ci}: events {other} and {a} share event {b}"
        for a in cls:
            stream = None
            for x in sorted(events[a].scope):
                if x in values or x in frozen:
                    continue
                if stream is None:
                    stream = ctx.stream(a, phase)
                values[x] = variables[x].sample(stream)
                if p <= 0.0:
                    continue
                dangerous = []
                zeros = []
                for b in var_events[x]:
                    if dead[b]:
                        continue
                    c = cond(b, values)
                    if c == 0.0:
                        zeros.append(b)
                    elif c >= threshold:
                        dangerous.append(b)
                if not dangerous:
                    for b in zeros:
                        dead[b] = 1
                else:
                    del values[x]
                    frozen.add(x)
                    for b in dangerous:
                        for w in events[b].scope:
                            if w not in values:
                                frozen.add(w)
        ledger.charge(f"rps:class{ci}", 2)
    if active is None:
        for x in range(inst.n_vars):
            if not var_events[x] and x not in values and x not in frozen:
                values[x] = variables[x].sample(ctx.stream(x, ("free", phase)))
    return pa


# --- deterministic solver over a decomposition --------------------------------------


class _Search:
    """Lexicographic backtracking over one component's variables."""

    def __init__(self, inst, values, comp_vars, tau, node_cap, counter):
        self.inst = inst
        self.values = values
        self.vars = comp_vars
        self.tau = tau
        self.node_cap = node_cap
        self.counter = counter
        pos = {x: k for k, x in enumerate(comp_vars)}
        touched = sorted({b for x in comp_vars for b in inst.var_events[x]})
        self.touched = touched
        checks = [[] for _ in comp_vars]
        for b in touched:
            ks = [pos[x] for x in inst.events[b].scope if x in pos]
            last = max(ks)
            for k in ks:
                checks[k].append((b, k == last))
        self.checks = checks

    def _ok(self, k: int, tau: float) -> bool:
        inst, values = self.inst, self.values
        for b, is_last in self.checks[k]:
            if is_last and tau < 1.0:
                if inst.cond_prob_values(b, values) > tau * (1.0 + 1e-9):
                    return False
            elif inst.surely_values(b, values):
                return False
        return True

    def run(self, tau: float) -> bool:
        """Assign all component variables in ``values``; False if none works."""
        variables = self.inst.variables
        comp = self.vars
        m = len(comp)
        sizes = [variables[x].support_size() for x in comp]
        supports = [variables[x].support() for x in comp]
        choice = [-1] * m
        values = self.values
        k = 0
        while 0 <= k < m:
            x = comp[k]
            i = choice[k] + 1
            placed = False
            while i < sizes[k]:
                self.counter[0] += 1
                if self.counter[0] > self.node_cap:
                    for y in comp[: k + 1]:
                        values.pop(y, None)
                    raise CapacityError(f"backtracking exceeded {self.node_cap} nodes")
                values[x] = supports[k][i]
                if self._ok(k, tau):
                    placed = True
                    break
                i += 1
            if placed:
                choice[k] = i
                k += 1
                if k < m:
                    choice[k] = -1
            else:
                values.pop(x, None)
                choice[k] = -1
                k -= 1
        return k == m

    def randomized(self, stream, tries: int) -> bool:
        variables = self.inst.variables
        for _ in range(tries):
            for x in self.vars:
                self.values[x] = variables[x].sample(stream)
            if all(self._ok(k, math.inf) for k in range(len(self.vars))):
                return True
        for x in self.vars:
            self.values.pop(x, None)
        return False


def _block_diameter(graph, comps):
    return max((component_diameter(graph, c) for c in comps), default=0)


def det_lll(inst: LLLInstance, pa: PartialAssignment, nd: NetworkDecomposition, p_eff: float,
            ledger: RoundLedger | None = None, *, graph=None, owner_vars=None, d: int | None = None,
            node_cap: int = 10**7, fallback: bool = False, ctx: SeedContext | None = None,
            retry_cap: int = 10_000, check: bool = True, on_infeasible: str = "raise",
            cover_check: bool = True, on_block=None) -> SolverOutcome:
    """Set all unset variables block by block along a network decomposition.

    Block i's components are solved independently. A component's variables
    are the unset scope variables of its events (or ``owner_vars(o)`` for
    custom owners); they are assigned by lexicographic backtracking so that
    every touched event keeps conditional probability at most
    ``p_eff * (e*d)**i`` once its last component variable is set, and no
    event is ever certain to occur. Frozen markers in ``pa`` are ignored
    (frozen variables count as unset).

    ``fallback`` enables, in order: search without the block threshold, then
    randomized retries drawn from ``ctx``. ``on_infeasible='skip'`` leaves a
    failing component unset instead of raising.
    """
    ledger = RoundLedger() if ledger is None else ledger
    graph = inst.dep_square if graph is None else graph
    if d is None and p_eff * math.e >= 1.0:
        d_eff = 1  # every block threshold is already >= 1; skip building the dependency graph
    else:
        d_eff = max(inst.d if d is None else d, 1)
    out = PartialAssignment(pa.values)
    values = out.values
    stats = {"blocks_processed": 0, "components": 0, "fallbacks": [], "skipped": [], "search_nodes": 0}
    default_owners = owner_vars is None
    if default_owners:
        events = inst.events

        def owner_vars(o):
            return events[o].scope

    covered = nd.nodes
    if default_owners and cover_check:
        pending = [e for e in range(inst.n_events) if any(x not in values for x in inst.events[e].scope)]
        uncovered = [e for e in pending if e not in covered]
        if uncovered and on_infeasible != "skip":
            raise ValidationError(f"decomposition misses events with unset variables, e.g. {uncovered[:5]}")
    if all(x in values for o in covered for x in owner_vars(o)):
        return SolverOutcome(out, ledger, stats)
    C = len(nd.blocks)
    if check and C and not (p_eff * (math.e * d_eff) ** C < 1.0):
        warnings.warn("det_lll precondition p_eff*(e*d)^C < 1 fails", stacklevel=2)
    counter = [0]
    for i, block in enumerate(nd.blocks, start=1):
        tau = p_eff * (math.e * d_eff) ** i
        comps = components(graph, block)
        block_vars = {}
        solved_any = False
        for ci, comp in enumerate(comps):
            comp_vars = sorted({x for o in comp for x in owner_vars(o) if x not in values})
            if not comp_vars:
                continue
            solved_any = True
            stats["components"] += 1
            search = _Search(inst, values, comp_vars, tau, node_cap, counter)
            ok, err = False, None
            try:
                ok = search.run(tau)
            except CapacityError as exc:
                err = exc
            if not ok and fallback:
                stats["fallbacks"].append((i, min(comp), "unthresholded"))
                try:
                    counter[0] = 0
                    ok = search.run(math.inf)
                except CapacityError as exc:
                    err = exc
                if not ok:
                    stats["fallbacks"].append((i, min(comp), "randomized"))
                    rctx = SeedContext(0) if ctx is None else ctx
                    ok = search.randomized(rctx.stream(min(comp), ("det-retry", i)), retry_cap)
            if not ok:
                if on_infeasible == "skip":
                    stats["skipped"].append(sorted(comp))
                    continue
                if err is not None and not fallback:
                    raise err
                raise InfeasibleComponentError(
                    f"no valid assignment for component with min owner {min(comp)} in block {i}",
                    component=sorted(comp))
            for x in comp_vars:
                block_vars[x] = ci
        stats["search_nodes"] += counter[0]
        counter[0] = 0
        # independence across components of one block
        for b in {b for x in block_vars for b in inst.var_events[x]}:
            owners = {block_vars[y] for y in inst.events[b].scope if y in block_vars}
            assert len(owners) <= 1, f"event {b} spans components {owners} of block {i}"
        if solved_any:
            diam = nd.meta.get("block_D", [None] * C)[i - 1] if "block_D" in nd.meta else None
            if diam is None:
                diam = _block_diameter(graph, comps)
            ledger.charge(f"det:block{i}", 2 * (diam + 1))
            stats["blocks_processed"] += 1
        if on_block is not None:
            on_block(i, tau, values)
    return SolverOutcome(out, ledger, stats)


# --- composed solvers ------------------------------------------------------------------


def _fill_from_tape(inst, values, ctx, phase="fill"):
    filled = 0
    for x in range(inst.n_vars):
        if x not in values:
            values[x] = inst.variables[x].sample(ctx.stream(x, phase))
            filled += 1
    return filled


def base_lll(inst: LLLInstance, lam: int = 8, ctx: SeedContext | None = None,
             ledger: RoundLedger | None = None, *, check: bool = True, n_assumed: int | None = None,
             tolerate_failures: bool = False, active_events=None,
             initial: PartialAssignment | None = None, phase="rps") -> SolverOutcome:
    """Random partial setting, then shattering, then the deterministic solver.

    ``n_assumed`` makes size-dependent thresholds use that value instead of
    the true event count: residual components larger than
    ``ceil(4*log2(n_assumed))`` are then left to a random fill, which may
    fail. ``tolerate_failures`` returns such outcomes (with the violated
    events in ``stats``) instead of raising.
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    n = inst.n_events
    if check and not check_criterion(inst.p, inst.d, "poly", 4 * lam):
        warnings.warn("instance does not satisfy p*(e*d)^(4*lambda) < 1", stacklevel=2)
    pa = random_partial_setting(inst, lam, ctx, ledger, check=False, active_events=active_events,
                                initial=initial, phase=phase)
    partial = pa.copy()
    frozen = set(pa.frozen)
    var_events = inst.var_events
    unset_vars = frozen | {x for x in range(inst.n_vars) if x not in pa.values and x not in frozen} \
        if active_events is None else frozen
    unresolved = sorted({b for x in unset_vars for b in var_events[x]})
    pa = PartialAssignment(pa.values)
    sq = inst.dep_square if unresolved else None
    comps = components(sq, unresolved) if unresolved else []
    sizes = sorted((len(c) for c in comps), reverse=True)
    size_cap = None
    if n_assumed is not None and n_assumed < n:
        size_cap = math.ceil(4 * math.log2(max(n_assumed, 2)))
    solvable = [c for c in comps if size_cap is None or len(c) <= size_cap]
    oversized = [sorted(c) for c in comps if size_cap is not None and len(c) > size_cap]
    target = set().union(*solvable) if solvable else set()
    stats = {"frozen_count": len(frozen), "unresolved_events": len(unresolved),
             "residual_component_sizes": sizes, "oversized_components": len(oversized),
             "resamplings": 0, "blocks_processed": 0}
    if target:
        nd = shattered_decomposition(sq, target, lam, ledger)
        outcome = det_lll(inst, pa, nd, math.sqrt(inst.p), ledger, check=False,
                          on_infeasible="skip" if (tolerate_failures or oversized) else "raise")
        pa = outcome.assignment
        stats["blocks_processed"] = outcome.stats["blocks_processed"]
        stats["skipped_components"] = len(outcome.stats["skipped"])
        stats["decomposition_blocks"] = len(nd.blocks)
        stats["decomposition_D"] = nd.D
    stats["filled_at_random"] = _fill_from_tape(inst, pa.values, ctx, ("fill", phase))
    bad = violated_events(inst, pa)
    stats["violated"] = sorted(bad)
    if bad and not tolerate_failures:
        raise VerificationError(f"base_lll left {len(bad)} violated events, e.g. {sorted(bad)[:5]}")
    return SolverOutcome(pa, ledger, stats, partial)


@dataclass
class DerivedLLL:
    """Events that failed in the inner run, joined when within 2T+1 dependency hops."""

    T: int
    radius: int
    events: list
    edges: list
    d_prime: int
    d: int
    n_star: int
    p_prime_measured: float

    @property
    def p_prime_bound(self) -> float:
        return 1.0 / self.n_star

    @property
    def degree_bound_holds(self) -> bool:
        # d' <= d^(2T+1), compared in logs to avoid huge integers
        if self.d_prime == 0:
            return True
        if self.d <= 1:
            return self.d_prime <= 1
        return math.log(self.d_prime) <= self.radius * math.log(self.d) + 1e-12

    def to_dict(self) -> dict:
        return {"T": self.T, "radius": self.radius, "events": self.events, "d_prime": self.d_prime,
                "d": self.d, "n_star": self.n_star, "p_prime_measured": self.p_prime_measured,
                "p_prime_bound": self.p_prime_bound, "degree_bound_holds": self.degree_bound_holds}


def build_derived(inst: LLLInstance, failed, T: int, n_star: int) -> DerivedLLL:
    radius = 2 * T + 1
    failed = sorted(failed)
    fset = set(failed)
    adj = inst.dep_graph
    edges = []
    degree = dict.fromkeys(failed, 0)
    for f in failed:
        reach = bfs_distances(adj, f, radius)
        for g in reach:
            if g in fset and g > f:
                edges.append((f, g))
                degree[f] += 1
                degree[g] += 1
    return DerivedLLL(T, radius, failed, edges, max(degree.values(), default=0), inst.d, n_star,
                      len(failed) / max(inst.n_events, 1))


def bootstrap_lll(inst: LLLInstance, n_star: int | None = None, lambda_inner: int = 8,
                  ctx: SeedContext | None = None, ledger: RoundLedger | None = None, *,
                  retry_cap: int = 10_000, check: bool = True) -> SolverOutcome:
    """Run the base solver as if there were only ``n_star`` events, then repair.

    Failed events are grouped into derived components (events within 2T+1
    dependency hops, T = rounds of the inner run). Each component's
    neighborhood of radius T is re-run on a fresh tape until every event
    touching the re-sampled variables passes.
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    n = inst.n_events
    if n_star is None:
        n_star = max(2, math.ceil(math.log2(max(n, 2))))
    if n_star < 2:
        raise ParameterError("n_star must be at least 2")
    if n_star >= n:
        out = base_lll(inst, lambda_inner, ctx, ledger, check=check)
        out.stats["derived"] = None
        return out
    inner_ledger = RoundLedger()
    inner = base_lll(inst, lambda_inner, ctx, inner_ledger, check=check, n_assumed=n_star,
                     tolerate_failures=True)
    ledger.extend(inner_ledger, "inner:")
    T = inner_ledger.total
    failed = inner.stats["violated"]
    stats = dict(inner.stats)
    stats["T"] = T
    if not failed:
        stats["derived"] = build_derived(inst, [], T, n_star).to_dict()
        stats["retries"] = 0
        return SolverOutcome(inner.assignment, ledger, stats, inner.partial)
    derived = build_derived(inst, failed, T, n_star)
    stats["derived"] = derived.to_dict()
    dgraph_adj = {f: [] for f in failed}
    for a, b in derived.edges:
        dgraph_adj[a].append(b)
        dgraph_adj[b].append(a)
    # derived components, ordered by minimum event id
    seen, dcomps = set(), []
    for f in failed:
        if f in seen:
            continue
        comp, stack = [f], [f]
        seen.add(f)
        while stack:
            w = stack.pop()
            for u in dgraph_adj[w]:
                if u not in seen:
                    seen.add(u)
                    comp.append(u)
                    stack.append(u)
        dcomps.append(sorted(comp))
    values = dict(inner.assignment.values)
    dep = inst.dep_graph
    wave_totals: dict[int, int] = {}
    total_retries = 0
    for comp in dcomps:
        region = sorted(bfs_distances(dep, comp, T))
        region_vars = sorted({x for e in region for x in inst.events[e].scope})
        touched = sorted({b for x in region_vars for b in inst.var_events[x]})
        base_values = {x: v for x, v in values.items()}
        for x in region_vars:
            base_values.pop(x, None)
        for attempt in range(retry_cap):
            sub_ledger = RoundLedger()
            sub_ctx = ctx.derive("bootstrap", comp[0], attempt)
            out = base_lll(inst, lambda_inner, sub_ctx, sub_ledger, check=False, n_assumed=n_star,
                           tolerate_failures=True, active_events=region,
                           initial=PartialAssignment(base_values))
            wave_totals[attempt] = max(wave_totals.get(attempt, 0), sub_ledger.total)
            cand = out.assignment.values
            if not any(inst.occurs(b, cand) for b in touched):
                for x in region_vars:
                    values[x] = cand[x]
                total_retries += attempt + 1
                break
        else:
            raise NonconvergenceError(f"derived component at event {comp[0]} did not converge in {retry_cap} tries")
    for w in sorted(wave_totals):
        ledger.charge(f"derived:wave{w}", wave_totals[w])
    pa = PartialAssignment(values)
    bad = violated_events(inst, pa)
    if bad:
        raise VerificationError(f"bootstrap_lll left violated events {sorted(bad)[:5]}")
    stats["retries"] = total_retries
    stats["violated"] = []
    return SolverOutcome(pa, ledger, stats, inner.partial)


def solve(inst: LLLInstance, algorithm: str = "base", *, lam: int = 8, ctx: SeedContext | None = None,
          ledger: RoundLedger | None = None, n_star: int | None = None, check: bool = True) -> SolverOutcome:
    """Dispatch by name: ``mt``, ``base`` or ``bootstrap``."""
    if algorithm == "mt":
        return moser_tardos(inst, ctx, ledger=ledger, check=check)
    if algorithm == "base":
        return base_lll(inst, lam, ctx, ledger, check=check)
    if algorithm == "bootstrap":
        return bootstrap_lll(inst, n_star, lam, ctx, ledger, check=check)
    raise ParameterError(f"unknown algorithm {algorithm!r}")
