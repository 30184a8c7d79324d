"""List vertex-coloring by repeated 2-factor pruning of the color lists.

One pruning keeps about half of every list while the number of neighbors
sharing each kept color also halves. Keep/drop decisions are sampled in
phases scheduled by a defective coloring of the color-choice graph; choices
that look risky get frozen and are decided afterwards by an LLL. Once lists
are short, every node that holds a color none of its neighbors hold takes
the smallest such color; a direct LLL finishes whatever is left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..exceptions import NonconvergenceError, ParameterError, VerificationError
from ..graph import Graph, power_graph
from ..lll import EventSpec, LLLInstance, Multiplicity, PartialAssignment, Threshold, VariableSpec
from ..runtime import RoundLedger, SeedContext
from .common import ColoringResult, solve_residual, verify_coloring
from .defective import defective_coloring


@dataclass
class ListState:
    lists: dict  # node -> sorted tuple of colors
    L: int
    C: float
    frozen: frozenset = frozenset()
    history: list = field(default_factory=list)

    @classmethod
    def from_lists(cls, lists, C: float) -> "ListState":
        lists = _normalize_lists(lists)
        L = min((len(s) for s in lists.values()), default=0)
        return cls(lists, L, C)

    def conflict_counts(self, g: Graph) -> dict:
        """(v, q) -> |N_q(v)|, the neighbors of v that also hold q."""
        sets = {v: set(s) for v, s in self.lists.items()}
        return {(v, q): sum(1 for u in g.adj[v] if q in sets[u]) for v in range(g.n) for q in self.lists[v]}

    def max_conflict(self, g: Graph) -> int:
        return max(self.conflict_counts(g).values(), default=0)


def _normalize_lists(lists) -> dict:
    if isinstance(lists, dict):
        items = lists.items()
    else:
        items = enumerate(lists)
    return {int(v): tuple(sorted(set(int(c) for c in s))) for v, s in items}


def random_lists(n: int, L: int, universe: int, ctx: SeedContext | None = None) -> dict:
    """Each node gets L distinct colors drawn uniformly from range(universe)."""
    if L > universe:
        raise ParameterError("list size exceeds the color universe")
    ctx = SeedContext(0) if ctx is None else ctx
    return {v: tuple(sorted(ctx.stream(v, ("lists", L, universe)).sample(range(universe), L)))
            for v in range(n)}


class ColorChoiceGraph:
    """One vertex per (node, color in its list).

    (v, q) and (u, q') are adjacent iff v == u, or v ~ u and q == q'.
    Vertices are numbered densely in node order, then list order.
    """

    def __init__(self, g: Graph, lists: dict):
        self.g = g
        self.lists = lists
        self.start = []
        total = 0
        for v in range(g.n):
            self.start.append(total)
            total += len(lists[v])
        self.size = total
        self.owner = [v for v in range(g.n) for _ in lists[v]]
        self.color = [q for v in range(g.n) for q in lists[v]]
        self._pos = [{q: i for i, q in enumerate(lists[v])} for v in range(g.n)]

    def vertex(self, v: int, q: int):
        i = self._pos[v].get(q)
        return None if i is None else self.start[v] + i

    def vertices_of(self, v: int) -> range:
        return range(self.start[v], self.start[v] + len(self.lists[v]))

    def same_color_neighbors(self, h: int) -> list:
        v, q = self.owner[h], self.color[h]
        out = []
        for u in self.g.adj[v]:
            i = self._pos[u].get(q)
            if i is not None:
                out.append(self.start[u] + i)
        return out

    def neighbors(self, h: int) -> list:
        v = self.owner[h]
        own = [x for x in self.vertices_of(v) if x != h]
        return sorted(own + self.same_color_neighbors(h))

    def to_graph(self) -> Graph:
        adj = []
        for v in range(self.g.n):
            own = list(self.vertices_of(v))
            for h in own:
                adj.append([x for x in own if x != h])
        for v, u in self.g.edges():
            pos_u = self._pos[u]
            for i, q in enumerate(self.lists[v]):
                j = pos_u.get(q)
                if j is not None:
                    a, b = self.start[v] + i, self.start[u] + j
                    adj[a].append(b)
                    adj[b].append(a)
        return Graph._trusted(self.size, [tuple(sorted(a)) for a in adj])


def _bounds(L: int, C: float):
    l2 = math.log2(L) ** 2
    return l2, math.ceil((1 + 1 / l2) * L / (2 * C))


def _need(size: int, l2: float) -> int:
    return math.ceil((size / 2) * (1 - 1 / l2))


def check_pruning(g: Graph, old: ListState, new_lists: dict) -> list:
    """Violations of the two pruning inequalities; empty when both hold."""
    l2, cap = _bounds(old.L, old.C)
    bad = []
    sets = {v: set(s) for v, s in new_lists.items()}
    for v in range(g.n):
        need = _need(len(old.lists[v]), l2)
        if len(new_lists[v]) < need:
            bad.append(("size", v, len(new_lists[v]), need))
        if not set(new_lists[v]) <= set(old.lists[v]):
            bad.append(("subset", v))
        for q in new_lists[v]:
            k = sum(1 for u in g.adj[v] if q in sets[u])
            if k > cap:
                bad.append(("conflict", v, q, k, cap))
    return bad


def prune_once(g: Graph, state: ListState, ctx: SeedContext | None = None, ledger: RoundLedger | None = None,
               *, K0: float = 1.0, lam: int = 8, tag=0) -> ListState:
    """Shrink every list to about half while halving same-color conflicts.

    Afterwards |L'_v| >= ceil((|L_v|/2)(1 - 1/log2(L)^2)) and every kept
    color q of v is kept by at most ceil((1 + 1/log2(L)^2) L/(2C)) neighbors;
    both are checked exactly before returning.
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    L, C = state.L, state.C
    if L < 2:
        raise ParameterError("pruning needs lists of size at least 2")
    l2, cap = _bounds(L, C)
    log6 = math.log2(L) ** 6
    theta_n = L / (16 * K0 * log6)
    theta_c = theta_n / C
    H = ColorChoiceGraph(g, state.lists)
    owner, adj = H.owner, g.adj

    # schedule: defective coloring of H
    f = math.ceil(L / (2 * l2))
    sub = RoundLedger()
    chi = defective_coloring(H.to_graph(), f, ctx.derive("prune-chi", tag), sub, lam=lam, verify=False).colors
    ledger.extend(sub, f"prune{tag}:chi:")
    n_phases = max(math.ceil(K0 * math.log2(L) ** 4), max(chi, default=-1) + 1)
    by_phase = {}
    for h, c in enumerate(chi):
        by_phase.setdefault(c, []).append(h)

    # each choice carries one tape bit; a sampled choice is kept iff its bit is 1
    bit = [ctx.stream(h, ("keep", tag)).next64() & 1 for h in range(H.size)]
    keep = {}
    frozen = set()
    for i in range(n_phases):
        members = [h for h in by_phase.get(i, ()) if h not in frozen]
        if not members:
            continue
        for h in members:
            keep[h] = bit[h]
        z, kept = {}, {}
        for h in members:
            v = owner[h]
            z[v] = z.get(v, 0) + 1
            kept[v] = kept.get(v, 0) + bit[h]
        freeze_nodes = set()
        for v in sorted(z):
            if z[v] >= theta_n and kept[v] < z[v] / 2 - theta_n:
                freeze_nodes.add(v)
        # color rule: per (v, q), sampled same-color choices among v's neighbors
        zc, kc = {}, {}
        for h in members:
            u, q = owner[h], H.color[h]
            for v in adj[u]:
                if H.vertex(v, q) is not None:
                    zc[(v, q)] = zc.get((v, q), 0) + 1
                    kc[(v, q)] = kc.get((v, q), 0) + bit[h]
        for (v, q) in sorted(zc):
            zz = zc[(v, q)]
            if zz >= theta_c and kc[(v, q)] > zz / 2 + theta_c:
                freeze_nodes.update(adj[v])
        for v in freeze_nodes:
            for h in H.vertices_of(v):
                if h not in keep:
                    frozen.add(h)
        ledger.charge(f"prune{tag}:phase", 2)
    # small frozen sets are dropped outright
    drop_limit = L / (2 * l2)
    for v in range(g.n):
        fz = [h for h in H.vertices_of(v) if h in frozen]
        if fz and len(fz) < drop_limit:
            for h in fz:
                frozen.discard(h)
                keep[h] = 0
    n_frozen = len(frozen)

    # completion: exact final requirements, with value 0 meaning "follow the tape bit"
    sets = {v: set(s) for v, s in state.lists.items()}

    def drop_val(h):
        return bit[h]  # encoded value for "drop": bit ^ enc == 0

    def keep_val(h):
        return 1 - bit[h]

    node_events = {}
    for v in range(g.n):
        hv = list(H.vertices_of(v))
        need = _need(len(hv), l2)
        t = len(hv) - need + 1
        if need > 0 and t <= len(hv):
            node_events[v] = (hv, Threshold(t, accept=[{drop_val(h)} for h in hv]))
    conflict_events = {}
    for v in range(g.n):
        for q in state.lists[v]:
            hvq = H.vertex(v, q)
            nb = H.same_color_neighbors(hvq)
            if len(nb) > cap:
                scope = [hvq] + nb
                acc = [frozenset()] + [{keep_val(h)} for h in nb]
                conflict_events[(v, q)] = (scope, Threshold(cap + 1, accept=acc, gate=(0, keep_val(hvq))))

    values = {h: keep[h] ^ bit[h] for h in keep}  # encoded values of decided choices
    residual = set(frozen)
    all_events = list(node_events.values()) + [conflict_events[k] for k in sorted(conflict_events)]
    for scope, pred in all_events:
        if all(h in values for h in scope) and pred.evaluate([values[h] for h in scope]):
            residual.update(scope)
    for h in residual:
        values.pop(h, None)
    repaired = len(residual) - n_frozen
    if residual:
        events = [(s, p) for s, p in all_events if any(h in residual for h in s)]
        inst = LLLInstance([VariableSpec(h, 2) for h in range(H.size)],
                           [EventSpec(j, s, p) for j, (s, p) in enumerate(events)])
        owners_vars = {}
        for h in sorted(residual):
            owners_vars.setdefault(owner[h], []).append(h)
        sub = RoundLedger()
        pa, _ = solve_residual(inst, PartialAssignment(values), ctx.derive("prune-complete", tag), sub,
                               f"prune{tag}:complete", lam=lam, graph=power_graph(g, 2),
                               owners=sorted(owners_vars), owner_vars=lambda o: owners_vars[o])
        ledger.extend(sub)
        values = pa.values
    new_lists = {}
    for v in range(g.n):
        new_lists[v] = tuple(H.color[h] for h in H.vertices_of(v) if values[h] ^ bit[h])
    bad = check_pruning(g, state, new_lists)
    if bad:
        raise VerificationError(f"pruning inequalities fail: {bad[:5]}")
    new_L = min(_need(len(state.lists[v]), l2) for v in range(g.n)) if g.n else 0
    entry = {"L": L, "new_L": new_L, "frozen": n_frozen, "repaired": repaired, "phases": n_phases,
             "chi_colors": len(by_phase), "conflict_cap": cap}
    return ListState(new_lists, new_L, C, frozenset(), list(state.history) + [entry])


def private_colors(g: Graph, lists: dict) -> dict:
    """v -> smallest color of v's list held by no neighbor (nodes without one omitted)."""
    sets = {v: set(s) for v, s in lists.items()}
    out = {}
    for v in range(g.n):
        for q in lists[v]:
            if not any(q in sets[u] for u in g.adj[v]):
                out[v] = q
                break
    return out


def complete_list_coloring(g: Graph, lists: dict, ctx: SeedContext, ledger: RoundLedger, *,
                           lam: int = 8, label: str = "list:complete") -> dict:
    """Every node picks a uniform color of its list; monochromatic edges are
    repaired by an LLL whose variables are the endpoints' choices."""
    palette = sorted({q for s in lists.values() for q in s})
    idx = {q: i for i, q in enumerate(palette)}
    U = max(len(palette), 2)
    variables = []
    for v in range(g.n):
        probs = [0.0] * U
        for q in lists[v]:
            probs[idx[q]] = 1.0 / len(lists[v])
        variables.append(VariableSpec(v, U, tuple(probs)))
    events = [EventSpec(j, e, Multiplicity(2)) for j, e in enumerate(g.edges())]
    inst = LLLInstance(variables, events)
    values = {v: variables[v].sample(ctx.stream(v, (label, "draw"))) for v in range(g.n)}
    ledger.charge(f"{label}:draw", 1)
    bad = {v for u, w in g.edges() if values[u] == values[w] for v in (u, w)}
    for v in bad:
        values.pop(v)
    if bad:
        pa, _ = solve_residual(inst, PartialAssignment(values), ctx, ledger, label, lam=lam)
        values = pa.values
    return {v: palette[values[v]] for v in range(g.n)}


def list_coloring(g: Graph, lists, C: float = 8.0, ctx: SeedContext | None = None,
                  ledger: RoundLedger | None = None, *, K0: float = 1.0, L_min: float | None = None,
                  lam: int = 8, max_prunes: int | None = None, verify: bool = True,
                  check_entry: bool = True) -> ColoringResult:
    """Proper coloring with every node's color taken from its own list.

    Entry requirement: every (v, q) has at most L/C neighbors also holding q.
    Lists are pruned while L >= L_min (default 4C); then nodes with a
    private color take the smallest one, and a completion LLL handles the
    rest.
    """
    ctx = SeedContext(0) if ctx is None else ctx
    ledger = RoundLedger() if ledger is None else ledger
    original = _normalize_lists(lists)
    if set(original) != set(range(g.n)):
        raise ParameterError("lists must cover every node")
    if any(not s for s in original.values()):
        raise ParameterError("every list must be nonempty")
    state = ListState.from_lists(original, C)
    if check_entry and state.max_conflict(g) > state.L / C:
        raise ParameterError(f"some color is shared by more than L/C = {state.L / C:.3g} neighbors")
    L_min = 4 * C if L_min is None else L_min
    stats = {"downsampled": False, "prunes": 0}
    cap_n = math.ceil(math.log2(max(g.n, 2)) ** 2)
    if state.L > cap_n:
        keep = {v: tuple(sorted(ctx.stream(v, "downsample").sample(list(s), cap_n))) for v, s in original.items()}
        state = ListState.from_lists(keep, C)
        stats["downsampled"] = True
    if max_prunes is None:
        max_prunes = max(1, math.ceil(math.log2(max(state.L / C, 2)))) + 2
    colors = None
    for r in range(max_prunes + 1):
        private = private_colors(g, state.lists)
        ledger.charge("list:finish-check", 1)
        if len(private) == g.n:
            colors = [private[v] for v in range(g.n)]
            stats["finish"] = "private"
            break
        if state.L < L_min or r == max_prunes:
            break
        state = prune_once(g, state, ctx, ledger, K0=K0, lam=lam, tag=r)
        stats["prunes"] += 1
    if colors is None:
        col = complete_list_coloring(g, state.lists, ctx.derive("list-complete"), ledger, lam=lam)
        colors = [col[v] for v in range(g.n)]
        stats["finish"] = "lll"
    stats["history"] = state.history
    stats["final_L"] = state.L
    report = verify_coloring(g, colors, "list", lists=original)
    if verify and not report.passed:
        raise VerificationError(f"list coloring failed verification: {report.violations}")
    if colors is None:
        raise NonconvergenceError("list coloring did not finish")
    return ColoringResult(colors, report, ledger, stats)
