"""LLL instance families used by the benchmarks and tests.

Every family picks its domain size so that ``p * (e*d)**exponent < 1`` holds
with a safety factor, where d is the instance's dependency degree.
"""

from __future__ import annotations

import math

from .exceptions import ParameterError
from .generators import random_regular
from .lll import Conjunction, EventSpec, LLLInstance, Threshold, VariableSpec
from .runtime import SeedContext


def domain_for(d: int, scope_size: int, exponent: float = 32, safety: float = 16.0) -> int:
    """Smallest power of two q with q**(-scope_size) * (e*d)**exponent * safety < 1."""
    need = exponent * math.log2(math.e * max(d, 1)) + math.log2(safety)
    bits = math.floor(need / scope_size) + 1
    return 1 << max(bits, 1)


def conjunction_chain(n: int, ctx: SeedContext | None = None, exponent: float = 32) -> LLLInstance:
    """Events in a path: event i owns two private variables and shares one
    variable with each chain neighbor (endpoints get an extra private one so
    every scope has four variables). Each event asks for a target tuple."""
    if n < 1:
        raise ParameterError("need at least one event")
    ctx = SeedContext(0) if ctx is None else ctx
    q = domain_for(2 if n > 2 else 1, 4, exponent)
    shared = list(range(n - 1))  # variable i sits between events i and i+1
    next_id = n - 1
    scopes = []
    for i in range(n):
        scope = []
        if i > 0:
            scope.append(shared[i - 1])
        own = 4 - (i > 0) - (i < n - 1)
        scope.extend(range(next_id, next_id + own))
        next_id += own
        if i < n - 1:
            scope.append(shared[i])
        scopes.append(scope)
    variables = [VariableSpec(x, q) for x in range(next_id)]
    stream = ctx.stream(0, ("chain-targets", n))
    events = [EventSpec(i, s, Conjunction([stream.randbelow(q) for _ in s])) for i, s in enumerate(scopes)]
    inst = LLLInstance(variables, events)
    inst.family = "conjunction_chain"
    return inst


def sparse_conjunction(n: int, ctx: SeedContext | None = None, exponent: float = 32,
                       vars_per_event: int = 4) -> LLLInstance:
    """Random sparse conjunctions: every variable appears in two events.

    ``n * vars_per_event / 2`` variables; their two copies are shuffled and
    cut into scopes of ``vars_per_event``. Repeats inside a scope are dropped.
    """
    if n < 1:
        raise ParameterError("need at least one event")
    ctx = SeedContext(0) if ctx is None else ctx
    stream = ctx.stream(0, ("sparse-conj", n, vars_per_event))
    k = vars_per_event
    nv = max(1, (n * k) // 2)
    slots = [x for x in range(nv) for _ in range(2)]
    stream.shuffle(slots)
    slots = slots[: n * k]
    while len(slots) < n * k:
        slots.append(stream.randbelow(nv))
    scopes = []
    for i in range(n):
        chunk = []
        for x in slots[i * k:(i + 1) * k]:
            if x not in chunk:
                chunk.append(x)
        scopes.append(chunk)
    # dependency degree from the scopes, then the domain
    holders = {}
    for i, s in enumerate(scopes):
        for x in s:
            holders.setdefault(x, []).append(i)
    d = 0
    for i, s in enumerate(scopes):
        nb = {j for x in s for j in holders[x]} - {i}
        d = max(d, len(nb))
    q = domain_for(d, min(len(s) for s in scopes), exponent)
    variables = [VariableSpec(x, q) for x in range(nv)]
    events = [EventSpec(i, s, Conjunction([stream.randbelow(q) for _ in s])) for i, s in enumerate(scopes)]
    inst = LLLInstance(variables, events)
    inst.family = "sparse_conjunction"
    return inst


def bucketing_threshold(n: int, ctx: SeedContext | None = None, degree: int = 3, exponent: float = 32,
                        t: int = 2) -> LLLInstance:
    """Bucketing events on a random regular graph: node v's event occurs when
    at least ``t`` neighbors pick the same bucket as v. Bucket choices are
    uniform over a domain large enough for the criterion."""
    ctx = SeedContext(0) if ctx is None else ctx
    g = random_regular(n, degree, ctx.derive("bucketing-graph", n, degree))
    d = 0
    for v in range(n):
        two_hop = {w for u in g.adj[v] for w in g.adj[u]} | set(g.adj[v])
        two_hop.discard(v)
        d = max(d, len(two_hop))
    # p = Pr[Bin(degree, 1/q) >= t] <= C(degree, t) q^{-t}
    need = exponent * math.log2(math.e * max(d, 1)) + math.log2(math.comb(degree, t)) + 4
    q = 1 << (math.floor(need / t) + 1)
    variables = [VariableSpec(v, q) for v in range(n)]
    events = [EventSpec(v, (v,) + g.adj[v], Threshold(t, center=0)) for v in range(n)]
    inst = LLLInstance(variables, events)
    inst.family = "bucketing_threshold"
    inst.base_graph = g
    return inst


def regular_conjunction(n: int, degree: int, q: int, ctx: SeedContext | None = None) -> LLLInstance:
    """Dependency graph equal to a random ``degree``-regular graph.

    Variables are the graph's edges (uniform over ``q`` values); node v's
    event asks every incident edge variable to hit a target value.
    """
    ctx = SeedContext(0) if ctx is None else ctx
    g = random_regular(n, degree, ctx.derive("regular-conj-graph", n, degree))
    edge_ids = {e: i for i, e in enumerate(g.edges())}
    variables = [VariableSpec(i, q) for i in range(len(edge_ids))]
    stream = ctx.stream(0, ("regular-conj-targets", n, degree, q))
    events = []
    for v in range(n):
        scope = sorted(edge_ids[(min(u, v), max(u, v))] for u in g.adj[v])
        events.append(EventSpec(v, scope, Conjunction([stream.randbelow(q) for _ in scope])))
    inst = LLLInstance(variables, events)
    inst.family = "regular_conjunction"
    inst.base_graph = g
    return inst


FAMILIES = {
    "conjunction_chain": conjunction_chain,
    "sparse_conjunction": sparse_conjunction,
    "bucketing_threshold": bucketing_threshold,
}


def make_instance(family: str, n: int, ctx: SeedContext | None = None) -> LLLInstance:
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown instance family {family!r}") from None
    return builder(n, ctx)
