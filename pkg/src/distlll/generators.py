"""Deterministic graph generators."""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import NonconvergenceError, ParameterError
from .graph import Graph
from .runtime import SeedContext


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ParameterError("a cycle needs at least 3 nodes")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges)


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def empty_graph(n: int) -> Graph:
    return Graph(n, [()] * n, check=False)


def random_regular(n: int, d: int, ctx: SeedContext | None = None, max_tries: int = 1000) -> Graph:
    """Uniform-ish random d-regular graph by the pairing model.

    Stubs are matched at random; a matching with a loop or a repeated edge is
    rejected and redrawn, up to ``max_tries`` times.
    """
    if n < 0 or d < 0:
        raise ParameterError("n and d must be nonnegative")
    if (n * d) % 2:
        raise ParameterError(f"no {d}-regular graph on {n} nodes: n*d is odd")
    if d >= n and n > 0:
        raise ParameterError("need d < n")
    if d == 0:
        return empty_graph(n)
    ctx = SeedContext(0) if ctx is None else ctx
    for attempt in range(max_tries):
        stream = ctx.stream(attempt, ("random_regular", n, d))
        stubs = [v for v in range(n) for _ in range(d)]
        stream.shuffle(stubs)
        seen = set()
        ok = True
        for i in range(0, len(stubs), 2):
            u, v = stubs[i], stubs[i + 1]
            if u == v:
                ok = False
                break
            e = (u, v) if u < v else (v, u)
            if e in seen:
                ok = False
                break
            seen.add(e)
        if ok:
            return Graph.from_edges(n, seen)
        # local repair keeps rejection rates manageable for larger d
        edges = _repair(stubs, stream)
        if edges is not None:
            return Graph.from_edges(n, edges)
    raise NonconvergenceError(f"random_regular({n}, {d}) failed after {max_tries} tries")


def _repair(stubs, stream, rounds: int = 200):
    """Fix loops and multi-edges by random double-edge swaps."""
    pairs = [[stubs[i], stubs[i + 1]] for i in range(0, len(stubs), 2)]
    m = len(pairs)
    for _ in range(rounds):
        counts = {}
        for u, v in pairs:
            e = (u, v) if u < v else (v, u)
            counts[e] = counts.get(e, 0) + 1
        bad = [i for i, (u, v) in enumerate(pairs)
               if u == v or counts[(u, v) if u < v else (v, u)] > 1]
        if not bad:
            return [tuple(sorted(p)) for p in pairs]
        for i in bad:
            j = stream.randbelow(m)
            if j == i:
                continue
            a, b = pairs[i]
            c, d = pairs[j]
            pairs[i], pairs[j] = [a, d], [c, b]
    return None


def gnp_capped(n: int, p: float, cap: int, ctx: SeedContext | None = None) -> Graph:
    """G(n, p) restricted to max degree ``cap``: candidate edges are scanned in
    lexicographic order and kept only when both endpoints have room."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    if cap < 0:
        raise ParameterError("cap must be nonnegative")
    ctx = SeedContext(0) if ctx is None else ctx
    deg = [0] * n
    edges = []
    for u in range(n):
        stream = ctx.stream(u, ("gnp", n))
        for v in range(u + 1, n):
            if stream.random() < p and deg[u] < cap and deg[v] < cap:
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
    return Graph.from_edges(n, edges)


@dataclass
class GraphSpec:
    family: str
    n: int = 0
    d: int = 3
    p: float = 0.1
    cap: int = 4
    rows: int = 0
    cols: int = 0
    extra: dict = field(default_factory=dict)


def generate_graph(spec, ctx: SeedContext | None = None) -> Graph:
    """Build a graph from a :class:`GraphSpec` or an equivalent dict."""
    if isinstance(spec, dict):
        spec = GraphSpec(**spec)
    fam = spec.family
    if spec.n < 0:
        raise ParameterError("n must be nonnegative")
    if fam == "path":
        return path_graph(spec.n)
    if fam == "cycle":
        return cycle_graph(spec.n)
    if fam == "grid":
        rows = spec.rows or int(round(spec.n ** 0.5))
        cols = spec.cols or (spec.n // rows if rows else 0)
        if rows * cols <= 0:
            raise ParameterError("grid needs positive rows and cols")
        return grid_graph(rows, cols)
    if fam == "random_regular":
        return random_regular(spec.n, spec.d, ctx)
    if fam == "gnp_capped":
        return gnp_capped(spec.n, spec.p, spec.cap, ctx)
    if fam == "star":
        return star_graph(max(spec.n - 1, 0))
    if fam == "complete":
        return complete_graph(spec.n)
    if fam == "empty":
        return empty_graph(spec.n)
    raise ParameterError(f"unknown graph family {fam!r}")
