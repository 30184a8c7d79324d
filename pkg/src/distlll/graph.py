"""Undirected simple graphs on dense integer ids and the basic operations on them.

Every tie is broken by ascending node id so that all outputs are reproducible.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Sequence

from .exceptions import ParameterError, ValidationError

NodeSubset = frozenset


class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    ``adj[v]`` is a sorted tuple of neighbors. Instances are treated as
    immutable once built.
    """

    __slots__ = ("n", "adj", "max_degree", "_m")

    def __init__(self, n: int, adj: Sequence[Sequence[int]], *, check: bool = True):
        if n < 0:
            raise ParameterError("node count must be nonnegative")
        if len(adj) != n:
            raise ParameterError("adjacency length does not match n")
        self.n = n
        self.adj = tuple(tuple(sorted(nb)) for nb in adj)
        if check:
            self._check()
        self.max_degree = max((len(nb) for nb in self.adj), default=0)
        self._m = sum(len(nb) for nb in self.adj) // 2

    def _check(self):
        for v, nb in enumerate(self.adj):
            for i, u in enumerate(nb):
                if u == v:
                    raise ValidationError(f"self-loop at {v}")
                if not 0 <= u < self.n:
                    raise ValidationError(f"neighbor {u} of {v} out of range")
                if i and nb[i - 1] == u:
                    raise ValidationError(f"duplicate edge {v}-{u}")
        for v, nb in enumerate(self.adj):
            for u in nb:
                # binary search would be faster; sets keep it simple
                if v not in self.adj[u]:
                    raise ValidationError(f"asymmetric edge {v}-{u}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], *, strict: bool = False) -> "Graph":
        """Build a graph from an edge iterable.

        With ``strict`` set, self-loops and repeated edges raise; otherwise
        repeats are merged and self-loops still raise.
        """
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge {u}-{v} out of range")
            if v in nbrs[u]:
                if strict:
                    raise ValidationError(f"duplicate edge {u}-{v}")
                continue
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, nbrs, check=False)

    @classmethod
    def _trusted(cls, n: int, adj: Sequence[Sequence[int]]) -> "Graph":
        # adjacency lists already symmetric, duplicate-free and loop-free
        return cls(n, adj, check=False)

    @property
    def m(self) -> int:
        return self._m

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def nodes(self) -> range:
        return range(self.n)

    def edges(self) -> Iterator[tuple[int, int]]:
        for v, nb in enumerate(self.adj):
            for u in nb:
                if u > v:
                    yield v, u

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.adj[u]
        lo, hi = 0, len(nb)
        while lo < hi:
            mid = (lo + hi) // 2
            if nb[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(nb) and nb[lo] == v

    def induced(self, nodes: Iterable[int]) -> "Graph":
        """Same node set, keeping only edges with both ends in ``nodes``."""
        keep = bytearray(self.n)
        for v in nodes:
            keep[v] = 1
        adj = [
            tuple(u for u in nb if keep[u]) if keep[v] else ()
            for v, nb in enumerate(self.adj)
        ]
        return Graph._trusted(self.n, adj)

    def relabeled(self, nodes: Sequence[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph on ``nodes`` with ids compacted to ``0..len-1``.

        Returns the new graph and the list mapping new ids to old ids.
        """
        order = sorted(set(nodes))
        index = {v: i for i, v in enumerate(order)}
        adj = [[index[u] for u in self.adj[v] if u in index] for v in order]
        return Graph._trusted(len(order), adj), order

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, max_degree={self.max_degree})"


def bfs_distances(g: Graph, source, radius: int | None = None, allowed=None) -> dict[int, int]:
    """Distances from ``source`` (a node or iterable of nodes) up to ``radius``.

    ``allowed`` restricts the walk to a node set (membership via ``in``).
    """
    sources = [source] if isinstance(source, int) else list(source)
    dist = {s: 0 for s in sources}
    frontier = sources
    depth = 0
    adj = g.adj
    while frontier and (radius is None or depth < radius):
        depth += 1
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist and (allowed is None or u in allowed):
                    dist[u] = depth
                    nxt.append(u)
        frontier = nxt
    return dist


def power_graph(g: Graph, k: int) -> Graph:
    """Graph with an edge between nodes at distance 1..k in ``g``."""
    if k < 1:
        raise ParameterError("k must be at least 1")
    if k == 1:
        return g
    if k == 2:
        adj = g.adj
        out = []
        for v, nb in enumerate(adj):
            reach = set(nb)
            for u in nb:
                reach.update(adj[u])
            reach.discard(v)
            out.append(reach)
        return Graph._trusted(g.n, out)
    return annulus_graph(g, 1, k)


def annulus_graph(g: Graph, a: int, b: int) -> Graph:
    """Graph with an edge between nodes whose distance lies in ``[a, b]``."""
    if not 1 <= a <= b:
        raise ParameterError("need 1 <= a <= b")
    if a == 1 and b == 1:
        return g
    adj = []
    for v in range(g.n):
        dist = bfs_distances(g, v, b)
        adj.append(sorted(u for u, dv in dist.items() if dv >= a))
    return Graph._trusted(g.n, adj)


def components(g: Graph, s: Iterable[int] | None = None) -> list[frozenset]:
    """Connected components of ``g[s]`` ordered by their minimum node id."""
    if s is None:
        members = range(g.n)
        inside = None
    else:
        inside = s if isinstance(s, (set, frozenset)) else set(s)
        members = sorted(inside)
    seen = set()
    out = []
    adj = g.adj
    for v in members:
        if v in seen:
            continue
        seen.add(v)
        comp = [v]
        stack = [v]
        while stack:
            w = stack.pop()
            for u in adj[w]:
                if u not in seen and (inside is None or u in inside):
                    seen.add(u)
                    comp.append(u)
                    stack.append(u)
        out.append(frozenset(comp))
    return out


def ball(g: Graph, v: int, r: int, allowed=None) -> frozenset:
    """Nodes within distance ``r`` of ``v``."""
    if not 0 <= v < g.n:
        raise ParameterError(f"node {v} not in graph")
    if r < 0:
        raise ParameterError("radius must be nonnegative")
    return frozenset(bfs_distances(g, v, r, allowed))


def greedy_coloring(g: Graph, order: Iterable[int] | None = None) -> list[int]:
    """Proper coloring: each node takes the smallest color unused by colored neighbors."""
    color = [-1] * g.n
    adj = g.adj
    for v in (range(g.n) if order is None else order):
        used = {color[u] for u in adj[v]}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    return color


def distance_k_coloring(g: Graph, k: int) -> list[int]:
    """Greedy proper coloring of ``power_graph(g, k)`` in ascending id order."""
    return greedy_coloring(power_graph(g, k))


def ruling_set(g: Graph, alpha: int, beta: int, nodes: Iterable[int] | None = None) -> frozenset:
    """Greedy (alpha, beta)-ruling set.

    Scans nodes in ascending id and selects a node unless a selected node is
    within distance ``alpha - 1``. Selected nodes are pairwise at distance at
    least ``alpha`` and every scanned node lies within ``alpha - 1 <= beta``
    of a selected one. With ``nodes`` given, distances are taken in the
    induced subgraph on those nodes.
    """
    if alpha < 2 or beta < 1:
        raise ParameterError("need alpha >= 2 and beta >= 1")
    if beta < alpha - 1:
        raise ParameterError("greedy construction needs beta >= alpha - 1")
    if nodes is None:
        scan = range(g.n)
        allowed = None
    else:
        allowed = set(nodes)
        scan = sorted(allowed)
    blocked = set()
    chosen = []
    for v in scan:
        if v in blocked:
            continue
        chosen.append(v)
        blocked.update(bfs_distances(g, v, alpha - 1, allowed))
    return frozenset(chosen)


def eccentricity(g: Graph, v: int, allowed=None) -> int:
    return max(bfs_distances(g, v, None, allowed).values())


def component_diameter(g: Graph, comp: Iterable[int]) -> int:
    """Exact diameter of the connected node set ``comp`` in ``g[comp]``.

    Uses eccentricity bounds (lower/upper per node) so that only a few BFS
    runs are needed on typical graphs; falls back to all of them in the worst
    case, so the answer is always exact.
    """
    members = comp if isinstance(comp, (set, frozenset)) else set(comp)
    size = len(members)
    if size <= 1:
        return 0
    if size <= 32:
        return max(eccentricity(g, v, members) for v in members)
    lower = dict.fromkeys(members, 0)
    upper = dict.fromkeys(members, size)
    exact = set()
    diam_lo, diam_hi = 0, 2 * size
    pick_high = True
    runs = 0
    while diam_lo < diam_hi:
        if runs == 16 and diam_lo * size * size <= 4 * 10**9:
            # bounds converge slowly on expander-like sets; switch to bitsets
            return _bitset_diameter(g, members)
        runs += 1
        open_nodes = [v for v in members if v not in exact and upper[v] > diam_lo]
        if not open_nodes:
            break
        if pick_high:
            v = min(open_nodes, key=lambda w: (-upper[w], w))
        else:
            v = min(open_nodes, key=lambda w: (lower[w], w))
        pick_high = not pick_high
        dist = bfs_distances(g, v, None, members)
        if len(dist) != size:
            raise ValidationError("component_diameter needs a connected node set")
        ecc = max(dist.values())
        exact.add(v)
        diam_lo = max(diam_lo, ecc)
        for w, dw in dist.items():
            lo = max(dw, ecc - dw)
            if lo > lower[w]:
                lower[w] = lo
            hi = ecc + dw
            if hi < upper[w]:
                upper[w] = hi
        lower[v] = upper[v] = ecc
        diam_lo = max(diam_lo, max(lower.values()))
        diam_hi = min(diam_hi, max(upper.values()))
    return diam_lo


def _bitset_diameter(g: Graph, members) -> int:
    """Diameter by growing every node's ball as an integer bitmask."""
    order = sorted(members)
    index = {v: i for i, v in enumerate(order)}
    nbrs = [[index[u] for u in g.adj[v] if u in index] for v in order]
    reach = [1 << i for i in range(len(order))]
    full = (1 << len(order)) - 1
    radius = 0
    while any(r != full for r in reach):
        new = []
        for i, nb in enumerate(nbrs):
            r = reach[i]
            for j in nb:
                r |= reach[j]
            new.append(r)
        if new == reach:
            raise ValidationError("component_diameter needs a connected node set")
        reach = new
        radius += 1
    return radius


def max_component_diameter(g: Graph, nodes: Iterable[int]) -> int:
    return max((component_diameter(g, c) for c in components(g, nodes)), default=0)


# --- edge-list text format -------------------------------------------------


def parse_edgelist(text: str) -> Graph:
    """Parse the ``n m`` header plus ``u v`` lines format (strict)."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ValidationError("missing 'n m' header")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
    except ValueError as exc:
        raise ValidationError("header must hold two integers") from exc
    body = lines[1:]
    if len(body) != m:
        raise ValidationError(f"header declares {m} edges, found {len(body)}")
    edges = []
    for row in body:
        if len(row) != 2:
            raise ValidationError(f"bad edge line: {' '.join(row)}")
        u, v = int(row[0]), int(row[1])
        if u > v:
            u, v = v, u
        edges.append((u, v))
    return Graph.from_edges(n, edges, strict=True)


def format_edgelist(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(out) + "\n"


def read_edgelist(path) -> Graph:
    with open(path) as fh:
        return parse_edgelist(fh.read())


def write_edgelist(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edgelist(g))
