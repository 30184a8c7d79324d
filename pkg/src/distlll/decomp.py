"""Network decompositions: ball carving, validation, and shattering.

A (C, D) decomposition partitions a node set into C blocks such that every
connected component inside a block has diameter at most D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .exceptions import ParameterError, ValidationError
from .graph import Graph, component_diameter, components, power_graph, ruling_set
from .runtime import RoundLedger


@dataclass
class NetworkDecomposition:
    blocks: list  # list of frozenset, in processing order
    C: int
    D: int
    cleanup_used: bool = False
    radii: list = field(default_factory=list)  # carved r* values, in carving order
    meta: dict = field(default_factory=dict)

    @property
    def nodes(self) -> frozenset:
        out = set()
        for b in self.blocks:
            out |= b
        return frozenset(out)

    def block_of(self) -> dict:
        return {v: i for i, b in enumerate(self.blocks) for v in b}

    def to_dict(self, measured_D: int | None = None) -> dict:
        return {
            "blocks": [sorted(b) for b in self.blocks],
            "measured_C": len(self.blocks),
            "measured_D": self.D if measured_D is None else measured_D,
            "cleanup_used": self.cleanup_used,
        }


@dataclass
class DecompositionReport:
    partition_ok: bool
    missing: list
    extra: list
    overlapping: list
    block_count: int
    C: int
    count_ok: bool
    block_diameters: list
    measured_D: int
    D: int
    diameter_ok: bool

    @property
    def passed(self) -> bool:
        return self.partition_ok and self.count_ok and self.diameter_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "partition_ok": self.partition_ok,
            "missing": self.missing[:20],
            "extra": self.extra[:20],
            "overlapping": self.overlapping[:20],
            "block_count": self.block_count,
            "C": self.C,
            "block_diameters": self.block_diameters,
            "measured_D": self.measured_D,
            "D": self.D,
        }


def ceil_root(n: int, lam: int) -> int:
    """Smallest integer t with t**lam >= n (integer-exact ceil of n**(1/lam))."""
    if n <= 1:
        return 1
    t = max(1, int(round(n ** (1.0 / lam))))
    while t ** lam < n:
        t += 1
    while t > 1 and (t - 1) ** lam >= n:
        t -= 1
    return t


def carve_radius_bound(n: int, lam: int) -> int:
    """``ceil(n**(1/lam) * log2(n))``, the radius bound of the carving argument."""
    if n <= 1:
        return 0
    return math.ceil(n ** (1.0 / lam) * math.log2(n) - 1e-9)


def _carve_ball(adj, v, alive, t):
    """Grow layers around ``v`` inside ``alive`` until the ratio test passes.

    Returns (inner ball, boundary layer, r*). The ratio test at r=0 always
    fails (|B_-1| = 0), so r* >= 1.
    """
    inner = {v}
    frontier = [v]
    size = 1
    r = 0
    while True:
        r += 1
        nxt = []
        for w in frontier:
            for u in adj[w]:
                if u in alive and u not in inner:
                    inner.add(u)
                    nxt.append(u)
        grown = size + len(nxt)
        # |B_r| / |B_{r-1}| < 1 + 1/t  <=>  |B_r| * t < |B_{r-1}| * (t + 1)
        if grown * t < size * (t + 1):
            inner.difference_update(nxt)
            # boundary mass below inner mass / t, as the carving argument needs
            assert len(nxt) * t < size, "ball carving boundary too heavy"
            return inner, nxt, r
        size = grown
        frontier = nxt


def ball_carve(g: Graph, lam: int, nodes=None) -> NetworkDecomposition:
    """Sequential ball carving into at most ``lam`` blocks (plus cleanup if needed).

    With ``nodes`` given, carves the induced subgraph on that set and uses
    its size as n.
    """
    if lam < 1:
        raise ParameterError("lambda must be a positive integer")
    remaining = set(range(g.n)) if nodes is None else set(nodes)
    n = len(remaining)
    if n == 0:
        return NetworkDecomposition([], 0, 0)
    t = ceil_root(n, lam)
    adj = g.adj
    blocks, radii = [], []
    block_D = []
    while remaining:
        alive = set(remaining)
        block = set()
        max_r = 0
        for v in sorted(remaining):
            if v not in alive:
                continue
            inner, boundary, r = _carve_ball(adj, v, alive, t)
            radii.append(r)
            max_r = max(max_r, r)
            block |= inner
            alive -= inner
            alive.difference_update(boundary)
        remaining -= block
        blocks.append(frozenset(block))
        block_D.append(2 * (max_r - 1))
    cleanup = len(blocks) > lam
    return NetworkDecomposition(blocks, len(blocks), max(block_D), cleanup, radii,
                                {"t": t, "lam": lam, "block_D": block_D})


def _validated_helper_components(gd: Graph, helper: NetworkDecomposition):
    report = validate_decomposition(gd, helper)
    if not report.passed:
        raise ValidationError(f"helper decomposition invalid: {report.to_dict()}")
    return [components(gd, b) for b in helper.blocks], report.measured_D


def ball_carve_distributed(g: Graph, lam: int, helper: NetworkDecomposition | None = None,
                           ledger: RoundLedger | None = None) -> NetworkDecomposition:
    """Ball carving simulated in phases driven by a helper decomposition of g^d.

    In every epoch, the helper's blocks are processed one per phase. Inside a
    phase each helper component is handled by its minimum-id node, which
    learns the component plus its carving radius and carves its members in
    ascending id order. Components of one helper block are at distance > d
    in g, so their carvings cannot interact.
    """
    if lam < 1:
        raise ParameterError("lambda must be a positive integer")
    ledger = RoundLedger() if ledger is None else ledger
    n = g.n
    if n == 0:
        return NetworkDecomposition([], 0, 0)
    t = ceil_root(n, lam)
    R = max(1, carve_radius_bound(n, lam))
    dist = 2 * R + 1
    gd = power_graph(g, dist)
    if helper is None:
        helper_lam = max(1, math.ceil(math.sqrt(math.log2(n)))) if n > 1 else 1
        helper = ball_carve(gd, helper_lam)
    helper_comps, helper_D = _validated_helper_components(gd, helper)
    adj = g.adj
    remaining = set(range(n))
    blocks, radii, block_D = [], [], []
    epoch = 0
    while remaining:
        alive = set(remaining)
        block = set()
        max_r = 0
        for j, comps in enumerate(helper_comps):
            active = [c for c in comps if any(v in alive for v in c)]
            if not active:
                continue
            ledger.charge(f"carve:epoch{epoch}:phase{j}", helper_D * dist + R)
            for comp in active:
                for v in sorted(comp):
                    if v not in alive:
                        continue
                    inner, boundary, r = _carve_ball(adj, v, alive, t)
                    radii.append(r)
                    max_r = max(max_r, r)
                    block |= inner
                    alive -= inner
                    alive.difference_update(boundary)
        remaining -= block
        blocks.append(frozenset(block))
        block_D.append(2 * (max_r - 1))
        epoch += 1
    cleanup = len(blocks) > lam
    return NetworkDecomposition(blocks, len(blocks), max(block_D), cleanup, radii,
                                {"t": t, "lam": lam, "d": dist, "helper_D": helper_D, "block_D": block_D})


def validate_decomposition(g: Graph, nd: NetworkDecomposition, nodes=None) -> DecompositionReport:
    """Exact check of partition, block count and component diameters.

    ``nodes`` is the set the decomposition must cover (default: all of g).
    """
    target = set(range(g.n)) if nodes is None else set(nodes)
    seen = {}
    overlapping = set()
    for i, b in enumerate(nd.blocks):
        for v in b:
            if v in seen:
                overlapping.add(v)
            seen[v] = i
    missing = sorted(target - seen.keys())
    extra = sorted(seen.keys() - target)
    partition_ok = not missing and not extra and not overlapping
    diams = []
    for b in nd.blocks:
        inside = [v for v in b if 0 <= v < g.n]
        diams.append(max((component_diameter(g, c) for c in components(g, inside)), default=0))
    measured = max(diams, default=0)
    nonempty = sum(1 for b in nd.blocks if b)
    return DecompositionReport(
        partition_ok=partition_ok,
        missing=missing,
        extra=extra,
        overlapping=sorted(overlapping),
        block_count=nonempty,
        C=nd.C,
        count_ok=nonempty <= nd.C,
        block_diameters=diams,
        measured_D=measured,
        D=nd.D,
        diameter_ok=measured <= nd.D,
    )


def shattered_decomposition(g: Graph, b, lam: int, ledger: RoundLedger | None = None,
                            c2: int = 2) -> NetworkDecomposition:
    """Decompose ``g[b]`` by clustering around a ruling set and carving the contraction.

    Each component of g[b] is handled independently: a greedy ruling set
    with separation 4*c2+3 is computed, every node joins its nearest ruler
    (ties to the smaller id), clusters are contracted, the contracted graph
    is ball-carved, and the blocks are lifted back. Round charges are the
    maximum over components, since components run side by side.
    """
    if lam < 1:
        raise ParameterError("lambda must be a positive integer")
    ledger = RoundLedger() if ledger is None else ledger
    members = set(b)
    if not members:
        return NetworkDecomposition([], 0, 0, meta={"components": 0})
    alpha = 4 * c2 + 3
    beta = alpha - 1
    adj = g.adj
    comp_list = components(g, members)
    lifted: list[set] = []
    charges = {"ruling": 0, "cluster": 0, "carve": 0}
    cleanup = False
    max_cluster_radius = 0
    for comp in comp_list:
        rulers = sorted(ruling_set(g, alpha, beta, comp))
        # nearest ruler, ties to smaller ruler id: scan rulers ascending and
        # keep strictly better distances only
        owner, best = {}, {}
        for r in rulers:
            frontier, depth = [r], 0
            seen = {r}
            if best.get(r, beta + 1) > 0:
                owner[r], best[r] = r, 0
            while frontier and depth < beta:
                depth += 1
                nxt = []
                for w in frontier:
                    for u in adj[w]:
                        if u in comp and u not in seen:
                            seen.add(u)
                            nxt.append(u)
                            if depth < best.get(u, beta + 1):
                                best[u], owner[u] = depth, r
                frontier = nxt
        assert len(owner) == len(comp), "ruling set failed to dominate its component"
        cluster_radius = max(best.values())
        max_cluster_radius = max(max_cluster_radius, cluster_radius)
        index = {r: i for i, r in enumerate(rulers)}
        qadj = [set() for _ in rulers]
        for v in comp:
            cv = index[owner[v]]
            for u in adj[v]:
                if u in comp:
                    cu = index[owner[u]]
                    if cu != cv:
                        qadj[cv].add(cu)
        q = Graph._trusted(len(rulers), qadj)
        qnd = ball_carve(q, lam)
        cleanup = cleanup or qnd.cleanup_used
        clusters = [[] for _ in rulers]
        for v in comp:
            clusters[index[owner[v]]].append(v)
        for i, qb in enumerate(qnd.blocks):
            while len(lifted) <= i:
                lifted.append(set())
            for c in qb:
                lifted[i].update(clusters[c])
        charges["ruling"] = max(charges["ruling"], alpha * math.ceil(math.log2(len(comp) + 1)))
        charges["cluster"] = max(charges["cluster"], cluster_radius)
        carve_rounds = 0
        per_epoch = qnd.meta.get("block_D", [])
        for bd in per_epoch:
            carve_r = bd // 2 + 1
            carve_rounds += carve_r * (2 * cluster_radius + 1)
        charges["carve"] = max(charges["carve"], carve_rounds)
    for label in ("ruling", "cluster", "carve"):
        ledger.charge(f"shatter:{label}", charges[label])
    blocks = [frozenset(x) for x in lifted]
    report = validate_decomposition(g, NetworkDecomposition(blocks, len(blocks), 0), members)
    nd = NetworkDecomposition(blocks, len(blocks), report.measured_D, cleanup,
                              meta={"components": len(comp_list), "cluster_radius": max_cluster_radius,
                                    "block_D": report.block_diameters})
    assert report.partition_ok, "shattered decomposition is not a partition"
    return nd
