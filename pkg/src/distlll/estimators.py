"""scikit-learn style wrappers around the functional API.

Graph estimators take anything :func:`check_graph` accepts as ``X``; the
per-node output (block index or color) is ``labels_``, so ``fit_predict``
works as for a clusterer.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import check_graph, check_instance, check_seed
from .colorings import defective_coloring, frugal_coloring, list_coloring
from .decomp import ball_carve, ball_carve_distributed, validate_decomposition
from .exceptions import ParameterError
from .lll import violated_events
from .runtime import RoundLedger
from .solvers import solve


class BallCarvingDecomposer(ClusterMixin, BaseEstimator):
    """Network decomposition by ball carving; ``labels_[v]`` is v's block."""

    def __init__(self, lam: int = 2, mode: str = "seq"):
        self.lam = lam
        self.mode = mode

    def fit(self, X, y=None):
        g = check_graph(X)
        if self.mode not in ("seq", "dist"):
            raise ParameterError(f"mode must be 'seq' or 'dist', got {self.mode!r}")
        self.ledger_ = RoundLedger()
        if self.mode == "seq":
            nd = ball_carve(g, self.lam)
        else:
            nd = ball_carve_distributed(g, self.lam, ledger=self.ledger_)
        self.decomposition_ = nd
        self.report_ = validate_decomposition(g, nd)
        self.blocks_ = [sorted(b) for b in nd.blocks]
        owner = nd.block_of()
        self.labels_ = [owner[v] for v in range(g.n)]
        self.n_blocks_ = len(nd.blocks)
        self.diameter_ = self.report_.measured_D
        return self


class LLLSolver(BaseEstimator):
    """Find an assignment avoiding every bad event of an LLL instance."""

    def __init__(self, algorithm: str = "base", lam: int = 8, seed=0, n_star=None):
        self.algorithm = algorithm
        self.lam = lam
        self.seed = seed
        self.n_star = n_star

    def fit(self, X, y=None):
        inst = check_instance(X)
        ctx = check_seed(self.seed)
        out = solve(inst, self.algorithm, lam=self.lam, ctx=ctx, n_star=self.n_star)
        self.outcome_ = out
        self.assignment_ = out.values(inst)
        self.ledger_ = out.ledger
        self.stats_ = out.stats
        self.violated_ = violated_events(inst, out.assignment)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).assignment_


class _ColoringEstimator(ClusterMixin, BaseEstimator):
    def _run(self, g, ctx):
        raise NotImplementedError

    def fit(self, X, y=None):
        g = check_graph(X)
        result = self._run(g, check_seed(self.seed))
        self.result_ = result
        self.labels_ = list(result.colors)
        self.n_colors_ = result.report.color_count
        self.cap_ = result.report.cap
        self.report_ = result.report
        self.ledger_ = result.ledger
        self.stats_ = result.stats
        return self


class DefectiveColoring(_ColoringEstimator):
    """Coloring where every node has at most ``f`` same-colored neighbors."""

    def __init__(self, f: int = 2, lam: int = 8, seed=0):
        self.f = f
        self.lam = lam
        self.seed = seed

    def _run(self, g, ctx):
        return defective_coloring(g, self.f, ctx, lam=self.lam)


class FrugalColoring(_ColoringEstimator):
    """Proper coloring where no node sees a color more than ``beta`` times."""

    def __init__(self, beta: int = 1, lam: int = 8, seed=0):
        self.beta = beta
        self.lam = lam
        self.seed = seed

    def _run(self, g, ctx):
        return frugal_coloring(g, self.beta, ctx, lam=self.lam)


class ListColoring(_ColoringEstimator):
    """Proper coloring choosing each node's color from ``lists[v]``."""

    def __init__(self, lists=None, C: float = 8.0, lam: int = 8, seed=0):
        self.lists = lists
        self.C = C
        self.lam = lam
        self.seed = seed

    def _run(self, g, ctx):
        if self.lists is None:
            raise ParameterError("ListColoring needs lists")
        return list_coloring(g, self.lists, self.C, ctx, lam=self.lam)
