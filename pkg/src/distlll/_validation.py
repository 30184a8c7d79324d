"""Input coercion shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numbers
import os

import numpy as np

from .exceptions import ParameterError
from .graph import Graph
from .lll import LLLInstance, load_instance
from .runtime import SeedContext

_MAX_SEED = (1 << 64) - 1


def check_graph(X, n: int | None = None) -> Graph:
    """Coerce X into a :class:`Graph`.

    Accepted: a Graph; a networkx graph (nodes relabeled in sorted order);
    a scipy sparse matrix or a square 0/1 array read as an adjacency matrix;
    an integer array of shape (k, 2) read as an edge list on ``n`` nodes
    (default: one more than the largest endpoint).
    """
    if isinstance(X, Graph):
        return X
    if hasattr(X, "nodes") and hasattr(X, "edges") and hasattr(X, "is_directed"):
        if X.is_directed():
            raise ParameterError("directed graphs are not supported")
        try:
            order = sorted(X.nodes())
        except TypeError:
            order = list(X.nodes())
        index = {v: i for i, v in enumerate(order)}
        edges = [(index[u], index[v]) for u, v in X.edges() if u != v]
        return Graph.from_edges(len(order), edges)
    if hasattr(X, "tocoo"):
        coo = X.tocoo()
        if coo.shape[0] != coo.shape[1]:
            raise ParameterError(f"adjacency matrix must be square, got shape {coo.shape}")
        edges = {(min(int(i), int(j)), max(int(i), int(j)))
                 for i, j, w in zip(coo.row, coo.col, coo.data) if i != j and w != 0}
        return Graph.from_edges(coo.shape[0], sorted(edges))
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ParameterError(f"expected a 2-d array, got {arr.ndim} dimension(s)")
    if arr.size and not np.issubdtype(arr.dtype, np.number) and arr.dtype != bool:
        raise ParameterError("graph arrays must be numeric")
    rows, cols = arr.shape
    square01 = rows == cols and np.isin(arr, (0, 1)).all() and (arr == arr.T).all() and not np.diag(arr).any()
    if square01 and (cols != 2 or n is None):
        iu, ju = np.nonzero(np.triu(arr, 1))
        return Graph.from_edges(rows, zip(iu.tolist(), ju.tolist()))
    if cols == 2:
        if arr.size and (arr < 0).any():
            raise ParameterError("edge endpoints must be nonnegative")
        if arr.size and not np.all(np.mod(arr, 1) == 0):
            raise ParameterError("edge endpoints must be integers")
        edges = [(int(u), int(v)) for u, v in arr.tolist()]
        top = max((max(e) for e in edges), default=-1) + 1
        n = top if n is None else n
        if n < top:
            raise ParameterError(f"edge endpoint {top - 1} outside n={n}")
        return Graph.from_edges(n, edges)
    raise ParameterError(f"cannot read a graph from an array of shape {arr.shape}")


def check_instance(X) -> LLLInstance:
    """Coerce X (instance, dict in the JSON schema, or a path) into an LLLInstance."""
    if isinstance(X, LLLInstance):
        return X
    if isinstance(X, dict):
        return LLLInstance.from_dict(X)
    if isinstance(X, (str, os.PathLike)):
        return load_instance(X)
    raise ParameterError(f"cannot read an LLL instance from {type(X).__name__}")


def check_seed(seed) -> SeedContext:
    """None -> seed 0; nonnegative 64-bit ints and SeedContexts pass through."""
    if seed is None:
        return SeedContext(0)
    if isinstance(seed, SeedContext):
        return seed
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ParameterError(f"seed must be a nonnegative integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= _MAX_SEED:
        raise ParameterError("seed must fit in 64 unsigned bits")
    return SeedContext(seed)
