import numpy as np
import pytest
from sklearn.base import clone

from distlll import (BallCarvingDecomposer, DefectiveColoring, FrugalColoring, LLLSolver, ListColoring,
                     ParameterError, SeedContext)
from distlll._validation import check_graph, check_instance, check_seed
from distlll.families import conjunction_chain
from distlll.generators import cycle_graph, grid_graph, random_regular
from distlll.lll import dump_instance, violated_events


def test_check_graph_edge_array():
    g = check_graph(np.array([[0, 1], [1, 2]]))
    assert g.n == 3 and g.m == 2
    g = check_graph(np.array([[0, 1]]), n=5)
    assert g.n == 5


def test_check_graph_adjacency_matrix():
    a = np.zeros((4, 4), dtype=int)
    a[0, 1] = a[1, 0] = a[2, 3] = a[3, 2] = 1
    g = check_graph(a)
    assert sorted(g.edges()) == [(0, 1), (2, 3)]


def test_check_graph_two_node_adjacency_vs_edges():
    a = np.array([[0, 1], [1, 0]])
    assert check_graph(a).n == 2
    assert check_graph(a, n=3).n == 3


def test_check_graph_rejects():
    with pytest.raises(ParameterError):
        check_graph(np.zeros(3))
    with pytest.raises(ParameterError):
        check_graph(np.array([[0, -1]]))
    with pytest.raises(ParameterError):
        check_graph(np.array([[0.5, 1.0]]))
    with pytest.raises(ParameterError):
        check_graph(np.zeros((3, 3)) + 2)


def test_check_graph_networkx_and_scipy():
    nx = pytest.importorskip("networkx")
    sp = pytest.importorskip("scipy.sparse")
    h = nx.cycle_graph(["a", "b", "c", "d"])
    g = check_graph(h)
    assert g.n == 4 and g.m == 4
    with pytest.raises(ParameterError):
        check_graph(nx.DiGraph([(0, 1)]))
    m = sp.csr_matrix(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]))
    assert check_graph(m).m == 2


def test_check_seed():
    assert check_seed(None) == SeedContext(0)
    assert check_seed(np.int64(4)) == SeedContext(4)
    ctx = SeedContext(9)
    assert check_seed(ctx) is ctx
    for bad in (-1, 1.0, True, "3"):
        with pytest.raises(ParameterError):
            check_seed(bad)


def test_check_instance_dict_and_path(tmp_path):
    inst = conjunction_chain(4)
    assert check_instance(inst.to_dict()).n_events == 4
    path = tmp_path / "inst.json"
    dump_instance(inst, path)
    assert check_instance(str(path)).n_vars == inst.n_vars
    with pytest.raises(ParameterError):
        check_instance(42)


def test_decomposer_fit_predict():
    g = grid_graph(8, 8)
    est = BallCarvingDecomposer(lam=2)
    labels = est.fit_predict(g)
    assert len(labels) == 64
    assert est.report_.passed
    assert est.n_blocks_ == len(set(labels))


def test_decomposer_distributed_mode_and_bad_mode():
    est = BallCarvingDecomposer(lam=2, mode="dist").fit(cycle_graph(30))
    assert est.report_.passed and est.ledger_.total > 0
    with pytest.raises(ParameterError):
        BallCarvingDecomposer(mode="nope").fit(cycle_graph(5))


def test_get_params_and_clone():
    est = DefectiveColoring(f=3, seed=5)
    assert est.get_params() == {"f": 3, "lam": 8, "seed": 5}
    twin = clone(est).set_params(f=1)
    assert twin.f == 1 and est.f == 3


def test_solver_estimator():
    inst = conjunction_chain(30)
    est = LLLSolver(algorithm="mt", seed=2).fit(inst)
    assert est.violated_ == set()
    assert len(est.fit_predict(inst)) == inst.n_vars
    assert not violated_events(inst, dict(enumerate(est.assignment_)))


@pytest.mark.parametrize("est", [DefectiveColoring(f=2), FrugalColoring(beta=2)])
def test_coloring_estimators(est):
    g = random_regular(100, 4, SeedContext(1))
    labels = est.fit_predict(g)
    assert len(labels) == 100
    assert est.report_.passed
    assert est.n_colors_ == len(set(labels))


def test_list_estimator_requires_lists():
    with pytest.raises(ParameterError):
        ListColoring().fit(cycle_graph(4))
    est = ListColoring(lists={v: (0, 1, 2) for v in range(4)}, C=1.0).fit(cycle_graph(4))
    assert est.report_.passed
