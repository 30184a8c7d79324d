import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs
from distlll.colorings import (ListState, bucket_once, check_pruning, defective_coloring, defective_schedule,
                               frugal_coloring, frugal_progress_step, frugal_schedule, list_coloring,
                               private_colors, prune_once, random_lists, sample_partial_frugal, verify_coloring)
from distlll.colorings.frugal import PartialFrugal
from distlll.colorings.listcol import ColorChoiceGraph
from distlll.exceptions import ParameterError
from distlll.generators import complete_graph, cycle_graph, empty_graph, grid_graph, path_graph, random_regular
from distlll.graph import Graph
from distlll.runtime import RoundLedger, SeedContext


# --- verifier ------------------------------------------------------------------


def test_verify_defective_counts_same_color_neighbors():
    g = path_graph(3)
    assert verify_coloring(g, [0, 0, 0], "defective", f=2).passed
    rep = verify_coloring(g, [0, 0, 0], "defective", f=1)
    assert not rep.passed and rep.max_defect == 2


def test_verify_c5_three_coloring_not_one_frugal():
    # C5 squared is K5, so no 3-coloring can be 1-frugal
    rep = verify_coloring(cycle_graph(5), [0, 1, 0, 1, 2], "frugal", beta=1)
    assert rep.proper
    assert rep.max_multiplicity == 2
    assert not rep.passed


def test_verify_list_membership():
    g = path_graph(2)
    assert verify_coloring(g, [1, 2], "list", lists={0: [1], 1: [2]}).passed
    rep = verify_coloring(g, [1, 3], "list", lists={0: [1], 1: [2]})
    assert not rep.membership_ok


def test_verify_incomplete_and_bad_mode():
    g = path_graph(2)
    assert not verify_coloring(g, [0], "defective", f=0).passed
    with pytest.raises(ParameterError):
        verify_coloring(g, [0, 1], "rainbow")


# --- defective ---------------------------------------------------------------------


def test_bucket_once_single_bucket_large_allowance():
    g = random_regular(100, 3, SeedContext(1))
    st_ = bucket_once(g, 3, 1, SeedContext(2))
    assert set(st_.bucket_of.values()) == {0}
    assert not st_.overflow


def test_bucket_once_edgeless():
    st_ = bucket_once(empty_graph(20), 1, 2, SeedContext(0))
    assert not st_.overflow


def test_bucket_once_random_regular_many_seeds():
    g = random_regular(1000, 3, SeedContext(7))
    for seed in range(100):
        st_ = bucket_once(g, 2, 3, SeedContext(seed))
        b = st_.bucket_of
        assert max(b.values()) < 6
        assert all(sum(1 for u in g.adj[v] if b[u] == b[v]) <= 2 for v in range(g.n))


def test_bucket_once_rejects_bad_params():
    with pytest.raises(ParameterError):
        bucket_once(path_graph(3), 0, 2)


def test_defective_f_at_least_delta_uses_one_color():
    res = defective_coloring(grid_graph(4, 4), 4, SeedContext(0))
    assert res.report.color_count == 1


def test_defective_f_zero_on_c6():
    res = defective_coloring(cycle_graph(6), 0, SeedContext(0))
    assert res.verified and res.report.color_count <= 3


def test_defective_schedule_ends_at_target():
    steps, clamped = defective_schedule(8, 2)
    assert steps[-1][1] == 2
    assert clamped


@pytest.mark.parametrize("f", [2, 4])
def test_defective_bucketing_regime(f):
    g = random_regular(500, 8, SeedContext(3))
    res = defective_coloring(g, f, SeedContext(1))
    assert res.verified
    assert res.report.color_count <= res.report.cap
    assert res.stats["regime"] == "bucketing"


@given(graphs(max_n=12), st.integers(0, 4), st.integers(0, 1000))
def test_defective_property(g, f, seed):
    res = defective_coloring(g, f, SeedContext(seed))
    assert verify_coloring(g, res.colors, "defective", f=f).passed


# --- frugal ------------------------------------------------------------------------


def test_sample_partial_edgeless_colors_everything():
    g = empty_graph(10)
    state = sample_partial_frugal(g, PartialFrugal.empty(g, 1), 1, 1, SeedContext(0))
    assert not state.uncolored


def test_progress_step_noop_when_done():
    g = path_graph(3)
    state = PartialFrugal({0: 0, 1: 1, 2: 2}, frozenset(), 1)
    assert frugal_progress_step(g, state, 2, 1, SeedContext(0)) is state


def test_frugal_5_regular_beta_2_within_cap():
    g = random_regular(200, 5, SeedContext(0))
    res = frugal_coloring(g, 2, SeedContext(4))
    assert res.verified
    assert math.floor(res.stats["cap"]) == 1341
    assert res.report.color_count <= 1342
    assert res.stats["watermark"] <= res.stats["cap"]


def test_frugal_schedule_shape():
    steps, d, clamped = frugal_schedule(10**6)
    assert steps[0] == (1, 10**6)
    assert d <= 1000
    assert not clamped


def test_frugal_rejects_beta_zero():
    with pytest.raises(ParameterError):
        frugal_coloring(path_graph(3), 0)


@given(graphs(max_n=12), st.integers(1, 3), st.integers(0, 1000))
def test_frugal_property(g, beta, seed):
    res = frugal_coloring(g, beta, SeedContext(seed))
    rep = verify_coloring(g, res.colors, "frugal", beta=beta)
    assert rep.passed


def test_partial_state_invariant_after_sampling():
    g = random_regular(300, 6, SeedContext(2))
    state = sample_partial_frugal(g, PartialFrugal.empty(g, 2), 6, 2, SeedContext(5))
    state.check(g)
    assert state.watermark == 2 * math.ceil(20 * 6 * 6 ** 0.5)


# --- list ---------------------------------------------------------------------------


def test_color_choice_graph_edges():
    g = path_graph(2)
    H = ColorChoiceGraph(g, {0: (1, 2), 1: (2, 3)})
    hg = H.to_graph()
    assert H.size == 4
    # same-node choices form a clique, plus one edge for the shared color 2
    assert hg.m == 1 + 1 + 1


def test_prune_edgeless():
    g = empty_graph(4)
    state = ListState.from_lists({v: tuple(range(16)) for v in range(4)}, 2.0)
    new = prune_once(g, state, SeedContext(0))
    assert all(len(new.lists[v]) >= 8 for v in range(4))
    assert not check_pruning(g, state, new.lists)


def test_prune_isolated_node_keeps_half():
    g = Graph.from_edges(3, [(0, 1)])
    lists = {0: tuple(range(16)), 1: tuple(range(8, 24)), 2: tuple(range(16))}
    state = ListState.from_lists(lists, 2.0)
    new = prune_once(g, state, SeedContext(3))
    assert len(new.lists[2]) >= 8
    assert not check_pruning(g, state, new.lists)


def test_check_pruning_reports_violations():
    g = path_graph(2)
    old = ListState.from_lists({0: tuple(range(16)), 1: tuple(range(16))}, 1.0)
    bad = check_pruning(g, old, {0: (0,), 1: (99,)})
    kinds = {b[0] for b in bad}
    assert {"size", "subset"} <= kinds


def test_list_coloring_edgeless_takes_min():
    g = empty_graph(5)
    lists = {v: (v + 3, v + 7) for v in range(5)}
    res = list_coloring(g, lists, 1.0, SeedContext(0))
    assert res.colors == [v + 3 for v in range(5)]


def test_list_coloring_disjoint_edge_finishes_at_once():
    g = path_graph(2)
    res = list_coloring(g, {0: (0, 1), 1: (2, 3)}, 1.0, SeedContext(0))
    assert res.stats["prunes"] == 0
    assert res.stats["finish"] == "private"
    assert res.colors == [0, 2]


def test_list_coloring_entry_check():
    g = complete_graph(4)
    with pytest.raises(ParameterError):
        list_coloring(g, {v: (0, 1) for v in range(4)}, 8.0, SeedContext(0))


def test_private_colors():
    g = path_graph(3)
    assert private_colors(g, {0: (1, 2), 1: (1, 2), 2: (2, 3)}) == {2: 3}


def test_random_lists_shape():
    lists = random_lists(10, 5, 12, SeedContext(1))
    assert all(len(set(s)) == 5 and max(s) < 12 for s in lists.values())
    with pytest.raises(ParameterError):
        random_lists(3, 5, 4)


def test_list_coloring_small_random_regular():
    g = random_regular(200, 4, SeedContext(2))
    lists = random_lists(g.n, 64, 96, SeedContext(5))
    res = list_coloring(g, lists, 8.0, SeedContext(1))
    assert res.verified
    for entry in res.stats["history"]:
        assert entry["new_L"] >= math.ceil(entry["L"] / 2 * (1 - 1 / math.log2(entry["L"]) ** 2))
