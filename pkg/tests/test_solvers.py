import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import binary_instance, feasible
from distlll.decomp import NetworkDecomposition
from distlll.exceptions import InfeasibleComponentError, ParameterError, ValidationError
from distlll.families import bucketing_threshold, conjunction_chain, regular_conjunction, sparse_conjunction
from distlll.lll import Conjunction, EventSpec, LLLInstance, PartialAssignment, VariableSpec, violated_events
from distlll.runtime import RoundLedger, SeedContext
from distlll.solvers import (base_lll, bootstrap_lll, build_derived, det_lll, moser_tardos, random_partial_setting,
                             solve)


def round_robin(n_events, C):
    return NetworkDecomposition([frozenset(range(i, n_events, C)) for i in range(C)], C, n_events)


@pytest.mark.parametrize("alg", ["mt", "base", "bootstrap"])
@pytest.mark.parametrize("build", [conjunction_chain, sparse_conjunction, bucketing_threshold])
def test_solvers_avoid_all_events(alg, build):
    inst = build(300, SeedContext(4))
    out = solve(inst, alg, ctx=SeedContext(9))
    assert violated_events(inst, out.assignment) == set()
    assert out.ledger.total >= 0


def test_solve_unknown_algorithm():
    with pytest.raises(ParameterError):
        solve(conjunction_chain(3), "nope")


def test_moser_tardos_counts_resamplings():
    inst = regular_conjunction(200, 3, 4, SeedContext(1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = moser_tardos(inst, SeedContext(2))
    assert not violated_events(inst, out.assignment)
    assert out.ledger.total == out.stats["resamplings"]


def test_moser_tardos_deterministic():
    inst = sparse_conjunction(100, SeedContext(1))
    a = moser_tardos(inst, SeedContext(3)).assignment
    b = moser_tardos(inst, SeedContext(3)).assignment
    assert a == b


@given(st.integers(0, 2**32))
def test_rps_keeps_conditionals_below_sqrt_p(seed):
    inst = regular_conjunction(120, 3, 8, SeedContext(seed % 5))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pa = random_partial_setting(inst, 8, SeedContext(seed))
    bound = math.sqrt(inst.p)
    assert all(inst.cond_prob_values(e, pa.values) <= bound + 1e-10 for e in range(inst.n_events))
    assert not (pa.frozen & pa.values.keys())


def test_rps_freezes_on_dense_instance():
    inst = regular_conjunction(500, 5, 8, SeedContext(1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pa = random_partial_setting(inst, 8, SeedContext(1))
    assert pa.frozen
    assert len(pa.values) + len(pa.frozen) == inst.n_vars


def test_rps_deterministic_per_seed():
    inst = sparse_conjunction(200, SeedContext(1))
    a = random_partial_setting(inst, 8, SeedContext(5))
    b = random_partial_setting(inst, 8, SeedContext(5))
    assert a == b


def test_det_lll_keeps_block_thresholds():
    s = SeedContext(3).stream(0)
    inst = binary_instance(s, 20, 4, 12)
    C = 2
    p, d = inst.p, max(inst.d, 1)
    seen = []

    def watch(i, tau, values):
        for e in range(inst.n_events):
            assert inst.cond_prob_values(e, values) <= p * (math.e * d) ** i * (1 + 1e-9)
        seen.append(i)

    out = det_lll(inst, PartialAssignment(), round_robin(inst.n_events, C), p, on_block=watch)
    assert seen == [1, 2]
    values = {x: out.assignment.values.get(x, 0) for x in range(inst.n_vars)}
    assert not violated_events(inst, values)


@given(st.integers(0, 2**32), st.integers(3, 8), st.integers(2, 5))
def test_det_lll_matches_exhaustive_feasibility(seed, n_events, k):
    s = SeedContext(seed).stream(0)
    inst = binary_instance(s, 10, n_events, k, kind="threshold" if seed % 2 else "conjunction")
    expect = feasible(inst)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = det_lll(inst, PartialAssignment(), NetworkDecomposition([frozenset(range(n_events))], 1, 9),
                          inst.p, fallback=True, retry_cap=1)
        values = {x: out.assignment.values.get(x, 0) for x in range(inst.n_vars)}
        got = not violated_events(inst, values)
    except InfeasibleComponentError:
        got = False
    assert got == expect


def test_det_lll_requires_cover():
    inst = conjunction_chain(4)
    nd = NetworkDecomposition([frozenset({0, 1})], 1, 1)
    with pytest.raises(ValidationError):
        det_lll(inst, PartialAssignment(), nd, inst.p)


def test_det_lll_infeasible_raises():
    variables = [VariableSpec(0, 2)]
    events = [EventSpec(0, (0,), Conjunction([0])), EventSpec(1, (0,), Conjunction([1]))]
    inst = LLLInstance(variables, events)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(InfeasibleComponentError):
            det_lll(inst, PartialAssignment(), NetworkDecomposition([frozenset({0, 1})], 1, 1), 0.5,
                    fallback=True, retry_cap=5)


def test_det_lll_skip_leaves_unset():
    variables = [VariableSpec(0, 2)]
    events = [EventSpec(0, (0,), Conjunction([0])), EventSpec(1, (0,), Conjunction([1]))]
    inst = LLLInstance(variables, events)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = det_lll(inst, PartialAssignment(), NetworkDecomposition([frozenset({0, 1})], 1, 1), 0.5,
                      on_infeasible="skip")
    assert out.stats["skipped"] == [[0, 1]]
    assert 0 not in out.assignment.values


def test_base_lll_stats_and_partial():
    inst = regular_conjunction(400, 3, 8, SeedContext(2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = base_lll(inst, 8, SeedContext(4))
    assert not out.stats["violated"]
    assert out.stats["frozen_count"] == len(out.partial.frozen)
    sizes = out.stats["residual_component_sizes"]
    assert sizes == sorted(sizes, reverse=True)


def test_base_lll_deterministic_ledger():
    inst = bucketing_threshold(300, SeedContext(1))
    a = base_lll(inst, 8, SeedContext(3))
    b = base_lll(inst, 8, SeedContext(3))
    assert a.assignment == b.assignment
    assert a.ledger.phases == b.ledger.phases


def test_bootstrap_short_circuit():
    inst = conjunction_chain(10)
    out = bootstrap_lll(inst, n_star=50)
    assert out.stats["derived"] is None


def test_bootstrap_repairs_failures():
    inst = regular_conjunction(2000, 5, 8, SeedContext(3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = bootstrap_lll(inst, n_star=2, ctx=SeedContext(1))
    assert not violated_events(inst, out.assignment)
    assert out.stats["derived"]["degree_bound_holds"]


def test_bootstrap_rejects_tiny_n_star():
    with pytest.raises(ParameterError):
        bootstrap_lll(conjunction_chain(10), n_star=1)


def test_derived_graph_joins_nearby_failures():
    inst = conjunction_chain(20)
    der = build_derived(inst, [0, 3, 15], T=1, n_star=4)
    assert der.radius == 3
    assert der.edges == [(0, 3)]
    assert der.d_prime == 1
    assert der.p_prime_measured == pytest.approx(3 / 20)


def test_ledger_labels_are_stable():
    inst = sparse_conjunction(100, SeedContext(0))
    led = RoundLedger()
    base_lll(inst, 8, SeedContext(0), led)
    assert led.phases[0][0] == "rps:square-coloring"
