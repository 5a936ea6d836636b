import pytest
from hypothesis import given, settings, strategies as st

from bnctrl.cnf import build_clauses
from bnctrl.dynamics import ControlVector, OracleSweep
from bnctrl.expr import TRUE
from bnctrl.network import make_network
from bnctrl.random_networks import random_network
from bnctrl.benders import enumerate_controls
from bnctrl.verify import (
    FEASIBLE,
    INDETERMINATE,
    INFEASIBLE,
    NO_ATTRACTOR,
    CacheEntry,
    VerificationCache,
    max_forbidden_length,
    verify_feasibility,
    verify_minimality,
)

from conftest import TOY


def test_feasibility_examples(toy, toy_clauses, negation):
    v = verify_feasibility(toy, toy_clauses, {"x2": 1}, 100)
    assert v.status == FEASIBLE and v.min_attractor == 2 and v.min_forbidden is None
    v = verify_feasibility(toy, toy_clauses, {}, 100)
    assert v.status == INFEASIBLE and v.min_forbidden == 1
    assert v.witness.render() == ["0000"]
    assert verify_feasibility(negation, None, {}, 1).status == NO_ATTRACTOR
    assert verify_feasibility(negation, None, {}, 1, accept_no_attractor=True).status == FEASIBLE


def test_subproblem_sweep_path(toy, toy_clauses):
    # bounds below 2^n go through the length-by-length models
    v = verify_feasibility(toy, toy_clauses, {"x2": 1}, 3)
    assert v.status == FEASIBLE and v.min_attractor == 2
    v = verify_feasibility(toy, toy_clauses, {}, 3)
    assert v.status == INFEASIBLE and v.witness.render() == ["0000"]
    assert verify_feasibility(toy, toy_clauses, {"x2": 1}, 1).status == NO_ATTRACTOR


def test_minimality_examples(toy, toy_clauses):
    mv = verify_minimality(toy, toy_clauses, {"x2": 1, "x3": 1}, 100)
    assert not mv.minimal and mv.witness_subset == ControlVector({"x2": 1})
    assert verify_minimality(toy, toy_clauses, {"x2": 1}, 100).minimal
    bn = make_network(TOY, TRUE)
    assert verify_minimality(bn, None, {}, 100).minimal


def test_minimality_size_bound(toy):
    big = make_network({f"g{i}": f"g{i}" for i in range(21)}, "g0")
    with pytest.raises(ValueError, match="exceeds"):
        verify_minimality(big, None, {f"g{i}": 1 for i in range(21)}, 4)


def test_max_forbidden_length_examples(toy, toy_clauses, negation):
    r = max_forbidden_length(toy, toy_clauses, 7, 8)
    assert (r.status, r.value) == ("optimum", 3)
    assert r.witness.length == 3 and r.witness.follows(toy, r.control)
    assert max_forbidden_length(make_network(TOY, TRUE), None, 3, 4).status == "infeasible"
    assert max_forbidden_length(negation, None, 0, 4).value == 2


def test_max_forbidden_length_timeout():
    bn = random_network(1, 10, 10)
    r = max_forbidden_length(bn, None, 7, 100, time_limit=0.01)
    assert r.status == "lower-bound"
    # the incumbent is still a genuine forbidden attractor of exact length
    assert r.witness.period == r.value and r.witness.follows(bn, r.control)


def test_cache_entry_decisions():
    e = CacheEntry(10, 2, None)
    assert e.decide(5) == FEASIBLE
    assert e.decide(1) == NO_ATTRACTOR
    assert e.decide(20) is None
    e = CacheEntry(10, 1, 4)
    assert e.decide(3) == FEASIBLE and e.decide(4) == INFEASIBLE and e.decide(50) == INFEASIBLE
    assert CacheEntry(None, 2, None).decide(None) == FEASIBLE


def test_cache_file_roundtrip(tmp_path, toy, toy_clauses):
    path = tmp_path / "cache.json"
    cache = VerificationCache(path)
    verify_feasibility(toy, toy_clauses, {"x2": 1}, 3, cache)
    cache.save()
    again = VerificationCache(path)
    v = verify_feasibility(toy, toy_clauses, {"x2": 1}, 2, again)
    assert v.from_cache and v.status == FEASIBLE


@settings(max_examples=15)
@given(st.integers(0, 100_000))
def test_cache_coherence(seed):
    bn = random_network(seed, 3, 6)
    cs = build_clauses(bn)
    cache = VerificationCache()
    sweep = OracleSweep(bn, 1)
    for d in sweep.profiles:
        for T in (4, 1, 2, 3, 8):
            cached = verify_feasibility(bn, cs, d, T, cache)
            fresh = verify_feasibility(bn, cs, d, T)
            assert cached.status == fresh.status, (d, T)


@settings(max_examples=15)
@given(st.integers(0, 100_000), st.sampled_from([1, 2, 3, None]))
def test_agrees_with_oracle(seed, T):
    bn = random_network(seed, 3, 7)
    cs = build_clauses(bn)
    sweep = OracleSweep(bn, 2)
    for d in sweep.profiles:
        assert verify_feasibility(bn, cs, d, T).status == sweep.status(d, T)


@settings(max_examples=10)
@given(st.integers(0, 100_000))
def test_sufficient_bound_certificate(seed):
    bn = random_network(seed, 3, 5)
    cs = build_clauses(bn)
    lam = 2
    r = max_forbidden_length(bn, cs, lam, 1 << (bn.n - 1))
    L = r.value if r.status == "optimum" else 1
    with_ts = enumerate_controls(bn, cs, Tmax=L, use_ts_cut=True, max_size=lam)
    exact = enumerate_controls(bn, cs, Tmax=L, use_ts_cut=False, max_size=lam)
    # trap-space cuts lose nothing at this bound; a control whose only
    # attractors are longer than L still counts as having none
    assert with_ts.control_set() == exact.control_set() == set(OracleSweep(bn, lam).minimal_controls(L))


def test_large_network_without_bound_is_indeterminate():
    bn = make_network({f"g{i}": f"g{(i + 1) % 25}" for i in range(25)}, "g0")
    assert verify_feasibility(bn, None, {}, None).status == INDETERMINATE
