import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from bnctrl.benders import (
    Cut,
    EnumerationReport,
    attractor_cut,
    compute_indicators,
    cut_implies,
    enumerate_controls,
    exclusive_controls,
    g_value,
    minimality_cut,
    no_good_cut,
    trap_space_cut,
)
from bnctrl.cnf import build_clauses
from bnctrl.dynamics import (
    AttractorWitness,
    ControlVector,
    OracleSweep,
    enumerate_attractors,
    is_trap_space,
    oracle_minimal_controls,
)
from bnctrl.expr import TRUE
from bnctrl.model import build_subspace_separation, decode_trap_space
from bnctrl.network import make_network
from bnctrl.random_networks import random_network
from bnctrl.solver import BuiltinBackend, solve

from conftest import TOY


def W(bn, *rows):
    return AttractorWitness(bn.genes, tuple(tuple(int(c) for c in r) for r in rows))


# --- indicators ------------------------------------------------------------------

def test_indicators_fixed_point(toy, toy_clauses):
    ind = compute_indicators(W(toy, "0000"), toy_clauses, toy.controllable)
    for g in ("x1", "x2", "x3"):
        assert ind[g] == (1, 1, 0)


def test_indicators_three_cycle(toy, toy_clauses):
    w = W(toy, "1010", "1111", "0111")
    ind = compute_indicators(w, toy_clauses, toy.controllable)
    assert ind["x1"][:2] == (0, 1)
    assert ind["x3"] == (1, 1, 1)


def test_indicators_gene_against_formula(toy, toy_clauses):
    # fixed point 100 under x1 -> 1, x3 -> 0; both held against their formulas
    w = W(toy, "1000")
    assert w.follows(toy, {"x1": 1, "x3": 0})
    ind = compute_indicators(w, toy_clauses, toy.controllable)
    assert ind["x1"] == (1, 0, 1)
    assert ind["x3"] == (1, 0, 0)
    assert ind["x2"] == (1, 1, 0)


# --- cuts ----------------------------------------------------------------------

def test_attractor_cut_toy(toy, toy_clauses):
    w = W(toy, "0000")
    cut = attractor_cut(w, compute_indicators(w, toy_clauses, toy.controllable))
    assert str(cut) == "d1[x1] + d1[x2] + d1[x3] >= 1"
    assert cut.literals == 3
    assert not cut.satisfied_by({})


def test_attractor_cut_with_beta_zero(toy, toy_clauses):
    w = W(toy, "1000")
    cut = attractor_cut(w, compute_indicators(w, toy_clauses, toy.controllable))
    assert str(cut) == "- d1[x1] + d1[x2] - d0[x3] >= -1"
    assert not cut.satisfied_by({"x1": 1, "x3": 0})
    assert cut.satisfied_by({"x1": 1})


def test_attractor_cut_needs_forbidden_witness(toy, toy_clauses):
    w = W(toy, "0111", "1111")
    with pytest.raises(ValueError):
        attractor_cut(w, compute_indicators(w, toy_clauses, toy.controllable))


def test_xnor_pair_cuts(xnor_pair):
    cs = build_clauses(xnor_pair)
    w = W(xnor_pair, "110")
    assert w.follows(xnor_pair, {"x2": 1})
    at = attractor_cut(w, compute_indicators(w, cs, xnor_pair.controllable), xnor_pair.phenotype_gene)
    assert str(at) == "d0[x1] + d0[x2] >= 1"
    ts = trap_space_cut({"x2": 1}, {"x2": 1}, xnor_pair.controllable)
    assert str(ts) == "- d1[x2] >= 0"
    empty = ControlVector()
    assert ts.satisfied_by(empty) and not at.satisfied_by(empty)
    assert not cut_implies(ts, at, xnor_pair.controllable)


def test_trap_space_cut_examples(toy):
    zero = {"x1": 0, "x2": 0, "x3": 0, "phenotype": 0}
    ts = trap_space_cut({}, zero, toy.controllable)
    assert str(ts) == "d1[x1] + d1[x2] + d1[x3] >= 1" and ts.literals == 3
    full = trap_space_cut({"x1": 1, "x3": 0}, {"x1": 1, "x3": 0}, toy.controllable)
    assert str(full) == "- d1[x1] - d0[x3] >= -1"


def test_no_good_cut(toy):
    ng = no_good_cut({}, toy.controllable)
    assert ng.rhs == 1 and len(ng.terms) == 6 and all(a == 1 for _, a in ng.terms)
    d = ControlVector({"x2": 1})
    ng = no_good_cut(d, toy.controllable)
    assert (("x2", 1), -1) in ng.terms and ng.rhs == 0
    for c in exclusive_controls(toy.controllable):
        assert ng.satisfied_by(c) == (c != d)


def test_minimality_cut():
    cut = minimality_cut({"a": 1, "b": 0})
    assert not cut.satisfied_by({"a": 1, "b": 0, "c": 1})
    assert cut.satisfied_by({"a": 1})


def test_cut_from_terms_drops_zero_coefficients():
    cut = Cut.from_terms({("a", 1): 1, ("a", 0): 0}, 0, "attractor", 1)
    assert cut.terms == ((("a", 1), 1),)


# --- enumeration examples ----------------------------------------------------------

def test_toy_enumeration(toy, toy_clauses):
    rep = enumerate_controls(toy, toy_clauses, Tmax=3, max_size=2)
    assert rep.control_set() == set(oracle_minimal_controls(toy, 3, 2))
    assert ControlVector({"x2": 1}) in rep.control_set()
    assert ControlVector({"x2": 1, "x3": 1}) not in rep.control_set()
    assert rep.termination == "completed" and all(rep.completed_sizes.values())
    assert not rep.heuristic


def test_constant_true_phenotype():
    bn = make_network(TOY, TRUE)
    rep = enumerate_controls(bn, Tmax=3, max_size=3)
    assert rep.sorted_controls() == [ControlVector()]
    assert rep.cuts == []
    assert all(rep.completed_sizes.values())


def test_negation_no_attractor(negation):
    rep = enumerate_controls(negation, Tmax=1, max_size=0)
    assert rep.controls == []
    assert [c.kind for c in rep.cuts] == ["no-good"]
    assert rep.cuts[0].candidate == ControlVector()
    accepted = enumerate_controls(negation, Tmax=1, max_size=0, accept_no_attractor=True)
    assert accepted.sorted_controls() == [ControlVector()]


def test_argument_checks(toy):
    with pytest.raises(ValueError):
        enumerate_controls(toy, Tmax=0)
    with pytest.raises(ValueError):
        enumerate_controls(toy, strategy="BOTH")
    with pytest.raises(ValueError):
        enumerate_controls(make_network(TOY, "x2", augment=False))


def test_timeout_gives_partial_report(toy):
    rep = enumerate_controls(toy, Tmax=3, max_size=2, time_limit=1e-9)
    assert rep.timed_out and rep.termination == "timeout"


def test_heuristic_label(toy):
    assert enumerate_controls(toy, Tmax=3, use_ts_cut=True, max_size=1).heuristic
    assert not enumerate_controls(toy, Tmax=8, use_ts_cut=True, max_size=1).heuristic


def test_report_json_roundtrip(toy):
    rep = enumerate_controls(toy, Tmax=3, max_size=2, use_ts_cut=True)
    data = json.loads(json.dumps(rep.to_json()))
    back = EnumerationReport.from_json(data)
    assert back.control_set() == rep.control_set()
    assert [c.kind for c in back.cuts] == [c.kind for c in rep.cuts]
    assert all(c["control"] == sorted(c["control"]) for c in data["controls"])
    with pytest.raises(ValueError):
        EnumerationReport.from_json({"schema": 99})


def test_progress_and_cut_csv(toy):
    rep = enumerate_controls(toy, Tmax=3, max_size=2, use_ts_cut=True)
    rows = [line.split(",") for line in rep.progress_csv().strip().splitlines()]
    assert rows[0] == ["time", "count"] and rows[1] == ["0.0", "0"]
    assert [int(r[1]) for r in rows[1:]] == list(range(len(rows) - 1))
    stats = {r.split(",")[0]: r.split(",")[1:] for r in rep.cut_stats_csv().strip().splitlines()[1:]}
    assert set(stats) == {"attractor", "trap-space", "no-good"}


def test_on_control_callback(toy):
    seen = []
    enumerate_controls(toy, Tmax=3, max_size=2, on_control=seen.append)
    assert {fc.control for fc in seen} == {ControlVector({"x2": 1}), ControlVector({"x1": 1})}


@pytest.mark.parametrize("strategy", ["DEC", "AGG"])
@pytest.mark.parametrize("backend", ["builtin", "builtin:python"])
def test_strategies_and_kernels_agree(toy, strategy, backend):
    rep = enumerate_controls(toy, Tmax=3, max_size=3, strategy=strategy, backend=backend)
    assert rep.control_set() == set(oracle_minimal_controls(toy, 3, 3))


def test_order_seed_keeps_the_set(toy):
    a = enumerate_controls(toy, Tmax=3, max_size=3)
    b = enumerate_controls(toy, Tmax=3, max_size=3, order_seed=7)
    assert a.control_set() == b.control_set()


# --- properties ----------------------------------------------------------------

def _random_case(seed):
    bn = random_network(seed, 3, 6)
    return bn, build_clauses(bn)


@settings(max_examples=25)
@given(st.integers(0, 100_000), st.sampled_from([1, 2, 3]))
def test_cut_validity(seed, Tmax):
    bn, cs = _random_case(seed)
    sweep = OracleSweep(bn, len(bn.controllable))
    feasible = [d for d in sweep.profiles if sweep.status(d, Tmax) == "feasible"]
    rep = enumerate_controls(bn, cs, Tmax=Tmax, max_size=len(bn.controllable))
    for rec in rep.cuts:
        assert not rec.cut.satisfied_by(rec.candidate)
        if rec.kind == "attractor":
            assert all(rec.cut.satisfied_by(d) for d in feasible)


@settings(max_examples=40)
@given(st.integers(0, 100_000))
def test_characterization(seed):
    bn, cs = _random_case(seed)
    J = bn.controllable[:4]
    rng = random.Random(seed)
    d0 = ControlVector({j: rng.randint(0, 1) for j in J if rng.random() < 0.3})
    forb = [w for w in enumerate_attractors(bn, d0, 4) if w.is_forbidden(bn.phenotype_gene)]
    for w in forb:
        ind = compute_indicators(w, cs, J)
        for d in exclusive_controls(J):
            total = sum(g_value(ind, j, d) for j in J)
            assert (total == 0) == w.follows(bn, d)


@settings(max_examples=20)
@given(st.integers(0, 100_000))
def test_trap_space_preservation(seed):
    bn, cs = _random_case(seed)
    J = bn.controllable
    d = ControlVector({J[0]: 0}) if J else ControlVector()
    r = solve(build_subspace_separation(bn, cs, d))
    if not r.ok:
        return
    u, h = decode_trap_space(r.assignment, bn)
    for c in exclusive_controls(J[:5]):
        if not u <= c:
            continue
        if any(h.get(j) == k and c.get(j) == 1 - k for j in J for k in (0, 1)):
            continue
        assert is_trap_space(bn, c, h, method="exhaustive")


@settings(max_examples=20)
@given(st.integers(0, 100_000))
def test_cut_strength(seed):
    bn, cs = _random_case(seed)
    J = bn.controllable
    d = ControlVector({j: (seed >> i) & 1 for i, j in enumerate(J[:3])})
    r = solve(build_subspace_separation(bn, cs, d))
    if not r.ok:
        return
    u, h = decode_trap_space(r.assignment, bn)
    ts = trap_space_cut(u, h, J)
    for w in enumerate_attractors(bn, u):
        if not all(h.contains(bn, s) for s in w.encoded()):
            continue
        ind = compute_indicators(w, cs, J)
        if all(j not in u or not ind[j][1] for j in J):
            at = attractor_cut(w, ind, bn.phenotype_gene)
            assert cut_implies(ts, at, J)
    # every trap space holds an attractor
    assert any(all(h.contains(bn, s) for s in w.encoded()) for w in enumerate_attractors(bn, u))


@settings(max_examples=15)
@given(st.integers(0, 100_000))
def test_termination_bound(seed):
    bn, cs = _random_case(seed)
    rep = enumerate_controls(bn, cs, Tmax=2, max_size=len(bn.controllable))
    assert rep.counters["master"] <= 3 ** len(bn.controllable) + len(bn.controllable) + 1


@settings(max_examples=15)
@given(st.integers(0, 100_000))
def test_subproblem_priority(seed):
    bn, cs = _random_case(seed)
    Tmax = 4
    rep = enumerate_controls(bn, cs, Tmax=Tmax, max_size=2)
    for rec in rep.cuts:
        if rec.kind != "attractor":
            continue
        lengths = [w.length for w in enumerate_attractors(bn, rec.candidate, Tmax)
                   if w.is_forbidden(bn.phenotype_gene)]
        assert rec.detail["T"] == min(lengths)


@settings(max_examples=10)
@given(st.integers(0, 100_000))
def test_report_is_deterministic(seed):
    bn, cs = _random_case(seed)
    a = enumerate_controls(bn, cs, Tmax=2, max_size=2, use_ts_cut=True).to_json(False)
    b = enumerate_controls(bn, build_clauses(bn), Tmax=2, max_size=2, use_ts_cut=True).to_json(False)
    assert json.dumps(a) == json.dumps(b)


def test_backend_instance_is_accepted(toy):
    rep = enumerate_controls(toy, Tmax=3, max_size=1, backend=BuiltinBackend())
    assert rep.settings["backend"] == "builtin"
