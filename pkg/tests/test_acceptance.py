"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary (and immediately with ``-s``)."""
import csv
import importlib.util
import io
import random
import time
from pathlib import Path

import pytest

from bnctrl.benders import (
    attractor_cut,
    compute_indicators,
    cut_implies,
    enumerate_controls,
    exclusive_controls,
    g_value,
    trap_space_cut,
)
from bnctrl.cnf import build_clauses
from bnctrl.dynamics import AttractorWitness, ControlVector, OracleSweep, enumerate_attractors
from bnctrl.random_networks import corpus
from bnctrl.verify import max_forbidden_length

from conftest import ACCEPTANCE_LINES

CORPUS_SIZE = 200
TMAX_VALUES = (1, 2, 4)
MAX_SIZE = 3
MIN_WITNESSES = 500
ROOT = Path(__file__).resolve().parents[1]


def record(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def networks():
    # 4-8 genes, formulas with at most 3 inputs, 1-2 literal phenotypes
    return [(bn, build_clauses(bn)) for bn in corpus(CORPUS_SIZE, base_seed=0, n_min=4, n_max=8, max_inputs=3)]


@pytest.fixture(scope="module")
def oracle_sweeps(networks):
    return [OracleSweep(bn, MAX_SIZE) for bn, _ in networks]


@pytest.fixture(scope="module")
def exactness_runs(networks, oracle_sweeps):
    """Criterion 2 runs; also the witness pool for criterion 4."""
    mismatches, witnesses, runs = [], [], 0
    start = time.perf_counter()
    for idx, ((bn, cs), sweep) in enumerate(zip(networks, oracle_sweeps)):
        for Tmax in TMAX_VALUES:
            expected = set(sweep.minimal_controls(Tmax))
            for strategy in ("DEC", "AGG"):
                rep = enumerate_controls(bn, cs, Tmax=Tmax, strategy=strategy, max_size=MAX_SIZE)
                runs += 1
                if rep.control_set() != expected or rep.timed_out:
                    mismatches.append((idx, Tmax, strategy))
                for rec in rep.cuts:
                    if rec.kind == "attractor":
                        witnesses.append((idx, rec.candidate, rec.cut.provenance))
    return mismatches, witnesses, runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def sufficient_runs(networks, oracle_sweeps):
    """Criterion 3 runs with Tmax = 2^n; trap-space cuts feed criterion 5."""
    mismatches, ts_cuts = [], []
    start = time.perf_counter()
    for idx, ((bn, cs), sweep) in enumerate(zip(networks, oracle_sweeps)):
        Tmax = 1 << (bn.n - 1)  # attractor lengths ignore the phenotype gene
        rep = enumerate_controls(bn, cs, Tmax=Tmax, use_ts_cut=True, strategy="AGG", max_size=MAX_SIZE)
        if rep.control_set() != set(sweep.minimal_controls(None)) or rep.timed_out:
            mismatches.append(idx)
        ts_cuts += [(idx, rec.cut) for rec in rep.cuts if rec.kind == "trap-space"]
    return mismatches, ts_cuts, time.perf_counter() - start


def test_criterion_1_toy_network_end_to_end(toy, toy_clauses):
    start = time.perf_counter()
    rep = enumerate_controls(toy, toy_clauses, Tmax=3, max_size=2, use_ts_cut=False, strategy="DEC")
    elapsed = time.perf_counter() - start
    got = rep.control_set()
    expected = set(OracleSweep(toy, 2).minimal_controls(3))
    ok = (got == expected and ControlVector({"x2": 1}) in got
          and ControlVector({"x2": 1, "x3": 1}) not in got and elapsed < 1.0)
    record(1, ok, f"set={sorted(str(d) for d in got)} oracle-equal={got == expected} runtime={elapsed:.3f}s (<1s)")


def test_criterion_2_oracle_equivalence(exactness_runs):
    mismatches, _, runs, elapsed = exactness_runs
    ok = not mismatches and elapsed < 600
    record(2, ok, f"{CORPUS_SIZE} networks x Tmax {TMAX_VALUES} x DEC/AGG = {runs} runs, "
                  f"mismatches={len(mismatches)} {mismatches[:5]} runtime={elapsed:.1f}s (<600s)")


def test_criterion_3_sufficient_tmax(sufficient_runs):
    mismatches, _, elapsed = sufficient_runs
    record(3, not mismatches, f"{CORPUS_SIZE} networks, Tmax=2^n, trap-space cuts on, "
                              f"mismatches={len(mismatches)} {mismatches[:5]} runtime={elapsed:.1f}s")


def test_criterion_4_characterization(networks, exactness_runs):
    _, witnesses, _, _ = exactness_runs
    rng = random.Random(0)
    pool = witnesses if len(witnesses) <= 2000 else rng.sample(witnesses, 2000)
    violations, checks = 0, 0
    for idx, candidate, w in pool:
        bn, cs = networks[idx]
        J = bn.controllable
        # the candidate's genes plus others, at most 4 genes in total
        genes = list(candidate) + [j for j in J if j not in candidate]
        genes = sorted(genes[:4], key=J.index)
        ind = compute_indicators(w, cs, J)
        for d in exclusive_controls(genes):
            total = sum(g_value(ind, j, d) for j in J)
            checks += 1
            if (total == 0) != w.follows(bn, d):
                violations += 1
    ok = len(pool) >= MIN_WITNESSES and violations == 0
    record(4, ok, f"witnesses={len(pool)} (>= {MIN_WITNESSES}) control checks={checks} violations={violations}")


def test_criterion_5_cut_strength_and_xnor_pair(networks, sufficient_runs, xnor_pair):
    _, ts_cuts, _ = sufficient_runs
    triples, failures = 0, 0
    for idx, ts in ts_cuts:
        bn, cs = networks[idx]
        J = bn.controllable
        u, h = ts.provenance
        for w in enumerate_attractors(bn, u):
            if not all(h.contains(bn, s) for s in w.encoded()):
                continue
            ind = compute_indicators(w, cs, J)
            if any(j in u and ind[j][1] for j in J):
                continue
            at = attractor_cut(w, ind, bn.phenotype_gene)
            involved = sorted({g for (g, _), _ in ts.terms + at.terms}, key=J.index)
            triples += 1
            failures += not cut_implies(ts, at, involved)

    cs = build_clauses(xnor_pair)
    w = AttractorWitness(xnor_pair.genes, ((1, 1, 0),))
    at = attractor_cut(w, compute_indicators(w, cs, xnor_pair.controllable), xnor_pair.phenotype_gene)
    ts = trap_space_cut({"x2": 1}, {"x2": 1}, xnor_pair.controllable)
    zero = ControlVector()
    pair_ok = (str(at) == "d0[x1] + d0[x2] >= 1" and str(ts) == "- d1[x2] >= 0"
                   and ts.satisfied_by(zero) and not at.satisfied_by(zero))
    ok = triples > 0 and failures == 0 and pair_ok
    record(5, ok, f"TS=>AT on {triples} (u,h,witness) triples, failures={failures}; two-gene example: "
                  f"TS '(1 - d1[x2]) >= 1' == '{ts}', AT '{at}', d=0 satisfies TS and violates AT: {pair_ok}")


def test_criterion_6_max_forbidden_length(toy, toy_clauses, negation):
    res = max_forbidden_length(toy, toy_clauses, lam_max=7, Tmax=8)
    res100 = max_forbidden_length(toy, toy_clauses, lam_max=7, Tmax=100)
    oracle = OracleSweep(toy, 3).max_forbidden_length(7, None)
    neg = max_forbidden_length(negation, None, lam_max=0, Tmax=4)
    ok = (res.status == res100.status == neg.status == "optimum"
          and res.value == res100.value == oracle == 3 and neg.value == 2)
    record(6, ok, f"three-gene IP={res.value} (Tmax 8), {res100.value} (Tmax 100), oracle sweep={oracle}; "
                  f"negation network={neg.value}")


def test_criterion_7_cut_statistics(toy, toy_clauses):
    first = enumerate_controls(toy, toy_clauses, Tmax=3, use_ts_cut=True, max_size=0)
    rows = {r["kind"]: r for r in csv.DictReader(io.StringIO(first.cut_stats_csv()))}
    ts_row = rows["trap-space"]
    full = enumerate_controls(toy, toy_clauses, Tmax=3, use_ts_cut=True, max_size=2)
    full_rows = {r["kind"]: r for r in csv.DictReader(io.StringIO(full.cut_stats_csv()))}
    ts_records = [c for c in full.cuts if c.kind == "trap-space"]
    consistent = all(
        int(full_rows[k]["count"]) == len(lits := [c.literals for c in full.cuts if c.kind == k])
        and float(full_rows[k]["mean_literals"]) == pytest.approx(sum(lits) / len(lits) if lits else 0.0, abs=1e-4)
        for k in ("attractor", "trap-space", "no-good")
    )
    ok = (set(rows) == {"attractor", "trap-space", "no-good"} and ts_row["count"] == "1"
          and float(ts_row["mean_literals"]) == 3.0 and ts_records[0].literals == 3
          and ts_records[0].candidate == ControlVector() and consistent)
    record(7, ok, f"TS cut against the empty candidate: {ts_records[0].literals} literals "
                  f"(csv count={ts_row['count']}, mean={ts_row['mean_literals']}); "
                  f"full run TS count={full_rows['trap-space']['count']} mean={full_rows['trap-space']['mean_literals']}")


def test_criterion_8_harness_substitute(toy_file, tmp_path):
    spec = importlib.util.spec_from_file_location("run_instances", ROOT / "benchmarks" / "run_instances.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    out = tmp_path / "bench"
    mod.main([str(toy_file), "--tmax", "3", "--max-size", "2", "--outdir", str(out)])
    counts = list(csv.DictReader((out / "counts.csv").open()))
    cuts = list(csv.DictReader((out / "cuts.csv").open()))
    progress = sorted((out / "progress").glob("*.csv"))
    ok = (len(counts) == 4 and len(cuts) == 12 and len(progress) == 4
          and all(r["controls"] == "2" for r in counts))
    record(8, ok, "large-instance timings are not reproducible here; substitute harness emits "
                  f"counts/cuts/progress tables for external .bnet files ({len(counts)} runs)")
