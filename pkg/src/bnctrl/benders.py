"""Enumerative Benders loop over control size with attractor, trap-space and no-good cuts."""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .cnf import ClauseSet, build_clauses
from .dynamics import AttractorWitness, ControlVector, TrapSpaceVector, control_sort_key
from .model import (
    Linear01Model,
    build_aggregated_llp,
    build_master,
    build_subproblem,
    build_subspace_separation,
    decode_control,
    decode_trap_space,
    decode_witness,
    dvar,
)
from .network import BooleanNetwork
from .solver import TIMEOUT, Backend, SolveResult, get_backend

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CUT_KINDS = ("attractor", "trap-space", "no-good", "minimality")


# --- indicators ---------------------------------------------------------------

@dataclass(frozen=True)
class BinaryIndicators:
    """Per gene: ``alpha`` (constant over time), ``beta`` (follows its formula), ``k`` (value at time 1)."""

    genes: tuple[str, ...]
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    k: tuple[int, ...]

    def __getitem__(self, gene: str) -> tuple[int, int, int]:
        i = self.genes.index(gene)
        return self.alpha[i], self.beta[i], self.k[i]

    def items(self):
        return ((g, (a, b, k)) for g, a, b, k in zip(self.genes, self.alpha, self.beta, self.k))


def compute_indicators(
    witness: AttractorWitness, clauses: ClauseSet, genes: Sequence[str] | None = None
) -> BinaryIndicators:
    """Indicators over the witness's time points, wrapping time 0 to time T."""
    genes = tuple(clauses.genes if genes is None else genes)
    T = witness.length
    yv = witness.clause_values(clauses)  # row t holds y[.][t], row 0 == row T
    alpha, beta, ks = [], [], []
    for g in genes:
        col = witness.column(g)
        alpha.append(int(all(v == col[0] for v in col)))
        ids = clauses.y_of(g)
        follows = all(col[t - 1] == int(all(yv[t - 1][c] for c in ids)) for t in range(1, T + 1))
        beta.append(int(follows))
        ks.append(col[0])
    return BinaryIndicators(genes, tuple(alpha), tuple(beta), tuple(ks))


def g_value(ind: BinaryIndicators, gene: str, d: Mapping[str, int]) -> int:
    """The per-gene characterization term evaluated at control ``d``."""
    a, b, k = ind[gene]
    dk = int(d.get(gene) == k)
    dnk = int(d.get(gene) == 1 - k)
    if a and b:
        return dnk
    if a:
        return 1 - dk
    if b:
        return int(gene in d)
    raise ValueError(f"gene {gene} neither constant nor following its formula")


# --- cuts --------------------------------------------------------------------

@dataclass(frozen=True)
class Cut:
    """``sum(coef * d[gene][k]) >= rhs`` with coefficients in {-1, +1}."""

    terms: tuple[tuple[tuple[str, int], int], ...]
    rhs: int
    kind: str
    literals: int
    provenance: Any = field(default=None, compare=False, hash=False)

    @classmethod
    def from_terms(cls, coefs: Mapping[tuple[str, int], int], constant: int, kind: str,
                   literals: int, provenance=None) -> "Cut":
        """Build from ``sum(coefs) + constant >= 1``."""
        terms = tuple(sorted((key, a) for key, a in coefs.items() if a))
        return cls(terms, 1 - constant, kind, literals, provenance)

    def constraint_coefs(self) -> dict[str, int]:
        return {dvar(g, k): a for (g, k), a in self.terms}

    def lhs(self, d: Mapping[str, int]) -> int:
        return sum(a for (g, k), a in self.terms if d.get(g) == k)

    def satisfied_by(self, d: Mapping[str, int]) -> bool:
        return self.lhs(d) >= self.rhs

    def __str__(self):
        parts = []
        for (g, k), a in self.terms:
            parts.append(("- " if a < 0 else "+ ") + f"d{k}[{g}]")
        body = " ".join(parts).lstrip("+ ") or "0"
        return f"{body} >= {self.rhs}"


def _add(coefs: dict, key, a: int) -> None:
    coefs[key] = coefs.get(key, 0) + a


def attractor_cut(
    witness: AttractorWitness, indicators: BinaryIndicators, phenotype_gene: str | None = None
) -> Cut:
    """Cut removing every control under which ``witness`` stays an attractor."""
    phi = phenotype_gene or witness.genes[-1]
    if not witness.is_forbidden(phi):
        raise ValueError("attractor cut needs a forbidden witness")
    coefs: dict[tuple[str, int], int] = {}
    constant = 0
    literals = 0
    for g, (a, b, k) in indicators.items():
        if not a:
            _add(coefs, (g, k), 1)
            literals += 1
        if b:
            _add(coefs, (g, 1 - k), 1)
        else:
            constant += 1
            _add(coefs, (g, k), -1)
        literals += 1
    return Cut.from_terms(coefs, constant, "attractor", literals, witness)


def trap_space_cut(u: Mapping[str, int], h: Mapping[str, int], controllable: Iterable[str]) -> Cut:
    """Cut from a fully forbidden trap space ``h`` of the network under ``u``."""
    coefs: dict[tuple[str, int], int] = {}
    constant = 0
    literals = 0
    for j in controllable:
        for k in (0, 1):
            if u.get(j) == k:
                constant += 1
                _add(coefs, (j, k), -1)
                literals += 1
            elif h.get(j) == k:
                _add(coefs, (j, 1 - k), 1)
                literals += 1
    return Cut.from_terms(coefs, constant, "trap-space", literals,
                          (ControlVector(u), TrapSpaceVector(h)))


def no_good_cut(d: Mapping[str, int], controllable: Iterable[str]) -> Cut:
    """Hamming distance at least one from ``d`` over all ``d[j][k]``."""
    coefs: dict[tuple[str, int], int] = {}
    constant = 0
    literals = 0
    for j in controllable:
        for k in (0, 1):
            if d.get(j) == k:
                constant += 1
                _add(coefs, (j, k), -1)
            else:
                _add(coefs, (j, k), 1)
            literals += 1
    return Cut.from_terms(coefs, constant, "no-good", literals, ControlVector(d))


def minimality_cut(d: Mapping[str, int]) -> Cut:
    """Excludes every superset of ``d``."""
    coefs = {(g, k): -1 for g, k in d.items()}
    return Cut.from_terms(coefs, len(d), "minimality", len(d), ControlVector(d))


def exclusive_controls(genes: Sequence[str], max_size: int | None = None):
    """Every exclusive control over ``genes`` (3 ** len(genes) of them)."""
    for vals in itertools.product((None, 0, 1), repeat=len(genes)):
        d = {g: v for g, v in zip(genes, vals) if v is not None}
        if max_size is None or len(d) <= max_size:
            yield ControlVector(d)


def cut_implies(a: Cut, b: Cut, genes: Sequence[str]) -> bool:
    """Whether every exclusive control satisfying ``a`` satisfies ``b``."""
    return all(b.satisfied_by(d) for d in exclusive_controls(genes) if a.satisfied_by(d))


# --- report --------------------------------------------------------------------

@dataclass
class FoundControl:
    control: ControlVector
    time: float

    @property
    def size(self) -> int:
        return self.control.size


@dataclass
class CutRecord:
    kind: str
    literals: int
    time: float
    lam: int
    candidate: ControlVector
    detail: dict
    cut: Cut = field(repr=False, default=None)


@dataclass
class EnumerationReport:
    settings: dict
    network: dict
    controls: list[FoundControl] = field(default_factory=list)
    cuts: list[CutRecord] = field(default_factory=list)
    completed_sizes: dict[int, bool] = field(default_factory=dict)
    termination: str = "completed"
    heuristic: bool = False
    counters: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def timed_out(self) -> bool:
        return self.termination == "timeout"

    def control_set(self) -> set[ControlVector]:
        return {fc.control for fc in self.controls}

    def sorted_controls(self) -> list[ControlVector]:
        return sorted(self.control_set(), key=control_sort_key)

    def cut_stats(self) -> list[dict]:
        rows = []
        for kind in CUT_KINDS[:3]:
            lits = [c.literals for c in self.cuts if c.kind == kind]
            rows.append({"kind": kind, "count": len(lits),
                         "mean_literals": (sum(lits) / len(lits)) if lits else 0.0})
        return rows

    def progress_rows(self) -> list[tuple[float, int]]:
        return [(fc.time, i + 1) for i, fc in enumerate(self.controls)]

    def to_json(self, timestamps: bool = True) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "network": self.network,
            "settings": self.settings,
            "termination": self.termination,
            "heuristic": self.heuristic,
            "completed_sizes": {str(k): v for k, v in sorted(self.completed_sizes.items())},
            "controls": [
                {"control": fc.control.strings(), "size": fc.size} | ({"time": round(fc.time, 6)} if timestamps else {})
                for fc in self.controls
            ],
            "cuts": [
                {"kind": c.kind, "literals": c.literals, "lambda": c.lam,
                 "candidate": c.candidate.strings(), "cut": str(c.cut) if c.cut else None, "detail": c.detail}
                | ({"time": round(c.time, 6)} if timestamps else {})
                for c in self.cuts
            ],
            "counters": self.counters,
        }
        if timestamps:
            out["elapsed"] = round(self.elapsed, 6)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "EnumerationReport":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        rep = cls(settings=data.get("settings", {}), network=data.get("network", {}))
        rep.controls = [FoundControl(ControlVector.parse(c["control"]), c.get("time", 0.0)) for c in data["controls"]]
        rep.cuts = [CutRecord(c["kind"], c["literals"], c.get("time", 0.0), c.get("lambda", 0),
                              ControlVector.parse(c.get("candidate", [])), c.get("detail", {}))
                    for c in data.get("cuts", [])]
        rep.completed_sizes = {int(k): v for k, v in data.get("completed_sizes", {}).items()}
        rep.termination = data.get("termination", "completed")
        rep.heuristic = data.get("heuristic", False)
        rep.counters = data.get("counters", {})
        rep.elapsed = data.get("elapsed", 0.0)
        return rep

    def progress_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "count"])
        w.writerow([0.0, 0])
        for t, c in self.progress_rows():
            w.writerow([f"{t:.6f}", c])
        return buf.getvalue()

    def cut_stats_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["kind", "count", "mean_literals"], lineterminator="\n")
        w.writeheader()
        for row in self.cut_stats():
            w.writerow(row | {"mean_literals": f"{row['mean_literals']:.4f}"})
        return buf.getvalue()


def network_info(bn: BooleanNetwork) -> dict:
    return {
        "genes": list(bn.genes),
        "controllable": list(bn.controllable),
        "phenotype_gene": bn.phenotype_gene,
        "sha256": hashlib.sha256(bn.fingerprint().encode()).hexdigest(),
        "bnet": bn.to_bnet(),
    }


# --- the loop ------------------------------------------------------------------

class _Timeout(Exception):
    pass


class CandidateChecker:
    """Lower-level queries for one candidate: forbidden attractor, any attractor."""

    def __init__(self, bn, clauses, Tmax, strategy, backend: Backend, clock: Callable[[], float | None],
                 counters: dict):
        self.bn, self.clauses, self.Tmax, self.strategy = bn, clauses, Tmax, strategy
        self.backend, self.clock, self.counters = backend, clock, counters

    def _solve(self, model: Linear01Model, what: str) -> SolveResult:
        self.counters[what] = self.counters.get(what, 0) + 1
        r = self.backend.solve(model, self.clock())
        if r.status == TIMEOUT:
            raise _Timeout
        return r

    def forbidden_witness(self, d) -> AttractorWitness | None:
        if self.strategy == "AGG":
            m = build_aggregated_llp(self.bn, self.clauses, d, self.Tmax)
            r = self._solve(m.with_fixed({"p": 0}).without_objective(), "subproblem")
            return decode_witness(r.assignment, self.bn) if r.ok else None
        for T in range(1, self.Tmax + 1):
            m = build_subproblem(self.bn, self.clauses, d, T, self.Tmax)
            r = self._solve(m.with_fixed({"p": 0}).without_objective(), "subproblem")
            if r.ok:
                return decode_witness(r.assignment, self.bn, T)
        return None

    def has_attractor(self, d) -> bool:
        if self.strategy == "AGG":
            m = build_aggregated_llp(self.bn, self.clauses, d, self.Tmax)
            return self._solve(m.without_objective(), "existence").ok
        for T in range(1, self.Tmax + 1):
            m = build_subproblem(self.bn, self.clauses, d, T, self.Tmax)
            if self._solve(m.without_objective(), "existence").ok:
                return True
        return False


def enumerate_controls(
    bn: BooleanNetwork,
    clauses: ClauseSet | None = None,
    Tmax: int = 5,
    use_ts_cut: bool = False,
    strategy: str = "DEC",
    max_size: int = 7,
    time_limit: float | None = None,
    accept_no_attractor: bool = False,
    backend: str | Backend | None = None,
    order_seed: int | None = None,
    on_control: Callable[[FoundControl], None] | None = None,
) -> EnumerationReport:
    """All minimal controls of size <= ``max_size`` in nondecreasing size.

    Exact with ``use_ts_cut=False``.  With trap-space cuts the result is exact
    only for a sufficiently large ``Tmax``; the report is then labelled
    heuristic unless ``Tmax >= 2**n`` (n without the phenotype gene).
    """
    if bn.phenotype_gene is None:
        raise ValueError("network must be augmented with a phenotype gene")
    if Tmax < 1:
        raise ValueError("Tmax must be a positive integer")
    strategy = strategy.upper()
    if strategy not in ("DEC", "AGG"):
        raise ValueError("strategy must be DEC or AGG")
    clauses = clauses or build_clauses(bn)
    be = get_backend(backend, order_seed)
    start = time.perf_counter()

    def remaining() -> float | None:
        if time_limit is None:
            return None
        left = time_limit - (time.perf_counter() - start)
        if left <= 0:
            raise _Timeout
        return left

    report = EnumerationReport(
        settings={"Tmax": Tmax, "use_ts_cut": bool(use_ts_cut), "strategy": strategy, "max_size": max_size,
                  "time_limit": time_limit, "accept_no_attractor": accept_no_attractor,
                  "backend": be.name, "order_seed": order_seed},
        network=network_info(bn),
        heuristic=bool(use_ts_cut) and Tmax < (1 << (bn.n - 1)),
    )
    counters: dict[str, int] = {"master": 0, "separation": 0, "subproblem": 0, "existence": 0}
    report.counters = counters
    checker = CandidateChecker(bn, clauses, Tmax, strategy, be, remaining, counters)
    J = bn.controllable
    D: list[ControlVector] = []
    V: list[Cut] = []
    top = min(len(J), max_size)
    for lam in range(top + 1):
        report.completed_sizes[lam] = False

    def add_cut(cut: Cut, lam: int, d: ControlVector, detail: dict) -> None:
        if cut.satisfied_by(d):
            raise RuntimeError(f"{cut.kind} cut does not remove candidate {d}")
        V.append(cut)
        master.add_constraint(cut.constraint_coefs(), ">=", cut.rhs, f"cut[{len(V) - 1}]")
        report.cuts.append(CutRecord(cut.kind, cut.literals, time.perf_counter() - start, lam, d, detail, cut))

    try:
        for lam in range(top + 1):
            if ControlVector() in D:
                # the empty control is minimal, so nothing larger can be
                for rest in range(lam, top + 1):
                    report.completed_sizes[rest] = True
                if lam > 0:
                    counters["master"] += 1
                break
            master = build_master(bn, lam, D, V)
            while True:
                counters["master"] += 1
                r = be.solve(master, remaining())
                if r.status == TIMEOUT:
                    raise _Timeout
                if not r.ok:
                    report.completed_sizes[lam] = True
                    break
                d = decode_control(r.assignment, bn)
                if use_ts_cut:
                    counters["separation"] += 1
                    sr = be.solve(build_subspace_separation(bn, clauses, d), remaining())
                    if sr.status == TIMEOUT:
                        raise _Timeout
                    if sr.ok:
                        u, h = decode_trap_space(sr.assignment, bn)
                        add_cut(trap_space_cut(u, h, J), lam, d,
                                {"u": u.strings(), "h": h.render(bn)})
                        continue
                w = checker.forbidden_witness(d)
                if w is not None:
                    ind = compute_indicators(w, clauses, J)
                    add_cut(attractor_cut(w, ind, bn.phenotype_gene), lam, d,
                            {"T": w.length, "states": w.render()})
                    continue
                if not accept_no_attractor and not checker.has_attractor(d):
                    add_cut(no_good_cut(d, J), lam, d, {})
                    continue
                fc = FoundControl(d, time.perf_counter() - start)
                D.append(d)
                report.controls.append(fc)
                master.add_constraint({dvar(g, k): -1 for g, k in d.items()}, ">=", 1 - len(d),
                                      f"min[{len(D) - 1}]")
                log.info("control %s found at %.3fs", d, fc.time)
                if on_control is not None:
                    on_control(fc)
    except _Timeout:
        report.termination = "timeout"
        log.warning("time limit reached; report is partial")
    report.elapsed = time.perf_counter() - start
    return report


__all__ = [
    "BinaryIndicators", "Cut", "CutRecord", "EnumerationReport", "FoundControl", "attractor_cut",
    "compute_indicators", "cut_implies", "enumerate_controls", "exclusive_controls", "g_value",
    "minimality_cut", "no_good_cut", "trap_space_cut",
]
