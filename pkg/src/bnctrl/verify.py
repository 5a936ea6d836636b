"""Post-hoc certification of reported controls.

Feasibility at a finite bound re-solves the length-T subproblems; each
checked control keeps its shortest attractor length and shortest forbidden
attractor length so any later bound is answered from the cache.  With no
bound (``Tcheck=None``) the exhaustive state-space oracle decides.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .cnf import ClauseSet, build_clauses
from .dynamics import (
    STATE_SPACE_LIMIT,
    AttractorWitness,
    ControlVector,
    cycle_summary,
    enumerate_attractors,
)
from .model import build_max_forbidden_length, build_subproblem, decode_control, decode_witness
from .network import BooleanNetwork
from .solver import OPTIMAL, TIMEOUT, Backend, get_backend

log = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
NO_ATTRACTOR = "no-attractor"
INDETERMINATE = "indeterminate"
MAX_SUBSET_SIZE = 20


@dataclass
class CacheEntry:
    checked_up_to: int | None  # None: exact over all lengths
    min_attractor: int | None
    min_forbidden: int | None

    def decide(self, Tmax: int | None, accept_no_attractor: bool = False) -> str | None:
        """Verdict for bound ``Tmax`` if the entry settles it, else None."""
        exact = self.checked_up_to is None or (Tmax is not None and Tmax <= self.checked_up_to)
        if self.min_forbidden is not None and (Tmax is None or self.min_forbidden <= Tmax):
            return INFEASIBLE
        if not exact:
            return None
        if self.min_attractor is not None and (Tmax is None or self.min_attractor <= Tmax):
            return FEASIBLE
        return FEASIBLE if accept_no_attractor else NO_ATTRACTOR


class VerificationCache:
    """JSON store keyed by network hash and control; single writer."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.data: dict[str, dict[str, dict]] = {}
        if self.path and self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))

    @staticmethod
    def network_key(bn: BooleanNetwork) -> str:
        return hashlib.sha256(bn.fingerprint().encode()).hexdigest()[:16]

    @staticmethod
    def control_key(d: Mapping[str, int]) -> str:
        return ",".join(ControlVector(d).strings())

    def get(self, bn: BooleanNetwork, d: Mapping[str, int]) -> CacheEntry | None:
        raw = self.data.get(self.network_key(bn), {}).get(self.control_key(d))
        return CacheEntry(**raw) if raw else None

    def put(self, bn: BooleanNetwork, d: Mapping[str, int], entry: CacheEntry) -> None:
        old = self.get(bn, d)
        if old is not None and old.checked_up_to is None and entry.checked_up_to is not None:
            return
        if old is not None and entry.checked_up_to is not None and old.checked_up_to is not None \
                and old.checked_up_to > entry.checked_up_to and entry.min_forbidden is None:
            return
        self.data.setdefault(self.network_key(bn), {})[self.control_key(d)] = entry.__dict__.copy()

    def save(self) -> None:
        if self.path:
            self.path.write_text(json.dumps(self.data, indent=1, sort_keys=True), encoding="utf-8")


@dataclass
class FeasibilityVerdict:
    status: str
    witness: AttractorWitness | None = None
    min_attractor: int | None = None
    min_forbidden: int | None = None
    Tcheck: int | None = None
    from_cache: bool = False

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _effective_bound(bn: BooleanNetwork, Tcheck: int | None) -> int | None:
    # attractors of the augmented network have the lengths of the original one
    cap = 1 << (bn.n - 1 if bn.phenotype_gene else bn.n)
    if Tcheck is None:
        return None
    if Tcheck < 1:
        raise ValueError("Tcheck must be positive")
    return min(Tcheck, cap)


def verify_feasibility(
    bn: BooleanNetwork,
    clauses: ClauseSet | None,
    d: Mapping[str, int],
    Tcheck: int | None = 100,
    cache: VerificationCache | None = None,
    time_limit: float | None = None,
    backend: str | Backend | None = None,
    accept_no_attractor: bool = False,
) -> FeasibilityVerdict:
    """Classify ``d`` for attractors of length <= ``Tcheck`` (None: all lengths)."""
    d = ControlVector(d)
    T_eff = _effective_bound(bn, Tcheck)
    if cache is not None:
        entry = cache.get(bn, d)
        if entry is not None:
            status = entry.decide(T_eff, accept_no_attractor)
            if status is not None:
                return FeasibilityVerdict(status, None, entry.min_attractor, entry.min_forbidden, Tcheck, True)
    if T_eff is None or (bn.n <= STATE_SPACE_LIMIT and T_eff >= 1 << (bn.n - 1)):
        verdict = _exhaustive(bn, d, T_eff, accept_no_attractor)
        entry = CacheEntry(None, verdict.min_attractor, verdict.min_forbidden)
    else:
        verdict, entry = _by_subproblems(bn, clauses or build_clauses(bn), d, T_eff, time_limit, backend,
                                         accept_no_attractor)
    verdict.Tcheck = Tcheck
    if cache is not None and entry is not None:
        cache.put(bn, d, entry)
    return verdict


def _exhaustive(bn, d, Tmax, accept_no_attractor) -> FeasibilityVerdict:
    if bn.n > STATE_SPACE_LIMIT:
        return FeasibilityVerdict(INDETERMINATE)
    cs = cycle_summary(bn, d)
    lengths = cs.lengths.tolist()
    forb = [L for L, f in zip(lengths, cs.forbidden.tolist()) if f]
    min_att = min(lengths) if lengths else None
    min_forb = min(forb) if forb else None
    entry = CacheEntry(None, min_att, min_forb)
    status = entry.decide(Tmax, accept_no_attractor)
    witness = None
    if status == INFEASIBLE:
        witness = next(w for w in enumerate_attractors(bn, d, min_forb)
                       if w.length == min_forb and w.is_forbidden(bn.phenotype_gene))
    return FeasibilityVerdict(status, witness, min_att, min_forb)


def _by_subproblems(bn, clauses, d, Tmax, time_limit, backend, accept_no_attractor):
    be = get_backend(backend)
    min_att = None
    for T in range(1, Tmax + 1):
        base = build_subproblem(bn, clauses, d, T, Tmax)
        if min_att is None:
            r = be.solve(base.without_objective(), time_limit)
            if r.status == TIMEOUT:
                log.warning("length %d timed out for %s", T, d)
                return FeasibilityVerdict(INDETERMINATE), None
            if not r.ok:
                continue
            min_att = T
            if r["p"] == 0:
                w = decode_witness(r.assignment, bn, T)
                return FeasibilityVerdict(INFEASIBLE, w, min_att, T), CacheEntry(Tmax, min_att, T)
        r = be.solve(base.with_fixed({"p": 0}).without_objective(), time_limit)
        if r.status == TIMEOUT:
            log.warning("length %d timed out for %s", T, d)
            return FeasibilityVerdict(INDETERMINATE), None
        if r.ok:
            w = decode_witness(r.assignment, bn, T)
            return FeasibilityVerdict(INFEASIBLE, w, min_att, T), CacheEntry(Tmax, min_att, T)
    entry = CacheEntry(Tmax, min_att, None)
    return FeasibilityVerdict(entry.decide(Tmax, accept_no_attractor), None, min_att, None), entry


@dataclass
class MinimalityVerdict:
    minimal: bool
    witness_subset: ControlVector | None = None
    indeterminate: list[ControlVector] = field(default_factory=list)


def verify_minimality(
    bn: BooleanNetwork,
    clauses: ClauseSet | None,
    d: Mapping[str, int],
    Tcheck: int | None = 100,
    cache: VerificationCache | None = None,
    time_limit: float | None = None,
    backend: str | Backend | None = None,
    accept_no_attractor: bool = False,
) -> MinimalityVerdict:
    """Minimal iff no strict subset of ``d`` is feasible."""
    d = ControlVector(d)
    if d.size > MAX_SUBSET_SIZE:
        raise ValueError(f"control of size {d.size} exceeds the subset-sweep bound {MAX_SUBSET_SIZE}")
    clauses = clauses or build_clauses(bn)
    unknown = []
    for s in d.subsets(strict=True):
        v = verify_feasibility(bn, clauses, s, Tcheck, cache, time_limit, backend, accept_no_attractor)
        if v.status == FEASIBLE:
            return MinimalityVerdict(False, s, unknown)
        if v.status == INDETERMINATE:
            unknown.append(s)
    return MinimalityVerdict(not unknown, None, unknown)


@dataclass
class MaxLengthResult:
    status: str  # "optimum", "lower-bound", "infeasible" or "unknown"
    value: int | None = None
    control: ControlVector | None = None
    witness: AttractorWitness | None = None


def max_forbidden_length(
    bn: BooleanNetwork,
    clauses: ClauseSet | None,
    lam_max: int = 7,
    Tmax: int = 100,
    time_limit: float | None = None,
    backend: str | Backend | None = None,
) -> MaxLengthResult:
    """Longest forbidden attractor over controls of size <= ``lam_max`` and lengths <= ``Tmax``."""
    clauses = clauses or build_clauses(bn)
    model = build_max_forbidden_length(bn, clauses, lam_max, Tmax)
    r = get_backend(backend).solve(model, time_limit)
    if not r.has_solution:
        return MaxLengthResult("unknown" if r.status == TIMEOUT else "infeasible")
    values = r.assignment
    status = "optimum" if r.status == OPTIMAL else "lower-bound"
    return MaxLengthResult(status, r.objective, decode_control(values, bn), decode_witness(values, bn))
