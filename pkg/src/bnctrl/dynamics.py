"""Exhaustive synchronous dynamics: the ground truth for small networks.

States are integers; gene ``i`` (canonical order) sits at bit ``n-1-i`` so
integer order equals lexicographic order of the state tuple.  Everything here
enumerates the full state space and is meant for networks of a few dozen
states up to about 2**24.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import kernels
from .cnf import ClauseSet, build_clauses
from .expr import Const
from .network import BooleanNetwork

log = logging.getLogger(__name__)

STATE_SPACE_LIMIT = 24
ORACLE_GENE_LIMIT = 12


class StateSpaceTooLarge(ValueError):
    pass


# --- fixings ---------------------------------------------------------------

class Fixing(Mapping[str, int]):
    """Immutable partial assignment ``gene -> 0/1``."""

    __slots__ = ("_items", "_hash")

    def __init__(self, values: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = dict(values)
        for g, v in items.items():
            if v not in (0, 1):
                raise ValueError(f"fixing for {g} must be 0 or 1, got {v!r}")
        self._items = tuple(sorted((g, int(v)) for g, v in items.items()))
        self._hash = None

    @classmethod
    def parse(cls, specs: Iterable[str]):
        """From strings like ``"x2=1"``."""
        out = {}
        for s in specs:
            g, _, v = s.partition("=")
            g = g.strip()
            if g in out:
                raise ValueError(f"gene {g} fixed twice")
            out[g] = int(v)
        return cls(out)

    def __getitem__(self, gene):
        for g, v in self._items:
            if g == gene:
                return v
        raise KeyError(gene)

    def __iter__(self):
        return (g for g, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__, self._items))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Fixing):
            return self._items == other._items
        return NotImplemented

    def __le__(self, other: "Fixing") -> bool:
        return set(self._items) <= set(other._items)

    def __lt__(self, other: "Fixing") -> bool:
        return self <= other and self != other

    @property
    def size(self) -> int:
        return len(self._items)

    def bit(self, gene: str, k: int) -> int:
        """The 0/1 indicator ``gene`` fixed to ``k``."""
        return int(self.get(gene) == k)

    def strings(self) -> list[str]:
        return sorted(f"{g}={v}" for g, v in self._items)

    def __repr__(self):
        return f"{type(self).__name__}({{{', '.join(self.strings())}}})"

    def __str__(self):
        return "{" + ", ".join(self.strings()) + "}"


class ControlVector(Fixing):
    """Fixings of controllable genes (the ``d`` / ``u`` vectors)."""

    def subsets(self, strict: bool = True) -> Iterator["ControlVector"]:
        """All subsets by increasing size, canonical order within a size."""
        items = self._items
        top = len(items) - 1 if strict else len(items)
        for r in range(top + 1):
            for combo in itertools.combinations(items, r):
                yield ControlVector(combo)


class TrapSpaceVector(Fixing):
    """Fixings over all genes (the ``h`` vector)."""

    def contains(self, bn: BooleanNetwork, state: int) -> bool:
        n = bn.n
        return all(((state >> (n - 1 - bn.index(g))) & 1) == v for g, v in self.items())

    def render(self, bn: BooleanNetwork) -> str:
        return "".join(str(self[g]) if g in self else "*" for g in bn.genes)


def check_control(bn: BooleanNetwork, d: Mapping[str, int]) -> None:
    bad = [g for g in d if g not in bn.controllable]
    if bad:
        raise ValueError(f"not controllable: {bad}")


# --- attractors ------------------------------------------------------------

@dataclass(frozen=True)
class AttractorWitness:
    """A periodic orbit ``states[0] -> states[1] -> ... -> states[0]``.

    ``length`` is the selected length ``T`` (number of rows); it is a
    multiple of the exact period when built from a subproblem solution.
    """

    genes: tuple[str, ...]
    states: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.states)

    @property
    def period(self) -> int:
        for p in range(1, self.length + 1):
            if self.length % p == 0 and all(
                self.states[t] == self.states[t % p] for t in range(self.length)
            ):
                return p
        return self.length

    def value(self, gene: str, t: int) -> int:
        """``x[gene][t]`` with 1-based ``t`` and wrap-around (0 == T)."""
        return self.states[(t - 1) % self.length][self.genes.index(gene)]

    def column(self, gene: str) -> tuple[int, ...]:
        i = self.genes.index(gene)
        return tuple(s[i] for s in self.states)

    def is_forbidden(self, phenotype_gene: str) -> bool:
        return 0 in self.column(phenotype_gene)

    def canonical(self) -> "AttractorWitness":
        """Exact period, rotated so the lexicographically smallest state is first."""
        p = self.period
        cyc = self.states[:p]
        start = min(range(p), key=lambda t: cyc[t])
        return AttractorWitness(self.genes, cyc[start:] + cyc[:start])

    def encoded(self) -> tuple[int, ...]:
        n = len(self.genes)
        return tuple(sum(b << (n - 1 - i) for i, b in enumerate(s)) for s in self.states)

    def render(self) -> list[str]:
        return ["".join(map(str, s)) for s in self.states]

    def clause_values(self, clauses: ClauseSet) -> list[list[int]]:
        """``y[c][t]`` for ``t = 0..T`` (row 0 repeats row T)."""
        T = self.length
        out = []
        for t in range(T + 1):
            env = dict(zip(self.genes, self.states[(t - 1) % T]))
            out.append([int(c.evaluate(env)) for c in clauses.y_clauses])
        return out

    def follows(self, bn: BooleanNetwork, d: Mapping[str, int] | None = None) -> bool:
        """Successive-state law under the controlled update."""
        f = apply_control(bn, d or {})
        T = self.length
        for t in range(T):
            env = dict(zip(self.genes, self.states[t]))
            nxt = tuple(int(e.evaluate(env)) for e in f.transitions)
            if nxt != self.states[(t + 1) % T]:
                return False
        return True


def apply_control(bn: BooleanNetwork, d: Mapping[str, int]) -> BooleanNetwork:
    """Replace the transition formulas of fixed genes by constants."""
    if not d:
        return bn
    check_control(bn, d)
    return bn.with_transitions({g: Const(bool(v)) for g, v in d.items()})


def decode_state(state: int, n: int) -> tuple[int, ...]:
    return tuple((state >> (n - 1 - i)) & 1 for i in range(n))


@lru_cache(maxsize=64)
def _gene_columns(bn: BooleanNetwork) -> np.ndarray:
    """``cols[i, s]`` = value of ``f_i`` at state ``s`` (no control)."""
    n = bn.n
    if n > STATE_SPACE_LIMIT:
        raise StateSpaceTooLarge(f"{n} genes exceeds the exhaustive limit of {STATE_SPACE_LIMIT}")
    states = np.arange(1 << n, dtype=np.int64)
    env = {g: ((states >> (n - 1 - i)) & 1).astype(bool) for i, g in enumerate(bn.genes)}
    cols = np.empty((n, 1 << n), dtype=bool)
    for i, f in enumerate(bn.transitions):
        cols[i] = f.evaluate_array(env, 1 << n)
    return cols


def successor_table(bn: BooleanNetwork, d: Mapping[str, int] | None = None) -> np.ndarray:
    n = bn.n
    cols = _gene_columns(bn)
    succ = np.zeros(1 << n, dtype=np.int64)
    d = d or {}
    for i, g in enumerate(bn.genes):
        shift = n - 1 - i
        if g in d:
            if d[g]:
                succ |= np.int64(1) << shift
        else:
            succ |= cols[i].astype(np.int64) << shift
    return succ


@dataclass(frozen=True)
class CycleSummary:
    """All cycles of one controlled network, as raw arrays."""

    labels: np.ndarray   # cycle id per state, -1 for transient states
    mins: np.ndarray     # smallest state of each cycle
    lengths: np.ndarray  # exact length of each cycle
    forbidden: np.ndarray  # bool per cycle: some state has phenotype bit 0

    def profile(self) -> tuple[tuple[int, bool], ...]:
        return tuple(sorted(zip(self.lengths.tolist(), self.forbidden.tolist())))


def cycle_summary(bn: BooleanNetwork, d: Mapping[str, int] | None = None) -> CycleSummary:
    succ = successor_table(bn, d)
    labels, mins, lengths = kernels.find_cycles(succ)
    if bn.phenotype_gene is not None:
        shift = bn.n - 1 - bn.index(bn.phenotype_gene)
        zero = (labels >= 0) & (((np.arange(len(succ)) >> shift) & 1) == 0)
        forbidden = np.zeros(len(mins), dtype=bool)
        forbidden[np.unique(labels[zero])] = True
    else:
        forbidden = np.zeros(len(mins), dtype=bool)
    return CycleSummary(labels, mins, lengths, forbidden)


def enumerate_attractors(
    bn: BooleanNetwork, d: Mapping[str, int] | None = None, Tcap: int | None = None
) -> list[AttractorWitness]:
    """All attractors under ``d`` of exact length at most ``Tcap`` (None = no cap).

    Each is returned once, rotated to start at its smallest state; the list is
    sorted by length, then by states.
    """
    succ = successor_table(bn, d)
    labels, mins, lengths = kernels.find_cycles(succ)
    out = []
    for m, L in zip(mins.tolist(), lengths.tolist()):
        if Tcap is not None and L > Tcap:
            continue
        states, s = [], m
        for _ in range(L):
            states.append(decode_state(s, bn.n))
            s = int(succ[s])
        out.append(AttractorWitness(bn.genes, tuple(states)))
    out.sort(key=lambda w: (w.length, w.states))
    return out


def is_trap_space(
    bn: BooleanNetwork,
    d: Mapping[str, int] | None,
    h: Mapping[str, int],
    clauses: ClauseSet | None = None,
    method: str = "auto",
) -> bool:
    """Whether subspace ``h`` is closed under the update controlled by ``d``.

    ``method`` is ``"exhaustive"``, ``"clauses"`` or ``"auto"`` (exhaustive
    when at most 24 genes are free, else clause-based with a warning).
    """
    d = d or {}
    free = [g for g in bn.genes if g not in h]
    if method == "auto":
        method = "exhaustive" if len(free) <= STATE_SPACE_LIMIT else "clauses"
        if method == "clauses":
            log.warning("trap-space check: %d free genes, using the clause-based test only", len(free))
    if method == "clauses":
        return _trap_space_by_clauses(bn, d, h, clauses or build_clauses(bn))
    if len(free) > STATE_SPACE_LIMIT:
        raise StateSpaceTooLarge(f"{len(free)} free genes")
    m = len(free)
    rows = np.arange(1 << m, dtype=np.int64)
    env = {g: ((rows >> (m - 1 - k)) & 1).astype(bool) for k, g in enumerate(free)}
    for g, v in h.items():
        env[g] = np.full(1 << m, bool(v))
    for g, v in h.items():
        if g in d:
            if d[g] != v:
                return False
            continue
        if not np.all(bn.transition(g).evaluate_array(env, 1 << m) == bool(v)):
            return False
    return True


def _trap_space_by_clauses(bn, d, h, clauses: ClauseSet) -> bool:
    for g, k in h.items():
        if g in d:
            if d[g] != k:
                return False
            continue
        for c in clauses.C(g, k):
            if not (any(h.get(l) == 1 for l in c.pos) or any(h.get(l) == 0 for l in c.neg)):
                return False
    return True


# --- brute-force control enumeration ---------------------------------------

def iter_controls(genes: Sequence[str], max_size: int) -> Iterator[ControlVector]:
    """All controls over ``genes`` of size <= ``max_size``, by size then canonical order."""
    for r in range(min(max_size, len(genes)) + 1):
        for combo in itertools.combinations(genes, r):
            for vals in itertools.product((0, 1), repeat=r):
                yield ControlVector(zip(combo, vals))


def status_from_profile(
    profile: Sequence[tuple[int, bool]], Tmax: int | None, accept_no_attractor: bool = False
) -> str:
    """``feasible``, ``infeasible`` or ``no-attractor`` for attractors of length <= Tmax."""
    within = [forb for L, forb in profile if Tmax is None or L <= Tmax]
    if any(within):
        return "infeasible"
    if not within:
        return "feasible" if accept_no_attractor else "no-attractor"
    return "feasible"


class OracleSweep:
    """Attractor profiles of every control up to ``max_size``, computed once.

    Minimal-control sets for any ``Tmax`` are then read off the profiles.
    """

    def __init__(self, bn: BooleanNetwork, max_size: int):
        if bn.phenotype_gene is None:
            raise ValueError("network must be augmented with a phenotype gene")
        if bn.n > ORACLE_GENE_LIMIT + 1:
            raise StateSpaceTooLarge(f"{bn.n} genes exceeds the oracle limit")
        self.bn = bn
        self.max_size = max_size
        self.profiles: dict[ControlVector, tuple[tuple[int, bool], ...]] = {
            d: cycle_summary(bn, d).profile() for d in iter_controls(bn.controllable, max_size)
        }

    def status(self, d: ControlVector, Tmax: int | None, accept_no_attractor: bool = False) -> str:
        return status_from_profile(self.profiles[d], Tmax, accept_no_attractor)

    def minimal_controls(self, Tmax: int | None, accept_no_attractor: bool = False) -> list[ControlVector]:
        feasible = [d for d in self.profiles if self.status(d, Tmax, accept_no_attractor) == "feasible"]
        fset = set(feasible)
        out = [d for d in feasible if not any(s in fset for s in d.subsets())]
        return sorted(out, key=control_sort_key)

    def max_forbidden_length(self, lam_max: int, Tmax: int | None) -> int | None:
        best = None
        for d, prof in self.profiles.items():
            if d.size > lam_max:
                continue
            for L, forb in prof:
                if forb and (Tmax is None or L <= Tmax) and (best is None or L > best):
                    best = L
        return best


def control_sort_key(d: Fixing):
    return (d.size, d.strings())


def oracle_minimal_controls(
    bn: BooleanNetwork,
    Tmax: int | None,
    max_size: int,
    accept_no_attractor: bool = False,
) -> list[ControlVector]:
    """Inclusion-minimal feasible controls of size <= ``max_size`` by brute force.

    A control is feasible when every attractor of length <= ``Tmax`` (None for
    unbounded) keeps the phenotype gene at 1 and at least one such attractor
    exists (unless ``accept_no_attractor``).
    """
    return OracleSweep(bn, max_size).minimal_controls(Tmax, accept_no_attractor)


def oracle_max_forbidden_length(bn: BooleanNetwork, lam_max: int, Tmax: int | None) -> int | None:
    """Longest exact length of a forbidden attractor over controls of size <= ``lam_max``."""
    return OracleSweep(bn, lam_max).max_forbidden_length(lam_max, Tmax)
