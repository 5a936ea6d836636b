"""CNF clause sets for transition formulas and their negations.

Clauses only ever mention original gene variables: the integer models link
one clause variable to each clause, so auxiliary (Tseitin) variables are not
an option.  Up to 12 inputs the CNF is built from the truth table as a cover
of prime implicates; up to 20 inputs by distribution with subsumption
elimination.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .expr import And, BoolExpr, Const, Not, Or, Var, truth_table
from .network import BooleanNetwork

TRUTH_TABLE_LIMIT = 12
DISTRIBUTION_LIMIT = 20


class CNFWidthError(ValueError):
    pass


@dataclass(frozen=True)
class Clause:
    """Disjunction of positive literals ``pos`` and negative literals ``neg``."""

    pos: frozenset[str]
    neg: frozenset[str]

    def __post_init__(self):
        if self.pos & self.neg:
            raise ValueError(f"complementary literals in clause: {sorted(self.pos & self.neg)}")

    @classmethod
    def of(cls, literals: Iterable[str]) -> "Clause":
        pos, neg = set(), set()
        for lit in literals:
            lit = lit.strip()
            if lit.startswith(("!", "~", "-")):
                neg.add(lit[1:].strip())
            else:
                pos.add(lit)
        return cls(frozenset(pos), frozenset(neg))

    def __len__(self):
        return len(self.pos) + len(self.neg)

    def evaluate(self, env: Mapping[str, bool]) -> bool:
        return any(env[g] for g in self.pos) or any(not env[g] for g in self.neg)

    def evaluate_array(self, env: Mapping[str, np.ndarray], size: int) -> np.ndarray:
        out = np.zeros(size, dtype=bool)
        for g in self.pos:
            out |= env[g]
        for g in self.neg:
            out |= ~env[g]
        return out

    def literals(self, order: Sequence[str] | None = None) -> list[str]:
        names = sorted(self.pos | self.neg, key=_order_key(order))
        return [g if g in self.pos else f"!{g}" for g in names]

    def __str__(self):
        lits = self.literals()
        return "(" + " | ".join(lits) + ")" if lits else "()"


def _order_key(order: Sequence[str] | None):
    if order is None:
        return lambda g: g
    rank = {g: i for i, g in enumerate(order)}
    return lambda g: (rank.get(g, len(rank)), g)


def _sort_clauses(clauses: Iterable[Clause], order: Sequence[str]) -> list[Clause]:
    key = _order_key(order)

    def clause_key(c: Clause):
        return (len(c), [(key(g), g in c.neg) for g in sorted(c.pos | c.neg, key=key)])

    return sorted(set(clauses), key=clause_key)


# --- prime implicants by Quine-McCluskey -----------------------------------

def prime_implicants(minterms: Iterable[int], m: int) -> list[tuple[int, int]]:
    """Prime implicants of the function with the given on-set.

    An implicant is ``(value, mask)``: bits set in ``mask`` are don't-cares and
    ``value`` has zeros there.
    """
    current = {(int(v), 0) for v in minterms}
    primes: set[tuple[int, int]] = set()
    while current:
        by_mask: dict[int, set[int]] = {}
        for v, mask in current:
            by_mask.setdefault(mask, set()).add(v)
        merged: set[tuple[int, int]] = set()
        used: set[tuple[int, int]] = set()
        for mask, values in by_mask.items():
            for v in values:
                for b in range(m):
                    bit = 1 << b
                    if mask & bit or v & bit:
                        continue
                    partner = v | bit
                    if partner in values:
                        merged.add((v, mask | bit))
                        used.add((v, mask))
                        used.add((partner, mask))
        primes |= current - used
        current = merged
    return sorted(primes, key=lambda im: (-bin(im[1]).count("1"), im[0], im[1]))


def _covers(implicant: tuple[int, int], minterm: int) -> bool:
    value, mask = implicant
    return (minterm & ~mask) == value


def select_cover(primes: list[tuple[int, int]], minterms: list[int]) -> list[tuple[int, int]]:
    """Essential primes first, then greedy by coverage (deterministic ties)."""
    remaining = set(minterms)
    chosen: list[tuple[int, int]] = []
    for mt in sorted(remaining):
        covering = [p for p in primes if _covers(p, mt)]
        if len(covering) == 1 and covering[0] not in chosen:
            chosen.append(covering[0])
    for p in chosen:
        remaining -= {mt for mt in remaining if _covers(p, mt)}
    candidates = [p for p in primes if p not in chosen]
    while remaining:
        best = max(
            candidates,
            key=lambda p: (sum(1 for mt in remaining if _covers(p, mt)), bin(p[1]).count("1"), -candidates.index(p)),
        )
        chosen.append(best)
        candidates.remove(best)
        remaining -= {mt for mt in remaining if _covers(best, mt)}
    return chosen


def _cnf_truth_table(target: BoolExpr, inputs: tuple[str, ...]) -> list[Clause]:
    m = len(inputs)
    table = truth_table(target, inputs)
    zeros = [int(r) for r in np.flatnonzero(~table)]
    if not zeros:
        return []
    clauses = []
    for value, mask in select_cover(prime_implicants(zeros, m), zeros):
        pos, neg = set(), set()
        for k, name in enumerate(inputs):
            bit = 1 << (m - 1 - k)
            if mask & bit:
                continue
            # the implicant of the off-set has name = 1 -> clause literal !name
            (neg if value & bit else pos).add(name)
        clauses.append(Clause(frozenset(pos), frozenset(neg)))
    return clauses


# --- distribution ----------------------------------------------------------

def _nnf(e: BoolExpr, negate: bool) -> BoolExpr:
    if isinstance(e, Const):
        return Const(e.value != negate)
    if isinstance(e, Var):
        return Not(e) if negate else e
    if isinstance(e, Not):
        return _nnf(e.arg, not negate)
    parts = tuple(_nnf(a, negate) for a in e.args)
    if isinstance(e, And):
        return Or(parts) if negate else And(parts)
    return And(parts) if negate else Or(parts)


Lits = frozenset  # of (name, polarity)


def _dist(e: BoolExpr) -> set[Lits]:
    if isinstance(e, Const):
        return set() if e.value else {frozenset()}
    if isinstance(e, Var):
        return {frozenset({(e.name, True)})}
    if isinstance(e, Not):
        return {frozenset({(e.arg.name, False)})}
    if isinstance(e, And):
        out: set[Lits] = set()
        for a in e.args:
            out |= _dist(a)
        return _subsume(out)
    acc: set[Lits] = {frozenset()}
    for a in e.args:
        sub = _dist(a)
        nxt = set()
        for c1 in acc:
            for c2 in sub:
                c = c1 | c2
                if any((n, not s) in c for n, s in c):
                    continue
                nxt.add(c)
        acc = _subsume(nxt)
    return acc


def _subsume(clauses: set[Lits]) -> set[Lits]:
    ordered = sorted(clauses, key=len)
    kept: list[Lits] = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return set(kept)


def _cnf_distribution(target: BoolExpr) -> list[Clause]:
    out = []
    for lits in _dist(_nnf(target, False)):
        pos = frozenset(n for n, s in lits if s)
        neg = frozenset(n for n, s in lits if not s)
        out.append(Clause(pos, neg))
    return out


def to_cnf(expr: BoolExpr, negate: bool = False, order: Sequence[str] | None = None) -> list[Clause]:
    """CNF of ``expr`` (or of its negation) over the original variables.

    ``TRUE`` gives no clauses and ``FALSE`` the single empty clause.
    """
    inputs = tuple(sorted(expr.variables(), key=_order_key(order)))
    target = Not(expr) if negate else expr
    if len(inputs) <= TRUTH_TABLE_LIMIT:
        clauses = _cnf_truth_table(target, inputs)
    elif len(inputs) <= DISTRIBUTION_LIMIT:
        clauses = _cnf_distribution(target)
    else:
        raise CNFWidthError(
            f"formula has {len(inputs)} inputs (limit {DISTRIBUTION_LIMIT}); "
            "supply its clauses explicitly with a '# cnf: <file.json>' directive"
        )
    return _sort_clauses(clauses, order or inputs)


def cnf_equivalent(clauses: Sequence[Clause], expr: BoolExpr, inputs: Sequence[str] | None = None) -> bool:
    """Exhaustive check that the clause conjunction equals ``expr``."""
    names = set(expr.variables())
    for c in clauses:
        names |= c.pos | c.neg
    inputs = tuple(sorted(names)) if inputs is None else tuple(inputs)
    m = len(inputs)
    rows = np.arange(1 << m, dtype=np.int64)
    env = {g: ((rows >> (m - 1 - k)) & 1).astype(bool) for k, g in enumerate(inputs)}
    conj = np.ones(1 << m, dtype=bool)
    for c in clauses:
        conj &= c.evaluate_array(env, 1 << m)
    return bool(np.array_equal(conj, expr.evaluate_array(env, 1 << m)))


# --- clause sets -----------------------------------------------------------

@dataclass(frozen=True)
class ClauseSet:
    """Per-gene CNFs of ``f_i`` (``c1``) and of ``not f_i`` (``c0``).

    ``y_clauses`` is the union of all ``c1`` clauses without duplicates; the
    integer models carry one clause variable per entry.
    """

    genes: tuple[str, ...]
    c1: tuple[tuple[Clause, ...], ...]
    c0: tuple[tuple[Clause, ...], ...]
    y_clauses: tuple[Clause, ...] = ()
    y_ids: tuple[tuple[int, ...], ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.y_clauses:
            index: dict[Clause, int] = {}
            ids = []
            for cl in self.c1:
                row = []
                for c in cl:
                    if c not in index:
                        index[c] = len(index)
                    row.append(index[c])
                ids.append(tuple(row))
            object.__setattr__(self, "y_clauses", tuple(index))
            object.__setattr__(self, "y_ids", tuple(ids))
        self._cache["gene_index"] = {g: i for i, g in enumerate(self.genes)}

    def C1(self, gene: str) -> tuple[Clause, ...]:
        return self.c1[self._cache["gene_index"][gene]]

    def C0(self, gene: str) -> tuple[Clause, ...]:
        return self.c0[self._cache["gene_index"][gene]]

    def C(self, gene: str, k: int) -> tuple[Clause, ...]:
        return self.C1(gene) if k else self.C0(gene)

    def y_of(self, gene: str) -> tuple[int, ...]:
        return self.y_ids[self._cache["gene_index"][gene]]


def build_clauses(bn: BooleanNetwork, check_overrides: bool = True) -> ClauseSet:
    """Clause sets for every gene of ``bn``; sidecar overrides take precedence."""
    overrides = dict(bn.cnf_overrides)
    c1, c0 = [], []
    for g, f in zip(bn.genes, bn.transitions):
        if g in overrides:
            raw1, raw0 = overrides[g]
            pos = _sort_clauses((Clause.of(c) for c in raw1), bn.genes)
            neg = _sort_clauses((Clause.of(c) for c in raw0), bn.genes)
            if check_overrides and len(f.variables()) <= 16:
                if not cnf_equivalent(pos, f) or not cnf_equivalent(neg, Not(f)):
                    raise ValueError(f"explicit CNF for {g} is not equivalent to its transition formula")
        else:
            pos = to_cnf(f, False, bn.genes)
            neg = to_cnf(f, True, bn.genes)
        c1.append(tuple(pos))
        c0.append(tuple(neg))
    return ClauseSet(bn.genes, tuple(c1), tuple(c0))
