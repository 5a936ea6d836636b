"""Seeded random Boolean networks for property tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .expr import And, BoolExpr, Not, Or, Var
from .network import BooleanNetwork, augment_phenotype


def _literal(rng: np.random.Generator, name: str) -> BoolExpr:
    return Not(Var(name)) if rng.random() < 0.4 else Var(name)


def random_formula(rng: np.random.Generator, genes: list[str], max_inputs: int = 3) -> BoolExpr:
    k = int(rng.integers(1, min(max_inputs, len(genes)) + 1))
    inputs = [genes[i] for i in rng.choice(len(genes), size=k, replace=False)]
    expr = _literal(rng, inputs[0])
    for name in inputs[1:]:
        lit = _literal(rng, name)
        expr = And((expr, lit)) if rng.random() < 0.5 else Or((expr, lit))
    return expr


def random_network(
    seed: int,
    n_min: int = 4,
    n_max: int = 8,
    max_inputs: int = 3,
    uncontrollable_prob: float = 0.15,
) -> BooleanNetwork:
    """Random network with a 1-2 literal phenotype, already augmented."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    genes = [f"g{i}" for i in range(n)]
    trans = tuple(random_formula(rng, genes, max_inputs) for _ in genes)
    ctrl = tuple(g for g in genes if rng.random() >= uncontrollable_prob)
    npheno = int(rng.integers(1, 3))
    picks = [genes[i] for i in rng.choice(n, size=npheno, replace=False)]
    lits = [_literal(rng, g) for g in picks]
    if len(lits) == 1:
        pheno = lits[0]
    else:
        pheno = And(tuple(lits)) if rng.random() < 0.5 else Or(tuple(lits))
    bn = BooleanNetwork(tuple(genes), trans, ctrl, phenotype=pheno)
    return augment_phenotype(bn)


def corpus(count: int, base_seed: int = 0, **kwargs) -> list[BooleanNetwork]:
    return [random_network(base_seed + i, **kwargs) for i in range(count)]
