"""Boolean networks, the ``.bnet`` text format and phenotype augmentation."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

from .expr import BoolExpr, Const, ExprSyntaxError, Var, parse_expr

PHENOTYPE_NAME = "phenotype"


class BnetError(ValueError):
    """Malformed model file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class BooleanNetwork:
    genes: tuple[str, ...]
    transitions: tuple[BoolExpr, ...]
    controllable: tuple[str, ...]
    phenotype_gene: str | None = None
    # phenotype recorded at parse time, used by augment_phenotype()
    phenotype: BoolExpr | None = None
    # gene -> (clauses of f, clauses of not f); each clause a tuple of literals like "a" / "!a"
    cnf_overrides: tuple[tuple[str, tuple], ...] = ()
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if len(self.transitions) != len(self.genes):
            raise ValueError("one transition formula per gene is required")
        if len(set(self.genes)) != len(self.genes):
            raise ValueError("duplicate gene names")
        index = {g: i for i, g in enumerate(self.genes)}
        object.__setattr__(self, "_index", index)
        for g, f in zip(self.genes, self.transitions):
            missing = f.variables() - index.keys()
            if missing:
                raise ValueError(f"transition of {g} references undeclared gene(s) {sorted(missing)}")
        for g in self.controllable:
            if g not in index:
                raise ValueError(f"controllable gene {g} is not declared")
        if self.phenotype_gene is not None:
            if self.phenotype_gene not in index:
                raise ValueError("phenotype gene is not declared")
            if self.phenotype_gene in self.controllable:
                raise ValueError("the phenotype gene cannot be controllable")
        # keep controllable genes in canonical (file) order
        wanted = set(self.controllable)
        ordered = tuple(g for g in self.genes if g in wanted)
        object.__setattr__(self, "controllable", ordered)

    @property
    def n(self) -> int:
        return len(self.genes)

    def index(self, gene: str) -> int:
        return self._index[gene]

    def transition(self, gene: str) -> BoolExpr:
        return self.transitions[self._index[gene]]

    @property
    def uncontrollable(self) -> tuple[str, ...]:
        ctrl = set(self.controllable)
        return tuple(g for g in self.genes if g not in ctrl)

    @property
    def is_augmented(self) -> bool:
        return self.phenotype_gene is not None

    @property
    def phenotype_expr(self) -> BoolExpr | None:
        if self.phenotype_gene is not None:
            return self.transition(self.phenotype_gene)
        return self.phenotype

    def with_transitions(self, updates: Mapping[str, BoolExpr]) -> "BooleanNetwork":
        trans = tuple(updates.get(g, f) for g, f in zip(self.genes, self.transitions))
        return replace(self, transitions=trans, _index=None)

    def fingerprint(self) -> str:
        """Stable text identity used for cache keys."""
        parts = [f"{g}={f}" for g, f in zip(self.genes, self.transitions)]
        parts.append("J=" + ",".join(self.controllable))
        parts.append(f"phi={self.phenotype_gene}")
        parts.append(f"ov={self.cnf_overrides!r}")
        return "\n".join(parts)

    def to_bnet(self) -> str:
        """Render in the text format read by :func:`parse_bnet`."""
        lines = ["targets, factors"]
        for g, f in zip(self.genes, self.transitions):
            if g == self.phenotype_gene:
                continue
            lines.append(f"{g}, {f}")
        pheno = self.phenotype_expr
        if pheno is not None:
            lines.append(f"# phenotype: {pheno}")
        unctrl = [g for g in self.uncontrollable if g != self.phenotype_gene]
        if unctrl:
            lines.append("# uncontrollable: " + " ".join(unctrl))
        return "\n".join(lines) + "\n"


_DIRECTIVE = re.compile(r"#\s*(phenotype|uncontrollable|cnf)\s*:\s*(.*)$", re.IGNORECASE)


def parse_bnet(text: str, base_dir: str | Path | None = None) -> BooleanNetwork:
    """Parse the ``targets, factors`` model format.

    Recognised directives: ``# phenotype: <expr>``, ``# uncontrollable: a b``
    and ``# cnf: <file.json>`` (explicit clause lists, see :func:`load_cnf_sidecar`).
    Other ``#`` lines are comments.
    """
    genes: list[str] = []
    raw: dict[str, tuple[str, int]] = {}
    phenotype_src: tuple[str, int] | None = None
    uncontrollable: list[tuple[str, int]] = []
    overrides: dict = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _DIRECTIVE.match(stripped)
            if m is None:
                continue
            key, value = m.group(1).lower(), m.group(2).strip()
            if key == "phenotype":
                if phenotype_src is not None:
                    raise BnetError("duplicate phenotype directive", lineno)
                phenotype_src = (value, lineno)
            elif key == "uncontrollable":
                uncontrollable.extend((name, lineno) for name in value.replace(",", " ").split())
            else:
                path = Path(value)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                try:
                    overrides.update(load_cnf_sidecar(path.read_text(encoding="utf-8")))
                except OSError as exc:
                    raise BnetError(f"cannot read CNF file {value}: {exc}", lineno) from None
            continue
        if "," not in stripped:
            raise BnetError("expected 'name, expression'", lineno)
        name, expr = (s.strip() for s in stripped.split(",", 1))
        if name.lower() == "targets" and expr.lower() == "factors":
            continue
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.:]*", name):
            raise BnetError(f"invalid gene name {name!r}", lineno)
        if name in raw:
            raise BnetError(f"duplicate gene definition {name!r} (first on line {raw[name][1]})", lineno)
        genes.append(name)
        raw[name] = (expr, lineno)

    if not genes:
        raise BnetError("no genes defined")
    declared = set(genes)

    def parse_checked(src: str, lineno: int) -> BoolExpr:
        try:
            e = parse_expr(src, lineno)
        except ExprSyntaxError as exc:
            raise BnetError(f"syntax error: {exc.args[0].split(': ', 1)[-1]}", lineno) from None
        missing = sorted(e.variables() - declared)
        if missing:
            raise BnetError(f"undeclared gene {missing[0]!r}", lineno)
        return e

    transitions = tuple(parse_checked(*raw[g]) for g in genes)
    phenotype = parse_checked(*phenotype_src) if phenotype_src else None
    for name, lineno in uncontrollable:
        if name not in declared:
            raise BnetError(f"undeclared gene {name!r} in uncontrollable directive", lineno)
    for name in overrides:
        if name not in declared:
            raise BnetError(f"CNF file mentions undeclared gene {name!r}")
    fixed_out = {name for name, _ in uncontrollable}
    return BooleanNetwork(
        genes=tuple(genes),
        transitions=transitions,
        controllable=tuple(g for g in genes if g not in fixed_out),
        phenotype=phenotype,
        cnf_overrides=tuple(sorted(overrides.items())),
    )


def read_bnet(path: str | Path) -> BooleanNetwork:
    path = Path(path)
    return parse_bnet(path.read_text(encoding="utf-8"), base_dir=path.parent)


def load_cnf_sidecar(text: str) -> dict[str, tuple[tuple, tuple]]:
    """Parse a JSON CNF sidecar.

    Format: ``{"gene": {"f": [["a", "!b"], ...], "not_f": [[...], ...]}}``.
    An empty list of clauses means the constant true formula; ``[[]]`` is false.
    """
    data = json.loads(text)
    out = {}
    for gene, entry in data.items():
        try:
            c1 = tuple(tuple(str(l) for l in clause) for clause in entry["f"])
            c0 = tuple(tuple(str(l) for l in clause) for clause in entry["not_f"])
        except (KeyError, TypeError):
            raise BnetError(f"CNF entry for {gene!r} needs 'f' and 'not_f' clause lists") from None
        out[gene] = (c1, c0)
    return out


def augment_phenotype(
    bn: BooleanNetwork, phenotype: BoolExpr | None = None, name: str = PHENOTYPE_NAME
) -> BooleanNetwork:
    """Append an uncontrollable gene whose transition formula is the phenotype."""
    if phenotype is None:
        phenotype = bn.phenotype
    if phenotype is None:
        raise ValueError("no phenotype given and none recorded in the network")
    if bn.phenotype_gene is not None:
        if bn.transition(bn.phenotype_gene) == phenotype:
            return bn
        if bn.phenotype_gene in phenotype.variables():
            raise ValueError("phenotype references the phenotype gene itself")
        raise ValueError("network is already augmented with a different phenotype")
    missing = phenotype.variables() - set(bn.genes)
    if missing:
        if name in missing:
            raise ValueError("phenotype references the phenotype gene itself")
        raise ValueError(f"phenotype references undeclared gene(s) {sorted(missing)}")
    while name in bn.genes:
        name += "_"
    return BooleanNetwork(
        genes=bn.genes + (name,),
        transitions=bn.transitions + (phenotype,),
        controllable=bn.controllable,
        phenotype_gene=name,
        phenotype=phenotype,
        cnf_overrides=bn.cnf_overrides,
    )


def make_network(
    formulas: Mapping[str, str | BoolExpr] | Iterable[tuple[str, str | BoolExpr]],
    phenotype: str | BoolExpr | None = None,
    uncontrollable: Iterable[str] = (),
    augment: bool = True,
) -> BooleanNetwork:
    """Convenience constructor from ``{gene: formula}``; augments by default."""
    items = list(formulas.items()) if isinstance(formulas, Mapping) else list(formulas)
    genes = tuple(g for g, _ in items)
    trans = tuple(parse_expr(f) if isinstance(f, str) else f for _, f in items)
    unc = set(uncontrollable)
    pheno = parse_expr(phenotype) if isinstance(phenotype, str) else phenotype
    bn = BooleanNetwork(genes, trans, tuple(g for g in genes if g not in unc), phenotype=pheno)
    if augment and pheno is not None:
        bn = augment_phenotype(bn)
    return bn


__all__ = [
    "BnetError",
    "BooleanNetwork",
    "Const",
    "Var",
    "augment_phenotype",
    "load_cnf_sidecar",
    "make_network",
    "parse_bnet",
    "read_bnet",
]
