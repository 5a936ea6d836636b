"""0-1 linear models and the builders for every integer program of the method.

``Linear01Model`` is solver-agnostic: named binary variables, integer
constraints and an optional objective.  Models derived with
:meth:`Linear01Model.with_fixed` share structure (and the compiled sparse
form) with their parent, which is how the builders reuse one template per
length across thousands of candidate controls.
"""
from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cnf import ClauseSet
from .dynamics import AttractorWitness, ControlVector, TrapSpaceVector
from .network import BooleanNetwork

SENSES = ("<=", ">=", "=")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    coefs: tuple[tuple[str, int], ...]
    sense: str
    rhs: int
    name: str = ""

    def activity(self, values: Mapping[str, int]) -> int:
        return sum(a * values[v] for v, a in self.coefs)

    def satisfied(self, values: Mapping[str, int]) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class Objective:
    sense: str  # "min" or "max"
    coefs: tuple[tuple[str, int], ...]
    constant: int = 0

    def value(self, values: Mapping[str, int]) -> int:
        return self.constant + sum(a * values[v] for v, a in self.coefs)


@dataclass(frozen=True)
class CompiledModel:
    """Rows as ``sum(a x) >= rhs`` in CSR and CSC form (int64)."""

    n: int
    row_ptr: np.ndarray
    col: np.ndarray
    coef: np.ndarray
    rhs: np.ndarray
    col_ptr: np.ndarray
    col_row: np.ndarray
    col_coef: np.ndarray
    obj_row: int  # -1 without objective
    row_of_entry: np.ndarray

    @property
    def m(self) -> int:
        return len(self.rhs)

    def violated_rows(self, x: np.ndarray) -> np.ndarray:
        act = np.bincount(self.row_of_entry, weights=self.coef * x[self.col], minlength=self.m)
        act = np.rint(act).astype(np.int64)
        bad = act < self.rhs
        if self.obj_row >= 0:
            bad[self.obj_row] = False
        return np.flatnonzero(bad)


def _merge(coefs: Mapping[str, int] | Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    items = coefs.items() if isinstance(coefs, Mapping) else coefs
    acc: dict[str, int] = {}
    for v, a in items:
        if int(a) != a:
            raise ModelError(f"non-integer coefficient {a!r} on {v}")
        acc[v] = acc.get(v, 0) + int(a)
    return tuple((v, a) for v, a in acc.items() if a != 0)


class Linear01Model:
    """Binary variables, integer linear constraints, optional objective.

    ``fixed`` maps variable names to constants; solvers treat them as
    assigned before search and the LP export writes them as fixed bounds.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[str] = []
        self.index: dict[str, int] = {}
        self.constraints: list[Constraint] = []
        self.objective: Objective | None = None
        self.fixed: dict[str, int] = {}
        self._shared: dict = {}

    # -- construction ------------------------------------------------------
    def add_var(self, name: str) -> str:
        if name in self.index:
            raise ModelError(f"variable {name} declared twice")
        self.index[name] = len(self.variables)
        self.variables.append(name)
        return name

    def add_vars(self, names: Iterable[str]) -> list[str]:
        return [self.add_var(v) for v in names]

    def add_constraint(self, coefs, sense: str, rhs: int, name: str = "") -> Constraint:
        if sense == "==":
            sense = "="
        if sense not in SENSES:
            raise ModelError(f"unknown relation {sense!r}")
        if int(rhs) != rhs:
            raise ModelError(f"non-integer right-hand side {rhs!r}")
        merged = _merge(coefs)
        for v, _ in merged:
            if v not in self.index:
                raise ModelError(f"constraint {name or len(self.constraints)} uses undeclared variable {v}")
        con = Constraint(merged, sense, int(rhs), name or f"c{len(self.constraints)}")
        self.constraints.append(con)
        return con

    def set_objective(self, sense: str, coefs, constant: int = 0) -> None:
        if sense not in ("min", "max"):
            raise ModelError("objective sense must be 'min' or 'max'")
        merged = _merge(coefs)
        for v, _ in merged:
            if v not in self.index:
                raise ModelError(f"objective uses undeclared variable {v}")
        self.objective = Objective(sense, merged, int(constant))

    # -- derived models ----------------------------------------------------
    def with_fixed(self, values: Mapping[str, int]) -> "Linear01Model":
        """Structure-sharing copy with extra fixed variables.

        Do not add constraints to the result; use :meth:`copy` for that.
        """
        for v, b in values.items():
            if v not in self.index:
                raise ModelError(f"cannot fix undeclared variable {v}")
            if b not in (0, 1):
                raise ModelError(f"fixed value of {v} must be 0 or 1")
        out = copy.copy(self)
        out.fixed = {**self.fixed, **values}
        return out

    def without_objective(self) -> "Linear01Model":
        out = copy.copy(self)
        out.objective = None
        return out

    def copy(self) -> "Linear01Model":
        out = copy.copy(self)
        out.variables = list(self.variables)
        out.index = dict(self.index)
        out.constraints = list(self.constraints)
        out.fixed = dict(self.fixed)
        out._shared = {}
        return out

    # -- evaluation --------------------------------------------------------
    def violations(self, values: Mapping[str, int]) -> list[Constraint]:
        for v, b in self.fixed.items():
            if values.get(v) != b:
                return [Constraint(((v, 1),), "=", b, f"fixed:{v}")]
        return [c for c in self.constraints if not c.satisfied(values)]

    def is_feasible(self, values: Mapping[str, int]) -> bool:
        return not self.violations(values)

    def objective_value(self, values: Mapping[str, int]) -> int | None:
        return None if self.objective is None else self.objective.value(values)

    # -- compilation -------------------------------------------------------
    def compile(self, perm: Sequence[int] | None = None) -> CompiledModel:
        """Sparse ``>=`` rows; ``perm[k]`` is the original index of column ``k``."""
        key = (len(self.constraints), self.objective, None if perm is None else tuple(perm))
        cache = self._shared.setdefault("compiled", {})
        if key in cache:
            return cache[key]
        n = len(self.variables)
        if perm is None:
            pos = self.index
        else:
            inv = np.empty(n, dtype=np.int64)
            inv[np.asarray(perm, dtype=np.int64)] = np.arange(n)
            pos = {v: int(inv[i]) for v, i in self.index.items()}
        rows: list[int] = []
        cols: list[int] = []
        vals: list[int] = []
        rhs: list[int] = []

        def emit(coefs, b, sign):
            r = len(rhs)
            for v, a in coefs:
                rows.append(r)
                cols.append(pos[v])
                vals.append(sign * a)
            rhs.append(sign * b)

        for c in self.constraints:
            if c.sense in (">=", "="):
                emit(c.coefs, c.rhs, 1)
            if c.sense in ("<=", "="):
                emit(c.coefs, c.rhs, -1)
        obj_row = -1
        if self.objective is not None and self.objective.coefs:
            sign = -1 if self.objective.sense == "min" else 1
            bound = sum(abs(a) for _, a in self.objective.coefs) + 1
            obj_row = len(rhs)
            emit(self.objective.coefs, -bound, 1)
            vals[len(vals) - len(self.objective.coefs):] = [sign * a for _, a in self.objective.coefs]
        m = len(rhs)
        row_of_entry = np.asarray(rows, dtype=np.int64)
        col = np.asarray(cols, dtype=np.int64)
        coef = np.asarray(vals, dtype=np.int64)
        row_ptr = np.zeros(m + 1, dtype=np.int64)
        np.add.at(row_ptr, row_of_entry + 1, 1)
        row_ptr = np.cumsum(row_ptr)
        order = np.argsort(col, kind="stable")
        col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(col_ptr, col + 1, 1)
        col_ptr = np.cumsum(col_ptr)
        compiled = CompiledModel(
            n=n, row_ptr=row_ptr, col=col, coef=coef, rhs=np.asarray(rhs, dtype=np.int64),
            col_ptr=col_ptr, col_row=np.ascontiguousarray(row_of_entry[order]),
            col_coef=np.ascontiguousarray(coef[order]), obj_row=obj_row, row_of_entry=row_of_entry,
        )
        cache[key] = compiled
        return compiled

    # -- LP format ---------------------------------------------------------
    def to_lp(self) -> str:
        return write_lp(self)

    def __repr__(self):
        return (f"Linear01Model({self.name!r}, {len(self.variables)} vars, "
                f"{len(self.constraints)} constraints, {len(self.fixed)} fixed)")


# --- LP text format ----------------------------------------------------------

def _terms(coefs: Sequence[tuple[str, int]]) -> str:
    if not coefs:
        return "0"
    parts = []
    for i, (v, a) in enumerate(coefs):
        sign = "-" if a < 0 else ("+" if i else "")
        mag = "" if abs(a) == 1 else f"{abs(a)} "
        parts.append(f"{sign} {mag}{v}".strip() if sign else f"{mag}{v}")
    return " ".join(parts)


def write_lp(model: Linear01Model) -> str:
    """CPLEX-style LP text with a BINARY section."""
    out = [f"\\ {model.name}"]
    obj = model.objective
    if obj is not None and obj.constant:
        out.append(f"\\ objective constant: {obj.constant}")
    out.append("Maximize" if obj is not None and obj.sense == "max" else "Minimize")
    if obj is not None and obj.coefs:
        out.append(f" obj: {_terms(obj.coefs)}")
    else:
        out.append(f" obj: 0 {model.variables[0]}" if model.variables else " obj:")
    out.append("Subject To")
    for c in model.constraints:
        if not c.coefs:
            # LP syntax needs a variable on the left
            if not model.variables:
                continue
            out.append(f" {c.name}: 0 {model.variables[0]} {c.sense} {c.rhs}")
            continue
        out.append(f" {c.name}: {_terms(c.coefs)} {c.sense} {c.rhs}")
    if model.fixed:
        out.append("Bounds")
        for v in model.variables:
            if v in model.fixed:
                out.append(f" {v} = {model.fixed[v]}")
    out.append("Binary")
    for v in model.variables:
        out.append(f" {v}")
    out.append("End")
    return "\n".join(out) + "\n"


_TERM = re.compile(r"([+-]?)\s*(\d+)?\s*([A-Za-z_\[\]][^\s+\-<>=]*)")


def _parse_terms(text: str) -> list[tuple[str, int]]:
    text = text.strip()
    out = []
    pos = 0
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TERM.match(text, pos)
        if m is None:
            if re.match(r"[+-]?\s*\d+\s*$", text[pos:]):
                # a bare constant, only "0" is accepted
                if int(text[pos:].replace(" ", "")) != 0:
                    raise ModelError(f"constant term in expression: {text!r}")
                break
            raise ModelError(f"cannot parse LP expression near {text[pos:pos + 20]!r}")
        sign, mag, name = m.groups()
        a = int(mag) if mag else 1
        out.append((name, -a if sign == "-" else a))
        pos = m.end()
    return out


def read_lp(text: str) -> Linear01Model:
    """Parse the subset of LP syntax produced by :func:`write_lp`."""
    model = Linear01Model()
    section = None
    pending: list[tuple[str, str]] = []
    obj_sense, obj_src, constant = "min", "", 0
    bounds: dict[str, int] = {}
    binaries: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            m = re.match(r"\\\s*objective constant:\s*(-?\d+)", line)
            if m:
                constant = int(m.group(1))
            elif section is None and len(line) > 1:
                model.name = line[1:].strip()
            continue
        low = line.lower()
        if low in ("minimize", "maximize", "minimum", "maximum", "min", "max"):
            section, obj_sense = "obj", "max" if low.startswith("max") else "min"
            continue
        if low in ("subject to", "such that", "st", "s.t."):
            section = "st"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low in ("binary", "binaries", "bin"):
            section = "bin"
            continue
        if low == "end":
            break
        if section == "obj":
            obj_src += " " + (line.split(":", 1)[1] if ":" in line else line)
        elif section == "st":
            name, _, body = line.rpartition(":") if re.match(r"^[^<>=]*:", line) else ("", "", line)
            pending.append((name.strip(), body))
        elif section == "bounds":
            m = re.match(r"(\S+)\s*=\s*([01])$", line)
            if m is None:
                raise ModelError(f"unsupported bound line {line!r}")
            bounds[m.group(1)] = int(m.group(2))
        elif section == "bin":
            binaries.extend(line.split())
    model.add_vars(binaries)
    for name, body in pending:
        m = re.match(r"(.*?)(<=|>=|=<|=>|=|<|>)\s*(-?\d+)\s*$", body)
        if m is None:
            raise ModelError(f"cannot parse constraint {body!r}")
        sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(m.group(2), m.group(2))
        model.add_constraint(_parse_terms(m.group(1)), sense, int(m.group(3)), name)
    terms = _parse_terms(obj_src)
    if any(a for _, a in terms) or constant:
        model.set_objective(obj_sense, terms, constant)
    return model.with_fixed(bounds) if bounds else model


# --- variable naming -----------------------------------------------------------

def dvar(gene: str, k: int) -> str:
    return f"d[{gene}][{k}]"


def xvar(gene: str, t: int) -> str:
    return f"x[{gene}][{t}]"


def yvar(c: int, t: int) -> str:
    return f"y[{c}][{t}]"


def wvar(t: int) -> str:
    return f"w[{t}]"


def uvar(gene: str, k: int) -> str:
    return f"u[{gene}][{k}]"


def hvar(gene: str, k: int) -> str:
    return f"h[{gene}][{k}]"


def control_values(bn: BooleanNetwork, d: Mapping[str, int]) -> dict[str, int]:
    """All ``d[j][k]`` as constants for the control ``d``."""
    out = {}
    for g in d:
        if g not in bn.controllable:
            raise ModelError(f"{g} is not controllable")
    for j in bn.controllable:
        v = d.get(j)
        out[dvar(j, 0)] = int(v == 0)
        out[dvar(j, 1)] = int(v == 1)
    return out


# --- lower-level building blocks ---------------------------------------------

def _add_clause_rows(m: Linear01Model, clauses: ClauseSet, t: int) -> None:
    """y[c][t] equals the disjunction of its literals at time t."""
    for c, cl in enumerate(clauses.y_clauses):
        y = yvar(c, t)
        for g in cl.pos:
            m.add_constraint({y: 1, xvar(g, t): -1}, ">=", 0)
        for g in cl.neg:
            m.add_constraint({y: 1, xvar(g, t): 1}, ">=", 1)
        coefs = {y: 1}
        for g in cl.pos:
            coefs[xvar(g, t)] = coefs.get(xvar(g, t), 0) - 1
        for g in cl.neg:
            coefs[xvar(g, t)] = coefs.get(xvar(g, t), 0) + 1
        m.add_constraint(coefs, "<=", len(cl.neg))


def _add_transition_rows(m: Linear01Model, bn: BooleanNetwork, clauses: ClauseSet, t: int, prev: int) -> None:
    """x[i][t] follows the clause values at time ``prev`` (or the fixing d)."""
    ctrl = set(bn.controllable)
    for g in bn.genes:
        x = xvar(g, t)
        ids = clauses.y_of(g)
        if g in ctrl:
            d0, d1 = dvar(g, 0), dvar(g, 1)
            m.add_constraint({x: 1, d0: 1}, "<=", 1)
            m.add_constraint({x: 1, d1: -1}, ">=", 0)
            for c in ids:
                m.add_constraint({x: 1, yvar(c, prev): -1, d0: -1, d1: -1}, "<=", 0)
            coefs = {x: 1, d0: 1, d1: 1}
            for c in ids:
                coefs[yvar(c, prev)] = -1
            m.add_constraint(coefs, ">=", 1 - len(ids))
        else:
            for c in ids:
                m.add_constraint({x: 1, yvar(c, prev): -1}, "<=", 0)
            coefs = {x: 1}
            for c in ids:
                coefs[yvar(c, prev)] = -1
            m.add_constraint(coefs, ">=", 1 - len(ids))


def _add_phenotype_rows(m: Linear01Model, bn: BooleanNetwork, T: int) -> None:
    phi = bn.phenotype_gene
    for t in range(1, T + 1):
        m.add_constraint({"p": 1, xvar(phi, t): -1}, "<=", 0)
    coefs = {"p": 1}
    for t in range(1, T + 1):
        coefs[xvar(phi, t)] = -1
    m.add_constraint(coefs, ">=", 1 - T)


def _require_augmented(bn: BooleanNetwork) -> None:
    if bn.phenotype_gene is None:
        raise ModelError("network must be augmented with a phenotype gene")


def _template(clauses: ClauseSet, bn: BooleanNetwork, key: tuple, build):
    cache = clauses._cache.setdefault("templates", {})
    full = key + (bn.controllable, bn.phenotype_gene)
    if full not in cache:
        cache[full] = build()
    return cache[full]


def _lower_level(m: Linear01Model, bn: BooleanNetwork, clauses: ClauseSet, T: int, wrap_prev: int) -> None:
    """Variables and rows shared by the subproblem and the aggregated model."""
    for t in range(1, T + 1):
        _add_transition_rows(m, bn, clauses, t, wrap_prev if t == 1 else t - 1)
        _add_clause_rows(m, clauses, t)
    _add_phenotype_rows(m, bn, T)


def _declare_lower(m: Linear01Model, bn: BooleanNetwork, clauses: ClauseSet, T: int, with_d: bool) -> None:
    if with_d:
        for j in bn.controllable:
            m.add_vars([dvar(j, 0), dvar(j, 1)])
    # time-1 states first: the search branches on them and propagation does the rest
    m.add_vars(xvar(g, 1) for g in bn.genes)
    for t in range(1, T + 1):
        if t > 1:
            m.add_vars(xvar(g, t) for g in bn.genes)
        m.add_vars(yvar(c, t) for c in range(len(clauses.y_clauses)))


def build_subproblem(
    bn: BooleanNetwork, clauses: ClauseSet, d: Mapping[str, int], T: int, Tmax: int | None = None
) -> Linear01Model:
    """Length-``T`` subproblem: the attractor closes at ``T`` (``w_T = 1``).

    ``y[c][0]`` coincides with ``y[c][T]`` and is substituted away; ``d`` is
    fixed.  Objective: minimize ``p``.
    """
    _require_augmented(bn)
    if T < 1 or (Tmax is not None and T > Tmax):
        raise ModelError(f"length {T} outside 1..{Tmax}")

    def build():
        m = Linear01Model(f"subproblem_T{T}")
        _declare_lower(m, bn, clauses, T, with_d=True)
        m.add_var("p")
        _lower_level(m, bn, clauses, T, wrap_prev=T)
        m.set_objective("min", {"p": 1})
        m.compile()
        return m

    return _template(clauses, bn, ("sub", T), build).with_fixed(control_values(bn, d))


def _aggregated(bn: BooleanNetwork, clauses: ClauseSet, Tmax: int, name: str) -> Linear01Model:
    m = Linear01Model(name)
    _declare_lower(m, bn, clauses, Tmax, with_d=True)
    m.add_vars(wvar(t) for t in range(1, Tmax + 1))
    m.add_var("p")
    m.add_vars(yvar(c, 0) for c in range(len(clauses.y_clauses)))
    _lower_level(m, bn, clauses, Tmax, wrap_prev=0)
    m.add_constraint({wvar(t): 1 for t in range(1, Tmax + 1)}, "=", 1)
    for c in range(len(clauses.y_clauses)):
        for t in range(1, Tmax + 1):
            m.add_constraint({yvar(c, 0): 1, yvar(c, t): -1, wvar(t): 1}, "<=", 1)
            m.add_constraint({yvar(c, 0): 1, yvar(c, t): -1, wvar(t): -1}, ">=", -1)
    return m


def build_aggregated_llp(
    bn: BooleanNetwork, clauses: ClauseSet, d: Mapping[str, int], Tmax: int
) -> Linear01Model:
    """The full lower-level model with free length selection; minimize ``p``."""
    _require_augmented(bn)
    if Tmax < 1:
        raise ModelError("Tmax must be at least 1")

    def build():
        m = _aggregated(bn, clauses, Tmax, f"llp_Tmax{Tmax}")
        m.set_objective("min", {"p": 1})
        m.compile()
        return m

    return _template(clauses, bn, ("agg", Tmax), build).with_fixed(control_values(bn, d))


def build_master(
    bn: BooleanNetwork, lam: int, D: Iterable[Mapping[str, int]] = (), V: Iterable["CutLike"] = ()
) -> Linear01Model:
    """Feasibility model over ``d``: exclusivity, size ``lam``, minimality, cuts."""
    if lam < 0:
        raise ModelError("target size must be non-negative")
    m = Linear01Model(f"master_lambda{lam}")
    for j in bn.controllable:
        m.add_vars([dvar(j, 0), dvar(j, 1)])
    for j in bn.controllable:
        m.add_constraint({dvar(j, 0): 1, dvar(j, 1): 1}, "<=", 1, f"excl[{j}]")
    m.add_constraint({v: 1 for v in m.variables}, "=", lam, "size")
    for i, dh in enumerate(D):
        # sum over fixed coordinates of (1 - d) >= 1
        m.add_constraint({dvar(g, k): -1 for g, k in dh.items()}, ">=", 1 - len(dh), f"min[{i}]")
    for i, cut in enumerate(V):
        m.add_constraint(cut.constraint_coefs(), ">=", cut.rhs, f"cut[{i}]")
    return m


class CutLike:  # typing aid for build_master; see benders.Cut
    rhs: int

    def constraint_coefs(self) -> dict[str, int]:  # pragma: no cover
        raise NotImplementedError


def build_subspace_separation(bn: BooleanNetwork, clauses: ClauseSet, d: Mapping[str, int]) -> Linear01Model:
    """Find ``(u, h)``: a fully forbidden trap space under ``u`` whose cut removes ``d``."""
    _require_augmented(bn)

    def build():
        m = Linear01Model("subspace_separation")
        J = bn.controllable
        for j in J:
            m.add_vars([dvar(j, 0), dvar(j, 1)])
        for g in bn.genes:
            m.add_vars([hvar(g, 0), hvar(g, 1)])
        for j in J:
            m.add_vars([uvar(j, 0), uvar(j, 1)])
        ctrl = set(J)
        for j in J:
            m.add_constraint({uvar(j, 0): 1, uvar(j, 1): 1}, "<=", 1)
        for g in bn.genes:
            m.add_constraint({hvar(g, 0): 1, hvar(g, 1): 1}, "<=", 1)
        for j in J:
            for k in (0, 1):
                m.add_constraint({uvar(j, k): 1, hvar(j, k): -1}, "<=", 0)
        for g in bn.genes:
            for k in (0, 1):
                for cl in clauses.C(g, k):
                    coefs = {hvar(g, k): 1}
                    if g in ctrl:
                        coefs[uvar(g, k)] = -1
                    for l in cl.pos:
                        coefs[hvar(l, 1)] = coefs.get(hvar(l, 1), 0) - 1
                    for l in cl.neg:
                        coefs[hvar(l, 0)] = coefs.get(hvar(l, 0), 0) - 1
                    m.add_constraint(coefs, "<=", 0)
        m.add_constraint({hvar(bn.phenotype_gene, 0): 1}, "=", 1)
        for j in J:
            for k in (0, 1):
                m.add_constraint({uvar(j, k): 1, hvar(j, k): -1, dvar(j, 1 - k): -1}, ">=", -1)
                m.add_constraint({uvar(j, k): 1, dvar(j, k): -1}, "<=", 0)
        m.set_objective("min", {hvar(j, k): 1 for j in J for k in (0, 1)})
        m.compile()
        return m

    return _template(clauses, bn, ("sep",), build).with_fixed(control_values(bn, d))


def build_max_forbidden_length(bn: BooleanNetwork, clauses: ClauseSet, lam_max: int, Tmax: int) -> Linear01Model:
    """Longest exact length of a forbidden attractor over controls of size <= ``lam_max``."""
    _require_augmented(bn)
    if lam_max < 0 or Tmax < 1:
        raise ModelError("need lam_max >= 0 and Tmax >= 1")
    m = _aggregated(bn, clauses, Tmax, f"maxlen_lam{lam_max}_Tmax{Tmax}")
    J = bn.controllable
    for j in J:
        m.add_constraint({dvar(j, 0): 1, dvar(j, 1): 1}, "<=", 1)
    m.add_constraint({"p": 1}, "=", 0)
    m.add_constraint({dvar(j, k): 1 for j in J for k in (0, 1)}, "<=", lam_max)
    m.add_vars(f"q[{t}]" for t in range(1, Tmax))
    m.add_vars(f"delta[{g}][{t}]" for g in bn.genes for t in range(1, Tmax + 1))
    for t in range(1, Tmax):
        coefs = {f"q[{t}]": 1}
        for r in range(t + 1, Tmax + 1):
            coefs[wvar(r)] = -1
        m.add_constraint(coefs, "=", 0)
    for g in bn.genes:
        for t in range(1, Tmax + 1):
            dl, xt, x1 = f"delta[{g}][{t}]", xvar(g, t), xvar(g, 1)
            if t == 1:
                # x[g][1] - x[g][1] vanishes; the four rows reduce to delta = 0
                m.add_constraint({dl: 1}, "<=", 0)
                continue
            m.add_constraint({dl: 1, xt: -1, x1: 1}, ">=", 0)
            m.add_constraint({dl: 1, xt: 1, x1: -1}, ">=", 0)
            m.add_constraint({dl: 1, xt: -1, x1: -1}, "<=", 0)
            m.add_constraint({dl: 1, xt: 1, x1: 1}, "<=", 2)
    for t in range(2, Tmax + 1):
        coefs = {f"delta[{g}][{t}]": 1 for g in bn.genes}
        coefs[f"q[{t - 1}]"] = -1
        m.add_constraint(coefs, ">=", 0)
    m.set_objective("max", {wvar(t): t for t in range(1, Tmax + 1)})
    return m


# --- decoding ------------------------------------------------------------------

def decode_witness(values: Mapping[str, int], bn: BooleanNetwork, T: int | None = None) -> AttractorWitness:
    """States ``x[.][1..T]``; ``T`` defaults to the selected ``w``."""
    if T is None:
        T = next(t for t in range(1, 1 << 30) if values.get(wvar(t), 0) == 1)
    states = tuple(tuple(int(values[xvar(g, t)]) for g in bn.genes) for t in range(1, T + 1))
    return AttractorWitness(bn.genes, states)


def decode_control(values: Mapping[str, int], bn: BooleanNetwork, prefix: str = "d") -> ControlVector:
    out = {}
    for j in bn.controllable:
        for k in (0, 1):
            if values.get(f"{prefix}[{j}][{k}]", 0) == 1:
                out[j] = k
    return ControlVector(out)


def decode_trap_space(values: Mapping[str, int], bn: BooleanNetwork) -> tuple[ControlVector, TrapSpaceVector]:
    u = decode_control(values, bn, prefix="u")
    h = {}
    for g in bn.genes:
        for k in (0, 1):
            if values.get(hvar(g, k), 0) == 1:
                h[g] = k
    return u, TrapSpaceVector(h)


def encode_witness(witness: AttractorWitness, bn: BooleanNetwork, clauses: ClauseSet, d: Mapping[str, int]) -> dict[str, int]:
    """Subproblem assignment for a periodic orbit (inverse of :func:`decode_witness`)."""
    T = witness.length
    out = dict(control_values(bn, d))
    yv = witness.clause_values(clauses)
    for t in range(1, T + 1):
        for i, g in enumerate(bn.genes):
            out[xvar(g, t)] = witness.states[t - 1][i]
        for c, v in enumerate(yv[t]):
            out[yvar(c, t)] = v
    out["p"] = int(not witness.is_forbidden(bn.phenotype_gene))
    return out
