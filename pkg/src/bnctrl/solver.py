"""Solver backends for :class:`~bnctrl.model.Linear01Model`.

The builtin backend is a deterministic depth-first branch-and-bound (see
``bnctrl._fallback`` for the algorithm).  ``ExternalCommandBackend`` writes
the model as an LP file and runs a user command that prints ``var=value``
lines; its answer is re-verified before it is returned.

Backend selection: ``BNCTRL_BACKEND`` (``builtin``, ``builtin:python`` or
``external``); the external command comes from ``BNCTRL_EXTERNAL_CMD``.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import _fallback, kernels
from .model import Linear01Model, ModelError, write_lp

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout"


class SolverError(RuntimeError):
    pass


@dataclass
class SolveStats:
    nodes: int = 0
    propagations: int = 0
    wall_time: float = 0.0
    backend: str = ""


@dataclass
class SolveResult:
    status: str
    variables: list[str] = field(repr=False, default_factory=list)
    values: np.ndarray | None = field(repr=False, default=None)
    objective: int | None = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def has_solution(self) -> bool:
        return self.values is not None

    @property
    def ok(self) -> bool:
        """Solved with a solution (optimal or feasible)."""
        return self.status in (OPTIMAL, FEASIBLE)

    @property
    def assignment(self) -> dict[str, int] | None:
        if self.values is None:
            return None
        return dict(zip(self.variables, self.values.tolist()))

    def __getitem__(self, name: str) -> int:
        if self.values is None:
            raise KeyError(name)
        return int(self.values[self.variables.index(name)])


class Backend(Protocol):
    name: str

    def solve(self, model: Linear01Model, time_limit: float | None = None,
              node_limit: int | None = None) -> SolveResult: ...


def _fixed_array(model: Linear01Model) -> np.ndarray:
    fixed = np.full(len(model.variables), -1, dtype=np.int8)
    if model.fixed:
        idx = [model.index[v] for v in model.fixed]
        fixed[idx] = list(model.fixed.values())
    return fixed


def _check(model: Linear01Model, values: np.ndarray) -> None:
    """Integer re-check of every constraint and fixing; raises on a violation."""
    comp = model.compile()
    bad = comp.violated_rows(values.astype(np.int64))
    if len(bad):
        raise SolverError(f"backend returned an assignment violating {len(bad)} row(s) of {model.name}")
    for v, b in model.fixed.items():
        if values[model.index[v]] != b:
            raise SolverError(f"backend returned {v}={values[model.index[v]]} against fixing {b}")


class BuiltinBackend:
    """Propagation-based branch-and-bound; ``impl`` picks compiled or Python kernels."""

    def __init__(self, impl=None, order_seed: int | None = None):
        self.impl = impl or kernels.impl
        self.name = "builtin" if self.impl is kernels.impl else f"builtin:{self.impl.__name__.rsplit('.', 1)[-1]}"
        self.order_seed = order_seed

    def _perm(self, n: int):
        if self.order_seed is None:
            return None
        return np.random.default_rng(self.order_seed).permutation(n)

    def solve(self, model: Linear01Model, time_limit: float | None = None,
              node_limit: int | None = None) -> SolveResult:
        start = time.perf_counter()
        n = len(model.variables)
        perm = self._perm(n)
        comp = model.compile(perm)
        fixed = _fixed_array(model)
        if perm is not None:
            fixed = np.ascontiguousarray(fixed[perm])
        status, best, found, _, nodes, props = self.impl.bnb_solve(
            n, comp.row_ptr, comp.col, comp.coef, comp.rhs, comp.col_ptr, comp.col_row,
            comp.col_coef, fixed, comp.obj_row,
            -1 if node_limit is None else int(node_limit),
            -1.0 if time_limit is None else float(time_limit),
        )
        values = None
        if found:
            if perm is not None:
                values = np.empty(n, dtype=np.int8)
                values[perm] = best
            else:
                values = np.asarray(best, dtype=np.int8)
            _check(model, values)
        if status == _fallback.TIMEOUT:
            label = TIMEOUT
        elif found:
            label = OPTIMAL if model.objective is not None else FEASIBLE
        else:
            label = INFEASIBLE
        objective = None
        if values is not None and model.objective is not None:
            objective = model.objective_value(dict(zip(model.variables, values.tolist())))
        stats = SolveStats(int(nodes), int(props), time.perf_counter() - start, self.name)
        return SolveResult(label, model.variables, values, objective, stats)


class ExternalCommandBackend:
    """Delegate to an external program.

    The command gets the LP file path as its last argument and must print
    ``var=value`` lines for a solution, or a line ``infeasible``.  Exit status
    124 (or a subprocess timeout) means timeout.  Returned solutions are
    treated as optimal: only their feasibility can be checked here.
    """

    name = "external"

    def __init__(self, command: str):
        if not command:
            raise ValueError("external backend needs a command")
        self.command = command

    def solve(self, model: Linear01Model, time_limit: float | None = None,
              node_limit: int | None = None) -> SolveResult:
        start = time.perf_counter()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "model.lp")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(write_lp(model))
            try:
                proc = subprocess.run(shlex.split(self.command) + [path], capture_output=True,
                                      text=True, timeout=time_limit)
            except subprocess.TimeoutExpired:
                return SolveResult(TIMEOUT, model.variables, None, None,
                                   SolveStats(wall_time=time.perf_counter() - start, backend=self.name))
        stats = SolveStats(wall_time=time.perf_counter() - start, backend=self.name)
        if proc.returncode == 124:
            return SolveResult(TIMEOUT, model.variables, None, None, stats)
        if proc.returncode != 0:
            raise SolverError(f"external solver failed ({proc.returncode}): {proc.stderr.strip()[:200]}")
        return result_from_text(model, proc.stdout, stats)


def result_from_text(model: Linear01Model, text: str, stats: SolveStats | None = None) -> SolveResult:
    """Turn ``var=value`` lines into a verified :class:`SolveResult`."""
    stats = stats or SolveStats(backend="injected")
    parsed: dict[str, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower() in ("infeasible", "status=infeasible"):
            return SolveResult(INFEASIBLE, model.variables, None, None, stats)
        if "=" not in line:
            continue
        name, _, val = line.rpartition("=")
        name = name.strip()
        if name.lower() == "status":
            continue
        if name not in model.index:
            raise SolverError(f"solution mentions unknown variable {name}")
        parsed[name] = int(round(float(val)))
    values = np.zeros(len(model.variables), dtype=np.int8)
    for v in model.variables:
        if v in parsed:
            values[model.index[v]] = parsed[v]
        elif v in model.fixed:
            values[model.index[v]] = model.fixed[v]
        else:
            raise SolverError(f"solution has no value for {v}")
    _check(model, values)
    objective = None
    if model.objective is not None:
        objective = model.objective_value(dict(zip(model.variables, values.tolist())))
    status = OPTIMAL if model.objective is not None else FEASIBLE
    return SolveResult(status, model.variables, values, objective, stats)


def get_backend(spec: str | Backend | None = None, order_seed: int | None = None) -> Backend:
    """``builtin`` | ``builtin:python`` | ``builtin:cython`` | ``external[:<command>]``."""
    if spec is not None and not isinstance(spec, str):
        return spec
    spec = spec or os.environ.get("BNCTRL_BACKEND", "builtin")
    kind, _, arg = spec.partition(":")
    if kind == "builtin":
        if arg in ("", "auto"):
            return BuiltinBackend(order_seed=order_seed)
        if arg == "python":
            return BuiltinBackend(kernels.fallback, order_seed)
        if arg == "cython":
            if kernels.compiled is None:
                raise ValueError("compiled kernels are not available")
            return BuiltinBackend(kernels.compiled, order_seed)
        raise ValueError(f"unknown builtin variant {arg!r}")
    if kind == "external":
        return ExternalCommandBackend(arg or os.environ.get("BNCTRL_EXTERNAL_CMD", ""))
    raise ValueError(f"unknown backend {spec!r}")


def solve(model: Linear01Model, time_limit: float | None = None, backend: str | Backend | None = None,
          node_limit: int | None = None) -> SolveResult:
    if not isinstance(model, Linear01Model):
        raise ModelError("solve() expects a Linear01Model")
    return get_backend(backend).solve(model, time_limit, node_limit)


def brute_force(model: Linear01Model) -> tuple[str, dict[str, int] | None, int | None]:
    """Exhaustive reference solver for tiny models (status, assignment, objective).

    Ties are broken the way the builtin backend breaks them: the first optimum
    in lexicographic order of the variable vector.
    """
    free = [v for v in model.variables if v not in model.fixed]
    if len(free) > 22:
        raise ValueError("too many free variables for exhaustive search")
    best = None
    best_obj = None
    for bits in range(1 << len(free)):
        values = dict(model.fixed)
        for k, v in enumerate(free):
            values[v] = (bits >> (len(free) - 1 - k)) & 1
        if not model.is_feasible(values):
            continue
        if model.objective is None:
            return FEASIBLE, values, None
        obj = model.objective_value(values)
        better = best_obj is None or (obj < best_obj if model.objective.sense == "min" else obj > best_obj)
        if better:
            best, best_obj = values, obj
    if best is None:
        return INFEASIBLE, None, None
    return OPTIMAL, best, best_obj


__all__ = [
    "Backend", "BuiltinBackend", "ExternalCommandBackend", "FEASIBLE", "INFEASIBLE", "OPTIMAL",
    "SolveResult", "SolveStats", "SolverError", "TIMEOUT", "brute_force", "get_backend",
    "result_from_text", "solve",
]
