"""Compiled vs pure-Python kernels.

Times the branch-and-bound on subproblem, separation and master-style
models, cycle detection on successor tables, and one full enumeration with
each kernel.  Both kernels must give identical answers; the script exits
non-zero otherwise.

    python benchmarks/bench_kernels.py [--networks 20] [--repeat 3]
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from bnctrl import kernels
from bnctrl.benders import enumerate_controls
from bnctrl.cnf import build_clauses
from bnctrl.dynamics import successor_table
from bnctrl.model import build_aggregated_llp, build_subproblem, build_subspace_separation
from bnctrl.random_networks import random_network
from bnctrl.solver import BuiltinBackend


def _best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def solver_workload(networks, Tmax):
    models = []
    for bn in networks:
        cs = build_clauses(bn)
        for T in range(1, Tmax + 1):
            models.append(build_subproblem(bn, cs, {}, T, Tmax))
        models.append(build_aggregated_llp(bn, cs, {}, Tmax))
        models.append(build_subspace_separation(bn, cs, {}))
    for m in models:
        m.compile()
    return models


def run_models(backend, models):
    return [(r.status, None if r.values is None else r.values.tobytes(), r.stats.nodes)
            for r in (backend.solve(m) for m in models)]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--networks", type=int, default=20)
    ap.add_argument("--genes", type=int, default=10)
    ap.add_argument("--tmax", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if kernels.compiled is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    py, cy = BuiltinBackend(kernels.fallback), BuiltinBackend(kernels.compiled)
    nets = [random_network(1000 + i, args.genes, args.genes) for i in range(args.networks)]
    rows = []
    mismatch = False

    models = solver_workload(nets, args.tmax)
    t_py, a = _best_of(lambda: run_models(py, models), args.repeat)
    t_cy, b = _best_of(lambda: run_models(cy, models), args.repeat)
    mismatch |= a != b
    rows.append(("bnb_solve", f"{len(models)} models", t_py, t_cy))

    tables = [successor_table(random_network(2000 + i, 16, 16)) for i in range(4)]
    t_py, a = _best_of(lambda: [kernels.fallback.find_cycles(s) for s in tables], args.repeat)
    t_cy, b = _best_of(lambda: [kernels.compiled.find_cycles(s) for s in tables], args.repeat)
    mismatch |= any(not np.array_equal(x, y) for p, q in zip(a, b) for x, y in zip(p, q))
    rows.append(("find_cycles", f"{len(tables)} x 2^17 states", t_py, t_cy))

    bn = nets[0]
    run = lambda be: enumerate_controls(bn, Tmax=args.tmax, max_size=3, backend=be).to_json(False)
    t_py, a = _best_of(lambda: run(py), 1)
    t_cy, b = _best_of(lambda: run(cy), 1)
    a["settings"].pop("backend"), b["settings"].pop("backend")
    mismatch |= a != b
    rows.append(("enumerate", f"{bn.n - 1} genes, Tmax {args.tmax}", t_py, t_cy))

    print(f"{'kernel':<12} {'workload':<22} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, what, tp, tc in rows:
        print(f"{name:<12} {what:<22} {tp:>11.4f} {tc:>11.4f} {tp / max(tc, 1e-9):>7.1f}x")
    if mismatch:
        print("MISMATCH between kernels", file=sys.stderr)
        return 2
    print("answers identical")
    return 0


if __name__ == "__main__":
    sys.exit(main())
