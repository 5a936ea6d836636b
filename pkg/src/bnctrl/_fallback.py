"""Pure-Python kernels; same contract as the compiled ``_ext`` module.

``bnb_solve`` is a depth-first branch-and-bound over binary variables with
activity-bound propagation on rows of the form ``sum(a * x) >= rhs``.  It
branches on the lowest-index free variable, value 0 first.  When
``obj_row >= 0`` that row holds the negated objective and its right-hand side
is tightened each time an incumbent is found, which prunes by bound.
"""
from __future__ import annotations

import time

import numpy as np

OPTIMAL, INFEASIBLE, TIMEOUT = 0, 1, 2
CHECK_EVERY = 1024


def bnb_solve(n, row_ptr, col, coef, rhs, col_ptr, col_row, col_coef, fixed,
              obj_row=-1, node_limit=-1, time_limit=-1.0):
    row_ptr = row_ptr.tolist()
    col = col.tolist()
    coef = coef.tolist()
    rhs = rhs.tolist()
    col_ptr = col_ptr.tolist()
    col_row = col_row.tolist()
    col_coef = col_coef.tolist()
    m = len(rhs)

    val = [-1] * n
    maxact = [0] * m
    for r in range(m):
        s = 0
        for e in range(row_ptr[r], row_ptr[r + 1]):
            if coef[e] > 0:
                s += coef[e]
        maxact[r] = s
    trail: list[int] = []
    queue: list[int] = []
    inq = [False] * m
    stats = [0, 0]  # nodes, propagations

    def assign(v, b):
        val[v] = b
        trail.append(v)
        for e in range(col_ptr[v], col_ptr[v + 1]):
            a = col_coef[e]
            delta = (a if a > 0 else 0) - a * b
            if delta:
                r = col_row[e]
                maxact[r] -= delta
                if not inq[r]:
                    inq[r] = True
                    queue.append(r)

    def undo(to_len):
        while len(trail) > to_len:
            v = trail.pop()
            b = val[v]
            for e in range(col_ptr[v], col_ptr[v + 1]):
                a = col_coef[e]
                delta = (a if a > 0 else 0) - a * b
                if delta:
                    maxact[col_row[e]] += delta
            val[v] = -1

    def propagate():
        while queue:
            r = queue.pop()
            inq[r] = False
            stats[1] += 1
            slack = maxact[r] - rhs[r]
            if slack < 0:
                for q in queue:
                    inq[q] = False
                queue.clear()
                return False
            for e in range(row_ptr[r], row_ptr[r + 1]):
                v = col[e]
                if val[v] < 0:
                    a = coef[e]
                    if a > slack:
                        assign(v, 1)
                    elif -a > slack:
                        assign(v, 0)
        return True

    def enqueue(r):
        if r >= 0 and not inq[r]:
            inq[r] = True
            queue.append(r)

    best = None
    best_obj = 0
    status = INFEASIBLE
    start = time.perf_counter()

    fixed = fixed.tolist()
    ok = True
    for v in range(n):
        if fixed[v] >= 0:
            assign(v, fixed[v])
    for r in range(m):
        enqueue(r)
    ok = propagate()

    dec_var: list[int] = []
    dec_trail: list[int] = []
    dec_val: list[int] = []
    timed_out = False

    while ok:
        # descend
        stats[0] += 1
        if stats[0] % CHECK_EVERY == 0:
            if (node_limit >= 0 and stats[0] >= node_limit) or (
                time_limit >= 0 and time.perf_counter() - start > time_limit
            ):
                timed_out = True
                break
        v = dec_var[-1] + 1 if dec_var else 0
        while v < n and val[v] >= 0:
            v += 1
        if v == n:
            best = list(val)
            if obj_row < 0:
                status = OPTIMAL
                break
            best_obj = -sum(coef[e] * val[col[e]] for e in range(row_ptr[obj_row], row_ptr[obj_row + 1]))
            rhs[obj_row] = 1 - best_obj
            conflict = True
        else:
            dec_var.append(v)
            dec_trail.append(len(trail))
            dec_val.append(0)
            assign(v, 0)
            conflict = not propagate()
        # backtrack until a consistent node is found
        while conflict:
            if not dec_var:
                ok = False
                break
            undo(dec_trail[-1])
            if dec_val[-1] == 0:
                dec_val[-1] = 1
                assign(dec_var[-1], 1)
                if best is not None:
                    enqueue(obj_row)
                conflict = not propagate()
            else:
                dec_var.pop()
                dec_trail.pop()
                dec_val.pop()

    if timed_out:
        status = TIMEOUT
    elif best is not None:
        status = OPTIMAL
    out = np.array(best if best is not None else [-1] * n, dtype=np.int8)
    return status, out, best is not None, best_obj, stats[0], stats[1]


def find_cycles(succ):
    """Cycles of the functional graph ``s -> succ[s]``.

    Returns ``(labels, mins, lengths)``: cycle id per state (-1 off-cycle), and
    per cycle its smallest state and length, in order of discovery.
    """
    succ = succ.tolist()
    N = len(succ)
    mark = [0] * N
    labels = [-1] * N
    mins: list[int] = []
    lengths: list[int] = []
    for s in range(N):
        if mark[s]:
            continue
        x = s
        while not mark[x]:
            mark[x] = s + 1
            x = succ[x]
        if mark[x] == s + 1:
            c = len(mins)
            y, L, mn = x, 0, x
            while True:
                labels[y] = c
                L += 1
                if y < mn:
                    mn = y
                y = succ[y]
                if y == x:
                    break
            mins.append(mn)
            lengths.append(L)
    return (np.array(labels, dtype=np.int64), np.array(mins, dtype=np.int64),
            np.array(lengths, dtype=np.int64))
