# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as ``bnctrl._fallback``."""
import time

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef cnp.int64_t i64

DEF CHECK_EVERY = 1024

cdef int OPTIMAL = 0
cdef int INFEASIBLE = 1
cdef int TIMEOUT = 2


cdef struct State:
    int n
    int m
    const i64* row_ptr
    const i64* col
    const i64* coef
    i64* rhs
    const i64* col_ptr
    const i64* col_row
    const i64* col_coef
    signed char* val
    i64* maxact
    int* trail
    int trail_len
    int* queue
    int qlen
    char* inq
    i64 props


cdef inline void enqueue(State* s, int r) noexcept nogil:
    if r >= 0 and not s.inq[r]:
        s.inq[r] = 1
        s.queue[s.qlen] = r
        s.qlen += 1


cdef inline void assign(State* s, int v, int b) noexcept nogil:
    cdef i64 e, a, delta
    cdef int r
    s.val[v] = b
    s.trail[s.trail_len] = v
    s.trail_len += 1
    for e in range(s.col_ptr[v], s.col_ptr[v + 1]):
        a = s.col_coef[e]
        delta = (a if a > 0 else 0) - a * b
        if delta:
            r = <int>s.col_row[e]
            s.maxact[r] -= delta
            enqueue(s, r)


cdef inline void undo(State* s, int to_len) noexcept nogil:
    cdef int v, b
    cdef i64 e, a, delta
    while s.trail_len > to_len:
        s.trail_len -= 1
        v = s.trail[s.trail_len]
        b = s.val[v]
        for e in range(s.col_ptr[v], s.col_ptr[v + 1]):
            a = s.col_coef[e]
            delta = (a if a > 0 else 0) - a * b
            if delta:
                s.maxact[s.col_row[e]] += delta
        s.val[v] = -1


cdef int propagate(State* s) noexcept nogil:
    cdef int r, v, q
    cdef i64 slack, e, a
    while s.qlen > 0:
        s.qlen -= 1
        r = s.queue[s.qlen]
        s.inq[r] = 0
        s.props += 1
        slack = s.maxact[r] - s.rhs[r]
        if slack < 0:
            for q in range(s.qlen):
                s.inq[s.queue[q]] = 0
            s.qlen = 0
            return 0
        for e in range(s.row_ptr[r], s.row_ptr[r + 1]):
            v = <int>s.col[e]
            if s.val[v] < 0:
                a = s.coef[e]
                if a > slack:
                    assign(s, v, 1)
                elif -a > slack:
                    assign(s, v, 0)
    return 1


def bnb_solve(int n, cnp.int64_t[::1] row_ptr, cnp.int64_t[::1] col, cnp.int64_t[::1] coef,
              cnp.int64_t[::1] rhs_in, cnp.int64_t[::1] col_ptr, cnp.int64_t[::1] col_row,
              cnp.int64_t[::1] col_coef, cnp.int8_t[::1] fixed,
              int obj_row=-1, i64 node_limit=-1, double time_limit=-1.0):
    cdef int m = rhs_in.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rhs_arr = np.array(rhs_in, dtype=np.int64, copy=True)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] best = np.full(n, -1, dtype=np.int8)
    cdef State s
    cdef int r, v, depth, ok, conflict, timed_out, have_best, i
    cdef i64 e, acc, best_obj = 0, nodes = 0
    cdef int* dec_var
    cdef int* dec_trail
    cdef signed char* dec_val
    cdef double start = time.perf_counter()

    s.n = n
    s.m = m
    s.row_ptr = &row_ptr[0] if row_ptr.shape[0] else NULL
    s.col = &col[0] if col.shape[0] else NULL
    s.coef = &coef[0] if coef.shape[0] else NULL
    s.rhs = <i64*>rhs_arr.data
    s.col_ptr = &col_ptr[0] if col_ptr.shape[0] else NULL
    s.col_row = &col_row[0] if col_row.shape[0] else NULL
    s.col_coef = &col_coef[0] if col_coef.shape[0] else NULL
    s.val = <signed char*>malloc(max(n, 1))
    s.maxact = <i64*>malloc(max(m, 1) * sizeof(i64))
    s.trail = <int*>malloc(max(n, 1) * sizeof(int))
    s.queue = <int*>malloc(max(m, 1) * sizeof(int))
    s.inq = <char*>malloc(max(m, 1))
    dec_var = <int*>malloc(max(n, 1) * sizeof(int))
    dec_trail = <int*>malloc(max(n, 1) * sizeof(int))
    dec_val = <signed char*>malloc(max(n, 1))
    s.trail_len = 0
    s.qlen = 0
    s.props = 0
    have_best = 0
    timed_out = 0
    try:
        for v in range(n):
            s.val[v] = -1
        for r in range(m):
            s.inq[r] = 0
            acc = 0
            for e in range(s.row_ptr[r], s.row_ptr[r + 1]):
                if s.coef[e] > 0:
                    acc += s.coef[e]
            s.maxact[r] = acc
        for v in range(n):
            if fixed[v] >= 0:
                assign(&s, v, fixed[v])
        for r in range(m):
            enqueue(&s, r)
        ok = propagate(&s)
        depth = 0
        while ok:
            nodes += 1
            if nodes % CHECK_EVERY == 0:
                if (node_limit >= 0 and nodes >= node_limit) or (
                        time_limit >= 0 and time.perf_counter() - start > time_limit):
                    timed_out = 1
                    break
            v = dec_var[depth - 1] + 1 if depth > 0 else 0
            while v < n and s.val[v] >= 0:
                v += 1
            if v == n:
                for i in range(n):
                    best[i] = s.val[i]
                have_best = 1
                if obj_row < 0:
                    break
                acc = 0
                for e in range(s.row_ptr[obj_row], s.row_ptr[obj_row + 1]):
                    acc += s.coef[e] * s.val[s.col[e]]
                best_obj = -acc
                s.rhs[obj_row] = 1 - best_obj
                conflict = 1
            else:
                dec_var[depth] = v
                dec_trail[depth] = s.trail_len
                dec_val[depth] = 0
                depth += 1
                assign(&s, v, 0)
                conflict = not propagate(&s)
            while conflict:
                if depth == 0:
                    ok = 0
                    break
                undo(&s, dec_trail[depth - 1])
                if dec_val[depth - 1] == 0:
                    dec_val[depth - 1] = 1
                    assign(&s, dec_var[depth - 1], 1)
                    if have_best:
                        enqueue(&s, obj_row)
                    conflict = not propagate(&s)
                else:
                    depth -= 1
    finally:
        free(s.val)
        free(s.maxact)
        free(s.trail)
        free(s.queue)
        free(s.inq)
        free(dec_var)
        free(dec_trail)
        free(dec_val)

    if timed_out:
        status = TIMEOUT
    elif have_best:
        status = OPTIMAL
    else:
        status = INFEASIBLE
    return status, best, bool(have_best), best_obj, nodes, s.props


def find_cycles(cnp.int64_t[::1] succ):
    cdef Py_ssize_t N = succ.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] mark = np.zeros(N, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.full(N, -1, dtype=np.int64)
    cdef list mins = []
    cdef list lengths = []
    cdef Py_ssize_t s, x, y, mn, L, c = 0
    for s in range(N):
        if mark[s]:
            continue
        x = s
        while not mark[x]:
            mark[x] = s + 1
            x = succ[x]
        if mark[x] == s + 1:
            y = x
            L = 0
            mn = x
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
            c += 1
    return labels, np.array(mins, dtype=np.int64), np.array(lengths, dtype=np.int64)
