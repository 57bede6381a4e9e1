# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: game-tree enumeration and Monte Carlo episodes.

Mirrors ``_kernels_py`` operation for operation; see that module for the
argument conventions. Built without FMA contraction so both agree bit for bit.
"""

import numpy as np

from libc.stdint cimport uint64_t, uint8_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) noexcept nogil:
    return (_mix64(key + (counter + 1) * GOLDEN) >> 11) * TWO53


def mix64(z):
    return _mix64(<uint64_t>(z & 0xFFFFFFFFFFFFFFFF))


def stream_key(seed):
    return _mix64(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF) ^ 0x5DEECE66D2545F49ULL)


def uniform01(key, counter):
    return _uniform(<uint64_t>key, <uint64_t>counter)


cdef struct Params:
    double b, x_bar, delta, C, h, gamma, omega


cdef struct Outcome:
    double rep, pay, us, uo


cdef inline Outcome _stage(const Params* P, int stage, double carried, double x, double s,
                           bint truthful, bint verified) noexcept nogil:
    cdef Outcome o
    cdef double effort, ben
    if truthful:
        o.rep = P.h * x / P.x_bar
        if verified:
            o.rep = o.rep + P.gamma
        effort = x
        ben = s
    else:
        o.rep = 0.0 if verified else P.h
        effort = 0.0
        ben = 0.0
    if stage == 1:
        o.pay = o.rep
    else:
        o.pay = (1.0 - P.omega) * carried + P.omega * o.rep
    o.us = o.pay - P.b * effort
    o.uo = ben - o.pay
    if verified:
        o.uo = o.uo - P.C
    return o


cdef inline Params _params(tuple params):
    cdef Params P
    P.b, P.x_bar, P.delta, P.C, P.h, P.gamma, P.omega = params
    return P


cdef void _tree(const Params* P, double s1, double x1, double q1, double p1,
                const double* s2, const double* x2, const double* q2, const double* p2,
                double* out_s, double* out_o) noexcept nogil:
    cdef double acc_s = 0.0, acc_o = 0.0, pr1, pr2, pr, qq, pp
    cdef int i, j
    cdef bint t1, v1, t2, v2
    cdef Outcome o1, o2
    for i in range(4):
        t1 = i < 2
        v1 = i % 2 == 0
        pr1 = (q1 if t1 else 1.0 - q1) * (p1 if v1 else 1.0 - p1)
        o1 = _stage(P, 1, 0.0, x1, s1, t1, v1)
        qq = q2[i]
        pp = p2[i]
        for j in range(4):
            t2 = j < 2
            v2 = j % 2 == 0
            pr2 = (qq if t2 else 1.0 - qq) * (pp if v2 else 1.0 - pp)
            o2 = _stage(P, 2, o1.rep, x2[i], s2[i], t2, v2)
            pr = pr1 * pr2
            acc_s += pr * (o1.us + P.delta * o2.us)
            acc_o += pr * (o1.uo + P.delta * o2.uo)
    out_s[0] = acc_s
    out_o[0] = acc_o


def tree_payoffs(tuple params, double s1, double x1, double q1, double p1, s2, x2, q2, p2):
    cdef Params P = _params(params)
    cdef double[4] a_s2, a_x2, a_q2, a_p2
    cdef double rs, ro
    cdef int i
    for i in range(4):
        a_s2[i] = s2[i]
        a_x2[i] = x2[i]
        a_q2[i] = q2[i]
        a_p2[i] = p2[i]
    _tree(&P, s1, x1, q1, p1, a_s2, a_x2, a_q2, a_p2, &rs, &ro)
    return rs, ro


def tree_payoffs_batch(tuple params, s1, x1, q1, p1, s2, x2, q2, p2):
    cdef Params P = _params(params)
    cdef const double[::1] v_s1 = np.ascontiguousarray(s1, dtype=np.float64)
    cdef const double[::1] v_x1 = np.ascontiguousarray(x1, dtype=np.float64)
    cdef const double[::1] v_q1 = np.ascontiguousarray(q1, dtype=np.float64)
    cdef const double[::1] v_p1 = np.ascontiguousarray(p1, dtype=np.float64)
    cdef const double[:, ::1] v_s2 = np.ascontiguousarray(s2, dtype=np.float64)
    cdef const double[:, ::1] v_x2 = np.ascontiguousarray(x2, dtype=np.float64)
    cdef const double[:, ::1] v_q2 = np.ascontiguousarray(q2, dtype=np.float64)
    cdef const double[:, ::1] v_p2 = np.ascontiguousarray(p2, dtype=np.float64)
    cdef Py_ssize_t n = v_x1.shape[0], r
    if v_s2.shape[1] != 4 or v_x2.shape[1] != 4 or v_q2.shape[1] != 4 or v_p2.shape[1] != 4:
        raise ValueError("stage-2 arrays must have shape (n, 4)")
    out_s = np.empty(n)
    out_o = np.empty(n)
    cdef double[::1] w_s = out_s
    cdef double[::1] w_o = out_o
    with nogil:
        for r in range(n):
            _tree(&P, v_s1[r], v_x1[r], v_q1[r], v_p1[r],
                  &v_s2[r, 0], &v_x2[r, 0], &v_q2[r, 0], &v_p2[r, 0], &w_s[r], &w_o[r])
    return out_s, out_o


def simulate_block(tuple params, double s1, double x1, double q1, double p1,
                   s2, x2, q2, p2, key, Py_ssize_t start, Py_ssize_t count):
    cdef Params P = _params(params)
    cdef double[4] a_s2, a_x2, a_q2, a_p2
    cdef int i
    for i in range(4):
        a_s2[i] = s2[i]
        a_x2[i] = x2[i]
        a_q2[i] = q2[i]
        a_p2[i] = p2[i]
    cdef uint64_t k = <uint64_t>key
    us = np.empty(count)
    uo = np.empty(count)
    events = np.zeros((count, 4), dtype=np.uint8)
    cdef double[::1] w_s = us
    cdef double[::1] w_o = uo
    cdef uint8_t[:, ::1] w_e = events
    cdef Py_ssize_t e
    cdef uint64_t base
    cdef bint t1, v1, t2, v2
    cdef Outcome o1, o2
    with nogil:
        for e in range(count):
            base = 4 * <uint64_t>(start + e)
            t1 = _uniform(k, base) < q1
            v1 = _uniform(k, base + 1) < p1
            i = (0 if t1 else 2) + (0 if v1 else 1)
            t2 = _uniform(k, base + 2) < a_q2[i]
            v2 = _uniform(k, base + 3) < a_p2[i]
            o1 = _stage(&P, 1, 0.0, x1, s1, t1, v1)
            o2 = _stage(&P, 2, o1.rep, a_x2[i], a_s2[i], t2, v2)
            w_s[e] = o1.us + P.delta * o2.us
            w_o[e] = o1.uo + P.delta * o2.uo
            w_e[e, 0] = t1
            w_e[e, 1] = v1
            w_e[e, 2] = t2
            w_e[e, 3] = v2
    return us, uo, events
