# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_purekernels``.

Same signatures and semantics; see that module for the layout convention.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, log2

cnp.import_array()

NAME = "compiled"

cdef double INV_LN2 = 1.4426950408889634


def ic_value(const double[::1] q, Py_ssize_t n0, Py_ssize_t n1, Py_ssize_t n2):
    cdef Py_ssize_t k = n1 * n2, n = n0 * k
    cdef Py_ssize_t b, i, t
    cdef double total = 0.0, s, v
    for b in range(n0):
        s = 0.0
        for i in range(b * k, (b + 1) * k):
            v = q[i]
            s += v
            if v > 0.0:
                total += v * log2(v)
        if s > 0.0:
            total -= s * log2(s)
    for t in range(n2):
        s = 0.0
        for i in range(t, n, n2):
            s += q[i]
        if s > 0.0:
            total -= s * log2(s)
    return total


def ic_and_grad(const double[::1] q, Py_ssize_t n0, Py_ssize_t n1, Py_ssize_t n2):
    cdef Py_ssize_t k = n1 * n2, n = n0 * k
    cdef Py_ssize_t b, i, t, j
    cdef double total = 0.0, acc, v
    grad_arr = np.empty(n, dtype=np.float64)
    log_s_arr = np.empty(n0, dtype=np.float64)
    log_t_arr = np.empty(n2, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double[::1] log_s = log_s_arr
    cdef double[::1] log_t = log_t_arr

    for b in range(n0):
        acc = 0.0
        for i in range(b * k, (b + 1) * k):
            acc += q[i]
        log_s[b] = log2(acc)
        total -= acc * log_s[b]
    for t in range(n2):
        acc = 0.0
        for i in range(t, n, n2):
            acc += q[i]
        log_t[t] = log2(acc)
        total -= acc * log_t[t]
    for b in range(n0):
        for j in range(k):
            i = b * k + j
            v = log2(q[i])
            total += q[i] * v
            grad[i] = v - log_s[b] - log_t[j % n2] - INV_LN2
    return total, grad_arr


def ba_step(const double[::1] q, const double[::1] w_scaled, const double[::1] alpha,
            const double[::1] log_alpha, double floor, Py_ssize_t n0,
            Py_ssize_t n1, Py_ssize_t n2, double[::1] q_out):
    cdef Py_ssize_t k = n1 * n2, n = n0 * k
    cdef Py_ssize_t b, i, t, j
    cdef double m, acc, v, scale, delta = 0.0
    log_t_arr = np.empty(n2, dtype=np.float64)
    s_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] log_t = log_t_arr
    cdef double[::1] s = s_arr

    for t in range(n2):
        acc = 0.0
        for i in range(t, n, n2):
            acc += q[i]
        log_t[t] = log(acc)

    for b in range(n0):
        m = -1e308
        for j in range(k):
            v = log_t[j % n2] + w_scaled[b * k + j]
            s[j] = v
            if v > m:
                m = v
        acc = 0.0
        for j in range(k):
            acc += exp(s[j] - m)
        m += log(acc)
        acc = 0.0
        for j in range(k):
            v = exp(log_alpha[b] + s[j] - m)
            if v < floor:
                v = floor
            q_out[b * k + j] = v
            acc += v
        scale = alpha[b] / acc
        for j in range(k):
            i = b * k + j
            q_out[i] *= scale
            v = fabs(q_out[i] - q[i])
            if v > delta:
                delta = v
    return delta


def scan_block(const double[::1] t_partial, double pv, double hp,
               const double[::1] cand_v, const double[:, ::1] cand_m, const double[::1] cand_h,
               double alpha_b, double incumbent, double feas_eps):
    cdef Py_ssize_t n2 = t_partial.shape[0]
    cdef Py_ssize_t c, t
    cdef double val, h, tv
    # candidates arrive value-descending, so the first feasible improver wins
    for c in range(cand_v.shape[0]):
        val = pv + alpha_b * cand_v[c]
        if val <= incumbent:
            break
        h = 0.0
        for t in range(n2):
            tv = t_partial[t] + alpha_b * cand_m[c, t]
            if tv > 0.0:
                h -= tv * log2(tv)
        if h - (hp + alpha_b * cand_h[c]) <= feas_eps:
            return c, val
    return -1, incumbent
