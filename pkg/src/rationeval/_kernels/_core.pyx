# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the hot kernels.

Mirrors ``_pure`` operation for operation (same bisection schedule, same
accumulation order) so results agree to floating-point noise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

BACKEND = "compiled"

cdef int _BISECT_ITERS = 50
cdef double _EPS = 1e-16


cdef inline double _kl_bernoulli(double p, double q) nogil:
    cdef double out = 0.0
    if q < _EPS:
        q = _EPS
    elif q > 1.0 - _EPS:
        q = 1.0 - _EPS
    if p > 0.0:
        out += p * log(p / q)
    if p < 1.0:
        out += (1.0 - p) * log((1.0 - p) / (1.0 - q))
    return out


def kl_bernoulli_bounds(successes, trials, beta):
    """Extreme q in [0, 1] with trials * KL(successes/trials || q) <= beta."""
    cdef double p = <double>successes / <double>trials
    cdef double target = <double>beta / <double>trials
    cdef double lo, hi, mid, lower, upper
    cdef int it

    if successes == 0:
        lower = 0.0
    else:
        lo = 0.0
        hi = p
        for it in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if _kl_bernoulli(p, mid) > target:
                lo = mid
            else:
                hi = mid
        lower = hi

    if successes == trials:
        upper = 1.0
    else:
        lo = p
        hi = 1.0
        for it in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if _kl_bernoulli(p, mid) > target:
                hi = mid
            else:
                lo = mid
        upper = lo

    return lower, upper


def nb_score_batch(indices, indptr, delta_ll, prior_delta):
    """Positive-class probability per document (CSR token-index layout)."""
    cdef cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.float64_t[::1] dll = np.ascontiguousarray(delta_ll, dtype=np.float64)
    cdef double pd = <double>prior_delta
    cdef Py_ssize_t n_docs = ptr.shape[0] - 1
    out_arr = np.empty(n_docs, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double score, e
    with nogil:
        for i in range(n_docs):
            score = pd
            for j in range(ptr[i], ptr[i + 1]):
                score += dll[idx[j]]
            if score >= 0.0:
                out[i] = 1.0 / (1.0 + exp(-score))
            else:
                e = exp(score)
                out[i] = e / (1.0 + e)
    return out_arr


def shapley_from_coalitions(values, d, weights):
    """Shapley values from the full 2^d table of coalition payoffs."""
    cdef cnp.float64_t[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.float64_t[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef int nd = <int>d
    cdef Py_ssize_t size = (<Py_ssize_t>1) << nd
    pc_arr = np.zeros(size, dtype=np.int64)
    cdef cnp.int64_t[::1] pc = pc_arr
    cdef Py_ssize_t i, s, half, bit
    for i in range(nd):
        half = (<Py_ssize_t>1) << i
        for s in range(half):
            pc[half + s] = pc[s] + 1
    phi_arr = np.empty(nd, dtype=np.float64)
    cdef cnp.float64_t[::1] phi = phi_arr
    cdef double acc
    with nogil:
        for i in range(nd):
            bit = (<Py_ssize_t>1) << i
            acc = 0.0
            for s in range(size):
                if not (s & bit):
                    acc += w[pc[s]] * (v[s | bit] - v[s])
            phi[i] = acc
    return phi_arr
