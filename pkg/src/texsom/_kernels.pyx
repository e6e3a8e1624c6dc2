# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: co-occurrence counting, BMU search, SOM/iSOM steps.

Every routine here has a numpy twin in ``_pykernels`` that performs the same
floating point operations in the same order, so both backends produce
bit-identical weights.
"""
import numpy as np

from libc.math cimport INFINITY
from libc.stdint cimport int64_t


def glcm_counts(const int64_t[:, ::1] q, Py_ssize_t levels, Py_ssize_t dr, Py_ssize_t dc):
    cdef Py_ssize_t h = q.shape[0], w = q.shape[1]
    cdef Py_ssize_t r0 = max(0, -dr), r1 = min(h, h - dr)
    cdef Py_ssize_t c0 = max(0, -dc), c1 = min(w, w - dc)
    cdef Py_ssize_t r, c
    out = np.zeros((levels, levels), dtype=np.int64)
    cdef int64_t[:, ::1] counts = out
    for r in range(r0, r1):
        for c in range(c0, c1):
            counts[q[r, c], q[r + dr, c + dc]] += 1
    return out


cdef inline Py_ssize_t _bmu(const double[:, ::1] W, const double[::1] x, double *dist) noexcept nogil:
    cdef Py_ssize_t n_nodes = W.shape[0], dim = W.shape[1]
    cdef Py_ssize_t i, k, best_i = 0
    cdef double best = INFINITY, d, diff
    for i in range(n_nodes):
        d = 0.0
        for k in range(dim):
            diff = W[i, k] - x[k]
            d = d + diff * diff
        if d < best:
            best = d
            best_i = i
    dist[0] = best
    return best_i


cdef inline void _pull(double[:, ::1] W, const double[::1] x, Py_ssize_t i, double coef) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(W.shape[1]):
        W[i, k] = W[i, k] + coef * (x[k] - W[i, k])


def bmu(const double[:, ::1] W, const double[::1] x):
    cdef double d
    cdef Py_ssize_t b = _bmu(W, x, &d)
    return b, d


cdef Py_ssize_t _som_step(double[:, ::1] W, const double[::1] x, const double[:, ::1] H,
                          double cutoff, double eta) noexcept nogil:
    cdef double d, hb
    cdef Py_ssize_t b = _bmu(W, x, &d)
    cdef Py_ssize_t i, n = 0
    for i in range(W.shape[0]):
        hb = H[b, i]
        if hb >= cutoff:
            _pull(W, x, i, eta * hb)
            n += 1
    return n


def som_step(double[:, ::1] W, const double[::1] x, const double[:, ::1] H,
             double cutoff, double eta):
    cdef double d
    cdef Py_ssize_t b = _bmu(W, x, &d)
    cdef Py_ssize_t n = _som_step(W, x, H, cutoff, eta)
    return b, n


def som_epoch(double[:, ::1] W, const double[:, ::1] X, const int64_t[::1] order,
              const double[:, ::1] H, double cutoff, double eta):
    cdef Py_ssize_t s, total = 0
    with nogil:
        for s in range(order.shape[0]):
            total += _som_step(W, X[order[s]], H, cutoff, eta)
    return total


cdef inline bint _eligible(const int64_t[:, ::1] wcc, Py_ssize_t i,
                           const int64_t[::1] target, Py_ssize_t n_target) noexcept nogil:
    cdef Py_ssize_t j, m = wcc.shape[1]
    cdef int64_t top = wcc[i, 0]
    for j in range(1, m):
        if wcc[i, j] > top:
            top = wcc[i, j]
    for j in range(n_target):
        if wcc[i, target[j]] == top:
            return True
    return False


cdef Py_ssize_t _isom_step(double[:, ::1] W, int64_t[:, ::1] wcc, const double[::1] x,
                           Py_ssize_t c, const double[:, ::1] H, double cutoff, double eta,
                           bint match_bmu, bint inc_selected,
                           int64_t[::1] sel, int64_t[::1] target, Py_ssize_t *bmu_out) noexcept nogil:
    cdef double d
    cdef Py_ssize_t b = _bmu(W, x, &d)
    cdef Py_ssize_t i, j, m = wcc.shape[1], n_target = 0, n_sel = 0
    cdef int64_t top
    bmu_out[0] = b
    if match_bmu:
        top = wcc[b, 0]
        for j in range(1, m):
            if wcc[b, j] > top:
                top = wcc[b, j]
        if top > 0:
            for j in range(m):
                if wcc[b, j] == top:
                    target[n_target] = j
                    n_target += 1
    if n_target == 0:
        target[0] = c
        n_target = 1
    # vote first, then move: eligibility uses counters from before this instance
    for i in range(W.shape[0]):
        if i != b and H[b, i] >= cutoff and _eligible(wcc, i, target, n_target):
            sel[n_sel] = i
            n_sel += 1
    _pull(W, x, b, eta * H[b, b])
    wcc[b, c] += 1
    for j in range(n_sel):
        i = sel[j]
        _pull(W, x, i, eta * H[b, i])
        if inc_selected:
            wcc[i, c] += 1
    return n_sel


def isom_step(double[:, ::1] W, int64_t[:, ::1] wcc, const double[::1] x, Py_ssize_t c,
              const double[:, ::1] H, double cutoff, double eta,
              bint match_bmu, bint inc_selected):
    """One constrained update; returns (bmu, array of selected neighbours)."""
    sel = np.empty(W.shape[0], dtype=np.int64)
    target = np.empty(wcc.shape[1], dtype=np.int64)
    cdef Py_ssize_t b
    cdef Py_ssize_t n = _isom_step(W, wcc, x, c, H, cutoff, eta, match_bmu, inc_selected,
                                   sel, target, &b)
    return b, sel[:n].copy()


def isom_epoch(double[:, ::1] W, int64_t[:, ::1] wcc, const double[:, ::1] X,
               const int64_t[::1] y, const int64_t[::1] order,
               const double[:, ::1] H, double cutoff, double eta,
               bint match_bmu, bint inc_selected):
    sel_arr = np.empty(W.shape[0], dtype=np.int64)
    target_arr = np.empty(wcc.shape[1], dtype=np.int64)
    cdef int64_t[::1] sel = sel_arr
    cdef int64_t[::1] target = target_arr
    cdef Py_ssize_t s, k, b, n, updates = 0, increments = 0
    with nogil:
        for s in range(order.shape[0]):
            k = order[s]
            n = _isom_step(W, wcc, X[k], y[k], H, cutoff, eta, match_bmu, inc_selected,
                           sel, target, &b)
            updates += 1 + n
            increments += 1 + (n if inc_selected else 0)
    return updates, increments
