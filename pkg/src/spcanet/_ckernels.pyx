# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels. See ``_pykernels`` for contracts."""
import numpy as np
cimport numpy as cnp
from libc.math cimport copysign, fabs, sqrt

cnp.import_array()


def soft_threshold(const double[:, ::1] b, double tau):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = b.shape[0], cols = b.shape[1]
    out = np.empty((rows, cols))
    cdef double[:, ::1] o = out
    cdef double v, r
    with nogil:
        for i in range(rows):
            for j in range(cols):
                v = b[i, j]
                r = fabs(v) - tau
                # "not r > 0" keeps NaN; +0 for a zero input matches sign(0) * 0
                if not r > 0 and r == r:
                    r = 0.0
                o[i, j] = copysign(r, v) if v != 0 else 0.0
    return out


def group_soft_threshold(const double[:, :] b, double tau):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = b.shape[0], cols = b.shape[1]
    out = np.zeros((rows, cols))
    cdef double[:, :] o = out
    cdef double norm, factor
    with nogil:
        for i in range(rows):
            norm = 0.0
            for j in range(cols):
                norm += b[i, j] * b[i, j]
            norm = sqrt(norm)
            if norm > tau:
                factor = (norm - tau) / norm
                for j in range(cols):
                    o[i, j] = b[i, j] * factor
            elif norm != norm:
                for j in range(cols):
                    o[i, j] = norm
    return out


def dual_ascent(const double[:, :] dual, const double[:, :] x,
                const double[:, :] aux, double step):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    out = np.empty((rows, cols))
    cdef double[:, :] o = out
    cdef double diff, acc = 0.0
    with nogil:
        for i in range(rows):
            for j in range(cols):
                diff = x[i, j] - aux[i, j]
                o[i, j] = dual[i, j] + step * diff
                acc += diff * diff
    return out, sqrt(acc)


def assign_labels(const double[:, :] samples, const double[:, :] centroids):
    cdef Py_ssize_t i, j, t
    cdef Py_ssize_t n = samples.shape[0], h = samples.shape[1]
    cdef Py_ssize_t c = centroids.shape[0]
    labels = np.empty(n, dtype=np.intp)
    dists = np.empty(n)
    cdef Py_ssize_t[:] lab = labels
    cdef double[:] dd = dists
    cdef double best, d, diff
    cdef Py_ssize_t arg
    with nogil:
        for i in range(n):
            best = 0.0
            arg = -1
            for j in range(c):
                d = 0.0
                for t in range(h):
                    diff = samples[i, t] - centroids[j, t]
                    d += diff * diff
                if arg < 0 or d < best:
                    best = d
                    arg = j
            lab[i] = arg
            dd[i] = best
    return labels, dists


def update_centroids(const double[:, :] samples, const Py_ssize_t[:] labels,
                     Py_ssize_t c):
    cdef Py_ssize_t i, j, t
    cdef Py_ssize_t n = samples.shape[0], h = samples.shape[1]
    centroids = np.zeros((c, h))
    counts = np.zeros(c, dtype=np.intp)
    cdef double[:, :] cen = centroids
    cdef Py_ssize_t[:] cnt = counts
    with nogil:
        for i in range(n):
            j = labels[i]
            cnt[j] += 1
            for t in range(h):
                cen[j, t] += samples[i, t]
        for j in range(c):
            if cnt[j] > 0:
                for t in range(h):
                    cen[j, t] = cen[j, t] / cnt[j]
    return centroids, counts


def contingency(const Py_ssize_t[:] truth, const Py_ssize_t[:] pred,
                Py_ssize_t n_truth, Py_ssize_t n_pred):
    cdef Py_ssize_t i
    table = np.zeros((n_truth, n_pred), dtype=np.int64)
    cdef cnp.int64_t[:, :] tab = table
    with nogil:
        for i in range(truth.shape[0]):
            tab[truth[i], pred[i]] += 1
    return table
