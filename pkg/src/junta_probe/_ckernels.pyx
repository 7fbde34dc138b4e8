# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see ``_pykernels`` for docs)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigh(a, double tol=1e-12, int max_sweeps=100):
    cdef cnp.ndarray[double, ndim=2] A = np.array(a, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t m = A.shape[0]
    cdef cnp.ndarray[double, ndim=2] V = np.eye(m)
    cdef double[:, ::1] av = A
    cdef double[:, ::1] vv = V
    cdef Py_ssize_t p, q, i
    cdef double fro = 0.0, off, target, apq, theta, t, c, s, x, y
    cdef int sweeps = 0, sw
    for p in range(m):
        for q in range(m):
            fro += av[p, q] * av[p, q]
    target = tol * sqrt(fro)
    for sw in range(1, max_sweeps + 1):
        sweeps = sw
        off = 0.0
        for p in range(m):
            for q in range(p + 1, m):
                off += av[p, q] * av[p, q]
        off = sqrt(2.0 * off)
        if off <= target:
            sweeps = sw - 1
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = av[p, q]
                if apq == 0.0:
                    continue
                theta = (av[q, q] - av[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:  # theta^2 would overflow
                    t = 0.5 / fabs(theta)
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for i in range(m):
                    x = av[i, p]
                    y = av[i, q]
                    av[i, p] = c * x - s * y
                    av[i, q] = s * x + c * y
                for i in range(m):
                    x = av[p, i]
                    y = av[q, i]
                    av[p, i] = c * x - s * y
                    av[q, i] = s * x + c * y
                av[p, q] = 0.0
                av[q, p] = 0.0
                for i in range(m):
                    x = vv[i, p]
                    y = vv[i, q]
                    vv[i, p] = c * x - s * y
                    vv[i, q] = s * x + c * y
    return np.diag(A).copy(), V, sweeps


def nearest_index(net, queries):
    cdef double[:, ::1] P = np.ascontiguousarray(net, dtype=np.float64)
    cdef double[:, ::1] Q = np.ascontiguousarray(queries, dtype=np.float64)
    cdef Py_ssize_t nq = Q.shape[0], npt = P.shape[0], dim = P.shape[1]
    out = np.empty(nq, dtype=np.int64)
    cdef long long[::1] ov = out
    cdef Py_ssize_t i, j, d, best
    cdef double bd, d2, diff
    for i in range(nq):
        best = 0
        bd = 0.0
        for j in range(npt):
            d2 = 0.0
            for d in range(dim):
                diff = Q[i, d] - P[j, d]
                d2 += diff * diff
            if j == 0 or d2 < bd:
                bd = d2
                best = j
        ov[i] = best
    return out


def greedy_packing(candidates, double sep):
    cdef double[:, ::1] C = np.ascontiguousarray(candidates, dtype=np.float64)
    cdef Py_ssize_t n = C.shape[0], dim = C.shape[1]
    kept_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] kept = kept_arr
    cdef Py_ssize_t nk = 0, i, j, d
    cdef double sep2 = sep * sep, d2, diff
    cdef bint ok
    for i in range(n):
        ok = True
        for j in range(nk):
            d2 = 0.0
            for d in range(dim):
                diff = C[kept[j], d] - C[i, d]
                d2 += diff * diff
            if d2 < sep2:
                ok = False
                break
        if ok:
            kept[nk] = i
            nk += 1
    return kept_arr[:nk].copy()
