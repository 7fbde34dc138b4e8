"""Pure-Python reference implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation so both backends
produce the same numbers (up to floating-point reassociation in BLAS-free
loops, which we avoid).
"""
import math

import numpy as np


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(w, v, sweeps)`` with unsorted eigenvalues ``w`` and
    eigenvectors in the columns of ``v``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    m = a.shape[0]
    v = np.eye(m)
    fro = math.sqrt(float(np.sum(a * a)))
    target = tol * fro
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = 0.0
        for p in range(m):
            for q in range(p + 1, m):
                off += a[p, q] * a[p, q]
        off = math.sqrt(2.0 * off)
        if off <= target:
            sweeps -= 1
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:  # theta^2 would overflow
                    t = 0.5 / abs(theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # rotate columns p, q then rows p, q
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps


def nearest_index(net, queries):
    """Index of the nearest net point for each query (first index wins ties)."""
    net = np.ascontiguousarray(net, dtype=np.float64)
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    out = np.empty(queries.shape[0], dtype=np.int64)
    chunk = max(1, 2_000_000 // max(1, net.shape[0]))
    for start in range(0, queries.shape[0], chunk):
        qb = queries[start:start + chunk]
        d2 = np.zeros((qb.shape[0], net.shape[0]))
        # accumulate coordinate by coordinate, same order as the C loop
        for j in range(net.shape[1]):
            diff = qb[:, j:j + 1] - net[None, :, j]
            d2 += diff * diff
        out[start:start + chunk] = np.argmin(d2, axis=1)
    return out


def greedy_packing(candidates, sep):
    """Greedily keep candidates at distance >= sep from all kept ones.

    Candidates are scanned in the given order; returns kept indices.
    """
    cand = np.ascontiguousarray(candidates, dtype=np.float64)
    sep2 = sep * sep
    kept = []
    kept_pts = np.empty((0, cand.shape[1]))
    for i in range(cand.shape[0]):
        if kept:
            d2 = np.zeros(len(kept))
            for j in range(cand.shape[1]):
                diff = kept_pts[:, j] - cand[i, j]
                d2 += diff * diff
            if np.min(d2) < sep2:
                continue
        kept.append(i)
        kept_pts = np.vstack([kept_pts, cand[i:i + 1]])
    return np.asarray(kept, dtype=np.int64)
