"""Finite covers of bounded Lipschitz functions on a Gaussian ball.

A cover element is stored as integer units on a net of the ball of radius
sqrt(ell) log(100/delta); its value at a net point is units * delta/100.
Evaluation off the net uses the nearest net point (first in lexicographic
order on ties) and returns 0 outside the ball. Net points come from a
greedy packing of a cubic candidate grid with spacing delta/(2L), where
L = 2 c / sqrt(t).

Enumeration keeps every assignment that is 2L-Lipschitz across all pairs
of net points. For ell = 1 the count is computed exactly by dynamic
programming; for larger ell only an upper bound is reported.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .errors import CoverTooLarge, InvalidArgument

DEFAULT_COVER_CAP = 10 ** 6
NET_POINT_CAP = 200_000


@dataclass
class CoverNet:
    ell: int
    t: float
    delta: float
    c: float
    L: float
    radius: float
    sep: float
    points: np.ndarray  # (M, ell), lexicographic order

    @property
    def quantum(self) -> float:
        return self.delta / 100.0

    @property
    def max_units(self) -> int:
        return int(math.floor(100.0 / self.delta + 1e-9))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def allowed_jump(self, dist) -> np.ndarray:
        """Largest unit difference allowed between net points ``dist`` apart."""
        return np.floor(2.0 * self.L * np.asarray(dist) / self.quantum + 1e-9).astype(np.int64)

    def describe(self) -> dict:
        return {"ell": self.ell, "t": self.t, "delta": self.delta, "c": self.c, "L": self.L,
                "radius": self.radius, "sep": self.sep, "net_points": self.size}


def _candidate_grid(ell, radius, spacing):
    m = int(math.floor(radius / spacing + 1e-12))
    axis = np.arange(-m, m + 1) * spacing
    if ell == 0:
        return np.zeros((1, 0))
    grid = np.array(list(itertools.product(axis, repeat=ell)), dtype=np.float64)
    keep = np.sum(grid * grid, axis=1) <= radius * radius * (1 + 1e-12)
    return grid[keep]


def build_net(ell, t, delta, c=1.0) -> CoverNet:
    if int(ell) != ell or ell < 0:
        raise InvalidArgument("ell must be a nonnegative integer")
    if not t > 0 or not 0 < delta < 1 or not c > 0:
        raise InvalidArgument("need t > 0, 0 < delta < 1, c > 0")
    L = 2.0 * c / math.sqrt(t)
    radius = math.sqrt(ell) * math.log(100.0 / delta)
    sep = delta / (2.0 * L)
    if ell > 0:
        approx = (2 * radius / sep + 1) ** ell
        if approx > NET_POINT_CAP:
            raise CoverTooLarge(f"net of about {approx:.3g} points", NET_POINT_CAP)
    cand = _candidate_grid(int(ell), radius, sep)
    # grid neighbours can sit a few ulps closer than sep; don't let rounding drop them
    idx = kernels.greedy_packing(cand, sep * (1 - 1e-9)) if ell > 0 else np.array([0])
    return CoverNet(int(ell), float(t), float(delta), float(c), L, radius, sep, cand[idx])


class CoverFunction:
    """Piecewise-constant hypothesis on R^ell defined by net values."""

    def __init__(self, net: CoverNet, units):
        self.net = net
        self.units = np.asarray(units, dtype=np.int64)
        if self.units.shape != (net.size,):
            raise InvalidArgument("need one unit value per net point")
        if np.any(np.abs(self.units) > net.max_units):
            raise InvalidArgument("values must lie in [-1, 1]")

    @property
    def dim(self):
        return self.net.ell

    @property
    def values(self) -> np.ndarray:
        return self.units * self.net.quantum

    def __call__(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        if self.net.ell == 0:
            return np.full(Z.shape[0] if Z.ndim else 1, self.values[0])
        Z = Z.reshape(-1, self.net.ell)
        out = np.zeros(Z.shape[0])
        inside = np.sum(Z * Z, axis=1) <= self.net.radius ** 2
        if np.any(inside):
            out[inside] = self.values[kernels.nearest_index(self.net.points, Z[inside])]
        return out

    def is_lipschitz(self) -> bool:
        """Check the 2L-Lipschitz condition on every pair of net points."""
        P = self.net.points
        for i in range(P.shape[0] - 1):
            d = np.sqrt(np.sum((P[i + 1:] - P[i]) ** 2, axis=1))
            if np.any(np.abs(self.units[i + 1:] - self.units[i]) > self.net.allowed_jump(d)):
                return False
        return True

    def describe(self) -> dict:
        return {"kind": "cover", "net": self.net.describe(), "units": self.units.tolist()}


class Cover:
    """Lazily enumerated set of :class:`CoverFunction` on one net."""

    def __init__(self, net: CoverNet):
        self.net = net
        if net.ell == 1 and net.size > 1:
            gaps = np.diff(net.points[:, 0])
            self._jumps = net.allowed_jump(gaps)
        else:
            self._jumps = None

    # -- size ---------------------------------------------------------------
    def count(self) -> Optional[int]:
        """Exact number of elements for ell <= 1, None otherwise."""
        K = self.net.max_units
        width = 2 * K + 1
        if self.net.ell == 0 or self.net.size == 1:
            return width
        if self.net.ell != 1:
            return None
        cur = [1] * width
        for jump in self._jumps:
            prefix = [0]
            for v in cur:
                prefix.append(prefix[-1] + v)
            j = int(jump)
            cur = [prefix[min(width, u + j + 1)] - prefix[max(0, u - j)] for u in range(width)]
        return sum(cur)

    def log_size(self) -> float:
        """Natural log of the size (exact for ell <= 1, an upper bound otherwise)."""
        n = self.count()
        if n is not None:
            return math.log(n)
        return self.net.size * math.log(2 * self.net.max_units + 1)

    def size_estimate(self):
        n = self.count()
        return n if n is not None else f"exp({self.log_size():.4g})"

    # -- enumeration ---------------------------------------------------------
    def __iter__(self) -> Iterator[CoverFunction]:
        K = self.net.max_units
        M = self.net.size
        P = self.net.points
        units = np.zeros(M, dtype=np.int64)

        def bounds(i):
            lo, hi = -K, K
            if i == 0:
                return lo, hi
            d = np.sqrt(np.sum((P[:i] - P[i]) ** 2, axis=1))
            jump = self.net.allowed_jump(d)
            lo = max(lo, int(np.max(units[:i] - jump)))
            hi = min(hi, int(np.min(units[:i] + jump)))
            return lo, hi

        # iterative depth-first search in lexicographic order
        stack = [(0, *bounds(0))]
        while stack:
            i, lo, hi = stack.pop()
            if lo > hi:
                continue
            units[i] = lo
            if lo < hi:
                stack.append((i, lo + 1, hi))
            if i == M - 1:
                yield CoverFunction(self.net, units.copy())
            else:
                stack.append((i + 1, *bounds(i + 1)))

    def sample(self, rng: np.random.Generator) -> CoverFunction:
        """Uniformly random element (ell <= 1), via a backward log-count table."""
        K = self.net.max_units
        width = 2 * K + 1
        M = self.net.size
        if self.net.ell > 1:
            raise InvalidArgument("uniform sampling implemented for ell <= 1 only")
        if M == 1:
            return CoverFunction(self.net, [int(rng.integers(-K, K + 1))])
        # logc[i][u]: log number of completions of positions i.. given value u at i
        logc = np.zeros((M, width))
        for i in range(M - 2, -1, -1):
            j = int(self._jumps[i])
            nxt = logc[i + 1]
            mx = nxt.max()
            cs = np.concatenate([[0.0], np.cumsum(np.exp(nxt - mx))])
            u = np.arange(width)
            tot = cs[np.minimum(width, u + j + 1)] - cs[np.maximum(0, u - j)]
            logc[i] = np.log(tot) + mx
        units = np.empty(M, dtype=np.int64)
        p = np.exp(logc[0] - logc[0].max())
        units[0] = rng.choice(width, p=p / p.sum())
        for i in range(1, M):
            j = int(self._jumps[i - 1])
            lo, hi = max(0, units[i - 1] - j), min(width - 1, units[i - 1] + j)
            w = logc[i, lo:hi + 1]
            p = np.exp(w - w.max())
            units[i] = lo + rng.choice(hi - lo + 1, p=p / p.sum())
        return CoverFunction(self.net, units - K)

    def rounding_of(self, g) -> CoverFunction:
        """The element obtained by rounding g (callable on (m, ell) arrays) at net points."""
        vals = np.asarray(g(self.net.points), dtype=np.float64)
        units = np.clip(np.rint(vals / self.net.quantum), -self.net.max_units, self.net.max_units)
        return CoverFunction(self.net, units.astype(np.int64))


def log_count_bound(ell, t, delta, C=20.0) -> float:
    """(C sqrt(k) log^2(1/delta) / (delta sqrt(t)))^k with k = ell, natural logs."""
    return (C * math.sqrt(ell) * math.log(1.0 / delta) ** 2 / (delta * math.sqrt(t))) ** ell


def build_cover(ell, t, delta, c=1.0, cap: Optional[int] = DEFAULT_COVER_CAP) -> Cover:
    """Build the net and a lazy enumerator; refuse when the size exceeds ``cap``.

    ``cap=None`` disables the check (enumeration stays lazy).
    """
    net = build_net(ell, t, delta, c)
    cover = Cover(net)
    if cap is not None and cover.log_size() > math.log(cap):
        raise CoverTooLarge(cover.size_estimate(), cap)
    return cover
