"""Explicit hypothesis families on R^ell and class checkers.

A hypothesis is a callable on (m, d) arrays. When it is evaluated on
fewer than d columns the missing coordinates are read as 0, and extra
columns are ignored, which is how a family for one dimension is applied
when the learner finds a different number of directions.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm

from .errors import InvalidArgument
from .oracle import sign


def _columns(Z, d):
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None] if d else Z.reshape(-1, 0)
    if Z.shape[1] >= d:
        return Z[:, :d]
    return np.hstack([Z, np.zeros((Z.shape[0], d - Z.shape[1]))])


class Hypothesis:
    dim = 0

    def __call__(self, Z):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class ConstantHypothesis(Hypothesis):
    dim = 0

    def __init__(self, c):
        self.c = float(c)

    def __call__(self, Z):
        return np.full(np.asarray(Z).shape[0], self.c)

    def describe(self):
        return {"kind": "constant", "c": self.c}


class ThresholdHypothesis(Hypothesis):
    """polarity * sign(z_1 - theta)."""

    dim = 1

    def __init__(self, theta, polarity=1.0):
        self.theta = float(theta)
        self.polarity = float(polarity)

    def __call__(self, Z):
        return self.polarity * sign(_columns(Z, 1)[:, 0] - self.theta)

    def describe(self):
        return {"kind": "threshold", "theta": self.theta, "polarity": self.polarity}


class IntersectionHypothesis(Hypothesis):
    """+1 iff z_1 >= theta_1 and z_2 >= theta_2, else -1."""

    dim = 2

    def __init__(self, theta1, theta2):
        self.theta1, self.theta2 = float(theta1), float(theta2)

    def __call__(self, Z):
        Z = _columns(Z, 2)
        return np.where((Z[:, 0] >= self.theta1) & (Z[:, 1] >= self.theta2), 1.0, -1.0)

    def describe(self):
        return {"kind": "intersection", "theta1": self.theta1, "theta2": self.theta2}


def thresholds(count, lo=-3.0, hi=3.0, signed=False):
    out = [ThresholdHypothesis(th) for th in np.linspace(lo, hi, count)]
    if signed:
        out += [ThresholdHypothesis(th, -1.0) for th in np.linspace(lo, hi, count)]
    return out


def parse_family(spec: str):
    """'thresholds:N', 'signed-thresholds:N', 'intersections:G' or 'constants'."""
    name, _, arg = spec.partition(":")
    if name == "constants":
        return [ConstantHypothesis(c) for c in (-1.0, 0.0, 1.0)]
    if name in ("thresholds", "signed-thresholds"):
        n = int(arg or 200)
        if n < 1:
            raise InvalidArgument("need at least one threshold")
        return thresholds(n, signed=(name == "signed-thresholds"))
    if name == "intersections":
        g = int(arg or 15)
        grid = np.linspace(-2.0, 2.0, g)
        return [IntersectionHypothesis(a, b) for a in grid for b in grid]
    raise InvalidArgument(f"unknown hypothesis family {spec!r}")


class ThresholdClassChecker:
    """Decides whether an explicit g on R^k is eps-close to some w-threshold.

    The class is {sign(<w, z> - theta)} over unit w (both orientations),
    which is what linear invariance makes of one-dimensional thresholds.
    For k = 1 the distance E|g - h| is computed by Gaussian quadrature on a
    fine grid; for k > 1 by Monte Carlo over a direction set. No oracle is
    involved at any point.
    """

    def __init__(self, grid_points=4001, thetas=None, directions=256, mc_points=20000, seed=0):
        self.grid = np.linspace(-6.0, 6.0, grid_points)
        w = norm.pdf(self.grid)
        self.weights = w / w.sum()
        self.thetas = np.linspace(-4.0, 4.0, 801) if thetas is None else np.asarray(thetas)
        self.directions = directions
        self.mc_points = mc_points
        self.seed = seed

    def distance(self, g, k):
        if k <= 1:
            vals = np.asarray(g(self.grid[:, None]), dtype=np.float64)
            return self._best_1d(vals, self.grid, self.weights)
        rng = np.random.default_rng(self.seed)
        Z = rng.standard_normal((self.mc_points, k))
        vals = np.asarray(g(Z), dtype=np.float64)
        W = rng.standard_normal((self.directions, k))
        W = np.vstack([np.eye(k), W / np.linalg.norm(W, axis=1, keepdims=True)])
        wts = np.full(self.mc_points, 1.0 / self.mc_points)
        return min(self._best_1d(vals, Z @ w, wts) for w in W)

    def _best_1d(self, vals, proj, weights):
        order = np.argsort(proj, kind="stable")
        p, v, w = proj[order], vals[order], weights[order]
        # cost below theta uses h = -pol, at or above theta uses h = +pol
        lo_plus = np.concatenate([[0.0], np.cumsum(w * np.abs(v + 1.0))])
        lo_minus = np.concatenate([[0.0], np.cumsum(w * np.abs(v - 1.0))])
        cut = np.searchsorted(p, self.thetas, side="left")
        pos = lo_plus[cut] + (lo_minus[-1] - lo_minus[cut])
        neg = lo_minus[cut] + (lo_plus[-1] - lo_plus[cut])
        return float(min(pos.min(), neg.min()))

    def __call__(self, g, k, eps):
        d = self.distance(g, k)
        return d <= eps, d
