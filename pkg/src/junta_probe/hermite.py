"""Monte-Carlo estimators on Gaussian space.

All estimators share one engine: draw i.i.d. samples of a bounded random
variable whose mean is the target, group them into ``blocks`` blocks of
``batch`` samples, and return the median of the block means. Block sums
are accumulated with ``numpy.bincount`` in sample order, so the result is
a deterministic function of the sampler seed.

Notation: D(t) = e^{2t} - 1, sigma(t) = sqrt(1 - e^{-2t}) and
f_{t,y}(x) = f(e^{-t} y + sigma(t) x), whose degree-1 Hermite part equals
sqrt(D(t)) times the gradient of P_t f at y.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgument
from .oracle import FunctionOracle, GaussianSampler

CHUNK_ENTRIES = 1 << 21  # floats per chunk of Gaussian draws


def noise_scale(t: float) -> float:
    """sqrt(1 - e^{-2t}), accurate for tiny t."""
    return math.sqrt(-math.expm1(-2.0 * t))


def grad_scale(t: float) -> float:
    """D(t) = e^{2t} - 1."""
    return math.expm1(2.0 * t)


def _check_t(t):
    if not (isinstance(t, (int, float, np.floating)) and t > 0 and math.isfinite(t)):
        raise InvalidArgument(f"noise parameter t must be positive and finite, got {t!r}")


def _check_unit_interval(name, v):
    if not (0.0 < v < 1.0):
        raise InvalidArgument(f"{name} must lie in (0, 1), got {v!r}")


@dataclass(frozen=True)
class EstimatorConfig:
    """Accuracy/confidence request plus optional explicit sample sizes.

    When ``batch`` or ``blocks`` are None they follow the sizing rule
    blocks = 2*ceil(18 ln(1/delta)) + 1 and batch = ceil(2 W^2 / eps^2),
    W being the width of the per-sample value range. ``max_batch`` caps
    the derived batch (the practical preset uses it).
    """

    epsilon: float
    delta: float
    t: Optional[float] = None
    batch: Optional[int] = None
    blocks: Optional[int] = None
    max_batch: Optional[int] = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgument("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise InvalidArgument("delta must lie in (0, 1)")
        if self.t is not None:
            _check_t(self.t)
        if self.blocks is not None and (self.blocks < 1 or self.blocks % 2 == 0):
            raise InvalidArgument("blocks must be an odd positive integer")
        if self.batch is not None and self.batch < 1:
            raise InvalidArgument("batch must be positive")

    def sizing(self, value_width: float):
        blocks = self.blocks
        if blocks is None:
            blocks = 2 * math.ceil(18.0 * math.log(1.0 / self.delta)) + 1
        batch = self.batch
        if batch is None:
            batch = math.ceil(2.0 * value_width ** 2 / self.epsilon ** 2)
            if self.max_batch is not None:
                batch = min(batch, int(self.max_batch))
        return int(batch), int(blocks)

    def to_dict(self):
        return asdict(self)


@dataclass
class ScalarEstimate:
    value: float
    samples_used: int
    config: EstimatorConfig
    queries: int = 0

    def to_dict(self):
        return {"value": self.value, "samples_used": self.samples_used,
                "queries": self.queries, "config": self.config.to_dict()}


def _median_of_means(sample_fn, batch, blocks, dim):
    """sample_fn(m) -> m i.i.d. values; returns median of block means."""
    total = batch * blocks
    chunk = max(1, CHUNK_ENTRIES // max(1, 4 * dim))
    sums = np.zeros(blocks)
    for start in range(0, total, chunk):
        m = min(chunk, total - start)
        vals = sample_fn(m)
        idx = np.arange(start, start + m) // batch
        sums += np.bincount(idx, weights=vals, minlength=blocks)
    return float(np.median(sums / batch)), total


def _run(f, cfg, width, per_sample_queries, sample_fn):
    batch, blocks = cfg.sizing(width)
    before = f.ledger.total_queries
    value, total = _median_of_means(sample_fn, batch, blocks, f.dim)
    return ScalarEstimate(value, total, cfg, f.ledger.total_queries - before)


def _point(f, x, name="x"):
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != f.dim:
        raise InvalidArgument(f"{name} must have dimension {f.dim}")
    return x


# ---------------------------------------------------------------------------
# sample generators (shared by scalar and batched estimators)


def _smoothed_points(t, y, W):
    """e^{-t} y + sigma(t) W for rows W."""
    return math.exp(-t) * y + noise_scale(t) * W


def mean_samples(f, sampler, m):
    return f.evaluate_batch(sampler.normal((m, f.dim)))


def pt_samples(f, t, x, sampler, m):
    return f.evaluate_batch(_smoothed_points(t, x, sampler.normal((m, f.dim))))


def degree1_samples(f, eta, x, sampler, m, t=None, y=None):
    """(g(eta x + sigma z) - g(z)) / eta with g = f, or g = f_{t,y} when t is given.

    The same z appears in both terms, exactly as the J-estimator reuses its
    inner Gaussian; the expectation is (P g(x) - E g) / eta either way.
    """
    Z = sampler.normal((m, f.dim))
    A = eta * x + noise_scale(-math.log(eta)) * Z
    if t is not None:
        A = _smoothed_points(t, y, A)
        Z = _smoothed_points(t, y, Z)
    vals = f.evaluate_batch(np.concatenate([A, Z]))
    return (vals[:m] - vals[m:]) / eta


def j_samples(f, t, y1, y2, rho, sampler, m):
    """J-estimator samples for f_{t,y1}, f_{t,y2}, rescaled to gradient units."""
    n = f.dim
    X = sampler.normal((m, n))
    Y = sampler.normal((m, n))
    Z = sampler.normal((m, n))
    sr = math.sqrt(1.0 - rho * rho)
    pts = np.concatenate([
        _smoothed_points(t, y1, rho * X + sr * Y), _smoothed_points(t, y1, Y),
        _smoothed_points(t, y2, rho * X + sr * Z), _smoothed_points(t, y2, Z)])
    v = f.evaluate_batch(pts).reshape(4, m)
    return (v[0] - v[1]) * (v[2] - v[3]) / (rho * rho * grad_scale(t))


def ns_samples(f, t, sampler, m):
    X = sampler.normal((m, f.dim))
    Y = sampler.normal((m, f.dim))
    v = f.evaluate_batch(np.concatenate([X, _smoothed_points(t, X, Y)])).reshape(2, m)
    return (v[0] != v[1]).astype(np.float64)


# ---------------------------------------------------------------------------
# public scalar estimators


def estimate_mean(f: FunctionOracle, cfg: EstimatorConfig, sampler: GaussianSampler) -> ScalarEstimate:
    """E[f] under the standard Gaussian."""
    return _run(f, cfg, 2.0, 1, lambda m: mean_samples(f, sampler, m))


def estimate_pt(f, t, x, cfg, sampler) -> ScalarEstimate:
    """P_t f(x) = E_z f(e^{-t} x + sqrt(1 - e^{-2t}) z)."""
    _check_t(t)
    x = _point(f, x)
    return _run(f, cfg, 2.0, 1, lambda m: pt_samples(f, t, x, sampler, m))


def estimate_degree1_eval(f, eta, x, cfg, sampler) -> ScalarEstimate:
    """f_{d,eta}(x) = (P_t f(x) - E f) / eta with e^{-t} = eta.

    Close to the degree-1 Hermite part f_1(x) = <W_1(f), x> away from a
    set of small Gaussian measure (the error is of order eta).
    """
    _check_unit_interval("eta", eta)
    x = _point(f, x)
    return _run(f, cfg, 4.0 / eta, 2, lambda m: degree1_samples(f, eta, x, sampler, m))


def inner_rho(epsilon, t):
    """Inner correlation e^{-t'} = eps * D(t) / 2 of the J-estimator, capped at 1/2."""
    return min(0.5 * epsilon * grad_scale(t), 0.5)


def _canonical_pair(y1, y2):
    # order the anchors so that swapping arguments reproduces the same samples
    return (y1, y2) if tuple(y1) <= tuple(y2) else (y2, y1)


def estimate_grad_inner(f, t, y1, y2, cfg, sampler) -> ScalarEstimate:
    """<D P_t f(y1), D P_t f(y2)> via the J-estimator applied to f_{t,y1}, f_{t,y2}."""
    _check_t(t)
    y1, y2 = _canonical_pair(_point(f, y1, "y1"), _point(f, y2, "y2"))
    rho = inner_rho(cfg.epsilon, t)
    width = 8.0 / (rho * rho * grad_scale(t))
    return _run(f, cfg, width, 4, lambda m: j_samples(f, t, y1, y2, rho, sampler, m))


def estimate_directional_eval(f, t, y, x, xi, cfg, sampler) -> ScalarEstimate:
    """f_{d,xi,t,y}(x): the degree-1 evaluation of f_{t,y} at x, divided by sqrt(D(t)).

    Approximates <D P_t f(y), x>.
    """
    _check_t(t)
    _check_unit_interval("xi", xi)
    y = _point(f, y, "y")
    x = _point(f, x)
    scale = 1.0 / math.sqrt(grad_scale(t))
    width = 4.0 / xi * scale
    return _run(f, cfg, width, 2,
                lambda m: scale * degree1_samples(f, xi, x, sampler, m, t=t, y=y))


def estimate_noise_sensitivity(f, t, cfg, sampler) -> ScalarEstimate:
    """Pr[f(x) != f(e^{-t} x + sqrt(1 - e^{-2t}) y)]."""
    _check_t(t)
    return _run(f, cfg, 1.0, 2, lambda m: ns_samples(f, t, sampler, m))


# ---------------------------------------------------------------------------
# batched plain-mean estimators used by the learner


def _points_per_chunk(n, samples, factor=2):
    return max(1, CHUNK_ENTRIES // max(1, factor * n * samples))


def pt_many(f, t, X, samples, sampler):
    """Plain-mean estimates of P_t f at each row of X, ``samples`` draws each."""
    _check_t(t)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.empty(X.shape[0])
    step = _points_per_chunk(f.dim, samples, 1)
    for s in range(0, X.shape[0], step):
        Xb = X[s:s + step]
        Z = sampler.normal((Xb.shape[0], samples, f.dim))
        P = math.exp(-t) * Xb[:, None, :] + noise_scale(t) * Z
        v = f.evaluate_batch(P.reshape(-1, f.dim)).reshape(Xb.shape[0], samples)
        out[s:s + step] = v.mean(axis=1)
    return out


def directional_many(f, t, y, X, xi, samples, sampler):
    """Plain-mean estimates of f_{d,xi,t,y}(x) for each row x of X."""
    _check_t(t)
    _check_unit_interval("xi", xi)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = _point(f, y, "y")
    out = np.empty(X.shape[0])
    step = _points_per_chunk(f.dim, samples, 2)
    c, sd = math.exp(-t), noise_scale(t)
    s_xi = noise_scale(-math.log(xi))
    scale = 1.0 / (xi * math.sqrt(grad_scale(t)))
    for s in range(0, X.shape[0], step):
        Xb = X[s:s + step]
        p = Xb.shape[0]
        Z = sampler.normal((p, samples, f.dim))
        A = c * y + sd * (xi * Xb[:, None, :] + s_xi * Z)
        B = c * y + sd * Z
        v = f.evaluate_batch(np.concatenate([A.reshape(-1, f.dim), B.reshape(-1, f.dim)]))
        v = v.reshape(2, p, samples)
        out[s:s + step] = scale * (v[0] - v[1]).mean(axis=1)
    return out


def degree1_vector_halves(f, t, y, samples, sampler):
    """Two independent half-sample estimates of W_1(f_{t,y}) = E[f_{t,y}(x) x]."""
    _check_t(t)
    y = _point(f, y, "y")
    half = max(1, samples // 2)
    out = []
    for _ in range(2):
        acc = np.zeros(f.dim)
        step = max(1, CHUNK_ENTRIES // max(1, f.dim))
        for s in range(0, half, step):
            m = min(step, half - s)
            W = sampler.normal((m, f.dim))
            v = f.evaluate_batch(_smoothed_points(t, y, W))
            acc += v @ W
        out.append(acc / half)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Gram estimators


class PairwiseGram:
    """Gram entries from the J-estimator, one independent child sampler per entry."""

    method = "pairwise"

    def __init__(self, f, t, cfg: EstimatorConfig, sampler: GaussianSampler):
        _check_t(t)
        self.f, self.t, self.cfg, self.sampler = f, t, cfg, sampler

    def entry(self, y1, y2) -> float:
        return estimate_grad_inner(self.f, self.t, y1, y2, self.cfg, self.sampler.child()).value

    def queries_per_entry(self) -> int:
        batch, blocks = self.cfg.sizing(8.0 / (inner_rho(self.cfg.epsilon, self.t) ** 2
                                               * grad_scale(self.t)))
        return 4 * batch * blocks

    def matrix(self, anchors) -> np.ndarray:
        r = len(anchors)
        B = np.zeros((r, r))
        for i in range(r):
            for j in range(i, r):
                B[i, j] = B[j, i] = self.entry(anchors[i], anchors[j])
        return B

    def column(self, anchors, y_new) -> np.ndarray:
        return np.array([self.entry(a, y_new) for a in anchors])


class Degree1Gram:
    """Gram entries from per-anchor degree-1 coefficient vectors.

    Each anchor costs ``samples`` queries once; entries are the symmetrized
    cross products of independent halves divided by D(t), which is unbiased.
    The noise grows with the ambient dimension, unlike the pairwise route.
    """

    method = "degree1"

    def __init__(self, f, t, samples: int, sampler: GaussianSampler):
        _check_t(t)
        if samples < 2:
            raise InvalidArgument("need at least two samples per anchor")
        self.f, self.t, self.samples, self.sampler = f, t, int(samples), sampler
        self._cache = {}

    def halves(self, y):
        key = np.asarray(y, dtype=np.float64).tobytes()
        if key not in self._cache:
            self._cache[key] = degree1_vector_halves(self.f, self.t, y, self.samples,
                                                     self.sampler.child())
        return self._cache[key]

    def entry(self, y1, y2) -> float:
        a1, b1 = self.halves(y1)
        a2, b2 = self.halves(y2)
        return 0.5 * (float(a1 @ b2) + float(b1 @ a2)) / grad_scale(self.t)

    def queries_per_anchor(self) -> int:
        return 2 * max(1, self.samples // 2)

    def matrix(self, anchors) -> np.ndarray:
        r = len(anchors)
        B = np.zeros((r, r))
        for i in range(r):
            for j in range(i, r):
                B[i, j] = B[j, i] = self.entry(anchors[i], anchors[j])
        return B

    def column(self, anchors, y_new) -> np.ndarray:
        return np.array([self.entry(a, y_new) for a in anchors])
