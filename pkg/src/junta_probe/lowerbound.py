"""Empirical side of the surface-area lower bound.

A random stripe function f ~ D1 and its cut version g ~ D2 are hard to
tell apart with few non-adaptive queries: unless two query points share a
stripe while lying on opposite sides of the cut (the complement of event
A), the answers have the same distribution. This module samples coupled
pairs, measures how often event A fails, estimates the total-variation
distance between the two answer distributions, and estimates how far D2
samples are from one-dimensional juntas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgument
from .oracle import (CutStripedTwoJunta, FunctionOracle, GaussianSampler, StripedOneJunta,
                     sample_d2, sign)


# ---------------------------------------------------------------------------
# designs


@dataclass
class QueryDesign:
    points: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if self.points.shape[0] < 1 or self.points.shape[1] != 2:
            raise InvalidArgument("a design needs at least one point in R^2")
        if not np.all(np.isfinite(self.points)):
            raise InvalidArgument("design points must be finite")

    @property
    def n(self):
        return self.points.shape[0]


def grid_design(a, b, half_width=1.0):
    xs = np.linspace(-half_width, half_width, a)
    ys = np.linspace(-half_width, half_width, b)
    return QueryDesign([(x, y) for x in xs for y in ys], f"grid:{a}x{b}")


def spread_design(n, radius=0.8):
    """n points evenly spaced on a circle."""
    ang = 2 * math.pi * np.arange(n) / n + math.pi / 2
    return QueryDesign(np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1),
                       f"spread:{n}")


def gaussian_design(n, seed=0):
    rng = np.random.default_rng(seed)
    return QueryDesign(rng.standard_normal((n, 2)), f"gaussian:{n}")


def cluster_design(n, spread=0.05, separation=1.0, seed=0):
    """Two tight clusters whose centres are ``separation`` apart."""
    rng = np.random.default_rng(seed)
    centres = np.array([[-separation / 2, 0.0], [separation / 2, 0.0]])
    pts = centres[np.arange(n) % 2] + spread * rng.standard_normal((n, 2))
    return QueryDesign(pts, f"clusters:{n}")


def parse_design(spec: str, seed=0) -> QueryDesign:
    name, _, arg = spec.partition(":")
    if name == "grid":
        a, _, b = arg.partition("x")
        return grid_design(int(a), int(b or a))
    if name == "spread":
        return spread_design(int(arg or 5))
    if name == "gaussian":
        return gaussian_design(int(arg or 5), seed)
    if name == "clusters":
        return cluster_design(int(arg or 8), seed=seed)
    raise InvalidArgument(f"unknown design {spec!r}")


# ---------------------------------------------------------------------------
# coupled trials


@dataclass
class CouplingOutcome:
    event_A_held: bool
    answers_f: np.ndarray
    answers_g: np.ndarray
    event_A_by_pairs: bool
    f: Optional[StripedOneJunta] = None
    g: Optional[CutStripedTwoJunta] = None


def event_a_by_stripes(g: CutStripedTwoJunta, X) -> bool:
    """Event A from stripe labels: no stripe holds points on both sides of the cut."""
    j = g.stripe_index(X)
    side = g.side(X)
    inside = j > 0
    for stripe in np.unique(j[inside]):
        sides = side[j == stripe]
        if np.any(sides > 0) and np.any(sides < 0):
            return False
    return True


def event_a_by_pairs(g: CutStripedTwoJunta, X) -> bool:
    """Event A from raw inequalities on every pair of points."""
    X = np.asarray(X)
    p = X @ g.theta
    q = X @ g.theta_perp - g.z
    inner = g.breakpoints[1:-1]
    n = X.shape[0]
    for i in range(n):
        for k in range(i + 1, n):
            if not (-1.0 < p[i] <= 1.0 and -1.0 < p[k] <= 1.0):
                continue
            if (q[i] >= 0) == (q[k] >= 0):
                continue
            lo, hi = min(p[i], p[k]), max(p[i], p[k])
            # same stripe iff no interior breakpoint b with lo <= b < hi
            if not np.any((inner >= lo) & (inner < hi)):
                return False
    return True


def coupled_pair(s, sampler: GaussianSampler, X):
    """(f, g) with g ~ D2 and f ~ D1 sharing theta and breakpoints.

    f's stripe bits are g's bits multiplied by the cut side of the points
    occupying the stripe (when only one side is occupied). The multiplier
    is a function of (theta, a, z, design) only, so f's bits are still
    i.i.d. uniform and f ~ D1 exactly; on event A the answers coincide.
    """
    g = sample_d2(s, sampler).function
    j = g.stripe_index(X)
    side = g.side(X)
    bits = g.bits.copy()
    for stripe in np.unique(j[j > 0]):
        sides = side[j == stripe]
        if np.all(sides < 0):
            bits[stripe - 1] = -bits[stripe - 1]
    f = StripedOneJunta(g.theta, g.breakpoints, bits)
    return f, g


def run_coupling_trial(design: QueryDesign, s: int, seed: int) -> CouplingOutcome:
    X = design.points
    f, g = coupled_pair(s, GaussianSampler(seed), X)
    held = event_a_by_stripes(g, X)
    return CouplingOutcome(held, f(X), g(X), event_a_by_pairs(g, X), f, g)


# ---------------------------------------------------------------------------
# batched answer sampling (exact in distribution, no breakpoint arrays)


def _stripe_groups(p, inside, s, rng):
    """Group labels for points sharing a stripe, per trial.

    For sorted inside projections, the number of interior breakpoints in
    each gap between neighbours is multinomial; neighbours share a stripe
    iff their gap holds no breakpoint.
    """
    T, n = p.shape
    key = np.where(inside, p, np.inf)
    order = np.argsort(key, axis=1, kind="stable")
    ps = np.take_along_axis(key, order, axis=1)
    ins = np.take_along_axis(inside, order, axis=1)
    # cells: [-1, p1], (p1, p2], ..., (p_last, 1] over inside points
    edges = np.where(ins, ps, 1.0)
    cells = np.diff(np.concatenate([-np.ones((T, 1)), edges, np.ones((T, 1))], axis=1), axis=1)
    cells = np.clip(cells, 0.0, None) / 2.0
    counts = rng.multinomial(s - 1, cells / cells.sum(axis=1, keepdims=True))
    between = counts[:, 1:n]  # breakpoints between consecutive sorted points
    new_group = np.concatenate([np.ones((T, 1), bool), between > 0], axis=1)
    labels_sorted = np.cumsum(new_group, axis=1) - 1
    labels = np.empty_like(labels_sorted)
    np.put_along_axis(labels, order, labels_sorted, axis=1)
    return labels


def sample_answers(design: QueryDesign, s: int, trials: int, rng: np.random.Generator,
                   kind: str = "d1", return_event=False):
    """Answer vectors of ``trials`` independent D1 (or D2) functions on the design."""
    X = design.points
    T, n = int(trials), design.n
    phi = rng.uniform(0.0, 2 * math.pi, T)
    theta = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    p = theta @ X.T
    inside = (p > -1.0) & (p <= 1.0)
    labels = _stripe_groups(p, inside, s, rng)
    group_bits = np.where(rng.integers(0, 2, (T, n)) == 1, 1.0, -1.0)
    vals = np.take_along_axis(group_bits, labels, axis=1)
    event = None
    if kind == "d2" or return_event:
        z = rng.uniform(-1.0, 1.0, T)
        tperp = np.stack([theta[:, 1], -theta[:, 0]], axis=1)
        side = sign(tperp @ X.T - z[:, None])
        if kind == "d2":
            vals = vals * side
        if return_event:
            event = np.ones(T, dtype=bool)
            for a in range(n):
                for b in range(a + 1, n):
                    clash = inside[:, a] & inside[:, b] & (labels[:, a] == labels[:, b]) \
                        & (side[:, a] != side[:, b])
                    event &= ~clash
    elif kind != "d1":
        raise InvalidArgument("kind must be 'd1' or 'd2'")
    answers = np.where(inside, vals, 1.0)
    return (answers, event) if return_event else answers


def _cell_index(answers):
    bits = (answers > 0).astype(np.int64)
    return bits @ (1 << np.arange(answers.shape[1]))


@dataclass
class TVResult:
    tv: float
    half_width: float
    tv_raw: float
    trials: int
    n: int
    tv_debiased: float = 0.0

    def to_dict(self):
        return dict(self.__dict__)


def _tv(cf, cg, smooth):
    K = cf.shape[-1]
    nf = cf.sum(axis=-1, keepdims=True)
    ng = cg.sum(axis=-1, keepdims=True)
    if smooth:
        pf = (cf + 4.0 / K) / (nf + 4.0)
        pg = (cg + 4.0 / K) / (ng + 4.0)
    else:
        pf, pg = cf / nf, cg / ng
    return 0.5 * np.abs(pf - pg).sum(axis=-1)


def estimate_tv_distance(design: QueryDesign, s: int, trials: int = 200_000, seed: int = 0,
                         bootstrap: int = 200) -> TVResult:
    """Plug-in TV between D1 and D2 answer distributions (plus-four smoothed)
    with a 95% percentile-bootstrap half-width.

    The plug-in value is biased upward by sampling noise in every cell,
    which matters once 2^n is not small next to ``trials``. ``tv_debiased``
    is the bootstrap bias correction max(0, 2 tv - mean(tv*)), reported
    alongside the plug-in value.
    """
    if design.n > 20:
        raise InvalidArgument("design too large: the answer space must be enumerable (n <= 20)")
    ss = np.random.SeedSequence(seed)
    rf, rg, rb = (np.random.default_rng(c) for c in ss.spawn(3))
    K = 1 << design.n
    cf = np.bincount(_cell_index(sample_answers(design, s, trials, rf, "d1")), minlength=K)
    cg = np.bincount(_cell_index(sample_answers(design, s, trials, rg, "d2")), minlength=K)
    tv = float(_tv(cf, cg, True))
    bf = rb.multinomial(trials, cf / trials, size=bootstrap)
    bg = rb.multinomial(trials, cg / trials, size=bootstrap)
    boot = _tv(bf, bg, True)
    lo, hi = np.percentile(boot, [2.5, 97.5])
    return TVResult(tv, float((hi - lo) / 2.0), float(_tv(cf, cg, False)), int(trials), design.n,
                    max(0.0, 2.0 * tv - float(boot.mean())))


def event_a_failure_rate(design: QueryDesign, s: int, trials: int, seed: int = 0) -> float:
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    _, event = sample_answers(design, s, trials, rng, "d2", return_event=True)
    return float(1.0 - event.mean())


# ---------------------------------------------------------------------------
# distance to one-dimensional juntas


def estimate_distance_to_1junta(g: FunctionOracle, directions: int = 180, samples: int = 100_000,
                                seed: int = 0, bins: int = 200) -> float:
    """min over grid directions phi of Pr[g(x) != best function of <x, phi>].

    The best function of the projection is approximated by the majority
    value within each of ``bins`` equal bins over [-4, 4] (values beyond
    are clamped into the end bins).
    """
    if g.dim != 2:
        raise InvalidArgument("the 1-junta distance estimator works on R^2")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, 2))
    v = g.evaluate_batch(X)
    pos = v > 0
    best = math.inf
    for phi in np.arange(directions) * (math.pi / directions):
        p = X @ np.array([math.cos(phi), math.sin(phi)])
        b = np.clip(((p + 4.0) / 8.0 * bins).astype(np.int64), 0, bins - 1)
        n_pos = np.bincount(b, weights=pos, minlength=bins)
        n_all = np.bincount(b, minlength=bins)
        best = min(best, float(np.minimum(n_pos, n_all - n_pos).sum() / samples))
    return best


# ---------------------------------------------------------------------------
# auxiliary probability checks


def close_pair_straddle_rate(design: QueryDesign, s: int, trials: int = 10_000,
                             seed: int = 0, delta: Optional[float] = None) -> float:
    """Fraction of random cuts (theta, z) that separate some pair of design
    points lying within delta = s^(-1/3) of each other."""
    delta = s ** (-1.0 / 3.0) if delta is None else delta
    X = design.points
    i, j = np.triu_indices(design.n, 1)
    close = np.linalg.norm(X[i] - X[j], axis=1) <= delta
    if not np.any(close):
        return 0.0
    i, j = i[close], j[close]
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2 * math.pi, trials)
    z = rng.uniform(-1.0, 1.0, trials)
    tperp = np.stack([np.sin(phi), -np.cos(phi)], axis=1)
    side = sign(tperp @ X.T - z[:, None])
    return float(np.mean(np.any(side[:, i] != side[:, j], axis=1)))


def small_projection_rate(x, delta: float = 0.05, draws: int = 100_000, seed: int = 0) -> float:
    """Empirical Pr(|<theta, x>| <= delta |x|) for theta uniform on the unit circle."""
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2 * math.pi, draws)
    proj = np.cos(phi) * x[0] + np.sin(phi) * x[1]
    return float(np.mean(np.abs(proj) <= delta * np.linalg.norm(x)))
