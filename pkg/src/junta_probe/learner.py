"""Learning the hidden low-dimensional structure of a linear junta.

Pipeline: collect anchor points whose smoothed gradients are far from the
span of the earlier ones (candidate test + collection loop), compute
coefficients that orthonormalize those gradients implicitly, then pick the
hypothesis g on R^ell that best matches P_t f when fed the implicit
projections. Projections <w_j, x> are never formed as vectors in R^n; they
are re-estimated from fresh queries at every point where they are needed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .cover import build_cover
from .errors import CertificationFailed, InvalidArgument, PerturbationTooLarge
from .hermite import (Degree1Gram, EstimatorConfig, PairwiseGram, directional_many, grad_scale,
                      pt_many)
from .hypotheses import ConstantHypothesis, Hypothesis
from .junta import HARD_QUERY_LIMIT, PRACTICAL_T_FLOOR, RankTestParams, test_rank
from .linalg import coefficient_bound, gram_tolerance, min_singular_lb, orthonormalize_coeffs
from .oracle import FunctionOracle, GaussianSampler
from .errors import BudgetExceeded


def lambda_power(ell, t, gamma):
    """Coefficient bound 2 (ell/(t gamma))^(ell+1) on |alpha_ij|."""
    if ell == 0:
        return 1.0
    return 2.0 * (ell / (t * gamma)) ** (ell + 1)


@dataclass
class LearnerParams:
    k: int
    s: float
    epsilon: float
    preset: str
    t: float
    gamma: float
    tau_succ: float
    T_succ: int
    xi: float
    gram_method: str
    anchor_samples: int
    pt_samples: int
    dir_samples: int
    delta_cover: float
    paper: dict = field(default_factory=dict)

    @classmethod
    def derive(cls, k, s, eps, preset="practical", t=None, gamma=None, T_succ=None, xi=None,
               anchor_samples=None, pt_samples=None, dir_samples=None, gram_method=None):
        if int(k) != k or k < 0:
            raise InvalidArgument("k must be a nonnegative integer")
        if not s > 0 or not 0 < eps < 1:
            raise InvalidArgument("need s > 0 and 0 < eps < 1")
        if preset not in ("paper", "practical"):
            raise InvalidArgument("preset must be 'paper' or 'practical'")
        k = int(k)
        kk = max(k, 1)
        pt = eps ** 4 / (900.0 * s ** 2)
        pgamma = eps ** 2 / 8.0
        ptau = eps ** 6 / s ** 2
        pT = math.ceil(math.log(10.0 * kk / eps) / ptau)
        pLam = lambda_power(kk, pt, pgamma)
        pK = kk ** 2 * pLam
        pxi = eps ** 2 * math.sqrt(pt) / (pK * kk ** 3)
        paper = {"t": pt, "gamma": pgamma, "tau_succ": ptau, "T_succ": pT,
                 "nu": pgamma ** 2 * pt / (100.0 * kk ** 2),
                 "tau_ortho": eps ** 2 * math.sqrt(pt) / (100.0 * kk ** 1.5),
                 "Lambda": pLam, "K": pK, "xi": pxi, "delta_cover": eps / 10.0}
        if preset == "paper":
            t_used = pt if t is None else t
            g_used = pgamma if gamma is None else gamma
            tau = ptau
            T_used = pT if T_succ is None else int(T_succ)
            xi_used = min(pxi, 0.5) if xi is None else xi
            method = gram_method or "pairwise"
        else:
            t_used = max(pt, PRACTICAL_T_FLOOR) if t is None else t
            # gamma measured against the ceiling D(t)^{-1/2} on gradient norms
            g_used = 2.0 * eps / math.sqrt(grad_scale(t_used)) if gamma is None else gamma
            tau = eps
            T_used = math.ceil(math.log(10.0 * kk / eps) / tau) if T_succ is None else int(T_succ)
            xi_used = 0.25 if xi is None else xi
            method = gram_method or "degree1"
        return cls(k=k, s=float(s), epsilon=float(eps), preset=preset, t=float(t_used),
                   gamma=float(g_used), tau_succ=float(tau), T_succ=int(T_used),
                   xi=float(xi_used), gram_method=method,
                   anchor_samples=int(anchor_samples or 100_000),
                   pt_samples=int(pt_samples or 256), dir_samples=int(dir_samples or 8000),
                   delta_cover=eps / 10.0, paper=paper)

    @property
    def eta(self):
        """Norm ceiling for smoothed gradients, at least gamma."""
        return max(1.0 / math.sqrt(grad_scale(self.t)), self.gamma)

    def gram_config(self) -> EstimatorConfig:
        """Entry accuracy for the pairwise route: the candidate-test tolerance."""
        kk = max(self.k, 1)
        g2 = self.gamma / 2.0
        nu = g2 ** 2 * self.t / (100.0 * kk ** 2)
        acc = min(gram_tolerance(kk, nu, self.eta, g2),
                  self.gamma ** 2 * math.sqrt(self.t) / (100.0 * kk ** 3)
                  / coefficient_bound(kk, self.eta, g2))
        return EstimatorConfig(epsilon=acc, delta=min(0.5, self.epsilon / (10.0 * kk)), t=self.t)

    def J(self, n_hypotheses: int) -> int:
        mu = self.epsilon / max(1, n_hypotheses)
        return math.ceil(10.0 / self.epsilon ** 2 * math.log(1.0 / mu))

    def to_dict(self):
        return asdict(self)


@dataclass
class DirectionBundle:
    t: float
    anchors: np.ndarray          # (ell, n)
    gamma: float
    params: LearnerParams
    alpha: Optional[np.ndarray] = None
    beta: Optional[np.ndarray] = None
    candidates_tried: int = 0

    @property
    def ell(self):
        return self.anchors.shape[0]

    def to_dict(self):
        return {"t": self.t, "gamma": self.gamma, "ell": self.ell,
                "anchors": self.anchors.tolist(),
                "alpha": None if self.alpha is None else self.alpha.tolist(),
                "beta": None if self.beta is None else self.beta.tolist(),
                "candidates_tried": self.candidates_tried}


def make_gram(f, params: LearnerParams, sampler):
    if params.gram_method == "pairwise":
        gram = PairwiseGram(f, params.t, params.gram_config(), sampler)
        if gram.queries_per_entry() > HARD_QUERY_LIMIT:
            raise BudgetExceeded(HARD_QUERY_LIMIT, gram.queries_per_entry())
        return gram
    return Degree1Gram(f, params.t, params.anchor_samples, sampler)


@dataclass
class CandidateResult:
    answer: bool
    residual: float
    norm2: float
    threshold: float


def test_candidate_direction(f, bundle: DirectionBundle, gram, y_new, gamma) -> CandidateResult:
    """Is the smoothed gradient at y_new at least gamma away from the span so far?

    Uses the squared-norm estimate beta(new, new) minus the squared length
    of its implicit projection, compared with (3 gamma / 4)^2.
    """
    y_new = np.asarray(y_new, dtype=np.float64)
    norm2 = gram.entry(y_new, y_new)
    if bundle.ell == 0:
        resid = norm2
    else:
        if bundle.alpha is None:
            raise InvalidArgument("bundle needs alpha before testing candidates")
        col = gram.column(list(bundle.anchors), y_new)
        zeta = bundle.alpha @ col
        resid = norm2 - float(zeta @ zeta)
    thr = (0.75 * gamma) ** 2
    return CandidateResult(resid > thr, float(resid), float(norm2), thr)


test_candidate_direction.__test__ = False


def compute_ortho_transform(f, bundle: DirectionBundle, gram, tau=None) -> np.ndarray:
    """Estimate the anchors' Gram matrix and store alpha = beta^{-1/2} (transposed)."""
    ell = bundle.ell
    if ell == 0:
        bundle.alpha = np.zeros((0, 0))
        bundle.beta = np.zeros((0, 0))
        return bundle.alpha
    p = bundle.params
    tau = tau if tau is not None else p.epsilon ** 2 * math.sqrt(p.t) / (100.0 * ell ** 1.5)
    beta = gram.matrix(list(bundle.anchors))
    try:
        alpha = orthonormalize_coeffs(beta, ell, p.eta, bundle.gamma / 2.0, tau)
    except PerturbationTooLarge as exc:
        raise CertificationFailed(f"anchors not independent: {exc}") from None
    bundle.beta = beta
    bundle.alpha = alpha
    return alpha


def find_candidate_directions(f, k, s, eps, sampler, params: Optional[LearnerParams] = None,
                              non_adaptive=False, gram=None) -> DirectionBundle:
    """Collect up to k anchors whose gradients are pairwise far from each other's span.

    Stops when k anchors are found or T_succ consecutive candidates fail.
    With ``non_adaptive`` all k * T_succ candidates are drawn up front.
    """
    p = params or LearnerParams.derive(k, s, eps)
    gram = gram or make_gram(f, p, sampler.child())
    bundle = DirectionBundle(p.t, np.zeros((0, f.dim)), p.gamma, p)
    compute_ortho_transform(f, bundle, gram)
    pool = sampler.normal((p.k * p.T_succ, f.dim)) if non_adaptive else None
    used = 0
    while bundle.ell < p.k:
        found = False
        for _ in range(p.T_succ):
            y = pool[used] if non_adaptive else sampler.normal(f.dim)
            used += 1
            if test_candidate_direction(f, bundle, gram, y, p.gamma).answer:
                bundle.anchors = np.vstack([bundle.anchors, y])
                compute_ortho_transform(f, bundle, gram)
                found = True
                break
        if not found:
            break
    bundle.candidates_tried = used
    assert bundle.ell <= p.k
    return bundle


@dataclass
class LearnedHypothesis:
    g: Hypothesis
    bundle: DirectionBundle
    score: float
    index: int
    n_hypotheses: int
    J: int

    def to_dict(self):
        return {"g": self.g.describe(), "score": self.score, "index": self.index,
                "n_hypotheses": self.n_hypotheses, "J": self.J, "bundle": self.bundle.to_dict()}


def implicit_projections(f, bundle: DirectionBundle, X, sampler) -> np.ndarray:
    """x_bar[i, j'] = sum_j alpha[j', j] * f_{d,xi,t,y_j}(x_i)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if bundle.ell == 0:
        return np.zeros((X.shape[0], 0))
    p = bundle.params
    zeta = np.stack([directional_many(f, bundle.t, y, X, p.xi, p.dir_samples, sampler)
                     for y in bundle.anchors], axis=1)
    return zeta @ bundle.alpha.T


def estimate_closest_hypothesis(f, bundle: DirectionBundle, hypotheses, eps, sampler):
    """Score every hypothesis by mean |P_t f(x_i) - g(x_bar_i)| and keep the best.

    ``hypotheses`` may be any iterable (a cover enumerates lazily); its
    length must be known, either from ``len`` or a ``size`` attribute.
    Ties go to the first hypothesis in enumeration order.
    """
    if bundle.alpha is None:
        raise InvalidArgument("bundle needs alpha")
    try:
        size = len(hypotheses)
    except TypeError:
        size = getattr(hypotheses, "size", None)
        if size is None:
            raise InvalidArgument("hypothesis family must have a known size") from None
    if size == 0:
        raise InvalidArgument("hypothesis family is empty")
    p = bundle.params
    J = p.J(size)
    X = sampler.normal((J, f.dim))
    ptv = pt_many(f, bundle.t, X, p.pt_samples, sampler)
    xbar = implicit_projections(f, bundle, X, sampler)
    best, best_i, best_score = None, -1, math.inf
    for i, g in enumerate(hypotheses):
        score = float(np.mean(np.abs(ptv - g(xbar))))
        if score < best_score:
            best, best_i, best_score = g, i, score
    return LearnedHypothesis(best, bundle, best_score, best_i, int(size), J)


def evaluate_learned(h: LearnedHypothesis, f, X, sampler) -> np.ndarray:
    """g(x_bar(x)) for each row of X, re-estimating projections with fresh queries."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.asarray(h.g(implicit_projections(f, h.bundle, X, sampler)), dtype=np.float64)


def default_hypotheses(ell, params: LearnerParams, cap):
    if ell == 0:
        return [ConstantHypothesis(c) for c in (-1.0, 0.0, 1.0)]
    cover = build_cover(ell, params.t, params.delta_cover, cap=cap)
    return _SizedIter(cover, cover.count())


class _SizedIter:
    def __init__(self, it, size):
        self.it, self.size = it, size

    def __iter__(self):
        return iter(self.it)


def find_invariant_structure(f, k, s, eps, sampler, hypotheses=None,
                             params: Optional[LearnerParams] = None, cover_cap=10 ** 6,
                             non_adaptive=False) -> LearnedHypothesis:
    """Directions, then orthonormalization, then hypothesis selection.

    ``hypotheses`` is either a list of callables on R^ell (restricted mode)
    or a function ``ell -> family``; None means the Lipschitz cover.
    """
    p = params or LearnerParams.derive(k, s, eps)
    gram = make_gram(f, p, sampler.child())
    bundle = find_candidate_directions(f, k, s, eps, sampler.child(), p, non_adaptive, gram)
    compute_ortho_transform(f, bundle, gram)
    if hypotheses is None:
        family = default_hypotheses(bundle.ell, p, cover_cap)
    elif callable(hypotheses) and not isinstance(hypotheses, (list, tuple)):
        family = hypotheses(bundle.ell)
    else:
        family = hypotheses
    return estimate_closest_hypothesis(f, bundle, family, eps, sampler.child())


@dataclass
class StructureVerdict:
    answer: bool
    rank: object
    learned: Optional[LearnedHypothesis]
    class_distance: Optional[float]
    queries: int

    def to_dict(self):
        return {"answer": "yes" if self.answer else "no", "rank": self.rank.to_dict(),
                "learned": self.learned.to_dict() if self.learned else None,
                "class_distance": self.class_distance, "queries": self.queries}


def test_structure_class(f, class_checker, k, s, eps, sampler, hypotheses=None,
                         preset="practical", rank_params=None, learner_params=None):
    """Rank test, then learn g, then ask ``class_checker`` about g with f frozen.

    ``class_checker(g, k, eps)`` returns (accept, distance) and must not
    query f; the ledger is frozen while it runs.
    """
    ledger = f.ledger.child()
    g_or = f.with_ledger(ledger)
    rp = rank_params or RankTestParams.derive(k, s, eps, preset)
    rank = test_rank(g_or, rp, sampler.child())
    if not rank.answer:
        return StructureVerdict(False, rank, None, None, ledger.total_queries)
    lp = learner_params or LearnerParams.derive(k, s, eps, preset)
    learned = find_invariant_structure(g_or, k, s, eps, sampler.child(), hypotheses, lp)
    with f.ledger.frozen():
        accept, dist = class_checker(learned.g, k, eps)
    return StructureVerdict(bool(accept), rank, learned, float(dist), ledger.total_queries)


test_structure_class.__test__ = False
