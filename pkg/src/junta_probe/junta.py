"""Testers for linear k-juntas: the Gram-rank test, the surface-area gate,
and their composition.

Two parameter presets exist. ``paper`` derives every quantity from the
formulas of the rank test (t = eps^4/(900 s^2), r = ceil(k s^2/eps^7),
kappa = eps^2/(40 r)) and refuses to run when the projected query count is
absurd. ``practical`` keeps the thresholds but caps r at 12k, floors t, and
estimates the Gram matrix from per-anchor degree-1 coefficient vectors.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, InvalidArgument
from .hermite import (Degree1Gram, EstimatorConfig, PairwiseGram, estimate_noise_sensitivity,
                      grad_scale, inner_rho)
from .linalg import singular_values_sym
from .oracle import FunctionOracle, GaussianSampler

PRESETS = ("paper", "practical")
# projected query counts above this are refused outright
HARD_QUERY_LIMIT = 10 ** 11
PRACTICAL_T_FLOOR = 0.25
PRACTICAL_ANCHOR_SAMPLES = 200_000


def _check_common(k, s, eps, preset):
    if int(k) != k or k < 0:
        raise InvalidArgument("k must be a nonnegative integer")
    if not s > 0:
        raise InvalidArgument("s must be positive")
    if not 0 < eps < 1:
        raise InvalidArgument("eps must lie in (0, 1)")
    if preset not in PRESETS:
        raise InvalidArgument(f"preset must be one of {PRESETS}")


@dataclass
class RankTestParams:
    k: int
    s: float
    epsilon: float
    preset: str
    t: float
    r: int
    kappa: float
    threshold: float
    gram_method: str
    samples_per_anchor: Optional[int] = None
    entry_config: Optional[EstimatorConfig] = None
    paper_t: float = 0.0
    paper_r: int = 0

    @classmethod
    def derive(cls, k, s, eps, preset="practical", t=None, r=None, gram_method=None,
               samples_per_anchor=None, entry_batch=None, entry_blocks=None):
        _check_common(k, s, eps, preset)
        k = int(k)
        paper_t = eps ** 4 / (900.0 * s ** 2)
        paper_r = max(1, math.ceil(k * s ** 2 / eps ** 7))
        if preset == "paper":
            t_used = paper_t if t is None else t
            r_used = paper_r if r is None else int(r)
            method = gram_method or "pairwise"
        else:
            t_used = max(paper_t, PRACTICAL_T_FLOOR) if t is None else t
            r_used = min(paper_r, 12 * max(k, 1)) if r is None else int(r)
            method = gram_method or "degree1"
        if r_used < 1:
            raise InvalidArgument("r must be at least 1")
        kappa = eps ** 2 / (40.0 * r_used)
        params = cls(k=k, s=float(s), epsilon=float(eps), preset=preset, t=float(t_used),
                     r=r_used, kappa=kappa, threshold=eps ** 2 / 16.0, gram_method=method,
                     paper_t=paper_t, paper_r=paper_r)
        if method == "pairwise":
            pairs = r_used * (r_used + 1) // 2
            params.entry_config = EstimatorConfig(
                epsilon=kappa, delta=min(0.5, eps / pairs), t=float(t_used),
                batch=entry_batch, blocks=entry_blocks)
        elif method == "degree1":
            params.samples_per_anchor = int(samples_per_anchor or PRACTICAL_ANCHOR_SAMPLES)
        else:
            raise InvalidArgument(f"unknown gram method {method!r}")
        return params

    def projected_queries(self) -> int:
        if self.gram_method == "pairwise":
            gram = PairwiseGram(None, self.t, self.entry_config, None)
            return self.r * (self.r + 1) // 2 * gram.queries_per_entry()
        return self.r * 2 * max(1, self.samples_per_anchor // 2)

    def to_dict(self):
        d = asdict(self)
        d["entry_config"] = self.entry_config.to_dict() if self.entry_config else None
        d["projected_queries"] = self.projected_queries()
        return d


@dataclass
class GramEstimate:
    matrix: np.ndarray
    singular_values: np.ndarray
    method: str

    def to_dict(self):
        return {"matrix": self.matrix.tolist(), "singular_values": self.singular_values.tolist(),
                "method": self.method}


@dataclass
class RankVerdict:
    answer: bool
    gram: GramEstimate
    sigma_k_plus_1: float
    threshold: float
    queries: int
    params: RankTestParams

    def to_dict(self):
        return {"answer": "yes" if self.answer else "no", "sigma_k_plus_1": self.sigma_k_plus_1,
                "threshold": self.threshold, "queries": self.queries,
                "singular_values": self.gram.singular_values.tolist(),
                "params": self.params.to_dict()}


def _guard_budget(projected):
    if projected > HARD_QUERY_LIMIT:
        raise BudgetExceeded(HARD_QUERY_LIMIT, projected)


def make_gram_estimator(f, params: RankTestParams, sampler):
    if params.gram_method == "pairwise":
        return PairwiseGram(f, params.t, params.entry_config, sampler)
    return Degree1Gram(f, params.t, params.samples_per_anchor, sampler)


def test_rank(f: FunctionOracle, params: RankTestParams, sampler: GaussianSampler) -> RankVerdict:
    """Estimate the Gram matrix of smoothed gradients at r random anchors and
    answer yes iff its (k+1)-st singular value is at most eps^2/16."""
    _guard_budget(params.projected_queries())
    before = f.ledger.total_queries
    anchors = sampler.normal((params.r, f.dim))
    gram = make_gram_estimator(f, params, sampler.child())
    B = gram.matrix(list(anchors))
    sv = singular_values_sym(B)
    sigma = float(sv[params.k]) if params.k < params.r else 0.0
    return RankVerdict(answer=sigma <= params.threshold,
                       gram=GramEstimate(B, sv, params.gram_method),
                       sigma_k_plus_1=sigma, threshold=params.threshold,
                       queries=f.ledger.total_queries - before, params=params)


test_rank.__test__ = False  # not a pytest test despite the name


@dataclass
class GateVerdict:
    answer: bool
    noise_sensitivity: float
    bound: float
    t0: float
    queries: int
    preset: str

    def to_dict(self):
        d = asdict(self)
        d["answer"] = "yes" if self.answer else "no"
        return d


def gate_noise_parameter(s, eps, preset="practical"):
    """t0 = (eps/(30 s))^4 for the paper preset, (eps/(30 s))^2 for practical."""
    base = eps / (30.0 * s)
    return base ** 4 if preset == "paper" else base ** 2


def surface_area_gate(f, s, eps, sampler, preset="practical", samples=PRACTICAL_ANCHOR_SAMPLES,
                      t0=None) -> GateVerdict:
    """One-sided noise-sensitivity gate standing in for a surface-area tester.

    Accepts iff the estimated noise sensitivity at t0 is at most
    (2 sqrt(t0)/sqrt(pi)) s (1 + eps). Functions of surface area at most s
    pass (up to sampling error); rejecting functions of larger surface
    area is heuristic.
    """
    if not s > 0:
        raise InvalidArgument("s must be positive")
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    t0 = gate_noise_parameter(s, eps, preset) if t0 is None else t0
    bound = 2.0 * math.sqrt(t0) / math.sqrt(math.pi) * s * (1.0 + eps)
    if preset == "paper":
        cfg = EstimatorConfig(epsilon=bound * eps, delta=0.05, t=t0)
    else:
        cfg = EstimatorConfig(epsilon=max(bound * eps, 1e-12), delta=0.05, t=t0,
                              batch=int(samples), blocks=1)
    batch, blocks = cfg.sizing(1.0)
    _guard_budget(2 * batch * blocks)
    before = f.ledger.total_queries
    est = estimate_noise_sensitivity(f, t0, cfg, sampler)
    return GateVerdict(answer=est.value <= bound, noise_sensitivity=est.value, bound=bound,
                       t0=t0, queries=f.ledger.total_queries - before, preset=preset)


@dataclass
class LinearJuntaVerdict:
    answer: bool
    gate: GateVerdict
    rank: Optional[RankVerdict]
    queries: int

    def to_dict(self):
        return {"answer": "yes" if self.answer else "no", "gate": self.gate.to_dict(),
                "rank": self.rank.to_dict() if self.rank else None, "queries": self.queries}


def test_linear_junta(f, k, s, eps, sampler, preset="practical", rank_params=None,
                      gate_samples=PRACTICAL_ANCHOR_SAMPLES) -> LinearJuntaVerdict:
    """Gate on surface area, then run the rank test only if the gate passes.

    The paper preset calls the gate with error (eps/30)^4; the practical
    preset uses eps directly (the smaller value makes t0 vanish).
    """
    _check_common(k, s, eps, preset)
    ledger = f.ledger.child()
    g = f.with_ledger(ledger)
    gate_eps = (eps / 30.0) ** 4 if preset == "paper" else eps
    gate = surface_area_gate(g, s, gate_eps, sampler.child(), preset=preset,
                             samples=gate_samples)
    rank = None
    if gate.answer:
        params = rank_params or RankTestParams.derive(k, s, eps, preset)
        rank = test_rank(g, params, sampler.child())
    answer = bool(gate.answer and rank is not None and rank.answer)
    return LinearJuntaVerdict(answer, gate, rank, ledger.total_queries)


test_linear_junta.__test__ = False
