"""Closed-form targets for f(x) = sign(<u, x> - theta) with unit u.

With c = e^{-t}/sigma(t) and a(y) = (e^{-t}<u, y> - theta)/sigma(t):

    E f                = 1 - 2 Phi(theta)
    P_t f(y)           = 2 Phi(a(y)) - 1
    D P_t f(y)         = 2 c phi(a(y)) u
    f_{d,eta}(x)       = (P_s f(x) - E f)/eta with e^{-s} = eta
    NS_t(f)            = 2 (Phi(theta) - Phi_2(theta, theta; e^{-t}))
    W_1(f)             = 2 phi(theta) u

These are used as targets by the estimator benchmark.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import multivariate_normal, norm

from .hermite import noise_scale


def _proj(u, y):
    """<u, y> for a point (float) or for each row of a matrix (array)."""
    out = np.asarray(y, dtype=np.float64) @ np.asarray(u, dtype=np.float64)
    return float(out) if np.ndim(out) == 0 else out


def halfspace_mean(theta=0.0):
    return 1.0 - 2.0 * norm.cdf(theta)


def halfspace_pt(u, theta, t, y):
    a = (math.exp(-t) * _proj(u, y) - theta) / noise_scale(t)
    out = 2.0 * norm.cdf(a) - 1.0
    return float(out) if np.ndim(out) == 0 else out


def halfspace_grad(u, theta, t, y):
    s = noise_scale(t)
    a = (math.exp(-t) * _proj(u, y) - theta) / s
    return 2.0 * math.exp(-t) / s * norm.pdf(a) * np.asarray(u, dtype=np.float64)


def halfspace_grad_inner(u, theta, t, y1, y2):
    return float(np.dot(halfspace_grad(u, theta, t, y1), halfspace_grad(u, theta, t, y2)))


def halfspace_degree1_eval(u, theta, eta, x):
    return (halfspace_pt(u, theta, -math.log(eta), x) - halfspace_mean(theta)) / eta


def halfspace_degree1_part(u, theta, x):
    return 2.0 * norm.pdf(theta) * _proj(u, x)


def halfspace_noise_sensitivity(theta, t):
    rho = math.exp(-t)
    if theta == 0.0:
        return math.acos(rho) / math.pi
    both = multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]]).cdf([theta, theta])
    return 2.0 * (norm.cdf(theta) - both)
