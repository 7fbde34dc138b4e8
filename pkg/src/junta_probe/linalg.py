"""Small dense symmetric linear algebra.

Everything here works on matrices of order at most a few hundred. The
eigensolver is cyclic Jacobi (see :mod:`junta_probe.kernels`), chosen for
its simple convergence story and deterministic sweep order.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument, PerturbationTooLarge, RankDeficient


@dataclass
class Spectrum:
    values: np.ndarray   # descending
    vectors: np.ndarray  # columns are eigenvectors
    sweeps: int = 0


def _as_symmetric(A, name="A"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgument(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgument(f"{name} has non-finite entries")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise InvalidArgument(f"{name} is not symmetric")
    return A


def symmetrize(A):
    A = np.asarray(A, dtype=np.float64)
    return 0.5 * (A + A.T)


def eigh(A, tol: float = 1e-12) -> Spectrum:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Equal eigenvalues keep the order of their diagonal position after the
    sweeps (stable sort).
    """
    A = _as_symmetric(A)
    if A.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)), 0)
    w, v, sweeps = kernels.jacobi_eigh(A, tol)
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], v[:, order], int(sweeps))


def singular_values_sym(A) -> np.ndarray:
    """Singular values of a symmetric matrix: |eigenvalues|, descending."""
    w = eigh(A).values
    return np.sort(np.abs(w), kind="stable")[::-1]


def inv_sqrt_psd(A, floor: float) -> np.ndarray:
    """A^{-1/2} for a positive definite A whose smallest eigenvalue is >= floor.

    Eigenvalues below ``floor`` are reported, never clamped.
    """
    if not floor > 0:
        raise InvalidArgument("floor must be positive")
    spec = eigh(A)
    lam_min = spec.values[-1] if spec.values.size else math.inf
    if lam_min < floor:
        raise RankDeficient(lam_min, floor)
    V = spec.vectors
    out = (V * (spec.values ** -0.5)) @ V.T
    return symmetrize(out)


def min_singular_lb(ell: int, eta: float, gamma: float) -> float:
    """Lower bound (gamma / (2 ell eta))^(ell+1) on sigma_min of an
    (eta, gamma)-linearly independent set of ell vectors."""
    if not (eta >= gamma > 0):
        raise InvalidArgument("need eta >= gamma > 0")
    if ell < 1:
        raise InvalidArgument("ell must be at least 1")
    return (gamma / (2.0 * ell * eta)) ** (ell + 1)


def coefficient_bound(ell: int, eta: float, gamma: float) -> float:
    """Bound sqrt(2 ell) (2 ell eta / gamma)^(ell+1) on |alpha_ij|."""
    return math.sqrt(2 * ell) * (2.0 * ell * eta / gamma) ** (ell + 1)


def gram_tolerance(ell: int, nu: float, eta: float, gamma: float) -> float:
    """Entrywise Gram accuracy 2 nu / (ell^2 eta) (gamma / (2 ell eta))^(3 ell + 3)
    under which the orthonormalization coefficients are nu-accurate."""
    return 2.0 * nu / (ell ** 2 * eta) * (gamma / (2.0 * ell * eta)) ** (3 * ell + 3)


def orthonormalize_coeffs(beta, ell: int, eta: float, gamma: float, nu: float) -> np.ndarray:
    """Coefficients alpha with w_i = sum_j alpha_ij v_j close to orthonormal.

    ``beta`` estimates the Gram matrix of v_1..v_ell. We symmetrize it and
    return alpha_ij = S^{-1/2}(j, i). The floor on the smallest eigenvalue
    is (1 - rho) times the squared singular-value lower bound, where rho is
    the relative perturbation the entrywise tolerance allows.
    """
    beta = symmetrize(beta)
    if beta.shape != (ell, ell):
        raise InvalidArgument(f"beta must be {ell}x{ell}")
    if ell == 0:
        return np.zeros((0, 0))
    sig = min_singular_lb(ell, eta, gamma) ** 2
    rho = ell * gram_tolerance(ell, nu, eta, gamma) / sig
    floor = (1.0 - min(rho, 0.5)) * sig
    try:
        S = inv_sqrt_psd(beta, floor)
    except RankDeficient as exc:
        raise PerturbationTooLarge(exc.lambda_min, floor) from None
    return S.T.copy()


def matrix_to_csv(A) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(A):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [list(map(float, r)) for r in csv.reader(io.StringIO(text)) if r]
    return np.array(rows, dtype=np.float64)
