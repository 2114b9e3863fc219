"""Classical Csiszar divergences, Petz divergences and chi2_lambda kernels.

Extended reals: ``math.inf`` propagates through sums.  Kernel terms of the
form ``0/0`` are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hermitian as hc
from .errors import NumericalError, QuadratureFailure, RankDeficient, ValidationError
from .generators import Generator
from .ns_bridge import NSJoint, ns_pair
from .quadrature import QuadratureSpec, integrate
from .states import DensityMatrix, _check_dims
from .weights import WeightMeasure, analytic_weight

PMF_TOL = 1e-10


@dataclass(frozen=True)
class ClassicalPair:
    """Two pmfs on the same finite index set (any array shape, flattened)."""

    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.P, dtype=float).ravel()
        q = np.asarray(self.Q, dtype=float).ravel()
        if p.shape != q.shape:
            raise ValidationError(f"pmf shapes differ: {p.shape} vs {q.shape}")
        for name, v in (("P", p), ("Q", q)):
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValidationError(f"{name} has negative or non-finite entries")
            if abs(v.sum() - 1.0) > PMF_TOL:
                raise ValidationError(f"{name} sums to {v.sum()!r}")
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "Q", q)

    @classmethod
    def from_joint(cls, joint: NSJoint) -> "ClassicalPair":
        # Sinkhorn leaves a residual below the pmf tolerance; renormalize the rest away
        return cls(joint.P / joint.P.sum(), joint.Q / joint.Q.sum())

    @classmethod
    def bernoulli(cls, r: float, s: float) -> "ClassicalPair":
        return cls(np.array([r, 1.0 - r]), np.array([s, 1.0 - s]))


def csiszar(gen: Generator, pair: ClassicalPair) -> float:
    """``sum_i Q_i f(P_i / Q_i)`` with the limiting conventions at ``Q_i = 0``."""
    p, q = pair.P, pair.Q
    both = (q > 0) & (p > 0)
    total = float(np.sum(q[both] * gen.f(p[both] / q[both]))) if both.any() else 0.0
    only_q = (q > 0) & (p == 0)
    if only_q.any():
        total += float(q[only_q].sum()) * gen.f_at_0_plus if math.isfinite(gen.f_at_0_plus) else math.inf
    only_p = (q == 0) & (p > 0)
    if only_p.any():
        total += float(p[only_p].sum()) * gen.slope_at_inf if math.isfinite(gen.slope_at_inf) else math.inf
    return total


def _chi2_terms(p: np.ndarray, q: np.ndarray, lam) -> np.ndarray:
    """Kernel sum for an array of ``lam`` values; ``inf`` where a nonzero term has zero denominator."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    num = (p - q) ** 2
    live = num > 0
    num, p, q = num[live], p[live], q[live]
    den = (1.0 - lam)[:, None] * p[None, :] + lam[:, None] * q[None, :]
    with np.errstate(divide="ignore"):
        return np.sum(np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf), axis=1)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must lie in [0, 1], got {lam}")
    return lam


def chi2_lambda_classical(pair: ClassicalPair, lam: float) -> float:
    """``sum_i (P_i - Q_i)**2 / ((1 - lam) P_i + lam Q_i)``."""
    return float(_chi2_terms(pair.P, pair.Q, _check_lambda(lam))[0])


def chi2_lambda_quantum(rho: DensityMatrix, sigma: DensityMatrix, lam: float, joint: NSJoint = None) -> float:
    """Quantum kernel as the double sum over eigenpairs, weighted by overlaps."""
    _check_dims(rho, sigma)
    lam = _check_lambda(lam)
    joint = ns_pair(rho, sigma) if joint is None else joint
    return float(_chi2_terms(joint.P.ravel(), joint.Q.ravel(), lam)[0])


def petz_divergence(gen: Generator, rho: DensityMatrix, sigma: DensityMatrix, joint: NSJoint = None) -> float:
    """Petz f-divergence evaluated as the Csiszar divergence of the NS pair."""
    _check_dims(rho, sigma)
    joint = ns_pair(rho, sigma) if joint is None else joint
    return csiszar(gen, ClassicalPair.from_joint(joint))


def petz_lr_superoperator(gen: Generator, rho: DensityMatrix, sigma: DensityMatrix,
                          basis: str = "eij", diag_tol: float = 1e-9) -> float:
    """Evaluate ``Tr[sigma f(L_rho R_sigma^-1)]`` from the explicit d**2 x d**2 superoperator.

    With column-major vectorization ``vec(rho X sigma^-1) = (conj(sigma^-1) kron rho) vec(X)``
    the divergence is ``vec(sigma^1/2)^dagger f(M) vec(sigma^1/2)``.

    ``basis="eij"`` uses the eigenbasis ``E_ij = |p_i><q_j|`` with eigenvalues
    ``p_i / q_j``, after checking the eigen-equation on ``M`` itself, and projects
    ``vec(sigma^1/2)`` onto it.  ``basis="jacobi"`` diagonalizes ``M`` from scratch;
    its accuracy is limited by the conditioning of ``M``.  Requires full rank.
    """
    _check_dims(rho, sigma)
    if not (rho.is_full_rank() and sigma.is_full_rank()):
        raise RankDeficient("superoperator evaluation needs full-rank states")
    sigma_inv = hc.generalized_inverse(None, spectrum=sigma.spectrum)
    m = hc.hermitize(np.kron(sigma_inv.conj(), rho.matrix))
    root = hc.matfun(None, np.sqrt, spectrum=sigma.spectrum)
    vec = root.reshape(-1, order="F")
    if basis == "jacobi":
        return float(np.real(vec.conj() @ hc.matfun(m, gen.f) @ vec))
    if basis != "eij":
        raise ValidationError(f"unknown basis {basis!r}")
    # vec(|p_i><q_j|) = conj(q_j) kron p_i, ordered with i fastest
    w = np.kron(sigma.spectrum.eigenvectors.conj(), rho.spectrum.eigenvectors)
    eig = np.kron(1.0 / sigma.eigenvalues, rho.eigenvalues)
    residual = np.max(np.abs(m @ w - w * eig[None, :]))
    if residual > diag_tol * max(1.0, float(np.max(eig))):
        raise NumericalError(f"E_ij basis does not diagonalize the superoperator (residual {residual:.2e})")
    coef = np.abs(w.conj().T @ vec) ** 2
    return float(np.sum(coef * gen.f(eig)))


def mixture_divergence(gen: Generator, rho: DensityMatrix, sigma: DensityMatrix,
                       w: WeightMeasure = None, quad: QuadratureSpec = None) -> float:
    """``int w(lam) chi2_lambda(rho || sigma) dlam``; atoms contribute ``mass * chi2_{lam0}``."""
    _check_dims(rho, sigma)
    if not (rho.is_full_rank() and sigma.is_full_rank()):
        raise RankDeficient("mixture representation is evaluated for full-rank states only")
    w = analytic_weight(gen) if w is None else w
    quad = QuadratureSpec() if quad is None else quad
    joint = ns_pair(rho, sigma)
    p, q = joint.P.ravel(), joint.Q.ravel()

    def kernel(lam):
        return _chi2_terms(p, q, lam)

    total = 0.0
    for loc, mass in w.atoms:
        total += mass * float(kernel(loc)[0])
    if w.density is not None:
        dens = w.density
        total += integrate(lambda lam: dens(lam) * kernel(lam), 0.0, 1.0, quad, w.endpoint_exponents)
    if not math.isfinite(total):
        raise QuadratureFailure("mixture integral is not finite")
    return total


__all__ = [
    "ClassicalPair", "csiszar", "chi2_lambda_classical", "chi2_lambda_quantum",
    "petz_divergence", "petz_lr_superoperator", "mixture_divergence",
]
