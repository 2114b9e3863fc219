"""Nussbaum-Szkola classicalization of a pair of states.

For ``rho = sum_i p_i |p_i><p_i|`` and ``sigma = sum_j q_j |q_j><q_j|`` the
joint pmfs on index pairs are ``P(i,j) = p_i a_ij`` and ``Q(i,j) = q_j a_ij``
with ``a_ij = |<p_i|q_j>|^2``.  Petz divergences and the quantum chi2_lambda
kernels become ordinary classical quantities on ``(P, Q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .states import DensityMatrix, MomentTriple, Observable

OVERLAP_TOL = 1e-12
_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class NSJoint:
    p: np.ndarray  # spectrum of rho
    q: np.ndarray  # spectrum of sigma
    amplitudes: np.ndarray  # <p_i|q_j>, zeroed where the overlap was flushed
    overlaps: np.ndarray  # a_ij
    P: np.ndarray
    Q: np.ndarray

    @property
    def dims(self) -> tuple:
        return self.overlaps.shape

    @property
    def support_mask(self) -> np.ndarray:
        return self.overlaps > 0.0


@dataclass(frozen=True)
class NSObservable:
    theta: np.ndarray
    support_mask: np.ndarray

    def mean(self, weights: np.ndarray) -> complex:
        return complex(np.sum(weights * self.theta))

    def variance(self, weights: np.ndarray) -> float:
        """``E|Theta|^2 - |E Theta|^2`` under ``weights``."""
        m = self.mean(weights)
        return max(float(np.sum(weights * np.abs(self.theta) ** 2) - abs(m) ** 2), 0.0)


def _doubly_stochastic(a: np.ndarray, max_iter: int = 50) -> np.ndarray:
    for _ in range(max_iter):
        res = max(np.max(np.abs(a.sum(axis=0) - 1.0)), np.max(np.abs(a.sum(axis=1) - 1.0)))
        if res <= _RESIDUAL_TOL:
            break
        a = a / a.sum(axis=1, keepdims=True)
        a = a / a.sum(axis=0, keepdims=True)
    return a


def ns_pair(rho: DensityMatrix, sigma: DensityMatrix, overlap_tol: float = OVERLAP_TOL) -> NSJoint:
    """Build the NS joint distributions from the cached spectra of ``rho`` and ``sigma``."""
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    vr = rho.spectrum.eigenvectors
    vs = sigma.spectrum.eigenvectors
    amp = vr.conj().T @ vs
    a = np.abs(amp) ** 2
    flushed = a < overlap_tol**2
    a[flushed] = 0.0
    amp = np.where(flushed, 0.0, amp)
    a = _doubly_stochastic(a)
    p = rho.eigenvalues
    q = sigma.eigenvalues
    return NSJoint(
        p=p, q=q, amplitudes=amp, overlaps=a, P=p[:, None] * a, Q=q[None, :] * a
    )


def ns_observable(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    obs: Observable,
    overlap_tol: float = OVERLAP_TOL,
    joint: NSJoint = None,
) -> NSObservable:
    """Lift ``obs`` to ``Theta(i,j) = <p_i|theta|q_j> / <p_i|q_j>`` (0 off support)."""
    if joint is None:
        joint = ns_pair(rho, sigma, overlap_tol)
    if obs.dim != rho.dim:
        raise DimensionMismatch(f"observable has dim {obs.dim}, states have {rho.dim}")
    vr = rho.spectrum.eigenvectors
    vs = sigma.spectrum.eigenvectors
    num = vr.conj().T @ obs.matrix @ vs
    mask = joint.support_mask
    theta = np.zeros_like(num)
    theta[mask] = num[mask] / joint.amplitudes[mask]
    return NSObservable(theta=theta, support_mask=mask)


def ns_moment_triple(joint: NSJoint, lifted: NSObservable) -> MomentTriple:
    """Statistics of the lifted variable: real bias, complex variances under P and Q."""
    x = (lifted.mean(joint.P) - lifted.mean(joint.Q)).real
    return MomentTriple(x, lifted.variance(joint.P), lifted.variance(joint.Q))
