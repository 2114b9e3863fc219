"""Dense complex Hermitian linear algebra built on cyclic Jacobi rotations.

Everything downstream (spectra of states, matrix functions, the generalized
inverse) goes through :func:`eigh` here, so no LAPACK eigensolver is used on
the library path.  The matrices in play are small (d <= 25), where Jacobi is
both fast enough and accurate in the relative sense for small eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, DomainError, NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-10
MAX_SWEEPS = 60


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self, values: Optional[np.ndarray] = None) -> np.ndarray:
        """Return ``V diag(values) V^dagger`` (defaults to the eigenvalues)."""
        lam = self.eigenvalues if values is None else np.asarray(values)
        v = self.eigenvectors
        return (v * lam) @ v.conj().T


def as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_residual(m) -> float:
    a = as_square(m)
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_residual(m) <= tol


def hermitize(m) -> np.ndarray:
    a = as_square(m)
    return 0.5 * (a + a.conj().T)


def eigh(m, tol: float = HERMITIAN_TOL, max_sweeps: int = MAX_SWEEPS) -> SpectralDecomposition:
    """Diagonalize a complex Hermitian matrix by cyclic Jacobi sweeps.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the classical real rotation, so the accumulated transform stays
    unitary.  Sweeps stop once the off-diagonal Frobenius norm falls below
    ``1e-15`` of the total norm.

    Raises
    ------
    NotHermitian
        If ``max|m - m^dagger| > tol``.
    NoConvergence
        If ``max_sweeps`` sweeps do not reach the stopping threshold.
    """
    a = as_square(m)
    if hermiticity_residual(a) > tol:
        raise NotHermitian(f"matrix is not Hermitian within {tol:g}")
    a = hermitize(a).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return SpectralDecomposition(np.real(np.diag(a)).copy(), v)

    stop = 1e-15 * scale
    skip = 1e-18 * scale
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.abs(a[iu]) ** 2))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                h = abs(apq)
                if h <= skip:
                    continue
                phase = apq / h
                theta = (a[q, q].real - a[p, p].real) / (2.0 * h)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ph = phase.conjugate()
                app = a[p, p].real - t * h
                aqq = a[q, q].real + t * h

                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * ph * colq
                a[:, q] = s * colp + c * ph * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * phase * rowq
                a[q, :] = s * rowp + c * phase * rowq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app
                a[q, q] = aqq

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * ph * vq
                v[:, q] = s * vp + c * ph * vq
    else:
        off = np.sqrt(2.0 * np.sum(np.abs(a[iu]) ** 2))
        if off > stop:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")

    lam = np.real(np.diag(a))
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(lam[order].copy(), v[:, order].copy())


def matfun(
    m,
    scalar_fn: Callable[[np.ndarray], np.ndarray],
    tol: float = HERMITIAN_TOL,
    kernel_cutoff: Optional[float] = None,
    spectrum: Optional[SpectralDecomposition] = None,
) -> np.ndarray:
    """Apply ``scalar_fn`` to the spectrum of a Hermitian matrix.

    With ``kernel_cutoff`` set, eigenvalues ``<= kernel_cutoff`` are mapped to
    0 instead of being passed through ``scalar_fn`` (useful for ``log`` and
    negative powers on rank-deficient states).  Passing a precomputed
    ``spectrum`` skips the diagonalization.
    """
    spec = eigh(m, tol) if spectrum is None else spectrum
    lam = spec.eigenvalues
    out = np.zeros_like(lam)
    live = np.ones(lam.shape, dtype=bool) if kernel_cutoff is None else lam > kernel_cutoff
    with np.errstate(all="ignore"):
        vals = np.asarray(scalar_fn(lam[live]), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = lam[live][~np.isfinite(vals)]
        raise DomainError(f"scalar function undefined at eigenvalue(s) {bad}")
    out[live] = vals
    return hermitize(spec.reconstruct(out))


def default_rank_tol(eigenvalues: np.ndarray) -> float:
    return 1e-12 * max(float(np.max(np.abs(eigenvalues))), 0.0)


def generalized_inverse(
    m, rank_tol: Optional[float] = None, spectrum: Optional[SpectralDecomposition] = None
) -> np.ndarray:
    """Moore-Penrose inverse of a Hermitian PSD matrix on its numerical support.

    Eigenvalues ``<= rank_tol`` (default ``1e-12`` times the largest
    eigenvalue) are sent to 0, the rest to their reciprocal.
    """
    spec = eigh(m) if spectrum is None else spectrum
    cut = default_rank_tol(spec.eigenvalues) if rank_tol is None else rank_tol
    return matfun(None, lambda x: 1.0 / x, kernel_cutoff=cut, spectrum=spec)


def trace(m) -> complex:
    return complex(np.trace(as_square(m)))
