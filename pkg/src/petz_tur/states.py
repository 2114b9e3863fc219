"""Validated quantum objects, random ensembles and observable statistics.

Composite systems use the ``numpy.kron`` (row-major) index convention: for
``A`` of dimension ``dA`` and ``B`` of dimension ``dB`` the joint basis index
is ``i_A * dB + i_B``.  Matrix files use the JSON layout
``{"dim": n, "re": [[...]], "im": [[...]]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import hermitian as hc
from .errors import DimensionMismatch, NotDensityMatrix, NotHermitian, ValidationError

CLAMP_TOL = 1e-12
IMAG_TOL = 1e-10


class Observable:
    """Hermitian operator ``theta``."""

    def __init__(self, matrix, tol: float = hc.HERMITIAN_TOL):
        a = hc.as_square(matrix)
        if hc.hermiticity_residual(a) > tol:
            raise NotHermitian(f"observable is not Hermitian within {tol:g}")
        self.matrix = hc.hermitize(a)
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> hc.SpectralDecomposition:
        return hc.eigh(self.matrix)

    def __repr__(self) -> str:
        return f"Observable(dim={self.dim})"


class DensityMatrix:
    """Positive semidefinite, unit-trace Hermitian matrix with cached spectrum.

    Eigenvalues in ``[-1e-12, 0)`` are treated as eigensolver noise: they are
    set to zero and the state is rebuilt with unit trace.  Anything more
    negative is rejected.
    """

    def __init__(self, matrix, tol: float = hc.HERMITIAN_TOL):
        a = hc.as_square(matrix)
        if hc.hermiticity_residual(a) > tol:
            raise NotHermitian(f"density matrix is not Hermitian within {tol:g}")
        a = hc.hermitize(a)
        tr = np.trace(a).real
        if abs(tr - 1.0) > tol:
            raise NotDensityMatrix(f"trace is {tr!r}, expected 1 within {tol:g}")
        spec = hc.eigh(a)
        lam = spec.eigenvalues
        if lam[0] < -CLAMP_TOL:
            raise NotDensityMatrix(f"negative eigenvalue {lam[0]:.3e}")
        if lam[0] < 0.0:
            lam = np.clip(lam, 0.0, None)
            lam = lam / lam.sum()
            spec = hc.SpectralDecomposition(lam, spec.eigenvectors)
            a = hc.hermitize(spec.reconstruct())
        self.matrix = a
        self.matrix.setflags(write=False)
        self.spectrum = spec

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def rank_tol(self) -> float:
        return hc.default_rank_tol(self.eigenvalues)

    def is_full_rank(self) -> bool:
        return bool(self.eigenvalues[0] > self.rank_tol)

    def support_projector(self) -> np.ndarray:
        keep = (self.eigenvalues > self.rank_tol).astype(float)
        return self.spectrum.reconstruct(keep)

    def expectation(self, op) -> float:
        m = op.matrix if isinstance(op, Observable) else np.asarray(op)
        val = np.trace(self.matrix @ m)
        if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
            raise ValidationError(f"expectation has imaginary part {val.imag:.3e}")
        return float(val.real)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, eigenvalues={np.round(self.eigenvalues, 6)})"


@dataclass(frozen=True)
class MomentTriple:
    """Mean gap ``x`` and variances ``y`` (first state) and ``z`` (second state)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.y < 0 or self.z < 0:
            raise ValidationError(f"variances must be nonnegative, got y={self.y}, z={self.z}")

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z)


def _check_dims(*objs) -> int:
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def _mean_var(state: DensityMatrix, theta: np.ndarray) -> tuple:
    rho = state.matrix
    mean = np.trace(rho @ theta)
    shifted = theta - mean.real * np.eye(theta.shape[0])
    var = np.trace(rho @ shifted @ shifted)
    for v in (mean, var):
        if abs(v.imag) > IMAG_TOL * max(1.0, abs(v.real)):
            raise ValidationError(f"moment has imaginary residue {v.imag:.3e}")
    return float(mean.real), max(float(var.real), 0.0)


def moment_triple(rho: DensityMatrix, sigma: DensityMatrix, obs: Observable) -> MomentTriple:
    """``(x, y, z) = (<theta>_rho - <theta>_sigma, Var_rho theta, Var_sigma theta)``."""
    _check_dims(rho, sigma, obs)
    m_r, y = _mean_var(rho, obs.matrix)
    m_s, z = _mean_var(sigma, obs.matrix)
    return MomentTriple(m_r - m_s, y, z)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)


def random_density(dim: int, seed) -> DensityMatrix:
    """Hilbert-Schmidt random state ``G G^dagger / Tr``; full rank almost surely."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    g = _ginibre(dim, _rng(seed))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar unitary from the QR factorization of a Ginibre matrix, phases fixed."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    q, r = np.linalg.qr(_ginibre(dim, _rng(seed)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_observable(dim: int, seed, scale: float = 1.0) -> Observable:
    """GUE-like Hermitian observable."""
    g = _ginibre(dim, _rng(seed))
    return Observable(scale * 0.5 * (g + g.conj().T))


def unitarity_residual(u) -> float:
    u = hc.as_square(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def evolve(state: DensityMatrix, u) -> DensityMatrix:
    u = hc.as_square(u)
    if u.shape[0] != state.dim:
        raise DimensionMismatch("unitary and state dimensions differ")
    return DensityMatrix(u @ state.matrix @ u.conj().T)


def tensor(*states: DensityMatrix) -> DensityMatrix:
    m = np.ones((1, 1), dtype=complex)
    for s in states:
        m = np.kron(m, s.matrix)
    return DensityMatrix(m)


def partial_trace(matrix, dims: Sequence[int], keep: int) -> np.ndarray:
    """Trace out all but subsystem ``keep`` of a bipartite (``len(dims) == 2``) operator."""
    a = np.asarray(matrix.matrix if hasattr(matrix, "matrix") else matrix, dtype=complex)
    if len(dims) != 2:
        raise ValidationError("partial_trace supports bipartite systems only")
    d_a, d_b = dims
    if a.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(f"shape {a.shape} does not factor as {d_a}x{d_b}")
    t = a.reshape(d_a, d_b, d_a, d_b)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise ValidationError("keep must be 0 or 1")


def pinch(state: DensityMatrix, obs: Observable, tol: float = 1e-9) -> DensityMatrix:
    """Dephase ``state`` in the eigenspaces of ``obs`` (eigenvalues closer than ``tol`` merge)."""
    _check_dims(state, obs)
    spec = obs.spectrum
    lam, v = spec.eigenvalues, spec.eigenvectors
    out = np.zeros_like(state.matrix)
    start = 0
    for k in range(1, len(lam) + 1):
        if k == len(lam) or lam[k] - lam[k - 1] > tol:
            proj = v[:, start:k] @ v[:, start:k].conj().T
            out += proj @ state.matrix @ proj
            start = k
    return DensityMatrix(out)


def diagonal_state(probs) -> DensityMatrix:
    return DensityMatrix(np.diag(np.asarray(probs, dtype=float)))


# -- JSON matrix files -------------------------------------------------------

MatrixSource = Union[str, Path, dict]


def matrix_to_json(m) -> dict:
    a = np.asarray(m.matrix if hasattr(m, "matrix") else m, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix object: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise DimensionMismatch(f"matrix entries must be {dim}x{dim}")
    return re + 1j * im


def load_matrix(src: MatrixSource) -> np.ndarray:
    if isinstance(src, dict):
        return matrix_from_json(src)
    try:
        obj = json.loads(Path(src).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{src}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    except OSError as exc:
        raise ValidationError(f"{src}: {exc.strerror}") from exc
    return matrix_from_json(obj)


def save_matrix(m, path) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m), sort_keys=True))
