"""Thermodynamic applications: entropy production and the nonequilibrium-lag CGF.

Lag CGF sign note
-----------------
``K(alpha) = ln Tr[rho_f**alpha rho'**(1-alpha)] <= 0`` always, and the TUR
for the Renyi generator gives ``1 - Tr[...] >= (sin(pi alpha)/pi) I`` with
``I = int lam**alpha (1-lam)**(1-alpha) h_lam dlam >= 0``.  The certified
statement is therefore the upper bound ``K <= ln[1 - (sin(pi alpha)/pi) I]``.
The lower-bound form ``ln[1 + (sin(pi alpha)/pi) I]`` is nonnegative and is
reported as ``stated_bound`` for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import hermitian as hc
from .errors import DimensionMismatch, RankDeficient, ValidationError
from .generators import Generator, kl, renyi, renyi_overlap
from .quadrature import QuadratureSpec
from .states import (
    DensityMatrix, Observable, _rng, matrix_from_json, moment_triple, partial_trace,
    random_density, random_observable, random_unitary, tensor, unitarity_residual,
)
from .tur import TURReport, tur_bound, tur_report

UNITARY_TOL = 1e-10


def _unitary(u, dim: int, name: str) -> np.ndarray:
    u = hc.as_square(u)
    if u.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dim {u.shape[0]}, expected {dim}")
    res = unitarity_residual(u)
    if res > UNITARY_TOL:
        raise ValidationError(f"{name} is not unitary (residual {res:.2e})")
    return u


def thermal_state(h: Observable, beta: float) -> DensityMatrix:
    """Gibbs state ``exp(-beta H) / Z`` (spectrum shifted for overflow safety)."""
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    spec = h.spectrum
    e0 = spec.eigenvalues[0]
    m = hc.matfun(None, lambda e: np.exp(-beta * (e - e0)), spectrum=spec)
    return DensityMatrix(m / np.trace(m).real)


# -- entropy production ------------------------------------------------------


@dataclass(frozen=True)
class EntropyProductionSetup:
    rho_S: DensityMatrix
    rho_E: DensityMatrix
    U: np.ndarray
    obs: Observable

    def __post_init__(self):
        dim = self.rho_S.dim * self.rho_E.dim
        object.__setattr__(self, "U", _unitary(self.U, dim, "U"))
        if self.obs.dim != dim:
            raise DimensionMismatch(f"observable has dim {self.obs.dim}, expected {dim}")

    @property
    def dims(self):
        return (self.rho_S.dim, self.rho_E.dim)


def entropy_production_states(setup: EntropyProductionSetup):
    """``(rho'_SE, rho'_S x rho_E)`` for the unitary process."""
    joint = tensor(setup.rho_S, setup.rho_E).matrix
    u = setup.U
    rho = DensityMatrix(u @ joint @ u.conj().T)
    rho_s = DensityMatrix(partial_trace(rho, setup.dims, keep=0))
    sigma = tensor(rho_s, setup.rho_E)
    perp = np.eye(sigma.dim) - sigma.support_projector()
    if float(np.trace(perp @ rho.matrix).real) > 1e-12:
        raise RankDeficient("support of the output state is not contained in that of the reference")
    return rho, sigma


def entropy_production(setup: EntropyProductionSetup, quad: QuadratureSpec = None,
                       gen: Generator = None, continuous_endpoints: bool = False) -> TURReport:
    """TUR report for ``Sigma = D(rho'_SE || rho'_S x rho_E)`` (``gen`` defaults to kl)."""
    rho, sigma = entropy_production_states(setup)
    gen = kl() if gen is None else gen
    return tur_report(gen, rho, sigma, setup.obs, quad, continuous_endpoints=continuous_endpoints)


def random_ep_setup(seed, dims=(2, 2), beta: float = 1.0) -> EntropyProductionSetup:
    """Random system state, thermal environment, Haar joint unitary and GUE observable."""
    rng = _rng(seed)
    d_s, d_e = dims
    rho_s = random_density(d_s, rng)
    rho_e = thermal_state(random_observable(d_e, rng), beta)
    u = random_unitary(d_s * d_e, rng)
    return EntropyProductionSetup(rho_s, rho_e, u, random_observable(d_s * d_e, rng))


# -- nonequilibrium lag ------------------------------------------------------


@dataclass(frozen=True)
class LagSetup:
    beta: float
    H_i: Observable
    H_f: Observable
    V: np.ndarray
    obs: Observable

    def __post_init__(self):
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        dim = self.H_i.dim
        if self.H_f.dim != dim or self.obs.dim != dim:
            raise DimensionMismatch("Hamiltonians and observable must share one dimension")
        object.__setattr__(self, "V", _unitary(self.V, dim, "V"))

    def states(self):
        """``(rho_f_th, rho')`` with ``rho' = V rho_i_th V^dagger``."""
        rho_f = thermal_state(self.H_f, self.beta)
        rho_i = thermal_state(self.H_i, self.beta)
        v = self.V
        return rho_f, DensityMatrix(v @ rho_i.matrix @ v.conj().T)


@dataclass(frozen=True)
class LagResult:
    alpha: float
    K_alpha: float
    integral: float  # int lam**alpha (1-lam)**(1-alpha) h_lam dlam
    bound: float  # ln[1 - sin(pi alpha)/pi * integral], an upper bound on K_alpha
    stated_bound: float  # ln[1 + sin(pi alpha)/pi * integral]
    renyi_divergence: float  # (1 - Tr[...]) / (alpha (1 - alpha))
    consistency_residual: float  # K - ln[1 - alpha(1-alpha) D_alpha]
    plus_sign_residual: float  # K - ln[1 + alpha(1-alpha) D_alpha]

    def bound_holds(self, tol: float = 1e-8) -> bool:
        return self.K_alpha <= self.bound + tol

    def stated_bound_holds(self, tol: float = 1e-8) -> bool:
        return self.K_alpha >= self.stated_bound - tol

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _safe_log(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def lag_cgf_bound(setup: LagSetup, alpha: float, quad: QuadratureSpec = None) -> LagResult:
    """Spectral ``K(alpha)`` against the TUR bound built from ``(rho_f_th, rho')`` statistics."""
    gen = renyi(alpha)
    a = gen.alpha
    rho_f, rho_p = setup.states()
    if not (rho_f.is_full_rank() and rho_p.is_full_rank()):
        raise RankDeficient("lag CGF needs full-rank states")
    overlap = renyi_overlap(rho_f, rho_p, a)
    k = _safe_log(overlap)
    m = moment_triple(rho_f, rho_p, setup.obs)
    c = math.sin(math.pi * a) / math.pi
    # the Renyi weight is sin(pi a)/(pi a (1-a)) lam^a (1-lam)^(1-a)
    integral = tur_bound(gen, m, quad=quad) * a * (1.0 - a) / c
    d_alpha = (1.0 - overlap) / (a * (1.0 - a))
    return LagResult(
        alpha=a,
        K_alpha=k,
        integral=integral,
        bound=_safe_log(1.0 - c * integral),
        stated_bound=math.log1p(c * integral),
        renyi_divergence=d_alpha,
        consistency_residual=k - _safe_log(1.0 - a * (1.0 - a) * d_alpha),
        plus_sign_residual=k - _safe_log(1.0 + a * (1.0 - a) * d_alpha),
    )


def lag_sweep(setup: LagSetup, alphas: Sequence[float] = tuple(np.round(np.arange(1, 10) / 10, 1)),
              quad: QuadratureSpec = None):
    return [lag_cgf_bound(setup, a, quad) for a in alphas]


def random_lag_setup(seed, dim: int = 2, beta: float = 1.0) -> LagSetup:
    rng = _rng(seed)
    return LagSetup(beta, random_observable(dim, rng), random_observable(dim, rng),
                    random_unitary(dim, rng), random_observable(dim, rng))


# -- JSON setup files --------------------------------------------------------


def _field(obj: dict, key: str):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise ValidationError(f"setup is missing field {key!r}") from None


def ep_setup_from_json(obj: dict) -> EntropyProductionSetup:
    return EntropyProductionSetup(
        DensityMatrix(matrix_from_json(_field(obj, "rho_S"))),
        DensityMatrix(matrix_from_json(_field(obj, "rho_E"))),
        matrix_from_json(_field(obj, "U")),
        Observable(matrix_from_json(_field(obj, "obs"))),
    )


def lag_setup_from_json(obj: dict) -> LagSetup:
    try:
        beta = float(_field(obj, "beta"))
    except (TypeError, ValueError):
        raise ValidationError("beta must be a number") from None
    return LagSetup(
        beta,
        Observable(matrix_from_json(_field(obj, "H_i"))),
        Observable(matrix_from_json(_field(obj, "H_f"))),
        matrix_from_json(_field(obj, "V")),
        Observable(matrix_from_json(_field(obj, "obs"))),
    )
