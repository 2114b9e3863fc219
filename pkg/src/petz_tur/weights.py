"""Mixing laws ``w_f`` of the chi2_lambda representation.

Conventions used throughout (the kernel identity that ties ``f`` to ``w_f``)::

    g(u) = f(u) / (u - 1)**2 = int_0^1 w_f(lam) / (lam + (1 - lam) u) dlam
    g(u) = int_0^inf phi_f(t) / (1 + t u) dt,      w_f(lam) = phi_f((1-lam)/lam) / lam

so that ``int w_f = f''(1)/2``, ``int w_f / lam = f(0+)`` and
``int w_f / (1 - lam) = lim f(u)/u`` for a generator centered at ``u = 1``.
``phi_f`` is recovered from boundary values of ``g`` just below the negative
real axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import BranchCutError, GridMismatch, UnsupportedGenerator, ValidationError
from .quadrature import QuadratureSpec, integrate

if TYPE_CHECKING:
    from .generators import Generator

log = logging.getLogger(__name__)

NEGATIVE_TOL = 1e-6
GRID_POINTS = 129


@dataclass(frozen=True)
class WeightMeasure:
    """Density part on (0, 1) plus a finite list of ``(location, mass)`` atoms.

    ``endpoint_exponents=(a, b)`` records ``density ~ lam**a (1 - lam)**b``
    near the endpoints; quadrature selection and the divergence flags of
    :func:`moment_checks` rely on it.  ``mirrored``, when given, evaluates
    the density at ``1 - mu`` without forming ``1 - mu`` in floating point,
    so that integrals singular at ``lam = 1`` keep full precision after
    :meth:`reflect`.
    """

    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    atoms: Tuple[Tuple[float, float], ...] = ()
    endpoint_exponents: Optional[Tuple[float, float]] = None
    mirrored: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        for loc, mass in self.atoms:
            if not 0.0 <= loc <= 1.0:
                raise ValidationError(f"atom location {loc} outside [0, 1]")
            if not mass > 0.0:
                raise ValidationError(f"atom mass must be positive, got {mass}")

    def density_at(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if self.density is None:
            return np.zeros_like(lam)
        return np.broadcast_to(np.asarray(self.density(lam), dtype=float), lam.shape).copy()

    def reflect(self) -> "WeightMeasure":
        """Weight of the dual generator: ``lam -> 1 - lam``."""
        if self.density is None:
            dens = mirror = None
        else:
            dens = self.mirrored if self.mirrored is not None else _reflected(self.density)
            mirror = self.density
        exps = None if self.endpoint_exponents is None else self.endpoint_exponents[::-1]
        return WeightMeasure(dens, tuple((1.0 - l, m) for l, m in self.atoms), exps, mirror)

    def scaled(self, c: float) -> "WeightMeasure":
        if c < 0:
            raise ValidationError("weights only scale by nonnegative factors")
        if c == 0:
            return WeightMeasure()
        dens = None if self.density is None else _scaled(self.density, c)
        mirror = None if self.mirrored is None else _scaled(self.mirrored, c)
        return WeightMeasure(dens, tuple((l, c * m) for l, m in self.atoms), self.endpoint_exponents, mirror)

    def __add__(self, other: "WeightMeasure") -> "WeightMeasure":
        if self.density is None:
            dens, exps, mirror = other.density, other.endpoint_exponents, other.mirrored
        elif other.density is None:
            dens, exps, mirror = self.density, self.endpoint_exponents, self.mirrored
        else:
            dens = _summed(self.density, other.density)
            e1, e2 = self.endpoint_exponents, other.endpoint_exponents
            exps = None if e1 is None or e2 is None else (min(e1[0], e2[0]), min(e1[1], e2[1]))
            mirror = None
            if self.mirrored is not None and other.mirrored is not None:
                mirror = _summed(self.mirrored, other.mirrored)
        merged = {}
        for loc, mass in self.atoms + other.atoms:
            merged[loc] = merged.get(loc, 0.0) + mass
        return WeightMeasure(dens, tuple(sorted(merged.items())), exps, mirror)

    def integrate(self, fn: Callable, quad: QuadratureSpec = None, atom_fn: Callable = None) -> float:
        """``int density * fn dlam + sum_k mass_k * atom_fn(loc_k)``; ``atom_fn`` defaults to ``fn``."""
        atom_fn = fn if atom_fn is None else atom_fn
        total = 0.0
        for loc, mass in self.atoms:
            total += mass * float(atom_fn(np.array([loc]))[0])
        if self.density is not None:
            dens = self.density
            total += integrate(lambda lam: dens(lam) * fn(lam), 0.0, 1.0, quad, self.endpoint_exponents)
        return total

    def total_mass(self, quad: QuadratureSpec = None) -> float:
        return self.integrate(np.ones_like, quad)


def _reflected(d):
    return lambda lam: d(1.0 - np.asarray(lam, dtype=float))


def _scaled(d, c):
    return lambda lam: c * np.asarray(d(lam), dtype=float)


def _summed(d1, d2):
    return lambda lam: np.asarray(d1(lam), dtype=float) + np.asarray(d2(lam), dtype=float)


class SampledDensity:
    """Density known on a grid of ``lam`` values; shape-preserving cubic in between."""

    def __init__(self, lam: np.ndarray, values: np.ndarray):
        order = np.argsort(lam)
        self.lam = np.asarray(lam, dtype=float)[order]
        self.values = np.asarray(values, dtype=float)[order]
        self._interp = PchipInterpolator(self.lam, self.values, extrapolate=True)

    def __call__(self, lam):
        return np.clip(self._interp(np.asarray(lam, dtype=float)), 0.0, None)


def analytic_weight(gen: "Generator") -> WeightMeasure:
    if gen.analytic_weight is None:
        raise UnsupportedGenerator(
            f"no analytic weight for generator {gen.name!r}; use numeric_weight instead"
        )
    return gen.analytic_weight


def chebyshev_grid(n: int = GRID_POINTS) -> np.ndarray:
    """First-kind Chebyshev points mapped to the open interval (0, 1), ascending."""
    if n < 1:
        raise ValidationError("grid must have at least one point")
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos((2 * k + 1) * np.pi / (2 * n)))


# -- Stieltjes inversion -----------------------------------------------------


@dataclass(frozen=True)
class InversionConfig:
    """Boundary offsets and extrapolation order for the Stieltjes inversion.

    With ``relative_offsets`` the offset at ``t`` is ``eps * min(1, 1/t)``,
    proportional to the distance from ``-1/t`` to the branch point at 0;
    otherwise ``eps`` is used as an absolute offset.
    """

    epsilons: Tuple[float, ...] = (1e-3, 5e-4, 2.5e-4)
    extrapolation_order: int = 2
    relative_offsets: bool = True

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            raise ValidationError("epsilons must be positive and strictly descending")
        if not 0 <= self.extrapolation_order < eps.size:
            raise ValidationError("extrapolation_order must be < number of epsilons")


def _extrapolation_weights(eps: np.ndarray) -> np.ndarray:
    """Lagrange weights evaluating the interpolant through ``eps`` at 0."""
    w = np.ones_like(eps)
    for k in range(eps.size):
        for m in range(eps.size):
            if m != k:
                w[k] *= eps[m] / (eps[m] - eps[k])
    return w


def boundary_samples(gen: "Generator", t: np.ndarray, eps: Sequence[float], scale=1.0) -> np.ndarray:
    """``Im g(-1/t - i eps scale) / (pi t)`` for every ``eps``; shape ``(len(eps), len(t))``."""
    t = np.asarray(t, dtype=float)
    rows = []
    with np.errstate(all="ignore"):
        for e in eps:
            z = -1.0 / t - 1j * e * scale
            val = np.asarray(gen.g_complex(z))
            if not np.all(np.isfinite(val)):
                bad = t[~np.isfinite(val)]
                raise BranchCutError(f"g is not finite near the cut at t={bad}")
            rows.append(val.imag / (np.pi * t))
    return np.array(rows)


def invert_weight(gen: "Generator", t_grid, cfg: InversionConfig = None) -> np.ndarray:
    """Sample ``phi_f(t)`` by extrapolating boundary values of ``g`` to ``eps -> 0``.

    The boundary bias of the Poisson-smoothed value is analytic in ``eps``, so
    polynomial extrapolation of order ``cfg.extrapolation_order`` through the
    leading epsilons removes it term by term.  Values in ``[-1e-6, 0)`` are
    clamped to 0; anything more negative is returned unchanged so callers can
    see that ``f`` is not operator convex.
    """
    cfg = InversionConfig() if cfg is None else cfg
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t <= 0):
        raise ValidationError("t grid must be positive")
    eps = np.asarray(cfg.epsilons[: cfg.extrapolation_order + 1], dtype=float)
    scale = np.minimum(1.0, 1.0 / t) if cfg.relative_offsets else 1.0
    samples = boundary_samples(gen, t, eps, scale)
    phi = _extrapolation_weights(eps) @ samples
    if np.any(phi < -NEGATIVE_TOL):
        log.warning("inverted weight of %s is negative (min %.3e)", gen.name, phi.min())
    return np.where((phi < 0) & (phi >= -NEGATIVE_TOL), 0.0, phi)


def weight_from_phi(phi_samples, t_grid, lam_grid=None, gen: "Generator" = None) -> WeightMeasure:
    """Turn ``phi`` samples into a sampled density ``w(lam) = phi(t) / lam``, ``t = (1-lam)/lam``.

    Without ``lam_grid`` every ``t`` maps to ``lam = 1/(1+t)``.  With it, each
    requested ``lam`` must have its image among ``t_grid``.  Point masses can
    not be seen by pointwise sampling, so atom-bearing generators are refused.
    """
    if gen is not None and gen.analytic_weight is not None and gen.analytic_weight.atoms:
        raise UnsupportedGenerator(f"{gen.name} carries atoms; numeric inversion cannot recover them")
    phi = np.asarray(phi_samples, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if phi.shape != t.shape:
        raise GridMismatch(f"phi has shape {phi.shape}, t grid has {t.shape}")
    if lam_grid is None:
        lam, vals = 1.0 / (1.0 + t), phi
    else:
        lam = np.asarray(lam_grid, dtype=float)
        need = (1.0 - lam) / lam
        idx = np.empty(lam.shape, dtype=int)
        for k, tn in enumerate(need):
            hits = np.flatnonzero(np.isclose(t, tn, rtol=1e-10, atol=0.0))
            if hits.size == 0:
                raise GridMismatch(f"t grid misses t={tn:.6g} (lam={lam[k]:.6g})")
            idx[k] = hits[0]
        vals = phi[idx]
    if lam.size < 2:
        raise GridMismatch("need at least two grid points to represent a density")
    return WeightMeasure(density=SampledDensity(lam, vals / lam))


def numeric_weight(gen: "Generator", lam_grid=None, cfg: InversionConfig = None) -> WeightMeasure:
    lam = chebyshev_grid() if lam_grid is None else np.asarray(lam_grid, dtype=float)
    t = (1.0 - lam) / lam
    if gen.analytic_weight is not None and gen.analytic_weight.atoms:
        raise UnsupportedGenerator(f"{gen.name} carries atoms; numeric inversion cannot recover them")
    return weight_from_phi(invert_weight(gen, t, cfg), t, lam, gen)


# -- moment identities -------------------------------------------------------


def taylor_coefficients(fc: Callable, center: float = 1.0, radius: float = 0.5, n_points: int = 64):
    """Taylor coefficients of an analytic ``fc`` at ``center`` by the trapezoidal Cauchy integral."""
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    vals = np.asarray(fc(center + radius * np.exp(1j * theta)), dtype=complex)
    coef = np.fft.fft(vals) / n_points
    return (coef / radius ** np.arange(n_points)).real


@dataclass(frozen=True)
class MomentCheck:
    name: str
    weight_side: float
    generator_side: float
    match: bool
    diverges: bool = False


@dataclass
class MomentReport:
    generator: str
    checks: List[MomentCheck] = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(c.match for c in self.checks)

    def __getitem__(self, name: str) -> MomentCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _compare(name, lhs, rhs, rel) -> MomentCheck:
    if math.isinf(lhs) or math.isinf(rhs):
        both = math.isinf(lhs) and math.isinf(rhs) and (lhs > 0) == (rhs > 0)
        return MomentCheck(name, lhs, rhs, both, diverges=both)
    return MomentCheck(name, lhs, rhs, abs(lhs - rhs) <= rel * abs(rhs) + 1e-12)


def _singular_moment(w: WeightMeasure, end: int) -> Optional[float]:
    """``inf`` when ``int w / lam`` (end=0) or ``int w / (1-lam)`` (end=1) diverges, else None."""
    target = 0.0 if end == 0 else 1.0
    if any(loc == target for loc, _ in w.atoms):
        return math.inf
    if w.density is not None and w.endpoint_exponents is not None and w.endpoint_exponents[end] <= 0:
        return math.inf
    return None


def moment_checks(w: WeightMeasure, gen: "Generator", quad: QuadratureSpec = None,
                  n_max: int = 4, rel: float = 1e-6) -> MomentReport:
    """Endpoint, mass and Taylor moments of ``w`` against the generator-side values."""
    quad = QuadratureSpec() if quad is None else quad
    rep = MomentReport(gen.name)
    f1, d1 = gen.f_at_1, gen.f_prime_at_1

    lhs = _singular_moment(w, 0)
    if lhs is None:
        lhs = w.integrate(lambda lam: 1.0 / lam, quad)
    rep.checks.append(_compare("f(0+)", lhs, gen.f_at_0_plus - f1 + d1, rel))

    lhs = _singular_moment(w, 1)
    if lhs is None:
        lhs = w.reflect().integrate(lambda mu: 1.0 / mu, quad)
    rep.checks.append(_compare("lim f(u)/u", lhs, gen.slope_at_inf - d1, rel))

    coef = taylor_coefficients(gen.f_complex)
    for n in range(2, n_max + 1):
        k = n - 2
        lhs = (-1) ** k * w.integrate(lambda lam, k=k: (1.0 - lam) ** k, quad)
        label = "mass" if n == 2 else f"taylor[{n}]"
        rep.checks.append(_compare(label, lhs, float(coef[n]), rel))
    return rep


def small_contrast_partial_sum(w: WeightMeasure, eps: float, n_max: int = 40,
                               quad: QuadratureSpec = None) -> float:
    """``sum_{n=2}^{n_max} (-1)**n * int (1-lam)**(n-2) w dlam * eps**n``."""
    total = 0.0
    for n in range(2, n_max + 1):
        k = n - 2
        m = w.integrate(lambda lam, k=k: (1.0 - lam) ** k, quad)
        total += (-1) ** k * m * eps**n
    return total
