"""Universal TUR lower bound, saturating binary pair and the Chapman-Robbins verifier.

For statistics ``(x, y, z)`` of an observable under ``(rho, sigma)`` the bound reads

    D_f(rho || sigma) >= int w_f(lam) h_lam(x, y, z) dlam,
    h_lam = x**2 / ((1 - lam) y + lam z + lam (1 - lam) x**2).

At the endpoints the certified convention is ``h_0 = 0`` and ``h_1 = x**2 / z``.
The continuous limit ``h_0 = x**2 / y`` is available through
``continuous_endpoints=True``; it matters only for weights with an atom at 0
(``neyman``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from .divergence import ClassicalPair, petz_divergence
from .errors import DegenerateTriple, DomainError, SupportViolation, ValidationError
from .generators import Generator
from .quadrature import QuadratureSpec, integrate
from .states import DensityMatrix, MomentTriple, Observable, _check_dims, _rng, moment_triple
from .weights import WeightMeasure, analytic_weight, chebyshev_grid

CURVE_POINTS = 33


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    return 0.0 if num == 0 else math.inf


def h_lambda(m: MomentTriple, lam, continuous_endpoints: bool = False):
    """Contrast ``h_lam(x, y, z)``; accepts a scalar or an array of ``lam``."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any((lam_arr < 0) | (lam_arr > 1)):
        raise ValidationError("lambda must lie in [0, 1]")
    x2 = m.x * m.x
    flat = np.atleast_1d(lam_arr).ravel()
    out = np.empty_like(flat)
    for k, l in enumerate(flat):
        if x2 == 0.0:
            out[k] = 0.0
        elif l == 0.0:
            out[k] = _ratio(x2, m.y) if continuous_endpoints else 0.0
        elif l == 1.0:
            out[k] = _ratio(x2, m.z)
        else:
            out[k] = x2 / ((1.0 - l) * m.y + l * m.z + l * (1.0 - l) * x2)
    out = out.reshape(lam_arr.shape)
    return float(out) if out.ndim == 0 else out


def _h_interior(m: MomentTriple):
    x2 = m.x * m.x

    def h(lam):
        return x2 / ((1.0 - lam) * m.y + lam * m.z + lam * (1.0 - lam) * x2)

    return h


def tur_bound(gen: Generator, m: MomentTriple, w: WeightMeasure = None, quad: QuadratureSpec = None,
              continuous_endpoints: bool = False) -> float:
    """``int w(lam) h_lam(m) dlam`` with atoms evaluated by :func:`h_lambda`."""
    if m.x == 0.0:
        return 0.0
    if m.y == 0.0 and m.z == 0.0:
        raise DomainError("bound undefined for y = z = 0 with x != 0")
    w = analytic_weight(gen) if w is None else w
    total = 0.0
    for loc, mass in w.atoms:
        total += mass * h_lambda(m, loc, continuous_endpoints)
    if w.density is not None:
        exps = w.endpoint_exponents
        # h ~ 1/lam at 0 when y = 0 (resp. 1/(1-lam) at 1 when z = 0)
        if exps is not None and ((m.y == 0.0 and exps[0] <= 0) or (m.z == 0.0 and exps[1] <= 0)):
            return math.inf
        dens, h = w.density, _h_interior(m)
        total += integrate(lambda lam: dens(lam) * h(lam), 0.0, 1.0, quad, exps)
    return total


@dataclass(frozen=True)
class BinaryPair:
    """Commuting two-level states ``diag(r, 1-r)``, ``diag(s, 1-s)`` and observable ``diag(u1, u2)``.

    ``r_bar`` and ``s_bar`` hold ``1 - r`` and ``1 - s`` computed without cancellation.
    """

    r: float
    s: float
    u1: float
    u2: float
    delta: float
    b: float
    v: float
    r_bar: float
    s_bar: float

    def states(self) -> Tuple[DensityMatrix, DensityMatrix, Observable]:
        rho = DensityMatrix(np.diag([self.r, self.r_bar]))
        sigma = DensityMatrix(np.diag([self.s, self.s_bar]))
        return rho, sigma, Observable(np.diag([self.u1, self.u2]))

    def classical(self) -> ClassicalPair:
        return ClassicalPair(np.array([self.r, self.r_bar]), np.array([self.s, self.s_bar]))

    def moments(self) -> MomentTriple:
        gap2 = (self.u2 - self.u1) ** 2
        return MomentTriple((self.r - self.s) * (self.u1 - self.u2),
                            gap2 * self.r * self.r_bar, gap2 * self.s * self.s_bar)


def _split(num: float, den: float, rest: float):
    """``(1/2 + num/den, 1/2 - num/den)`` where ``den**2 - 4 num**2 = rest``, cancellation-free."""
    big = 0.5 + abs(num) / den
    small = rest / (2.0 * den * (den + 2.0 * abs(num)))
    return (big, small) if num >= 0 else (small, big)


def saturating_pair(m: MomentTriple, sigma_mean: float = 0.0) -> BinaryPair:
    """Binary states matching ``(x, y, z)``; ``sigma_mean`` fixes the observable mean under sigma."""
    x, y, z = m.x, m.y, m.z
    if x == 0.0 or y <= 0.0 or z <= 0.0:
        raise DegenerateTriple(f"need x != 0 and y, z > 0, got {m.as_tuple()}")
    b = z - y
    x2 = x * x
    v = math.sqrt(b * b + 2.0 * x2 * (y + z) + x2 * x2) / (2.0 * abs(x))
    # r = 1/2 + (b + x^2)/(4 x v) and s = 1/2 + (b - x^2)/(4 x v); with D = 4|x|v,
    # D^2 - 4 (b + x^2)^2 = 16 x^2 y and D^2 - 4 (b - x^2)^2 = 16 x^2 z
    sign = 1.0 if x > 0 else -1.0
    den = 4.0 * abs(x) * v
    r, r_bar = _split(sign * (b + x2), den, 16.0 * x2 * y)
    s, s_bar = _split(sign * (b - x2), den, 16.0 * x2 * z)
    if not (0.0 < r < 1.0 and 0.0 < s < 1.0):
        raise DegenerateTriple(f"binary pair left the open simplex: r={r}, s={s}")
    # (r - s)(u1 - u2) = x and r - s = x / (2v) give u1 - u2 = 2v
    u2 = sigma_mean - 2.0 * v * s
    u1 = u2 + 2.0 * v
    return BinaryPair(r, s, u1, u2, x, b, v, r_bar, s_bar)


@dataclass(frozen=True)
class TURReport:
    generator: str
    divergence: float
    bound: float
    slack: float
    moments: MomentTriple
    saturating_pair: Optional[BinaryPair]
    lambda_curve: Tuple[Tuple[float, float], ...] = field(default=())
    atom_terms: Tuple[Tuple[float, float], ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "divergence": self.divergence,
            "bound": self.bound,
            "slack": self.slack,
            "moments": dict(zip("xyz", self.moments.as_tuple())),
            "saturating_pair": None if self.saturating_pair is None else asdict(self.saturating_pair),
            "lambda_curve": [list(p) for p in self.lambda_curve],
            "atom_terms": [list(p) for p in self.atom_terms],
        }


def _slack(div: float, bound: float) -> float:
    if math.isinf(div):
        return math.inf
    return div - bound


def tur_report(gen: Generator, rho: DensityMatrix, sigma: DensityMatrix, obs: Observable,
               quad: QuadratureSpec = None, w: WeightMeasure = None,
               continuous_endpoints: bool = False, curve_points: int = CURVE_POINTS) -> TURReport:
    """Divergence (NS evaluation), TUR bound and slack for one observable."""
    _check_dims(rho, sigma, obs)
    w = analytic_weight(gen) if w is None else w
    m = moment_triple(rho, sigma, obs)
    div = petz_divergence(gen, rho, sigma)
    bound = tur_bound(gen, m, w, quad, continuous_endpoints)
    try:
        pair = saturating_pair(m)
    except DegenerateTriple:
        pair = None
    curve = ()
    if w.density is not None and curve_points > 0:
        lam = chebyshev_grid(curve_points)
        vals = w.density_at(lam) * h_lambda(m, lam, continuous_endpoints)
        curve = tuple(zip(lam.tolist(), vals.tolist()))
    atoms = tuple((loc, mass * h_lambda(m, loc, continuous_endpoints)) for loc, mass in w.atoms)
    return TURReport(gen.name, div, bound, _slack(div, bound), m, pair, curve, atoms)


# -- Chapman-Robbins ---------------------------------------------------------

VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class ChapmanRobbinsReport:
    chi2: float
    optimal_ratio: float
    max_random_ratio: float
    trials: int
    rejected: int
    tol: float

    @property
    def attained(self) -> bool:
        return abs(self.optimal_ratio - self.chi2) <= self.tol

    @property
    def bounded(self) -> bool:
        return self.max_random_ratio <= self.chi2 + self.tol

    @property
    def passed(self) -> bool:
        return self.attained and self.bounded


def _cr_ratios(p, q, theta):
    """Squared bias over variance under Q, row by row of ``theta``."""
    bias = theta @ (p - q)
    mean_q = theta @ q
    var_q = ((theta - mean_q[:, None]) ** 2) @ q
    return bias**2, var_q


def chapman_robbins_verify(pair: ClassicalPair, trials: int = 1000, seed=0, tol: float = 1e-10) -> ChapmanRobbinsReport:
    """Check ``chi2(P||Q) = sup_Theta (E_P Theta - E_Q Theta)**2 / Var_Q Theta``."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    p, q = pair.P, pair.Q
    if np.any((q == 0) & (p > 0)):
        raise SupportViolation("P is not absolutely continuous with respect to Q")
    live = q > 0
    chi2 = float(np.sum((p[live] - q[live]) ** 2 / q[live]))
    opt = np.zeros_like(p)
    opt[live] = p[live] / q[live]
    num, var = _cr_ratios(p, q, opt[None, :])
    optimal = float(num[0] / var[0]) if var[0] > VAR_FLOOR else 0.0
    theta = _rng(seed).standard_normal((trials, p.size))
    num, var = _cr_ratios(p, q, theta)
    ok = var >= VAR_FLOOR
    best = float(np.max(num[ok] / var[ok])) if ok.any() else 0.0
    return ChapmanRobbinsReport(chi2, optimal, best, trials, int((~ok).sum()), tol)
