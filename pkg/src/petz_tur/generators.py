"""Catalog of f-divergence generators and their quantum closed forms.

Every catalog entry is tangent-normalized, ``f(1) = f'(1) = 0``.  The
Petz-Renyi family uses the convex sign

    f_alpha(u) = (u**alpha - 1 - alpha (u - 1)) / (alpha (alpha - 1)),

whose divergence is ``(1 - Tr[rho**alpha sigma**(1-alpha)]) / (alpha (1-alpha)) >= 0``.

Complex evaluation (``f_complex``/``g_complex``) uses principal branches of
``log`` and powers, with the cut on the negative real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import hermitian as hc
from .errors import InvalidAlpha, UnsupportedGenerator, ValidationError
from .states import DensityMatrix, _check_dims
from .weights import WeightMeasure

INF = math.inf


@dataclass(frozen=True)
class Generator:
    name: str
    f_real: Callable[[np.ndarray], np.ndarray]
    f_complex: Callable[[np.ndarray], np.ndarray]
    f_prime_at_1: float
    f_at_0_plus: float
    slope_at_inf: float
    f_at_1: float = 0.0
    alpha: Optional[float] = None
    analytic_weight: Optional[WeightMeasure] = None
    closed_form: Optional[str] = None

    def f(self, u):
        """Vectorized ``f`` on ``[0, inf)``; exact at ``u = 1`` and ``u = 0``."""
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.f_real(u), dtype=float)
        out = np.where(u == 1.0, self.f_at_1, out)
        out = np.where(u == 0.0, self.f_at_0_plus, out)
        return out[()] if out.ndim == 0 else out

    __call__ = f

    def g(self, u):
        u = np.asarray(u, dtype=float)
        return self.f(u) / (u - 1.0) ** 2

    def g_complex(self, z):
        z = np.asarray(z, dtype=complex)
        return self.f_complex(z) / (z - 1.0) ** 2

    @property
    def has_atoms(self) -> bool:
        return self.analytic_weight is not None and bool(self.analytic_weight.atoms)

    def __repr__(self) -> str:
        return f"Generator({self.name!r})"


# -- entries -----------------------------------------------------------------


def _unit(lam):
    return np.ones_like(np.asarray(lam, dtype=float))


def kl() -> Generator:
    return Generator(
        "kl",
        lambda u: u * np.log(u) - (u - 1.0),
        lambda z: z * np.log(z) - (z - 1.0),
        0.0, 1.0, INF,
        analytic_weight=WeightMeasure(
            lambda lam: np.asarray(lam, dtype=float), endpoint_exponents=(1, 0),
            mirrored=lambda mu: 1.0 - np.asarray(mu, dtype=float),
        ),
        closed_form="kl",
    )


def rkl() -> Generator:
    return Generator(
        "rkl",
        lambda u: -np.log(u) + (u - 1.0),
        lambda z: -np.log(z) + (z - 1.0),
        0.0, INF, 1.0,
        analytic_weight=WeightMeasure(
            lambda lam: 1.0 - np.asarray(lam, dtype=float), endpoint_exponents=(0, 1),
            mirrored=lambda mu: np.asarray(mu, dtype=float),
        ),
        closed_form="rkl",
    )


def jeffreys() -> Generator:
    """Symmetrized relative entropy ``(kl + rkl) / 2 = (u - 1) log(u) / 2``."""
    return Generator(
        "jeffreys",
        lambda u: 0.5 * (u - 1.0) * np.log(u),
        lambda z: 0.5 * (z - 1.0) * np.log(z),
        0.0, INF, INF,
        analytic_weight=WeightMeasure(
            lambda lam: 0.5 * _unit(lam), endpoint_exponents=(0, 0), mirrored=lambda mu: 0.5 * _unit(mu)
        ),
        closed_form="jeffreys",
    )


def pearson() -> Generator:
    return Generator(
        "pearson",
        lambda u: (u - 1.0) ** 2,
        lambda z: (z - 1.0) ** 2,
        0.0, 1.0, INF,
        analytic_weight=WeightMeasure(atoms=((1.0, 1.0),)),
        closed_form="pearson",
    )


def neyman() -> Generator:
    return Generator(
        "neyman",
        lambda u: (u - 1.0) ** 2 / u,
        lambda z: (z - 1.0) ** 2 / z,
        0.0, INF, 1.0,
        analytic_weight=WeightMeasure(atoms=((0.0, 1.0),)),
        closed_form="neyman",
    )


def hellinger() -> Generator:
    return Generator(
        "hellinger",
        lambda u: 0.5 * (np.sqrt(u) - 1.0) ** 2,
        lambda z: 0.5 * (np.sqrt(z) - 1.0) ** 2,
        0.0, 0.5, 0.5,
        analytic_weight=WeightMeasure(
            _hellinger_density, endpoint_exponents=(0.5, 0.5), mirrored=_hellinger_density
        ),
        closed_form="hellinger",
    )


def _hellinger_density(lam):
    lam = np.asarray(lam, dtype=float)
    return np.sqrt(lam * (1.0 - lam)) / np.pi


def triangular() -> Generator:
    return Generator(
        "triangular",
        lambda u: (u - 1.0) ** 2 / (u + 1.0),
        lambda z: (z - 1.0) ** 2 / (z + 1.0),
        0.0, 1.0, 1.0,
        analytic_weight=WeightMeasure(atoms=((0.5, 0.5),)),
    )


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _renyi_density(alpha, left=None):
    """``c lam**alpha (1-lam)**(1-alpha)``; with ``left`` swapped, the mirrored form."""
    c = math.sin(math.pi * alpha) / (math.pi * alpha * (1.0 - alpha))
    a, b = (alpha, 1.0 - alpha) if left is None else (1.0 - alpha, alpha)

    def density(lam):
        lam = np.asarray(lam, dtype=float)
        return c * lam**a * (1.0 - lam) ** b

    return density


def renyi(alpha: float) -> Generator:
    a = _check_alpha(alpha)
    den = a * (a - 1.0)
    return Generator(
        f"renyi:{a:g}",
        lambda u: (u**a - 1.0 - a * (u - 1.0)) / den,
        lambda z: (z**a - 1.0 - a * (z - 1.0)) / den,
        0.0, 1.0 / a, 1.0 / (1.0 - a),
        alpha=a,
        analytic_weight=WeightMeasure(
            _renyi_density(a), endpoint_exponents=(a, 1.0 - a), mirrored=_renyi_density(a, left=True)
        ),
        closed_form="renyi",
    )


def sym_renyi(alpha: float) -> Generator:
    a = _check_alpha(alpha)
    fa, fb = renyi(a), renyi(1.0 - a)
    wa, wb = fa.analytic_weight, fb.analytic_weight
    return Generator(
        f"sym_renyi:{a:g}",
        lambda u: fa.f_real(u) + fb.f_real(u),
        lambda z: fa.f_complex(z) + fb.f_complex(z),
        0.0, fa.f_at_0_plus + fb.f_at_0_plus, fa.slope_at_inf + fb.slope_at_inf,
        alpha=a,
        analytic_weight=wa + wb,
        closed_form="sym_renyi",
    )


def catalog(alpha: float = 0.5) -> List[Generator]:
    """The nine catalog generators, Renyi entries at ``alpha``."""
    return [kl(), rkl(), pearson(), neyman(), hellinger(), triangular(),
            renyi(alpha), sym_renyi(alpha), jeffreys()]


def expanded_catalog(alphas: Sequence[float] = (0.25, 0.5, 0.75)) -> List[Generator]:
    """Catalog with one Renyi and one symmetric Renyi entry per ``alpha``."""
    gens = [kl(), rkl(), pearson(), neyman(), hellinger(), triangular(), jeffreys()]
    gens += [renyi(a) for a in alphas] + [sym_renyi(a) for a in alphas]
    return gens


_SIMPLE = {
    "kl": kl, "rkl": rkl, "jeffreys": jeffreys, "pearson": pearson,
    "neyman": neyman, "hellinger": hellinger, "triangular": triangular,
}


def by_name(spec: str) -> Generator:
    """Parse ``kl | rkl | ... | renyi:<alpha> | sym_renyi:<alpha>``."""
    name, _, arg = spec.strip().partition(":")
    if name in _SIMPLE and not arg:
        return _SIMPLE[name]()
    if name in ("renyi", "sym_renyi"):
        try:
            alpha = float(arg)
        except ValueError:
            raise InvalidAlpha(f"{name} needs a numeric alpha, got {arg!r}") from None
        return renyi(alpha) if name == "renyi" else sym_renyi(alpha)
    raise UnsupportedGenerator(f"unknown generator {spec!r}")


# -- transformations ---------------------------------------------------------


def dual(gen: Generator) -> Generator:
    """``f*(u) = u f(1/u)``; the weight is reflected ``lam -> 1 - lam``."""
    f, fc = gen.f_real, gen.f_complex
    if gen.closed_form is None:
        tag = None
    elif gen.closed_form.startswith("dual:"):
        tag = gen.closed_form[5:]
    else:
        tag = "dual:" + gen.closed_form
    name = gen.name[5:-1] if gen.name.startswith("dual(") and gen.name.endswith(")") else f"dual({gen.name})"
    return Generator(
        name,
        lambda u: u * f(1.0 / u),
        lambda z: z * fc(1.0 / z),
        gen.f_at_1 - gen.f_prime_at_1,
        gen.slope_at_inf,
        gen.f_at_0_plus,
        f_at_1=gen.f_at_1,
        alpha=gen.alpha,
        analytic_weight=None if gen.analytic_weight is None else gen.analytic_weight.reflect(),
        closed_form=tag,
    )


def affine_shift(gen: Generator, a: float, b: float) -> Generator:
    """``f + a + b (u - 1)``: same weight, divergence shifted by ``a``."""
    f, fc = gen.f_real, gen.f_complex
    return Generator(
        f"{gen.name}{a:+g}{b:+g}(u-1)",
        lambda u: f(u) + a + b * (u - 1.0),
        lambda z: fc(z) + a + b * (z - 1.0),
        gen.f_prime_at_1 + b,
        gen.f_at_0_plus + a - b,
        gen.slope_at_inf + b,
        f_at_1=gen.f_at_1 + a,
        alpha=gen.alpha,
        analytic_weight=gen.analytic_weight,
    )


def center(gen: Generator) -> Generator:
    """``f(u) - f(1) - f'(1) (u - 1)``."""
    if not math.isfinite(gen.f_prime_at_1):
        raise ValidationError(f"{gen.name}: f'(1) must be finite to center")
    if gen.f_at_1 == 0.0 and gen.f_prime_at_1 == 0.0:
        return gen
    shifted = affine_shift(gen, -gen.f_at_1, -gen.f_prime_at_1)
    return replace(shifted, name=f"center({gen.name})", f_at_1=0.0, f_prime_at_1=0.0)


def linear_combination(gens: Sequence[Generator], coeffs: Sequence[float], name: str = None) -> Generator:
    """``sum_k c_k f_k`` for ``c_k >= 0``; weights combine linearly."""
    gens, coeffs = list(gens), [float(c) for c in coeffs]
    if len(gens) != len(coeffs) or not gens:
        raise ValidationError("need one coefficient per generator")
    if any(c < 0 for c in coeffs):
        raise ValidationError("coefficients must be nonnegative")

    def comb(attr):
        return sum(c * getattr(g, attr) if c else 0.0 for g, c in zip(gens, coeffs))

    weight = None
    if all(g.analytic_weight is not None for g in gens):
        weight = WeightMeasure()
        for g, c in zip(gens, coeffs):
            weight = weight + g.analytic_weight.scaled(c)
    parts = [(g.f_real, g.f_complex, c) for g, c in zip(gens, coeffs)]
    return Generator(
        name or "+".join(f"{c:g}*{g.name}" for g, c in zip(gens, coeffs)),
        lambda u: sum(c * fr(u) for fr, _, c in parts),
        lambda z: sum(c * fcx(z) for _, fcx, c in parts),
        comb("f_prime_at_1"), comb("f_at_0_plus"), comb("slope_at_inf"),
        f_at_1=comb("f_at_1"),
        analytic_weight=weight,
    )


# -- quantum closed forms ----------------------------------------------------

_SUPPORT_TOL = 1e-12


def _outside_support(rho: DensityMatrix, sigma: DensityMatrix) -> bool:
    """True when ``rho`` has weight outside the support of ``sigma``."""
    perp = np.eye(sigma.dim) - sigma.support_projector()
    return float(np.trace(perp @ rho.matrix).real) > _SUPPORT_TOL


def _power(state: DensityMatrix, p: float) -> np.ndarray:
    return hc.matfun(None, lambda x: np.clip(x, 0.0, None) ** p, spectrum=state.spectrum)


def _tr(a, b) -> float:
    return float(np.real(np.trace(a @ b)))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``Tr[rho (log rho - log sigma)]``; infinite unless ``supp rho`` lies in ``supp sigma``."""
    if _outside_support(rho, sigma):
        return INF
    p = rho.eigenvalues
    p = p[p > 0]
    ent = float(np.sum(p * np.log(p)))
    log_sigma = hc.matfun(None, np.log, kernel_cutoff=sigma.rank_tol, spectrum=sigma.spectrum)
    return ent - _tr(rho.matrix, log_sigma)


def pearson_closed(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``Tr(rho^2 sigma^{-1}) - 1`` with the generalized inverse."""
    if _outside_support(rho, sigma):
        return INF
    inv = hc.generalized_inverse(None, spectrum=sigma.spectrum)
    return _tr(rho.matrix @ rho.matrix, inv) - 1.0


def hellinger_closed(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    return 1.0 - _tr(_power(rho, 0.5), _power(sigma, 0.5))


def renyi_overlap(rho: DensityMatrix, sigma: DensityMatrix, alpha: float) -> float:
    """``Tr[rho**alpha sigma**(1-alpha)]``."""
    return _tr(_power(rho, alpha), _power(sigma, 1.0 - alpha))


def renyi_closed(rho, sigma, alpha) -> float:
    return (1.0 - renyi_overlap(rho, sigma, alpha)) / (alpha * (1.0 - alpha))


_CLOSED = {
    "kl": lambda g, r, s: relative_entropy(r, s),
    "rkl": lambda g, r, s: relative_entropy(s, r),
    "jeffreys": lambda g, r, s: 0.5 * (relative_entropy(r, s) + relative_entropy(s, r)),
    "pearson": lambda g, r, s: pearson_closed(r, s),
    "neyman": lambda g, r, s: pearson_closed(s, r),
    "hellinger": lambda g, r, s: hellinger_closed(r, s),
    "renyi": lambda g, r, s: renyi_closed(r, s, g.alpha),
    "sym_renyi": lambda g, r, s: renyi_closed(r, s, g.alpha) + renyi_closed(r, s, 1.0 - g.alpha),
}


def closed_form_divergence(gen: Generator, rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Evaluate ``D_f(rho || sigma)`` by the spectral formula named in ``gen.closed_form``."""
    _check_dims(rho, sigma)
    tag = gen.closed_form
    if tag is None:
        raise UnsupportedGenerator(f"{gen.name} has no closed form")
    if tag.startswith("dual:"):
        tag, (rho, sigma) = tag[5:], (sigma, rho)
    return _CLOSED[tag](gen, rho, sigma)
