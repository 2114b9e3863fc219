"""Property battery behind ``petz-tur verify``.

Each suite draws its randomness from ``SeedSequence([seed, suite_index, trial])``,
so results do not depend on scheduling.  Suites may run on a thread pool
whose size is capped by ``PETZ_TUR_THREADS``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import generators as G
from .divergence import ClassicalPair, chi2_lambda_classical, mixture_divergence, petz_divergence, petz_lr_superoperator
from .errors import PetzTurError, ValidationError
from .states import MomentTriple, random_density, random_observable
from .tur import chapman_robbins_verify, h_lambda, saturating_pair, tur_report
from .weights import WeightMeasure, chebyshev_grid, invert_weight, moment_checks

THREADS_ENV = "PETZ_TUR_THREADS"

SUITES = (
    "ns_equality", "mixture_identity", "tur_slack", "saturation_pair", "saturation",
    "duality", "moments", "chapman_robbins", "inversion",
)


@dataclass(frozen=True)
class VerifyConfig:
    trials: int = 10
    seed: int = 0
    alphas: tuple = (0.25, 0.5, 0.75)
    threads: Optional[int] = None
    # test hook: generator name whose analytic density is scaled by 1.1
    broken_weight: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    passed: int = 0
    failed: int = 0
    worst_residual: Optional[float] = None
    failures: List[str] = field(default_factory=list)

    def record(self, residual: float, label: str) -> None:
        """Residuals are signed so that ``residual <= tolerance`` means pass."""
        if not math.isnan(residual):
            cur = self.worst_residual
            self.worst_residual = residual if cur is None else max(cur, residual)
        if residual <= self.tolerance:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 5:
                self.failures.append(label)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def to_dict(self) -> dict:
        return {
            "failed": self.failed,
            "failures": self.failures,
            "ok": self.ok,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "worst_residual": self.worst_residual,
        }


def _rng(cfg: VerifyConfig, suite: str, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, SUITES.index(suite), trial]))


def _weight(gen: G.Generator, cfg: VerifyConfig) -> WeightMeasure:
    w = gen.analytic_weight
    if cfg.broken_weight is not None and gen.name == cfg.broken_weight and w.density is not None:
        return WeightMeasure(lambda lam, d=w.density: 1.1 * d(lam), w.atoms, w.endpoint_exponents)
    if cfg.broken_weight is not None and gen.name == cfg.broken_weight:
        return WeightMeasure(atoms=tuple((l, 1.1 * m) for l, m in w.atoms))
    return w


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _catalog(cfg: VerifyConfig):
    return G.expanded_catalog(cfg.alphas)


def suite_ns_equality(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("ns_equality", 1e-9)
    for t in range(cfg.trials):
        rng = _rng(cfg, res.name, t)
        d = 2 + t % 4
        rho, sigma = random_density(d, rng), random_density(d, rng)
        for gen in _catalog(cfg):
            r = abs(petz_divergence(gen, rho, sigma) - petz_lr_superoperator(gen, rho, sigma))
            res.record(r, f"{gen.name} trial {t}")
    return res


def suite_mixture_identity(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("mixture_identity", 1e-6)
    gens = [G.kl(), G.rkl(), G.jeffreys(), G.hellinger()] + [G.renyi(a) for a in cfg.alphas]
    for t in range(cfg.trials):
        rng = _rng(cfg, res.name, t)
        d = 2 + t % 3
        rho, sigma = random_density(d, rng), random_density(d, rng)
        for gen in gens:
            mix = mixture_divergence(gen, rho, sigma, _weight(gen, cfg))
            res.record(_rel(mix, petz_divergence(gen, rho, sigma)), f"{gen.name} trial {t}")
    return res


def suite_tur_slack(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("tur_slack", 1e-8)
    for t in range(cfg.trials):
        rng = _rng(cfg, res.name, t)
        d = 2 + t % 2
        rho, sigma, obs = random_density(d, rng), random_density(d, rng), random_observable(d, rng)
        for gen in _catalog(cfg):
            rep = tur_report(gen, rho, sigma, obs, w=_weight(gen, cfg), curve_points=0)
            res.record(-rep.slack, f"{gen.name} trial {t}")
    return res


def random_triple(rng: np.random.Generator) -> MomentTriple:
    x = 0.0
    while x == 0.0:
        x = float(rng.normal(scale=2.0))
    return MomentTriple(x, float(rng.exponential()), float(rng.exponential()))


def suite_saturation_pair(cfg: VerifyConfig) -> SuiteResult:
    """Moment matching and ``chi2_lam(Bern(r) || Bern(s)) = h_lam`` (relative above 1)."""
    res = SuiteResult("saturation_pair", 1e-9)
    grid = np.linspace(0.0, 1.0, 33)
    for t in range(cfg.trials):
        rng = _rng(cfg, res.name, t)
        m = random_triple(rng)
        pair = saturating_pair(m, float(rng.normal()))
        r = max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(pair.moments().as_tuple(), m.as_tuple()))
        res.record(r, f"moments trial {t}")
        cp = pair.classical()
        for lam in grid:
            # the lam = 0 point compares against the continuous limit x^2/y
            h = h_lambda(m, lam, continuous_endpoints=True)
            res.record(abs(chi2_lambda_classical(cp, lam) - h) / max(1.0, h), f"lam={lam:g} trial {t}")
    return res


def suite_saturation(cfg: VerifyConfig) -> SuiteResult:
    """TUR slack of the saturating pair (neyman under continuous endpoints)."""
    res = SuiteResult("saturation", 1e-6)
    for t in range(cfg.trials):
        rng = _rng(cfg, res.name, t)
        rho, sigma, obs = saturating_pair(random_triple(rng)).states()
        for gen in _catalog(cfg):
            rep = tur_report(gen, rho, sigma, obs, w=_weight(gen, cfg),
                             continuous_endpoints=gen.name == "neyman", curve_points=0)
            res.record(abs(rep.slack) / max(1.0, rep.divergence), f"{gen.name} trial {t}")
    return res


def suite_duality(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("duality", 2e-6)
    u = np.geomspace(0.1, 10.0, 41)
    for gen in _catalog(cfg):
        back = G.dual(G.dual(gen))
        res.record(float(np.max(np.abs(back(u) - gen(u)))), f"dual(dual({gen.name}))")
    res.record(float(np.max(np.abs(G.dual(G.kl())(u) - G.rkl()(u)))), "dual(kl) vs rkl")
    res.record(float(np.max(np.abs(G.dual(G.pearson())(u) - G.neyman()(u)))), "dual(pearson) vs neyman")
    lam = chebyshev_grid(33)
    t_grid = (1.0 - lam) / lam
    phi_kl = invert_weight(G.kl(), t_grid) / lam
    phi_rkl_reflected = invert_weight(G.rkl(), lam / (1.0 - lam)) / (1.0 - lam)
    res.record(float(np.max(np.abs(phi_kl - phi_rkl_reflected))), "inverted kl vs reflected rkl")
    return res


def suite_moments(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("moments", 0.0)
    for gen in _catalog(cfg):
        rep = moment_checks(_weight(gen, cfg), gen)
        worst = 0.0
        for c in rep.checks:
            if not c.diverges and not c.match:
                worst = max(worst, _rel(c.weight_side, c.generator_side))
        res.record(0.0 if rep.all_match else max(worst, 1.0), gen.name)
    return res


def suite_chapman_robbins(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("chapman_robbins", 1e-10)
    for t in range(cfg.trials):
        rng = _rng(cfg, res.name, t)
        pair = ClassicalPair(rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5)))
        rep = chapman_robbins_verify(pair, trials=1000, seed=rng)
        res.record(abs(rep.optimal_ratio - rep.chi2), f"optimizer trial {t}")
        res.record(rep.max_random_ratio - rep.chi2, f"random search trial {t}")
    return res


def suite_inversion(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("inversion", 1e-3)
    t = np.array([0.1, 0.5, 1.0, 2.0, 10.0])
    gens = [G.kl(), G.rkl(), G.jeffreys(), G.hellinger()]
    gens += [G.renyi(a) for a in cfg.alphas] + [G.sym_renyi(a) for a in cfg.alphas]
    for gen in gens:
        w = _weight(gen, cfg)
        lam = 1.0 / (1.0 + t)
        expected = w.density_at(lam) * lam
        got = invert_weight(gen, t)
        res.record(float(np.max(np.abs(got - expected) / expected)), gen.name)
    return res


_RUNNERS: Dict[str, Callable[[VerifyConfig], SuiteResult]] = {
    "ns_equality": suite_ns_equality,
    "mixture_identity": suite_mixture_identity,
    "tur_slack": suite_tur_slack,
    "saturation_pair": suite_saturation_pair,
    "saturation": suite_saturation,
    "duality": suite_duality,
    "moments": suite_moments,
    "chapman_robbins": suite_chapman_robbins,
    "inversion": suite_inversion,
}


def thread_count(requested: Optional[int] = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, n)


def _run_one(name: str, cfg: VerifyConfig) -> SuiteResult:
    try:
        return _RUNNERS[name](cfg)
    except PetzTurError as exc:
        res = SuiteResult(name, 0.0)
        res.record(math.inf, f"{type(exc).__name__}: {exc}")
        return res


def run_battery(cfg: VerifyConfig = None, suites=SUITES) -> Dict[str, SuiteResult]:
    cfg = VerifyConfig() if cfg is None else cfg
    unknown = set(suites) - set(_RUNNERS)
    if unknown:
        raise ValidationError(f"unknown suites: {sorted(unknown)}")
    n = thread_count(cfg.threads)
    if n == 1:
        results = [_run_one(s, cfg) for s in suites]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda s: _run_one(s, cfg), suites))
    return {r.name: r for r in sorted(results, key=lambda r: r.name)}


def summary(results: Dict[str, SuiteResult], cfg: VerifyConfig) -> dict:
    return {
        "all_passed": all(r.ok for r in results.values()),
        "seed": cfg.seed,
        "suites": {name: r.to_dict() for name, r in sorted(results.items())},
        "trials": cfg.trials,
    }


def summary_json(results: Dict[str, SuiteResult], cfg: VerifyConfig) -> str:
    return json.dumps(summary(results, cfg), sort_keys=True, indent=2)
