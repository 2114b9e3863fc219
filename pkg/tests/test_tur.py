import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petz_tur import generators as G
from petz_tur.divergence import ClassicalPair, chi2_lambda_classical, chi2_lambda_quantum
from petz_tur.errors import DegenerateTriple, DomainError, SupportViolation, ValidationError
from petz_tur.states import MomentTriple, Observable, moment_triple, random_density, random_observable
from petz_tur.tur import chapman_robbins_verify, h_lambda, saturating_pair, tur_bound, tur_report

from conftest import CATALOG, CATALOG_IDS


def test_h_lambda_examples():
    assert h_lambda(MomentTriple(0.0, 1.0, 2.0), 0.4) == 0.0
    assert h_lambda(MomentTriple(2.0, 3.0, 4.0), 1.0) == 1.0
    assert abs(h_lambda(MomentTriple(1.0, 1.0, 1.0), 0.5) - 0.8) <= 1e-15
    m = MomentTriple(1.0, 0.5, 2.0)
    assert h_lambda(m, 0.0) == 0.0
    assert h_lambda(m, 0.0, continuous_endpoints=True) == 2.0
    assert np.array_equal(h_lambda(m, np.array([0.0, 1.0])), [0.0, 0.5])
    with pytest.raises(ValidationError):
        h_lambda(m, 1.2)


def test_h_lambda_monotone_in_variances():
    lam = np.linspace(0.05, 0.95, 10)
    a = h_lambda(MomentTriple(1.0, 0.5, 0.5), lam)
    b = h_lambda(MomentTriple(1.0, 0.7, 0.5), lam)
    c = h_lambda(MomentTriple(1.0, 0.5, 0.9), lam)
    assert np.all(b < a) and np.all(c < a)


def test_bound_examples():
    m = MomentTriple(1.5, 0.3, 0.7)
    assert tur_bound(G.pearson(), m) == 1.5**2 / 0.7
    # half of h_{1/2} = 1 / (0.5 + 0.5 + 0.25)
    assert abs(tur_bound(G.triangular(), MomentTriple(1.0, 1.0, 1.0)) - 0.4) <= 1e-15
    assert tur_bound(G.kl(), MomentTriple(0.0, 0.0, 0.0)) == 0.0
    assert tur_bound(G.neyman(), m) == 0.0
    assert tur_bound(G.neyman(), m, continuous_endpoints=True) == 1.5**2 / 0.3
    with pytest.raises(DomainError):
        tur_bound(G.kl(), MomentTriple(1.0, 0.0, 0.0))


def test_bound_divergence_with_zero_variance():
    assert tur_bound(G.rkl(), MomentTriple(1.0, 0.0, 1.0)) == math.inf
    assert math.isfinite(tur_bound(G.kl(), MomentTriple(1.0, 0.0, 1.0)))


def test_saturating_pair_example():
    pair = saturating_pair(MomentTriple(1.0, 0.25, 0.25))
    assert pair.b == 0.0
    assert abs(pair.v - math.sqrt(2) / 2) <= 1e-15
    assert abs(pair.r - 0.853553) <= 1e-6 and abs(pair.s - 0.146447) <= 1e-6
    assert abs((pair.u2 - pair.u1) ** 2 - 2.0) <= 1e-14
    assert abs(pair.r + pair.r_bar - 1) <= 1e-15 and abs(pair.s + pair.s_bar - 1) <= 1e-15


def test_saturating_pair_sigma_mean():
    pair = saturating_pair(MomentTriple(0.7, 0.2, 0.4), sigma_mean=3.0)
    assert abs(pair.s * pair.u1 + pair.s_bar * pair.u2 - 3.0) <= 1e-14


@pytest.mark.parametrize("bad", [(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)])
def test_saturating_pair_degenerate(bad):
    with pytest.raises(DegenerateTriple):
        saturating_pair(MomentTriple(*bad))


def test_swap_symmetry():
    m = MomentTriple(0.8, 0.3, 1.1)
    a = saturating_pair(m)
    b = saturating_pair(MomentTriple(-m.x, m.z, m.y))
    assert abs(a.r - b.s) <= 1e-14 and abs(a.s - b.r) <= 1e-14
    assert abs(abs(a.u1 - a.u2) - abs(b.u1 - b.u2)) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-20, 20).filter(lambda v: abs(v) > 1e-3),
       y=st.floats(1e-4, 20), z=st.floats(1e-4, 20), mean=st.floats(-5, 5))
def test_saturating_pair_properties(x, y, z, mean):
    m = MomentTriple(x, y, z)
    pair = saturating_pair(m, mean)
    got = pair.moments()
    for a, b in zip(got.as_tuple(), m.as_tuple()):
        assert abs(a - b) <= 1e-9 * max(1.0, abs(b))
    assert abs(pair.r * pair.r_bar * (pair.u2 - pair.u1) ** 2 - y) <= 1e-9 * max(1.0, y)
    cp = pair.classical()
    for lam in (0.0, 0.2, 0.5, 0.9, 1.0):
        h = h_lambda(m, lam, continuous_endpoints=True)
        assert abs(chi2_lambda_classical(cp, lam) - h) <= 1e-9 * max(1.0, h)


def test_report_identical_states(rng):
    rho, obs = random_density(3, rng), random_observable(3, rng)
    rep = tur_report(G.kl(), rho, rho, obs)
    assert rep.divergence == 0.0 and rep.bound == 0.0 and rep.slack == 0.0
    assert rep.saturating_pair is None


def test_report_saturation_example():
    rho, sigma, obs = saturating_pair(MomentTriple(1.0, 0.25, 0.25)).states()
    rep = tur_report(G.kl(), rho, sigma, obs)
    assert abs(rep.slack) <= 1e-6
    assert len(rep.lambda_curve) == 33
    d = rep.to_dict()
    assert set(d["moments"]) == {"x", "y", "z"} and d["saturating_pair"]["r"] == rep.saturating_pair.r


@pytest.mark.parametrize("gen", CATALOG, ids=CATALOG_IDS)
def test_slack_nonnegative(rng, gen):
    for k in range(20):
        d = 2 + k % 2
        rho, sigma, obs = random_density(d, rng), random_density(d, rng), random_observable(d, rng)
        assert tur_report(gen, rho, sigma, obs, curve_points=0).slack >= -1e-8


def test_bound_invariant_under_affine_observable(rng):
    rho, sigma, obs = random_density(3, rng), random_density(3, rng), random_observable(3, rng)
    m1 = moment_triple(rho, sigma, obs)
    m2 = moment_triple(rho, sigma, Observable(-2.5 * obs.matrix + 0.7 * np.eye(3)))
    for gen in (G.kl(), G.hellinger(), G.triangular()):
        a, b = tur_bound(gen, m1), tur_bound(gen, m2)
        assert abs(a - b) <= 1e-9 * max(1.0, a)


def test_pointwise_dominance(rng):
    # h_lam <= chi2_lam for every lam, and the bound follows weight order
    rho, sigma, obs = random_density(3, rng), random_density(3, rng), random_observable(3, rng)
    m = moment_triple(rho, sigma, obs)
    for lam in np.linspace(0.0, 1.0, 11):
        assert h_lambda(m, lam) <= chi2_lambda_quantum(rho, sigma, lam) + 1e-12
    lc = G.linear_combination([G.kl(), G.hellinger()], [1.0, 1.0])
    assert tur_bound(lc, m) >= tur_bound(G.kl(), m)
    assert abs(tur_bound(G.jeffreys(), m) - 0.5 * (tur_bound(G.kl(), m) + tur_bound(G.rkl(), m))) <= 1e-10


def test_chapman_robbins_examples():
    rep = chapman_robbins_verify(ClassicalPair([0.8, 0.2], [0.5, 0.5]))
    assert abs(rep.chi2 - 0.36) <= 1e-15 and abs(rep.optimal_ratio - 0.36) <= 1e-12
    assert rep.passed
    same = chapman_robbins_verify(ClassicalPair([0.3, 0.7], [0.3, 0.7]), trials=100)
    assert same.chi2 == 0.0 and same.max_random_ratio <= 1e-25 and same.passed


def test_chapman_robbins_random(rng):
    for _ in range(10):
        pair = ClassicalPair(rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5)))
        rep = chapman_robbins_verify(pair, trials=100, seed=rng)
        assert rep.passed


def test_chapman_robbins_errors():
    with pytest.raises(SupportViolation):
        chapman_robbins_verify(ClassicalPair([0.5, 0.5], [1.0, 0.0]))
    with pytest.raises(ValidationError):
        chapman_robbins_verify(ClassicalPair([0.5, 0.5], [0.5, 0.5]), trials=0)
