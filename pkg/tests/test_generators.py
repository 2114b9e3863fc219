import math

import numpy as np
import pytest

from petz_tur import generators as G
from petz_tur.errors import InvalidAlpha, UnsupportedGenerator
from petz_tur.states import DensityMatrix, random_density

from conftest import CATALOG, CATALOG_IDS

U = np.geomspace(0.1, 10.0, 61)


def test_kl_and_pearson_values():
    assert abs(G.kl()(2.0) - (2 * math.log(2) - 1)) <= 1e-15
    assert abs(G.kl()(2.0) - 0.386294) <= 1e-6
    assert G.pearson()(3.0) == 4.0
    assert abs(G.hellinger()(4.0) - 0.5) <= 1e-15
    assert abs(G.triangular()(3.0) - 1.0) <= 1e-15


@pytest.mark.parametrize("gen", CATALOG, ids=CATALOG_IDS)
def test_normalization(gen):
    assert gen(1.0) == 0.0
    h = 1e-5
    slope = (gen(1.0 + h) - gen(1.0 - h)) / (2 * h)
    assert abs(slope - gen.f_prime_at_1) <= 1e-8


@pytest.mark.parametrize("gen", CATALOG, ids=CATALOG_IDS)
def test_endpoint_values(gen):
    assert gen(0.0) == gen.f_at_0_plus
    if math.isfinite(gen.f_at_0_plus):
        # renyi:0.25 approaches its limit like u**0.25
        assert abs(gen.f_real(np.array(1e-40)) - gen.f_at_0_plus) <= 1e-8
    if math.isfinite(gen.slope_at_inf):
        assert abs(gen(1e40) / 1e40 - gen.slope_at_inf) <= 1e-8


@pytest.mark.parametrize("gen", CATALOG, ids=CATALOG_IDS)
def test_convexity(gen):
    u = np.linspace(0.05, 20.0, 400)
    second = gen(u[2:]) - 2 * gen(u[1:-1]) + gen(u[:-2])
    assert np.all(second >= -1e-12)


@pytest.mark.parametrize("gen", CATALOG, ids=CATALOG_IDS)
def test_double_dual(gen):
    back = G.dual(G.dual(gen))
    assert back.name == gen.name
    assert np.max(np.abs(back(U) - gen(U))) <= 1e-12


def test_dual_identities():
    assert np.max(np.abs(G.dual(G.kl())(U) - G.rkl()(U))) <= 1e-12
    assert np.max(np.abs(G.dual(G.jeffreys())(U) - G.jeffreys()(U))) <= 1e-12
    assert np.max(np.abs(G.dual(G.pearson())(U) - G.neyman()(U))) <= 1e-12
    d = G.dual(G.kl())
    assert d.f_at_0_plus == math.inf and d.slope_at_inf == 1.0
    lam = np.linspace(0.01, 0.99, 7)
    assert np.allclose(d.analytic_weight.density_at(lam), 1.0 - lam)


def test_sym_renyi_is_sum():
    for a in (0.25, 0.4):
        s = G.sym_renyi(a)
        assert np.max(np.abs(s(U) - G.renyi(a)(U) - G.renyi(1 - a)(U))) <= 1e-12


def _rel_gap(a, b):
    return np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))


def test_renyi_limits():
    assert _rel_gap(G.renyi(0.999)(U), G.kl()(U)) <= 1e-2
    assert _rel_gap(G.renyi(0.001)(U), G.rkl()(U)) <= 1e-2


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_invalid_alpha(alpha):
    with pytest.raises(InvalidAlpha):
        G.renyi(alpha)


def test_by_name():
    assert G.by_name("kl").name == "kl"
    assert G.by_name("renyi:0.25").alpha == 0.25
    assert G.by_name("sym_renyi:0.3").name == "sym_renyi:0.3"
    with pytest.raises(InvalidAlpha):
        G.by_name("renyi:x")
    with pytest.raises(InvalidAlpha):
        G.by_name("renyi:1.5")
    with pytest.raises(UnsupportedGenerator):
        G.by_name("bogus")


def test_catalog_sizes():
    assert len(G.catalog()) == 9
    assert len(G.expanded_catalog()) == 13
    assert len({g.name for g in G.expanded_catalog()}) == 13


def test_center():
    assert G.center(G.kl()) is G.kl() or G.center(G.kl()).name == "kl"
    assert G.center(G.pearson()).name == "pearson"
    raw = G.Generator("ulogu", lambda u: u * np.log(u), lambda z: z * np.log(z), 1.0, 0.0, math.inf)
    c = G.center(raw)
    assert c(1.0) == 0.0 and c.f_prime_at_1 == 0.0
    assert c.f_at_0_plus == 1.0
    assert np.allclose(c(U), G.kl()(U), atol=1e-14)


def test_affine_shift_keeps_weight():
    base = G.kl()
    s = G.affine_shift(base, 0.3, -0.7)
    assert s.analytic_weight is base.analytic_weight
    assert np.allclose(s(U), G.kl()(U) + 0.3 - 0.7 * (U - 1), atol=1e-14)
    assert abs(s(1.0) - 0.3) <= 1e-15


def test_linear_combination():
    lc = G.linear_combination([G.kl(), G.rkl()], [0.5, 0.5])
    assert np.allclose(lc(U), G.jeffreys()(U), atol=1e-14)
    lam = np.linspace(0.05, 0.95, 9)
    assert np.allclose(lc.analytic_weight.density_at(lam), 0.5, atol=1e-15)


def test_closed_forms_zero_on_equal_states(rng):
    rho = random_density(3, rng)
    for gen in CATALOG:
        if gen.closed_form is None:
            continue
        assert abs(G.closed_form_divergence(gen, rho, rho)) <= 1e-10


def test_closed_form_examples():
    r, s = DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0]))
    assert abs(G.closed_form_divergence(G.hellinger(), r, s) - 1.0) <= 1e-15
    assert G.closed_form_divergence(G.kl(), r, s) == math.inf
    assert G.closed_form_divergence(G.pearson(), r, s) == math.inf
    p, q = np.array([0.2, 0.3, 0.5]), np.array([0.4, 0.4, 0.2])
    val = G.closed_form_divergence(G.kl(), DensityMatrix(np.diag(p)), DensityMatrix(np.diag(q)))
    assert abs(val - np.sum(p * np.log(p / q))) <= 1e-10
    with pytest.raises(UnsupportedGenerator):
        G.closed_form_divergence(G.triangular(), r, r)


def test_dual_closed_form_swaps_arguments(rng):
    rho, sigma = random_density(2, rng), random_density(2, rng)
    a = G.closed_form_divergence(G.dual(G.kl()), rho, sigma)
    assert abs(a - G.relative_entropy(sigma, rho)) <= 1e-12
