import math

import numpy as np
import pytest

import btq
from btq.quadrature import torus_grid_size
from oracles import sphere_gram_entry


def gram(rule, m):
    un = btq.build_basis(rule.model, m).normed(rule.nodes)
    return un.conj().T @ (rule.weights[:, None] * un)


def test_sphere_rule_volume_all_levels():
    for m in range(1, 129):
        rule = btq.sphere_rule(m)
        assert math.fsum(rule.weights) == pytest.approx(2 * math.pi, rel=1e-14)
        assert np.all(rule.weights > 0)


@pytest.mark.parametrize("tau", [1j, 0.5 + 1.5j, 0.1 + 0.4j])
def test_torus_rule_volume(tau):
    model = btq.KahlerModel.torus(tau)
    for m in (1, 8, 64, 128):
        assert btq.integrate(btq.torus_rule(model, m=m), np.ones(len(btq.torus_rule(model, m=m)))) \
            == pytest.approx(2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("m", [1, 2, 7, 16, 50, 128])
def test_sphere_gram_matches_beta_integrals(m):
    g = gram(btq.sphere_rule(m), m)
    want = np.array([sphere_gram_entry(m, k) for k in range(m + 1)])
    assert np.allclose(np.diag(g).real, want, rtol=1e-12, atol=0)
    off = g - np.diag(np.diag(g))
    # off-diagonals vanish relative to the geometric mean of the diagonals
    scale = np.sqrt(np.outer(want, want))
    assert np.abs(off / scale).max() <= 1e-13


@pytest.mark.parametrize("m", [1, 3, 16, 64])
def test_torus_gram_closed_form(torus, m):
    g = gram(btq.torus_rule(torus, m=m), m)
    want = 2 * math.pi / math.sqrt(2 * m)  # Gaussian integral over the fundamental domain
    assert np.abs(g - want * np.eye(m)).max() <= 1e-13 * want


@pytest.mark.parametrize("tau", [0.5 + 1.5j, -0.3 + 0.6j])
def test_torus_gram_grid_convergence(tau):
    model = btq.KahlerModel.torus(tau)
    m = 12
    rule = btq.torus_rule(model, m=m)
    n = rule.shape[0]
    g1, g2 = gram(rule, m), gram(btq.torus_rule(model, N=2 * n, m=m), m)
    assert np.abs(g1 - g2).max() <= 1e-13 * np.abs(g2).max()
    # theta_0 and theta_1 are orthogonal
    assert abs(g2[0, 1]) <= 1e-14 * abs(g2[0, 0])
    want = 2 * math.pi / math.sqrt(2 * m * tau.imag)
    assert np.allclose(np.diag(g2).real, want, rtol=1e-13)


def test_sphere_rule_polynomial_exactness(atoms):
    x1, x2, x3 = atoms
    # |S^2| = 2 pi here, so the mean of x3^2 is 1/3 and of x3^4 is 1/5
    rule = btq.sphere_rule(4, extra_degree=4)
    assert btq.integrate(rule, x3(rule.nodes) ** 2).real == pytest.approx(2 * math.pi / 3, rel=1e-14)
    assert btq.integrate(rule, x3(rule.nodes) ** 4).real == pytest.approx(2 * math.pi / 5, rel=1e-14)
    assert abs(btq.integrate(rule, x1(rule.nodes) * x2(rule.nodes))) <= 1e-15


def test_sphere_rule_resolves_weighted_products(atoms):
    # <b_j, f b_k> with f of degree D integrates exactly: compare against a much finer rule
    m, D = 10, 3
    x1, _, x3 = atoms
    f = lambda z: x1(z) * x3(z) ** 2
    def mat(rule):
        un = btq.build_basis(rule.model, m).normed(rule.nodes)
        return un.conj().T @ ((rule.weights * f(rule.nodes))[:, None] * un)
    a = mat(btq.sphere_rule(m, D))
    b = mat(btq.sphere_rule(m, D + 20))
    assert np.abs(a - b).max() <= 1e-14
    # an observable well beyond the rule's capacity is visibly aliased
    f = lambda z: x1(z) ** 8
    assert np.abs(mat(btq.sphere_rule(m, 0)) - mat(btq.sphere_rule(m, 30))).max() > 1e-6


def test_torus_grid_doubling_for_modes(torus):
    m = 8
    f = btq.fourier_atom(torus, "c", 3, -2)
    def mat(rule):
        un = btq.build_basis(torus, m).normed(rule.nodes)
        return un.conj().T @ ((rule.weights * f(rule.nodes))[:, None] * un)
    rule = btq.torus_rule(torus, m=m, order=5)
    assert rule.capacity >= 5
    a, b = mat(rule), mat(btq.torus_rule(torus, N=2 * rule.shape[0], m=m))
    assert np.abs(a - b).max() <= 1e-14


def test_grid_size_rules(torus):
    assert torus_grid_size(torus, 1) == 16
    assert torus_grid_size(torus, 128) % 2 == 0
    assert torus_grid_size(torus, 64, order=4) == torus_grid_size(torus, 64) + 8
    with pytest.raises(ValueError):
        btq.torus_rule(torus, N=2)
    with pytest.raises(ValueError):
        btq.torus_rule(btq.KahlerModel.sphere(), m=2)
    with pytest.raises(ValueError):
        btq.sphere_rule(0)


def test_integrate_properties(rng):
    rule = btq.sphere_rule(6)
    a, b = rng.normal(size=len(rule)), rng.normal(size=len(rule)) + 1j
    assert btq.integrate(rule, 2 * a - 3 * b) == pytest.approx(
        2 * btq.integrate(rule, a) - 3 * btq.integrate(rule, b), rel=1e-13)
    # compensated summation: catastrophic cancellation is handled exactly
    big = np.zeros(len(rule))
    big[0], big[1], big[2] = 1e16 / rule.weights[0], 1.0 / rule.weights[1], -1e16 / rule.weights[2]
    assert abs(btq.integrate(rule, big) - 1.0) < 1e-8
    with pytest.raises(ValueError):
        btq.integrate(rule, np.ones(len(rule) + 1))


def test_default_rule_and_describe(sphere, torus):
    r = btq.default_rule(sphere, 8, 2)
    assert r.describe()["exact_degree"] == 10 and r.capacity == 2
    t = btq.default_rule(torus, 8, 3)
    assert t.describe()["rule"] == "trapezoidal" and t.capacity >= 3
