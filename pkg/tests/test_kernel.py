import numpy as np
import pytest
from scipy.special import gammaincc, gammaln

from fekete_lab.errors import CapabilityError, DomainWarning, IllConditionedError, ZeroModulusError
from fekete_lab.kernel import (GINIBRE, NUMERIC, WeightedPolynomial, berezin, bernstein_ratio,
                               build_kernel, bulk_modulus_predictor, eval_K, heat_kernel,
                               heat_kernel_disk_mass, kernel_diagonal, kernel_dimension,
                               kernel_matrix, offdiag_ratio, offdiag_ratio_grid,
                               random_weighted_poly, stable_partial_exp)
from fekete_lab.potential import ginibre, quartic
from fekete_lab.quadrature import QuadratureSpec, disk_rule

G = ginibre()


def _grid(lim=1.2, k=13):
    x = np.linspace(-lim, lim, k)
    z = (x[:, None] + 1j * x[None, :]).ravel()
    return z[np.abs(z) <= lim]


@pytest.mark.parametrize("n,rho,m", [(10, 1.0, 10), (10, 0.55, 5), (10, 0.5, 5), (7, 0.3, 2)])
def test_dimension(n, rho, m):
    assert kernel_dimension(n, rho) == m


def test_dimension_and_rho_errors():
    with pytest.raises(ValueError):
        build_kernel(G, 10, rho=2.5)
    with pytest.raises(CapabilityError):
        build_kernel(quartic(), 10, mode=GINIBRE)


def test_closed_form_basis_moments():
    # oracle: int |z|^(2k) e^{-m|z|^2} dA = k! / m^(k+1) by radial integration
    m = 10
    kern = build_kernel(G, m)
    nodes, w = disk_rule(0, 2.5, 200, 64)
    e = kern.weighted_basis(nodes)
    gram = (e.T * w) @ e.conj()
    assert np.allclose(gram, np.eye(m), atol=1e-12)
    k = np.arange(m)
    coef = np.exp(0.5 * ((k + 1) * np.log(m) - gammaln(k + 1)))
    z = 0.37 - 0.21j
    direct = coef * z ** k * np.exp(-m * abs(z) ** 2 / 2)
    assert np.allclose(kern.weighted_basis(z), direct, rtol=1e-13)


def test_eval_K_origin_and_hermitian(rng):
    for m in (1, 7, 300):
        assert eval_K(build_kernel(G, m), 0, 0) == pytest.approx(m)
    kern = build_kernel(G, 60)
    z = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    w = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    a = eval_K(kern, z, w)
    b = eval_K(kern, w, z)
    assert np.max(np.abs(a - np.conj(b))) <= 1e-12 * max(1.0, np.max(np.abs(a)))
    assert np.all(kernel_diagonal(kern, z) > 0)


@pytest.mark.parametrize("m", [5, 20, 30, 40])
def test_numeric_matches_closed_form(m):
    z = _grid()
    num = kernel_matrix(build_kernel(G, m, mode=NUMERIC), z, z)
    ref = eval_K(build_kernel(G, m), z[:, None], z[None, :])
    d = np.sqrt(np.real(np.diag(ref)))
    assert np.max(np.abs(num - ref) / np.outer(d, d)) <= 1e-8


def test_numeric_basis_orthonormal():
    kern = build_kernel(quartic(), 15)
    nodes, w = kern.quad.rule()
    e = kern.weighted_basis(nodes)
    assert np.allclose((e.T * w) @ e.conj(), np.eye(kern.m), atol=1e-8)


def test_ill_conditioned_signal():
    with pytest.raises(IllConditionedError) as ei:
        build_kernel(G, 60, mode=NUMERIC, quad=QuadratureSpec(4, 4, 2.5))
    assert ei.value.degree >= 1


def test_matrix_agrees_with_eval(rng):
    kern = build_kernel(G, 50)
    z = 0.5 * (rng.standard_normal(6) + 1j * rng.standard_normal(6))
    assert np.allclose(kernel_matrix(kern, z, z), eval_K(kern, z[:, None], z[None, :]),
                       rtol=1e-10, atol=1e-12)


def test_stable_partial_exp():
    lm, ph = stable_partial_exp(1, 3.7 + 2j)
    assert np.exp(lm) * ph == pytest.approx(1.0)
    lm, ph = stable_partial_exp(25, 0.0)
    assert np.exp(lm) * ph == pytest.approx(1.0)
    lm, ph = stable_partial_exp(40, 50.0, 50.0)
    assert np.exp(lm) * ph.real == pytest.approx(gammaincc(40, 50), rel=1e-12)
    # far beyond exp overflow
    lm, _ = stable_partial_exp(5000, 4000.0, 4000.0)
    assert np.exp(lm) == pytest.approx(gammaincc(5000, 4000), rel=1e-9)


def test_reproducing_property(rng):
    kern = build_kernel(G, 30)
    nodes, w = disk_rule(0, 2.5, 200, 128)
    z = 0.3 + 0.2j
    val = np.sum(w * np.abs(eval_K(kern, z, nodes)) ** 2)
    assert val == pytest.approx(kernel_diagonal(kern, z), rel=1e-8)
    f = random_weighted_poly(kern, 4)
    proj = np.sum(w * eval_K(kern, z, nodes) * f(nodes))
    assert abs(proj - f(z)) < 1e-6


def test_random_poly_norm():
    kern = build_kernel(G, 40)
    f = random_weighted_poly(kern, 11)
    nodes, w = disk_rule(0, 2.5, 200, 128)
    assert np.sum(w * np.abs(f(nodes)) ** 2) == pytest.approx(1.0, abs=1e-6)
    e0 = WeightedPolynomial(kern, np.eye(kern.m)[0])
    z = 0.4 - 0.1j
    assert e0(z) == pytest.approx(np.sqrt(40) * np.exp(-40 * abs(z) ** 2 / 2))


def test_maximum_principle(rng):
    # normalized so sup over the droplet is 1; exterior values obey the Qhat bound
    m = 40
    kern = build_kernel(G, m)
    f = random_weighted_poly(kern, 2)
    circle = np.exp(2j * np.pi * np.arange(2048) / 2048)
    inside = np.concatenate([circle, _grid(1.0, 41)])
    sup = np.max(np.abs(f(inside)))
    ext = (1.05 + rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
    bound = np.exp(-m * (G.q(ext) - G.q_hat(ext)) / 2)
    assert np.all(np.abs(f(ext)) / sup <= bound * (1 + 1e-6))


def test_bulk_predictor():
    import dataclasses
    import warnings

    # default margin log(m)^2/sqrt(m) exceeds the droplet radius at m=400
    with pytest.warns(DomainWarning):
        bulk_modulus_predictor(build_kernel(G, 400), 0.0, 0.0)
    desk = dataclasses.replace(G, bulk_margin_fn=lambda n: 1 / np.sqrt(n))
    kern = build_kernel(desk, 400)
    warnings.simplefilter("error", DomainWarning)
    assert bulk_modulus_predictor(kern, 0.0, 0.0) == pytest.approx(400)
    assert bulk_modulus_predictor(kern, 0.0, 0.1) == pytest.approx(400 * np.exp(-2))
    assert abs(eval_K(kern, 0.0, 0.1)) == pytest.approx(400 * np.exp(-2), rel=1e-12)
    assert bulk_modulus_predictor(kern, 0.0, 5.0) < 1e-300
    with pytest.warns(DomainWarning):
        bulk_modulus_predictor(kern, 0.99, 0.99)


def test_berezin_and_heat():
    kern = build_kernel(G, 100)
    zeta = 0.2
    nodes, w = disk_rule(zeta, 0.6, 64, 128)
    assert np.sum(w * berezin(kern, zeta, nodes)) == pytest.approx(1.0, abs=1e-6)
    assert berezin(kern, zeta, zeta) == pytest.approx(kernel_diagonal(kern, zeta))
    assert np.sum(w * heat_kernel(G, 100, zeta, nodes)) == pytest.approx(1.0, abs=1e-10)
    assert heat_kernel(G, 100, zeta, zeta) == pytest.approx(100)
    r = 2 / np.sqrt(100)
    nodes, w = disk_rule(zeta, r, 64, 64)
    mass = np.sum(w * heat_kernel(G, 100, zeta, nodes))
    assert mass == pytest.approx(1 - np.exp(-4), abs=1e-12)
    assert heat_kernel_disk_mass(G, zeta, 2.0) == pytest.approx(1 - np.exp(-4))


def test_berezin_close_to_heat_in_bulk():
    m = 400
    kern = build_kernel(G, m)
    d = np.log(m) ** 2 / np.sqrt(m)
    w = 0.1 + np.linspace(0, min(d, 0.5), 30)
    b = berezin(kern, 0.1, w)
    h = heat_kernel(G, m, 0.1, w)
    assert np.max(np.abs(b - h)) <= 1e-8 * m


def test_offdiag_ratio():
    kern = build_kernel(G, 100)
    assert offdiag_ratio(kern, 0, 0) == pytest.approx(1.0)
    with pytest.raises(CapabilityError):
        offdiag_ratio(build_kernel(G, 10, mode=NUMERIC), 0, 0)
    z = np.exp(2j * np.pi * np.arange(12) / 12)
    grid = offdiag_ratio_grid(kern, z, z)
    assert grid.shape == (12, 12)
    assert np.allclose(grid[0, 1], offdiag_ratio(kern, z[0], z[1]))


def test_bernstein_ratio(rng):
    kern = build_kernel(G, 50)
    e0 = WeightedPolynomial(kern, np.eye(kern.m)[0])
    assert bernstein_ratio(kern, e0, 0.0) == pytest.approx(0.0, abs=1e-6)
    f = random_weighted_poly(kern, 5)
    z = 0.2 + 0.1j
    r1 = bernstein_ratio(kern, f, z)
    assert bernstein_ratio(kern, 3 * f, z) == pytest.approx(r1, rel=1e-9)
    zero_at = WeightedPolynomial(kern, np.eye(kern.m)[1])
    with pytest.raises(ZeroModulusError):
        bernstein_ratio(kern, zero_at, 0.0)


def test_bernstein_stable_across_m():
    out = {}
    for m in (50, 200):
        kern = build_kernel(G, m)
        f = random_weighted_poly(kern, 0)
        grid = np.linspace(-0.5, 0.5, 7)
        pts = (grid[:, None] + 1j * grid[None, :]).ravel()
        sup = float(np.max(np.abs(f(_grid(1.5, 8 * int(np.sqrt(m)))))))
        out[m] = max(bernstein_ratio(kern, f, z, sup_value=sup) for z in pts)
    assert out[200] <= 1.1 * out[50] + 0.5
