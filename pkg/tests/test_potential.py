import numpy as np
import pytest

from fekete_lab import potential as P
from fekete_lab.errors import EvaluationError
from fekete_lab.quadrature import disk_rule, integrate_disk


def test_ginibre_laplacian_is_one():
    g = P.ginibre()
    z = np.array([0, 0.3 + 0.4j, -2 + 1j])
    assert np.all(P.laplacian(g, z) == 1.0)


def test_quartic_laplacian_fd_oracle():
    q = P.quartic()
    h = 1e-3
    f = q.q
    z = 0.5
    fd = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / (4 * h * h)
    assert P.laplacian(q, z) == pytest.approx(1.0, abs=1e-12)
    assert fd == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("h", [1e-4, 3e-4, 1e-3])
def test_fd_laplacian_matches_analytic(h):
    fd = P.ginibre_fd()
    assert P.laplacian(fd, 0.3 + 0.4j, h=h) == pytest.approx(1.0, abs=1e-6)


def test_laplacian_non_finite():
    bad = P.custom("bad", q=lambda z: np.where(np.abs(z) < 1, np.inf, 0.0),
                   grad_q=lambda z: 0 * z, droplet=P.DiskDroplet(1.0))
    with pytest.raises(EvaluationError):
        P.laplacian(bad, 0.1)


def test_equilibrium_potential_values():
    qh = P.ginibre_equilibrium_potential
    assert qh(0.5) == pytest.approx(0.25)
    assert qh(np.e) == pytest.approx(3.0)
    # C^1 gluing at the unit circle
    e = 1e-7
    assert qh(1 - e) == pytest.approx(1.0, abs=1e-6)
    assert qh(1 + e) == pytest.approx(1.0, abs=1e-6)
    d_in = (qh(1.0) - qh(1 - e)) / e
    d_out = (qh(1 + e) - qh(1.0)) / e
    assert d_in == pytest.approx(2.0, abs=1e-5)
    assert d_out == pytest.approx(2.0, abs=1e-5)


def test_equilibrium_potential_harmonic_outside():
    qh = P.ginibre_equilibrium_potential
    h = 1e-3
    for z in (1.5, np.e * np.exp(0.7j), -3 + 2j):
        lap = (qh(z + h) + qh(z - h) + qh(z + 1j * h) + qh(z - 1j * h) - 4 * qh(z)) / (4 * h * h)
        assert abs(lap) < 1e-6


def test_q_hat_vs_q():
    g = P.ginibre()
    x = np.linspace(-2, 2, 61)
    z = (x[:, None] + 1j * x[None, :]).ravel()
    inside = np.abs(z) <= 1
    assert np.allclose(g.q_hat(z[inside]), g.q(z[inside]), atol=1e-10)
    assert np.all(g.q_hat(z[~inside]) < g.q(z[~inside]))


def test_equilibrium_mass():
    g = P.ginibre()
    assert P.equilibrium_mass_in_disk(g, 2.0) == 1.0
    assert P.equilibrium_mass_in_disk(g, 1.0) == 1.0
    assert P.equilibrium_mass_in_disk(g, 0.5) == pytest.approx(0.25)
    oracle = integrate_disk(lambda z: np.ones(z.shape), 0.0, 0.5)
    assert oracle == pytest.approx(0.25, abs=1e-12)
    ts = np.linspace(0, 3, 31)
    vals = [P.equilibrium_mass_in_disk(g, t) for t in ts]
    assert np.all(np.diff(vals) >= 0) and vals[-1] == 1.0
    with pytest.raises(ValueError):
        P.equilibrium_mass_in_disk(g, -0.1)


def test_quartic_mass_by_quadrature():
    q = P.quartic()
    assert P.equilibrium_mass_in_disk(q, 5.0) == pytest.approx(1.0, abs=1e-10)
    # sigma(D(0, t)) = 2 t^4 inside the droplet
    assert P.equilibrium_mass_in_disk(q, 0.5) == pytest.approx(2 * 0.5 ** 4, abs=1e-10)


def test_total_mass_ginibre_droplet():
    nodes, w = disk_rule(0, 1, 32, 64)
    assert np.sum(w * P.laplacian(P.ginibre(), nodes)) == pytest.approx(1.0, abs=1e-13)


def test_distance_to_boundary():
    g = P.ginibre()
    assert P.distance_to_boundary(g, 0) == 1.0
    assert P.distance_to_boundary(g, 1) == 0.0
    assert P.distance_to_boundary(g, 1.1) == pytest.approx(-0.1)


def test_bulk_margin_default():
    g = P.ginibre()
    assert g.bulk_margin(100) == pytest.approx(np.log(100) ** 2 / 10)
    with pytest.raises(ValueError):
        P.default_bulk_margin(0)


def test_config_roundtrip():
    for name in ("ginibre", "quartic", "ginibre_fd"):
        m = P.by_name(name)
        again = P.from_config({"potential": m.to_config()})
        assert again.name == m.name
    with pytest.raises(KeyError):
        P.from_config({"kind": "custom", "name": "nope"})
    with pytest.raises(ValueError):
        P.from_config({"kind": "weird"})


def test_complex_derivative():
    g = P.ginibre()
    z = 0.3 - 0.7j
    # dQ = conj(z) for |z|^2
    assert P.ginibre().d_q(z) == pytest.approx(np.conj(z))
    assert g.d_q(0) == 0


def test_droplet_sampling_stays_inside(rng):
    d = P.DiskDroplet(0.8, 0.1 + 0.2j)
    pts = d.sample(rng, 1000)
    assert np.all(d.contains(pts))
    assert d.shrunk(0.9) is None
    assert d.shrunk(0.3).radius == pytest.approx(0.5)
