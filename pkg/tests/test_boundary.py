import numpy as np
import pytest
from scipy.special import dawsn, erfc

from fekete_lab.boundary import (boundary_kernel, dawson_bound_check, dawson_bound_sweep,
                                 diag_lower_bound_check, ginibre_infty_kernel, lastl_integral,
                                 lastl_identity_residual, radial_profile, rescaled_intensity)
from fekete_lab.errors import CapabilityError
from fekete_lab.kernel import build_kernel
from fekete_lab.potential import ginibre
from fekete_lab.special import dawson, phi

G = ginibre()


def naive_F(z, w):
    # direct formula; fine where nothing overflows
    return (np.exp(z * np.conj(w) - abs(z) ** 2 / 2 - abs(w) ** 2 / 2)
            * 0.5 * erfc((z + np.conj(w)) / np.sqrt(2)))


def test_F_examples():
    assert boundary_kernel(0, 0) == pytest.approx(0.5, abs=1e-15)
    assert boundary_kernel(-3, -3).real == pytest.approx(0.5 * erfc(-6 / np.sqrt(2)), rel=1e-14)
    assert abs(boundary_kernel(5, 5)) < 1e-20


def test_F_matches_naive_form(rng):
    z = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    w = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    got = boundary_kernel(z, w)
    ref = np.array([naive_F(a, b) for a, b in zip(z, w)])
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-15)


def test_F_hermitian_and_psd(rng):
    z = rng.uniform(-3, 3, 8) + 1j * rng.uniform(-3, 3, 8)
    mat = boundary_kernel(z[:, None], z[None, :])
    assert np.allclose(mat, mat.conj().T, atol=1e-14)
    assert np.linalg.eigvalsh(mat).min() > -1e-12


def test_F_far_field_is_finite():
    z = np.array([40 + 40j, -40 - 40j, 30j, -60])
    out = boundary_kernel(z[:, None], z[None, :])
    assert np.all(np.isfinite(out))


def test_infty_kernel():
    assert ginibre_infty_kernel(0.5j, 0.5j) == pytest.approx(1.0)
    assert abs(ginibre_infty_kernel(0, 3)) == pytest.approx(np.exp(-4.5))


def test_dawson_function():
    x = np.linspace(-10, 10, 41)
    assert np.allclose(dawson(x), dawsn(x), rtol=1e-13, atol=1e-15)


def test_dawson_bound():
    assert dawson_bound_sweep() <= 1e-9
    lhs, rhs = dawson_bound_check(0, -5j)
    assert lhs <= rhs
    lhs, rhs = dawson_bound_check(0, 5j)
    assert lhs <= rhs
    assert rhs == pytest.approx(np.exp(-12.5) + dawsn(5 / np.sqrt(2)) / np.sqrt(np.pi))


@pytest.mark.parametrize("z", [0, 0.5, -0.5, 1.3 + 2j, -2 - 1j])
@pytest.mark.parametrize("rho", [0.25, 1.0, 2.0])
def test_lastl_identity(z, rho):
    assert lastl_identity_residual(z, rho) <= 1e-8


def test_lastl_value():
    assert lastl_integral(0, 1.0) == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(ValueError):
        lastl_integral(0, 0.0)


def test_rescaled_intensity_examples():
    kern = build_kernel(G, 1000)
    one = rescaled_intensity(kern, 1.0, [0.0, -3.0, 3.0])
    assert one[0] == pytest.approx(0.5, abs=0.02)
    assert one[1] == pytest.approx(1.0, abs=0.02)
    assert one[2] < 1e-4
    assert rescaled_intensity(kern, 1j, [0.0])[0] == pytest.approx(one[0], abs=1e-10)
    assert abs(rescaled_intensity(kern, 1.0, [[0.3, 0.3]], k=2)[0]) < 1e-10


def test_rescaled_intensity_matches_limit():
    # k = 2 limit: F(a,a)F(b,b) - |F(a,b)|^2
    kern = build_kernel(G, 4000)
    a, b = -0.4 + 0.2j, 0.1 - 0.5j
    got = rescaled_intensity(kern, 1.0, [[a, b]], k=2)[0]
    fab = boundary_kernel(a, b)
    ref = (boundary_kernel(a, a) * boundary_kernel(b, b)).real - abs(fab) ** 2
    assert got == pytest.approx(ref, abs=0.03)


def test_rescaled_intensity_monotone():
    kern = build_kernel(G, 500)
    vals = rescaled_intensity(kern, 1.0, np.linspace(-3, 3, 13))
    assert np.all(np.diff(vals) < 0)


def test_rescaled_intensity_errors():
    kern = build_kernel(G, 100)
    with pytest.raises(CapabilityError):
        rescaled_intensity(kern, 1.0, [[0, 0, 0, 0]], k=4)
    with pytest.raises(ValueError):
        rescaled_intensity(kern, 0.5, [0.0])


def test_radial_profile():
    t = np.linspace(0, 300, 200)
    f = radial_profile(100, t)
    assert np.all(np.diff(f) <= 1e-13)
    assert f[0] == pytest.approx(1.0)
    assert radial_profile(100, 100.0) == pytest.approx(0.5, abs=0.03)


def test_diag_lower_bound():
    rep = diag_lower_bound_check([100, 400, 1600])
    assert rep.bound == pytest.approx(phi(-1.0).real)
    assert rep.passed
    js = rep.to_json()
    assert set(js["minima"]) == {"100", "400", "1600"} and js["passed"]
