"""Ginibre edge analysis.

Covers the boundary kernel ``F(z, w) = exp(z conj(w) - |z|^2/2 - |w|^2/2) Phi(-z - conj(w))``,
the infinite Ginibre kernel, rescaled k-point intensities near the unit
circle, and a few closed-form identities and bounds used as checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, EvaluationError
from .kernel import GINIBRE, KernelModel, eval_K, stable_partial_exp
from .special import DEFAULT, SQRT2, EdgeEvaluator, dawson, erfcx, phi

__all__ = [
    "phi", "dawson", "boundary_kernel", "ginibre_infty_kernel",
    "dawson_bound_check", "dawson_bound_sweep", "lastl_integral",
    "lastl_identity_residual", "rescaled_intensity", "radial_profile",
    "diag_lower_bound_check", "DiagBoundReport",
]


def boundary_kernel(z, w, evaluator: EdgeEvaluator = DEFAULT):
    """``F(z, w)``, evaluated without overflow for any ``z, w``.

    With ``u = (z + conj(w))/sqrt(2)`` the exponent combines into
    ``-z Re z - conj(w) Re w``; the erfc reflection is applied on the side
    where ``Re u < 0``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z, w = np.broadcast_arrays(z, w)
    wb = np.conj(w)
    u = (z + wb) / SQRT2
    e = z * wb - 0.5 * np.abs(z) ** 2 - 0.5 * np.abs(w) ** 2
    e_minus_u2 = -z * z.real - wb * w.real
    pos = u.real >= 0
    out = np.empty(z.shape, dtype=complex)
    if pos.any():
        out[pos] = 0.5 * np.exp(e_minus_u2[pos]) * erfcx(u[pos], evaluator)
    neg = ~pos
    if neg.any():
        out[neg] = (np.exp(e[neg])
                    - 0.5 * np.exp(e_minus_u2[neg]) * erfcx(-u[neg], evaluator))
    return out if out.ndim else complex(out)


def ginibre_infty_kernel(zeta, eta):
    """``exp(zeta conj(eta) - |zeta|^2/2 - |eta|^2/2)``."""
    zeta = np.asarray(zeta, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    out = np.exp(zeta * np.conj(eta) - 0.5 * np.abs(zeta) ** 2 - 0.5 * np.abs(eta) ** 2)
    return out if out.ndim else complex(out)


def _dawson_rhs(z, w):
    d = np.asarray(z, dtype=complex) - np.asarray(w, dtype=complex)
    return (np.exp(-0.5 * np.abs(d) ** 2)
            + np.exp(-0.5 * d.real ** 2) * dawson(np.abs(d.imag) / SQRT2) / np.sqrt(np.pi))


def dawson_bound_check(z, w, tol: float = 1e-9):
    """``(|F(z, w)|, bound)`` where the bound is
    ``exp(-|z-w|^2/2) + exp(-Re(z-w)^2/2) F_D(|Im(z-w)|/sqrt 2) / sqrt(pi)``.
    Dawson's function is odd, so the imaginary offset enters by modulus.

    Raises ``AssertionError`` if the bound is exceeded by more than ``tol``.
    """
    lhs = float(abs(boundary_kernel(z, w)))
    rhs = float(_dawson_rhs(z, w))
    if lhs > rhs + tol:
        raise AssertionError(f"|F({z}, {w})| = {lhs} exceeds bound {rhs}")
    return lhs, rhs


def dawson_bound_sweep(n_side: int = 20, half_width: float = 3.0):
    """Largest ``|F| - bound`` over all ordered pairs from an ``n_side`` square grid."""
    g = np.linspace(-half_width, half_width, n_side)
    pts = (g[:, None] + 1j * g[None, :]).ravel()
    zz, ww = pts[:, None], pts[None, :]
    lhs = np.abs(boundary_kernel(zz, ww))
    rhs = _dawson_rhs(zz, ww)
    return float(np.max(lhs - rhs))


def _mapped_line(n, c):
    # Gauss-Legendre on (-1, 1) pushed to the real line by y = c t / (1 - t^2)
    t, wt = np.polynomial.legendre.leggauss(n)
    y = c * t / (1.0 - t * t)
    wy = wt * c * (1.0 + t * t) / (1.0 - t * t) ** 2
    return y, wy


def lastl_integral(z, rho: float, nx: int = 200, ny: int = 400,
                   width: float = 9.0) -> float:
    """``rho^2 int exp(-rho|z - w|^2) |Phi(-sqrt(rho)(z + conj(w)))|^2 dA(w)``.

    Integrated in ``x + iy = w - z``.  In ``x`` the integrand is Gaussian away
    from the transition at ``x = -2 Re z``, so a Gauss-Legendre panel covering
    both points with ``width / sqrt(rho)`` margins suffices.  In ``y`` it decays
    only like ``1/y^2`` once the Gaussian is cancelled by the growth of Phi,
    so the whole line is mapped onto a finite interval.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    z = complex(z)
    a = z.real
    sr = np.sqrt(rho)
    lo = min(0.0, -2 * a) - width / sr
    hi = max(0.0, -2 * a) + width / sr
    x, wx = np.polynomial.legendre.leggauss(nx)
    x = lo + (hi - lo) * (x + 1) / 2
    wx = wx * (hi - lo) / 2
    y, wy = _mapped_line(ny, 3.0 / sr)
    X, Y = np.meshgrid(x, y, indexing="ij")
    v = np.sqrt(rho / 2) * (2 * a + X - 1j * Y)
    g = -0.5 * rho * (X ** 2 + Y ** 2)
    # exp(g) * erfc(v) / 2 in overflow-free form
    val = np.empty_like(v)
    pos = v.real >= 0
    val[pos] = 0.5 * np.exp(g[pos] - v[pos] ** 2) * erfcx(v[pos])
    vn = -v[~pos]
    val[~pos] = np.exp(g[~pos]) - 0.5 * np.exp(g[~pos] - vn ** 2) * erfcx(vn)
    total = rho ** 2 * np.sum(wx[:, None] * wy[None, :] * np.abs(val) ** 2) / np.pi
    if not np.isfinite(total):
        raise EvaluationError(f"quadrature failed at z={z}, rho={rho}")
    return float(total)


def lastl_identity_residual(z, rho: float, **kw) -> float:
    """``|lastl_integral(z, rho) - rho Phi(-2 sqrt(rho) Re z)|``."""
    target = rho * phi(-2.0 * np.sqrt(rho) * complex(z).real).real
    return abs(lastl_integral(z, rho, **kw) - target)


def rescaled_intensity(kern: KernelModel, z0: complex, zeta_list, k: int = 1):
    """``det[K(xi_i, xi_j)] / m^k`` at ``xi_i = z0 (1 + zeta_i / sqrt(m))``.

    ``zeta_list`` holds one k-tuple per requested value (or plain scalars
    when ``k = 1``).
    """
    if kern.mode != GINIBRE:
        raise CapabilityError("rescaled intensities need the Ginibre closed form")
    if k not in (1, 2, 3):
        raise CapabilityError(f"joint intensities are implemented for k <= 3, got {k}")
    if abs(abs(z0) - 1.0) > 1e-12:
        raise ValueError("z0 must lie on the unit circle")
    m = kern.m
    tuples = np.asarray(zeta_list, dtype=complex).reshape(-1, k)
    xi = z0 * (1.0 + tuples / np.sqrt(m))
    mats = eval_K(kern, xi[:, :, None], xi[:, None, :]) / m
    mats = np.asarray(mats).reshape(-1, k, k)
    return [float(d) for d in np.real(np.linalg.det(mats))]


def radial_profile(m: int, t):
    """``f(t) = s_m(t) exp(-t)``, so that ``K(z, z) = m f(m |z|^2)`` for Ginibre."""
    t = np.asarray(t, dtype=float)
    lm, ph = stable_partial_exp(m, t.astype(complex), t)
    out = np.exp(lm) * ph.real
    return out if out.ndim else float(out)


@dataclass
class DiagBoundReport:
    s: float
    bound: float
    minima: dict = field(default_factory=dict)
    slack: float = 0.05

    @property
    def passed(self) -> bool:
        return all(v >= self.bound - self.slack for v in self.minima.values())

    def to_json(self) -> dict:
        return {"s": self.s, "bound": self.bound, "slack": self.slack,
                "minima": {str(k): v for k, v in self.minima.items()},
                "passed": self.passed}


def diag_lower_bound_check(m_list, s: float = 0.5, n_grid: int = 400) -> DiagBoundReport:
    """Minimum of ``K(z, z)/m`` over ``|z| <= 1 + s/sqrt(m)`` for each ``m``.

    The Ginibre diagonal is radial, so the disk reduces to a radius grid.
    """
    rep = DiagBoundReport(s=s, bound=float(phi(-2.0 * s).real))
    for m in m_list:
        r = np.linspace(0.0, 1.0 + s / np.sqrt(m), n_grid)
        rep.minima[int(m)] = float(np.min(radial_profile(m, m * r * r)))
    return rep
