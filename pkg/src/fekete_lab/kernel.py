"""Weighted reproducing kernels of polynomial spaces.

For ``m`` the dimension and ``Q`` the field, the kernel is

    K(z, w) = sum_{k<m} e_k(z) conj(e_k(w)) exp(-m (Q(z) + Q(w)) / 2)

with ``e_k`` orthonormal in ``L^2(exp(-m Q) dA)``.  Magnitudes are handled
in log space and exponentiated only at the end, since ``exp(m)`` factors
overflow doubles near ``m = 700``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import gammaln, logsumexp

from .errors import (CapabilityError, EvaluationError, IllConditionedError,
                     ZeroModulusError, DomainWarning)
from .potential import PotentialModel, distance_to_boundary, laplacian
from .quadrature import QuadratureSpec

GINIBRE = "ginibre_closed_form"
NUMERIC = "numeric_orthobasis"

COND_LIMIT = 1e14
_CHUNK = 2_000_000


def kernel_dimension(n: int, rho: float) -> int:
    """``rho n`` when it is an integer, else the largest integer below it."""
    x = rho * n
    k = round(x)
    if abs(x - k) <= 1e-9 * max(1.0, abs(x)):
        m = int(k)
    else:
        m = int(math.ceil(x)) - 1
    if m < 1:
        raise ValueError(f"rho * n = {x} gives an empty space")
    return m


def _klog(k, logz):
    """``k * log z`` with the convention ``0 * log 0 = 0``."""
    logz = np.asarray(logz)
    with np.errstate(invalid="ignore"):
        if np.iscomplexobj(logz):
            out = k * logz.real + 1j * (k * logz.imag)
        else:
            out = k * logz
    return np.where(k == 0, 0.0, out)


def _log_complex(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z)) + 1j * np.angle(z)


@dataclass(frozen=True, eq=False)
class KernelModel:
    """Immutable kernel.  ``basis`` maps scaled weighted monomials to an
    orthonormal basis (lower triangular); it is the identity for the Ginibre
    closed form, where the scaled monomials are already orthonormal."""

    mode: str
    n: int
    rho: float
    m: int
    model: PotentialModel
    quad: Optional[QuadratureSpec]
    basis: np.ndarray
    log_scale: np.ndarray

    def weighted_basis(self, z) -> np.ndarray:
        """Orthonormal weighted basis ``e_k(z) exp(-m Q(z)/2)``; shape ``z.shape + (m,)``."""
        z = np.asarray(z, dtype=complex)
        k = np.arange(self.m)
        logz = _log_complex(z)[..., None]
        lq = -0.5 * self.m * np.asarray(self.model.q(z), dtype=float)[..., None]
        expo = _klog(k, logz) + self.log_scale + lq
        # flush would-be subnormals to zero; they are slow and below any tolerance
        expo = np.where(expo.real < -700.0, -np.inf, expo)
        phi = np.exp(expo)
        if self.mode == GINIBRE:
            return phi
        return phi @ self.basis.T


def _ginibre_log_scale(m: int) -> np.ndarray:
    k = np.arange(m)
    return 0.5 * ((k + 1) * np.log(m) - gammaln(k + 1))


def build_kernel(model: PotentialModel, n: int, rho: float = 1.0,
                 mode: Optional[str] = None,
                 quad: Optional[QuadratureSpec] = None) -> KernelModel:
    """Kernel of weighted polynomials of degree ``< m`` with ``m = kernel_dimension(n, rho)``.

    ``mode`` defaults to the Ginibre closed form for the Ginibre field and to
    numeric orthonormalization otherwise.  Numeric mode Cholesky-factors the
    diagonally pre-scaled moment matrix ``int z^j conj(z)^k exp(-m Q) dA``.
    """
    if rho <= 0 or rho > 2:
        raise ValueError("rho must lie in (0, 2]")
    m = kernel_dimension(n, rho)
    if mode is None:
        mode = GINIBRE if model.kind == "ginibre" else NUMERIC
    if mode == GINIBRE:
        if model.kind != "ginibre":
            raise CapabilityError("closed form needs the Ginibre potential")
        return KernelModel(GINIBRE, n, rho, m, model, quad,
                           np.eye(0), _ginibre_log_scale(m))
    if mode != NUMERIC:
        raise ValueError(f"unknown kernel mode {mode!r}")
    if quad is None:
        quad = QuadratureSpec.for_model(model, m)
    nodes, weights = quad.rule()
    keep = weights > 0
    nodes, weights = nodes[keep], weights[keep]
    k = np.arange(m)
    logz = _log_complex(nodes)[:, None]
    lq = -0.5 * m * np.asarray(model.q(nodes), dtype=float)[:, None]
    # diagonal moments in log space
    log_diag = logsumexp(2.0 * _klog(k, logz.real) + 2.0 * lq, axis=0,
                         b=weights[:, None])
    log_scale = -0.5 * log_diag
    phi = np.exp(_klog(k, logz) + log_scale + lq)
    gram = (phi.T * weights) @ phi.conj()
    gram = 0.5 * (gram + gram.conj().T)
    ev = np.linalg.eigvalsh(gram)
    cond = ev[-1] / ev[0] if ev[0] > 0 else np.inf
    if not cond < COND_LIMIT:
        deg, c = _failing_degree(gram)
        raise IllConditionedError(deg, c)
    low = cholesky(gram, lower=True)
    basis = solve_triangular(low, np.eye(m), lower=True)
    return KernelModel(NUMERIC, n, rho, m, model, quad, basis, log_scale)


def _failing_degree(gram):
    for d in range(1, gram.shape[0] + 1):
        ev = np.linalg.eigvalsh(gram[:d, :d])
        c = ev[-1] / ev[0] if ev[0] > 0 else np.inf
        if not c < COND_LIMIT:
            return d - 1, float(c)
    return gram.shape[0] - 1, float("inf")


def stable_partial_exp(m: int, zeta, scale=0.0):
    """``s_m(zeta) exp(-scale)`` where ``s_m(zeta) = sum_{k<m} zeta^k / k!``.

    Terms are summed as ``exp(k log zeta - log k! - c)`` with ``c`` the
    running maximum of the real parts, so nothing overflows.

    Returns
    -------
    log_magnitude : ndarray
    phase : ndarray of unit complex numbers
    """
    zeta = np.asarray(zeta, dtype=complex)
    scale = np.broadcast_to(np.asarray(scale, dtype=float), zeta.shape)
    flat = zeta.ravel()
    sc = scale.ravel()
    k = np.arange(m)
    lgk = gammaln(k + 1)
    logmag = np.empty(flat.size)
    phase = np.empty(flat.size, dtype=complex)
    step = max(1, _CHUNK // m)
    for a in range(0, flat.size, step):
        lz = _log_complex(flat[a:a + step])[:, None]
        lt = _klog(k, lz) - lgk
        top = lt.real.max(axis=1, keepdims=True)
        s = np.exp(lt - top).sum(axis=1)
        mag = np.abs(s)
        with np.errstate(divide="ignore"):
            logmag[a:a + step] = top[:, 0] + np.log(mag) - sc[a:a + step]
        phase[a:a + step] = np.where(mag > 0, s / np.where(mag > 0, mag, 1), 1.0)
    return logmag.reshape(zeta.shape), phase.reshape(zeta.shape)


def eval_K(kern: KernelModel, z, w):
    """Kernel ``K(z, w)``; ``z`` and ``w`` broadcast against each other."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    m = kern.m
    if kern.mode == GINIBRE:
        z, w = np.broadcast_arrays(z, w)
        zeta = m * z * np.conj(w)
        scale = 0.5 * m * (np.abs(z) ** 2 + np.abs(w) ** 2)
        lm, ph = stable_partial_exp(m, zeta, scale)
        out = m * np.exp(lm) * ph
    else:
        ez = kern.weighted_basis(z)
        ew = kern.weighted_basis(w)
        out = np.sum(ez * ew.conj(), axis=-1)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("kernel evaluation overflowed")
    return out if out.ndim else complex(out)


def kernel_diagonal(kern: KernelModel, z):
    """``K(z, z)`` as a real array."""
    return np.real(eval_K(kern, z, z))


def kernel_matrix(kern: KernelModel, zs, ws) -> np.ndarray:
    """Matrix ``[K(z_i, w_j)]`` via the weighted basis (BLAS-backed)."""
    ez = kern.weighted_basis(np.ravel(zs))
    ew = kern.weighted_basis(np.ravel(ws))
    return ez @ ew.conj().T


def bulk_modulus_predictor(kern: KernelModel, z, w):
    """Leading-order ``|K(z, w)|``: ``m DQ(z) exp(-(m/2) DQ(z) |z - w|^2)``."""
    n = kern.n
    dist = np.asarray(distance_to_boundary(kern.model, z))
    if np.any(dist < kern.model.bulk_margin(n)):
        warnings.warn("bulk predictor evaluated outside the bulk region",
                      DomainWarning, stacklevel=2)
    lap = laplacian(kern.model, z)
    d2 = np.abs(np.asarray(z) - np.asarray(w)) ** 2
    out = kern.m * lap * np.exp(-0.5 * kern.m * lap * d2)
    return out if np.ndim(out) else float(out)


def berezin(kern: KernelModel, zeta, w):
    """Berezin density ``|K(zeta, w)|^2 / K(zeta, zeta)`` in ``w``."""
    diag = kernel_diagonal(kern, zeta)
    if np.any(diag <= 0):
        raise ZeroDivisionError("kernel diagonal vanishes")
    out = np.abs(eval_K(kern, zeta, w)) ** 2 / diag
    return out if np.ndim(out) else float(out)


def heat_kernel(model: PotentialModel, m: int, zeta, w):
    """Gaussian ``m DQ(zeta) exp(-m DQ(zeta) |zeta - w|^2)``; a probability density."""
    lap = laplacian(model, zeta)
    d2 = np.abs(np.asarray(zeta) - np.asarray(w)) ** 2
    out = m * lap * np.exp(-m * lap * d2)
    return out if np.ndim(out) else float(out)


def heat_kernel_disk_mass(model: PotentialModel, zeta, R: float) -> float:
    """Closed-form mass of the heat kernel in ``D(zeta; R/sqrt(m))``."""
    return float(1.0 - np.exp(-R * R * laplacian(model, zeta)))


def offdiag_ratio(kern: KernelModel, z, w):
    """``(1 + sqrt(m)|z - w|) |K(z, w)| / m`` (Ginibre only)."""
    if kern.mode != GINIBRE:
        raise CapabilityError("off-diagonal ratio is defined for the Ginibre kernel")
    m = kern.m
    d = np.abs(np.asarray(z) - np.asarray(w))
    out = (1.0 + np.sqrt(m) * d) * np.abs(eval_K(kern, z, w)) / m
    return out if np.ndim(out) else float(out)


def offdiag_ratio_grid(kern: KernelModel, zs, ws) -> np.ndarray:
    """``offdiag_ratio`` on all pairs of two point sets, via the basis."""
    if kern.mode != GINIBRE:
        raise CapabilityError("off-diagonal ratio is defined for the Ginibre kernel")
    zs = np.ravel(zs)
    ws = np.ravel(ws)
    kmat = np.abs(kernel_matrix(kern, zs, ws))
    d = np.abs(zs[:, None] - ws[None, :])
    return (1.0 + np.sqrt(kern.m) * d) * kmat / kern.m


class WeightedPolynomial:
    """``f = sum_k c_k e~_k`` for the orthonormal weighted basis of a kernel."""

    def __init__(self, kern: KernelModel, coeffs):
        self.kern = kern
        self.coeffs = np.asarray(coeffs, dtype=complex)

    def __call__(self, z):
        out = self.kern.weighted_basis(z) @ self.coeffs
        return out if np.ndim(out) else complex(out)

    def __mul__(self, c):
        return WeightedPolynomial(self.kern, self.coeffs * c)

    __rmul__ = __mul__

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def random_weighted_poly(kern: KernelModel, seed: int) -> WeightedPolynomial:
    """Random unit-norm element: i.i.d. complex normal coefficients, normalized."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(kern.m) + 1j * rng.standard_normal(kern.m)
    return WeightedPolynomial(kern, c / np.linalg.norm(c))


def default_sup_grid(kern: KernelModel, spacing: float | None = None):
    """Square grid covering the droplet plus its neighborhood."""
    drop = kern.model.droplet
    half = drop.radius + kern.model.neighborhood
    if spacing is None:
        spacing = 0.25 / np.sqrt(kern.m)
    x = np.arange(-half, half + spacing / 2, spacing)
    g = drop.center + x[:, None] + 1j * x[None, :]
    return g.ravel()


def bernstein_ratio(kern: KernelModel, f, z, sup_grid=None, h: float | None = None,
                    sup_value: float | None = None) -> float:
    """``|grad |f|(z)| / (sqrt(m) sup|f|)`` with a central-difference gradient."""
    m = kern.m
    if h is None:
        h = 1e-4 / np.sqrt(m)
    z = complex(z)
    if abs(f(z)) == 0.0:
        raise ZeroModulusError("f vanishes at z; |f| is not differentiable there")
    fx = (abs(f(z + h)) - abs(f(z - h))) / (2 * h)
    fy = (abs(f(z + 1j * h)) - abs(f(z - 1j * h))) / (2 * h)
    if sup_value is None:
        grid = default_sup_grid(kern) if sup_grid is None else sup_grid
        sup_value = float(np.max(np.abs(f(grid))))
    return float(np.hypot(fx, fy) / (np.sqrt(m) * sup_value))
