"""Polar quadrature rules on disks.

All weights are for the normalized area measure ``dA = dx dy / pi``, so the
unit disk has total weight 1.  Radii use Gauss-Legendre nodes, angles use the
trapezoid rule (spectrally accurate for periodic integrands).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def disk_rule(center: complex, radius: float, n_radial: int, n_angular: int,
              inner: float = 0.0):
    """Nodes and weights for the disk (or annulus ``inner < r < radius``).

    Returns
    -------
    nodes : ndarray of complex, shape (n_radial * n_angular,)
    weights : ndarray of float, same shape
    """
    if radius < 0 or inner < 0 or inner > radius:
        raise ValueError("need 0 <= inner <= radius")
    x, w = _leggauss(n_radial)
    half = 0.5 * (radius - inner)
    r = inner + half * (x + 1.0)
    wr = half * w * r
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    nodes = center + (r[:, None] * np.exp(1j * theta)[None, :])
    # (1/pi) * r dr * (2 pi / n_angular)
    weights = np.broadcast_to((2.0 / n_angular) * wr[:, None], nodes.shape)
    return nodes.ravel(), np.ascontiguousarray(weights).ravel()


def integrate_disk(f, center: complex, radius: float, n_radial: int = 64,
                   n_angular: int = 128, inner: float = 0.0):
    """Integrate ``f(nodes)`` over a disk with respect to dA."""
    nodes, weights = disk_rule(center, radius, n_radial, n_angular, inner)
    return np.sum(weights * f(nodes))


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor polar rule used for integrals over the whole plane.

    The plane is truncated to ``|z| <= outer_radius``.
    """

    radial_nodes: int = 200
    angular_nodes: int = 256
    outer_radius: float = 2.5

    def rule(self, center: complex = 0.0):
        return disk_rule(center, self.outer_radius, self.radial_nodes,
                         self.angular_nodes)

    def truncation_bound(self, model, m: int) -> float:
        """``exp(-m (Q - Qhat))`` at the outer radius, or nan without Qhat."""
        if model.q_hat is None:
            return float("nan")
        r = self.outer_radius
        gap = float(model.q(r)) - float(model.q_hat(r))
        return float(np.exp(-m * gap))

    @classmethod
    def for_model(cls, model, m: int, radial_nodes: int = 200,
                  angular_nodes: int = 256, tol: float = 1e-14,
                  default_radius: float = 2.5) -> "QuadratureSpec":
        """Smallest radius >= ``default_radius`` meeting the truncation bound."""
        spec = cls(radial_nodes, angular_nodes, default_radius)
        if model.q_hat is None:
            return spec
        r = default_radius
        while spec.truncation_bound(model, m) >= tol:
            r *= 1.25
            spec = cls(radial_nodes, angular_nodes, r)
        return spec
