"""External fields Q, their derivatives, equilibrium potentials and droplets.

Conventions used everywhere in the package: ``dA = dx dy / pi`` and the
normalized Laplacian ``Delta = d dbar`` (a quarter of the usual one).  With
these, the Ginibre field ``Q(z) = |z|^2`` has ``Delta Q = 1`` and the unit
disk carries equilibrium mass 1.

Gradients are returned complex-encoded, ``Q_x + i Q_y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError
from .quadrature import disk_rule


def default_bulk_margin(n: int) -> float:
    """``log(n)^2 / sqrt(n)``."""
    if n < 1:
        raise ValueError("n must be positive")
    return float(np.log(n) ** 2 / np.sqrt(n))


@dataclass(frozen=True)
class DiskDroplet:
    """Closed disk ``|z - center| <= radius``."""

    radius: float
    center: complex = 0.0

    def contains(self, z, tol: float = 0.0):
        return np.abs(np.asarray(z) - self.center) <= self.radius + tol

    def signed_distance(self, z):
        """Distance to the complement; negative outside."""
        return self.radius - np.abs(np.asarray(z) - self.center)

    def sample(self, rng: np.random.Generator, n: int):
        r = self.radius * np.sqrt(rng.random(n))
        theta = 2.0 * np.pi * rng.random(n)
        return self.center + r * np.exp(1j * theta)

    def shrunk(self, margin: float) -> Optional["DiskDroplet"]:
        if margin >= self.radius:
            return None
        return DiskDroplet(self.radius - margin, self.center)


@dataclass(frozen=True)
class PotentialModel:
    """An external field together with its droplet.

    ``kind`` is ``"ginibre"`` or ``"custom"``.  ``lap_q`` may be omitted, in
    which case :func:`laplacian` falls back to finite differences; ``q_hat``
    is optional for custom fields and gates the operations that need it.
    """

    kind: str
    name: str
    q: Callable
    grad_q: Callable
    droplet: DiskDroplet
    lap_q: Optional[Callable] = None
    q_hat: Optional[Callable] = None
    bulk_margin_fn: Callable[[int], float] = default_bulk_margin
    separation_s: float = 0.5
    neighborhood: float = 0.5
    meta: dict = field(default_factory=dict, compare=False)

    def d_q(self, z):
        """Complex derivative ``dQ = (Q_x - i Q_y) / 2``."""
        return np.conj(self.grad_q(z)) / 2.0

    def bulk_margin(self, n: int) -> float:
        return float(self.bulk_margin_fn(n))

    def to_config(self) -> dict:
        if self.kind == "ginibre":
            return {"kind": "ginibre"}
        return {"kind": "custom", "name": self.name}


def ginibre_equilibrium_potential(z):
    """``|z|^2`` on the closed unit disk and ``2 log|z| + 1`` outside."""
    a = np.abs(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore"):
        out = np.where(a <= 1.0, a * a, 2.0 * np.log(np.where(a > 0, a, 1.0)) + 1.0)
    return out if out.ndim else float(out)


def ginibre() -> PotentialModel:
    return PotentialModel(
        kind="ginibre",
        name="ginibre",
        q=lambda z: np.abs(z) ** 2,
        grad_q=lambda z: 2.0 * np.asarray(z, dtype=complex),
        lap_q=lambda z: np.ones_like(np.abs(z), dtype=float),
        q_hat=ginibre_equilibrium_potential,
        droplet=DiskDroplet(1.0),
    )


_QUARTIC_RADIUS = 2.0 ** -0.25
_QUARTIC_CONST = 0.5 + 0.5 * np.log(2.0)


def _quartic_q_hat(z):
    a = np.abs(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore"):
        out = np.where(a <= _QUARTIC_RADIUS, a ** 4,
                       2.0 * np.log(np.where(a > 0, a, 1.0)) + _QUARTIC_CONST)
    return out if out.ndim else float(out)


def quartic() -> PotentialModel:
    """``Q(z) = |z|^4``: droplet radius ``2^(-1/4)``, ``Delta Q = 4|z|^2``."""
    return PotentialModel(
        kind="custom",
        name="quartic",
        q=lambda z: np.abs(z) ** 4,
        grad_q=lambda z: 4.0 * np.abs(z) ** 2 * np.asarray(z, dtype=complex),
        lap_q=lambda z: 4.0 * np.abs(z) ** 2,
        q_hat=_quartic_q_hat,
        droplet=DiskDroplet(_QUARTIC_RADIUS),
    )


def ginibre_fd() -> PotentialModel:
    """Ginibre field wrapped as a custom model without an analytic Laplacian."""
    g = ginibre()
    return PotentialModel(kind="custom", name="ginibre_fd", q=g.q,
                          grad_q=g.grad_q, q_hat=g.q_hat, droplet=g.droplet)


REGISTRY: dict[str, Callable[[], PotentialModel]] = {
    "quartic": quartic,
    "ginibre_fd": ginibre_fd,
}


def custom(name: str, q, grad_q, droplet, lap_q=None, q_hat=None,
           **kwargs) -> PotentialModel:
    return PotentialModel(kind="custom", name=name, q=q, grad_q=grad_q,
                          droplet=droplet, lap_q=lap_q, q_hat=q_hat, **kwargs)


def from_config(cfg: dict) -> PotentialModel:
    """Build a model from ``{"kind": "ginibre"}`` or ``{"kind": "custom", "name": ...}``.

    A wrapping ``{"potential": {...}}`` is accepted too.
    """
    if "potential" in cfg:
        cfg = cfg["potential"]
    kind = cfg.get("kind")
    if kind == "ginibre":
        return ginibre()
    if kind == "custom":
        name = cfg.get("name")
        if name not in REGISTRY:
            raise KeyError(f"unknown custom potential {name!r}; "
                           f"registered: {sorted(REGISTRY)}")
        return REGISTRY[name]()
    raise ValueError(f"unknown potential kind {kind!r}")


def by_name(name: str) -> PotentialModel:
    if name == "ginibre":
        return ginibre()
    return from_config({"kind": "custom", "name": name})


def laplacian(model: PotentialModel, z, h: float = 1e-3):
    """Normalized Laplacian ``d dbar Q`` at ``z``.

    Without an analytic ``lap_q`` a five-point central difference is used;
    it is second-order accurate in ``h``.
    """
    if model.lap_q is not None:
        out = np.asarray(model.lap_q(z), dtype=float)
    else:
        z = np.asarray(z, dtype=complex)
        q = model.q
        with np.errstate(invalid="ignore", over="ignore"):
            stencil = (q(z + h) + q(z - h) + q(z + 1j * h) + q(z - 1j * h)
                       - 4.0 * q(z))
        out = np.asarray(stencil, dtype=float) / (4.0 * h * h)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("non-finite Laplacian evaluation")
    return out if out.ndim else float(out)


def equilibrium_mass_in_disk(model: PotentialModel, t: float,
                             n_radial: int = 128, n_angular: int = 128) -> float:
    """Equilibrium mass of the centered disk ``D(0; t)``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if model.kind == "ginibre":
        return min(t, 1.0) ** 2
    drop = model.droplet
    if drop.center == 0:
        r = min(t, drop.radius)
        if r == 0:
            return 0.0
        nodes, w = disk_rule(0.0, r, n_radial, n_angular)
        return float(np.sum(w * laplacian(model, nodes)))
    nodes, w = disk_rule(0.0, t, n_radial, n_angular)
    inside = drop.contains(nodes)
    return float(np.sum(w * inside * laplacian(model, nodes)))


def distance_to_boundary(model: PotentialModel, z):
    """Signed Euclidean distance to the droplet complement (negative outside)."""
    out = model.droplet.signed_distance(z)
    return out if np.ndim(out) else float(out)
