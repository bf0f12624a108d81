"""Weighted energy, its minimization, and Lagrange / Leja-Siciak diagnostics.

Points are held as complex numbers.  The energy of ``z_1, ..., z_n`` is

    H_n = sum_{i != j} log|z_i - z_j|^{-1} + n sum_j Q(z_j)

with the double sum over ordered pairs.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, CoincidentPointsError, NonConvergenceError
from .potential import PotentialModel

log = logging.getLogger(__name__)

COLLISION_GUARD = 1e-9


@dataclass(frozen=True)
class Configuration:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).ravel()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.size

    @classmethod
    def from_xy(cls, xy) -> "Configuration":
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        return cls(xy[:, 0] + 1j * xy[:, 1])

    def to_xy(self) -> list:
        return [[float(p.real), float(p.imag)] for p in self.points]

    def rotated(self, theta: float) -> "Configuration":
        return Configuration(self.points * np.exp(1j * theta))


@dataclass(frozen=True)
class OptimizerSettings:
    max_iters: int = 20000
    grad_tol: float = 1e-7
    restarts: int = 3
    rng_seed: int = 0
    step_rule: str = "barzilai_borwein"

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.step_rule not in ("barzilai_borwein", "fixed_backtracking"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


@dataclass(frozen=True)
class FeketeResult:
    config: Configuration
    energy: float
    grad_inf_norm: float
    first_order_residual: float
    iterations: int
    restart_index: int
    converged: bool = True
    history: list = field(default_factory=list, compare=False, repr=False)


def _pair_diffs(z):
    d = z[:, None] - z[None, :]
    np.fill_diagonal(d, 1.0)
    return d


def _check_distinct(z, d=None):
    if d is None:
        d = _pair_diffs(z)
    a = np.abs(d)
    np.fill_diagonal(a, np.inf)
    if a.size and a.min() == 0.0:
        i, j = np.unravel_index(np.argmin(a), a.shape)
        raise CoincidentPointsError(int(min(i, j)), int(max(i, j)))
    return d


def _energy(z, model):
    n = z.size
    d = _check_distinct(z)
    interaction = -np.sum(np.log(np.abs(d)))  # diagonal contributes log 1 = 0
    return float(interaction + n * np.sum(model.q(z)))


def energy(config: Configuration, model: PotentialModel) -> float:
    """Weighted energy ``H_n``; raises :class:`CoincidentPointsError` if degenerate."""
    return _energy(config.points, model)


def log_vandermonde(config: Configuration, model: PotentialModel) -> float:
    """``log V_n = -H_n``; ``-inf`` for coincident points."""
    try:
        return -energy(config, model)
    except CoincidentPointsError:
        return float("-inf")


def _complex_gradient(z, model, d=None):
    n = z.size
    if d is None:
        d = _check_distinct(z)
    inv = 1.0 / np.conj(d)
    np.fill_diagonal(inv, 0.0)
    return -2.0 * inv.sum(axis=1) + n * model.grad_q(z)


def gradient(config: Configuration, model: PotentialModel) -> np.ndarray:
    """Euclidean gradient of the energy, shape ``(n, 2)``."""
    g = _complex_gradient(config.points, model)
    return np.column_stack([g.real, g.imag])


def _residuals(z, model, d=None):
    if d is None:
        d = _check_distinct(z)
    inv = 1.0 / d
    np.fill_diagonal(inv, 0.0)
    return inv.sum(axis=1) - z.size * model.d_q(z)


def first_order_residual(config: Configuration, model: PotentialModel) -> float:
    """``max_j |sum_{i != j} 1/(z_j - z_i) - n dQ(z_j)|``."""
    z = config.points
    if z.size == 1:
        return float(np.abs(model.d_q(z))[0])
    return float(np.max(np.abs(_residuals(z, model))))


def separation(config: Configuration) -> float:
    """``sqrt(n) * min_{i != j} |z_i - z_j|``."""
    z = config.points
    if z.size < 2:
        raise ValueError("separation needs at least two points")
    a = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(a, np.inf)
    return float(np.sqrt(z.size) * a.min())


def _min_gap(z):
    a = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(a, np.inf)
    return a.min() if z.size > 1 else np.inf


def _descend(z, model, settings, rng_label=""):
    """One restart of steepest descent.  Returns (z, energy, grad, iters, ok)."""
    n = z.size
    e = _energy(z, model)
    g = _complex_gradient(z, model)
    step = 0.1 / max(n, 1)
    z_prev = g_prev = None
    gnorm = np.max(np.abs(g)) / n
    history = []
    for it in range(1, settings.max_iters + 1):
        if gnorm <= settings.grad_tol:
            return z, e, g, it - 1, True, history
        if settings.step_rule == "barzilai_borwein" and z_prev is not None:
            s = z - z_prev
            y = g - g_prev
            sy = float(np.real(np.vdot(s, y)))
            if sy > 0:
                step = float(np.real(np.vdot(s, s))) / sy
        # backtracking: accept once the energy does not increase beyond round-off
        tol = 1e-13 * max(1.0, abs(e))
        g2 = float(np.real(np.vdot(g, g)))
        armijo = settings.step_rule == "fixed_backtracking"
        for _ in range(60):
            z_new = z - step * g
            if _min_gap(z_new) > COLLISION_GUARD:
                e_new = _energy(z_new, model)
                if not armijo:
                    if e_new <= e + tol:
                        break
                elif 1e-4 * step * g2 > tol:
                    if e_new <= e - 1e-4 * step * g2:
                        break
                elif (e_new <= e + tol and np.max(np.abs(
                        _complex_gradient(z_new, model))) <= np.max(np.abs(g))):
                    # decrease is below round-off; fall back to the gradient norm
                    break
            step *= 0.5
        else:
            log.debug("%s line search stalled at iteration %d", rng_label, it)
            return z, e, g, it, False, history
        z_prev, g_prev = z, g
        z, e = z_new, e_new
        g = _complex_gradient(z, model)
        gnorm = np.max(np.abs(g)) / n
        if settings.step_rule == "fixed_backtracking":
            step *= 2.0
        if it % 500 == 0:
            history.append((it, e, gnorm))
    return z, e, g, settings.max_iters, gnorm <= settings.grad_tol, history


def _result(z, model, e, g, iters, restart, ok, history):
    n = z.size
    cfg = Configuration(z)
    return FeketeResult(
        config=cfg,
        energy=e,
        grad_inf_norm=float(np.max(np.abs(g))),
        first_order_residual=first_order_residual(cfg, model),
        iterations=iters,
        restart_index=restart,
        converged=ok,
        history=history,
    )


def solve_fekete(n: int, model: PotentialModel,
                 settings: OptimizerSettings = OptimizerSettings()) -> FeketeResult:
    """Lowest-energy critical configuration found over ``settings.restarts`` runs.

    Each restart starts from ``n`` points drawn uniformly (by area) from the
    droplet.  Only restarts that reach ``grad_tol`` compete; if none does,
    :class:`NonConvergenceError` carries the best partial result.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seeds = np.random.SeedSequence(settings.rng_seed).spawn(settings.restarts)
    best = None
    best_partial = None
    for k, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        z0 = model.droplet.sample(rng, n)
        if n == 1:
            # field-only problem; start near the droplet center
            z0 = np.array([model.droplet.center], dtype=complex)
        z, e, g, iters, ok, hist = _descend(z0, model, settings, f"restart {k}")
        res = _result(z, model, e, g, iters, k, ok, hist)
        log.info("n=%d restart %d: energy=%.12g |g|/n=%.3e iters=%d ok=%s",
                 n, k, e, res.grad_inf_norm / n, iters, ok)
        if ok and (best is None or res.energy < best.energy):
            best = res
        if best_partial is None or res.energy < best_partial.energy:
            best_partial = res
    if best is None:
        raise NonConvergenceError(
            f"no restart reached grad_tol={settings.grad_tol} for n={n}",
            best=best_partial,
        )
    tol = 1e-6
    if not np.all(model.droplet.contains(best.config.points, tol)):
        warnings.warn(f"n={n}: solver returned points outside the droplet "
                      f"dilated by {tol}", RuntimeWarning, stacklevel=2)
    return best


def _log_lagrange(z_nodes, j, z):
    """``log|l_j(z)|`` for an array ``z``; ``-inf`` at other nodes."""
    others = np.delete(z_nodes, j)
    zz = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        num = np.sum(np.log(np.abs(zz[..., None] - others)), axis=-1)
    den = np.sum(np.log(np.abs(z_nodes[j] - others)))
    return num - den


def lagrange_weighted(config: Configuration, j: int, z,
                      model: PotentialModel):
    """``|l_j(z)| exp(-n (Q(z) - Q(z_j)) / 2)``, evaluated in log space."""
    pts = config.points
    n = pts.size
    if not 0 <= j < n:
        raise IndexError(j)
    _check_distinct(pts)
    if n == 1:
        lg = np.zeros(np.shape(z))
    else:
        lg = _log_lagrange(pts, j, z)
    lg = lg - n * (model.q(np.asarray(z, dtype=complex)) - model.q(pts[j])) / 2.0
    out = np.exp(lg)
    return out if np.ndim(out) else float(out)


def leja_siciak(config: Configuration, z, model: PotentialModel):
    """``(1/n) log Phi_n(z)`` with ``Phi_n = max_j |l_j|^2 exp(n Q(z_j))``."""
    if model.q_hat is None:
        raise CapabilityError(f"potential {model.name!r} exposes no q_hat")
    pts = config.points
    n = pts.size
    _check_distinct(pts)
    zz = np.asarray(z, dtype=complex)
    best = np.full(zz.shape, -np.inf)
    for j in range(n):
        lg = np.zeros(zz.shape) if n == 1 else _log_lagrange(pts, j, zz)
        best = np.maximum(best, 2.0 * lg + n * model.q(pts[j]))
    out = best / n
    return out if out.ndim else float(out)


def radial_cdf(config: Configuration, t_grid) -> np.ndarray:
    """Fraction of points with ``|z_j| <= t`` for each ``t``."""
    r = np.sort(np.abs(config.points))
    t = np.asarray(t_grid, dtype=float)
    return np.searchsorted(r, t, side="right") / r.size
