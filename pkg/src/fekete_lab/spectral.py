"""Concentration operators of weighted reproducing kernels over disks.

For a disk ``D`` the concentration operator ``f -> K(1_D f)`` restricted to
the weighted polynomial space is represented by the Gram matrix

    M_jk = int_D e~_j conj(e~_k) dA

of the orthonormal weighted basis.  Its eigenvalues lie in ``[0, 1]``; the
number close to 1 measures how many degrees of freedom the disk holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError, EigensolverError, ResampleError, DomainWarning
from .fekete import Configuration
from .kernel import KernelModel, kernel_diagonal, kernel_matrix, eval_K
from .quadrature import disk_rule

CLAMP_BAND = 1e-10
RESIDUAL_TOL = 1e-8
MAX_DIM = 2000


@dataclass(frozen=True)
class DiskRegion:
    center: complex
    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius >= 0):
            raise ValueError("radius must be finite and non-negative")

    @classmethod
    def scaled(cls, center: complex, R: float, n: int) -> "DiskRegion":
        """``D(center; R / sqrt(n))``."""
        return cls(complex(center), R / np.sqrt(n))

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class ConcentrationSpectrum:
    eigenvalues: np.ndarray
    trace: float
    trace_square: float
    m: int
    eigenvectors: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "trace": self.trace,
            "trace_square": self.trace_square,
        }


def _chunked_gram(kern, nodes, weights, chunk=4096):
    m = kern.m
    out = np.zeros((m, m), dtype=complex)
    for a in range(0, nodes.size, chunk):
        e = kern.weighted_basis(nodes[a:a + chunk])
        out += (e.T * weights[a:a + chunk]) @ e.conj()
    return out


def concentration_matrix(kern: KernelModel, disk: DiskRegion,
                         n_radial: int = 64, n_angular: int = 128) -> np.ndarray:
    """Hermitian ``m x m`` matrix of the concentration operator on ``disk``.

    Uses a polar rule centered on the disk itself.
    """
    if kern.m > MAX_DIM:
        raise ValueError(f"dimension {kern.m} exceeds the dense cap {MAX_DIM}")
    if disk.radius == 0:
        return np.zeros((kern.m, kern.m), dtype=complex)
    nodes, w = disk_rule(disk.center, disk.radius, n_radial, n_angular)
    mat = _chunked_gram(kern, nodes, w)
    return 0.5 * (mat + mat.conj().T)


def spectrum(matrix) -> ConcentrationSpectrum:
    """Eigenvalues (decreasing) with residual verification and clamping."""
    mat = np.asarray(matrix)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("square matrix expected")
    if not np.allclose(mat, mat.conj().T, atol=1e-12, rtol=0):
        raise ValueError("matrix is not Hermitian")
    lam, vec = np.linalg.eigh(mat)
    resid = np.linalg.norm(mat @ vec - vec * lam, axis=0)
    if resid.size and resid.max() > RESIDUAL_TOL:
        raise EigensolverError(f"eigen residual {resid.max():.3e} exceeds {RESIDUAL_TOL}")
    if lam.size and (lam.min() < -CLAMP_BAND or lam.max() > 1 + CLAMP_BAND):
        raise AssemblyError(
            f"eigenvalues [{lam.min():.3e}, {lam.max():.3e}] leave [0, 1] beyond round-off")
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, 1.0)
    return ConcentrationSpectrum(
        eigenvalues=lam,
        trace=float(lam.sum()),
        trace_square=float(np.sum(lam * lam)),
        m=mat.shape[0],
        eigenvectors=vec[:, order],
    )


def trace_direct(kern: KernelModel, disk: DiskRegion, n_radial: int = 64,
                 n_angular: int = 128) -> float:
    """``int_disk K(zeta, zeta) dA(zeta)``."""
    if disk.radius == 0:
        return 0.0
    nodes, w = disk_rule(disk.center, disk.radius, n_radial, n_angular)
    return float(np.sum(w * kernel_diagonal(kern, nodes)))


def trace_square_direct(kern: KernelModel, disk: DiskRegion, n_radial: int = 40,
                        n_angular: int = 80, chunk: int = 1024) -> float:
    """``int_disk int_disk |K(zeta, w)|^2 dA dA``."""
    if disk.radius == 0:
        return 0.0
    nodes, w = disk_rule(disk.center, disk.radius, n_radial, n_angular)
    e_all = kern.weighted_basis(nodes)
    total = 0.0
    for a in range(0, nodes.size, chunk):
        k = e_all[a:a + chunk] @ e_all.conj().T
        total += float(np.sum(w[a:a + chunk, None] * (np.abs(k) ** 2) * w[None, :]))
    return total


def plateau_count(spec: ConcentrationSpectrum, threshold: float) -> int:
    """``#{j : lambda_j >= threshold}``."""
    return int(np.count_nonzero(spec.eigenvalues >= threshold))


def count_in_region(config: Configuration, disk: DiskRegion) -> int:
    return int(np.count_nonzero(disk.contains(config.points)))


@dataclass(frozen=True)
class LandauReport:
    point_count: int
    plateau_gamma: int
    plateau_delta: int
    gamma: float
    delta: float
    R: float
    slack: float
    lower_holds: bool
    upper_holds: bool

    @property
    def required_slack(self) -> float:
        """Smallest ``c`` for which both inequalities hold."""
        need = max(self.plateau_gamma - self.point_count,
                   self.point_count - self.plateau_delta, 0)
        return need / self.R if self.R > 0 else float("inf")


def landau_compare(config: Configuration, kern: KernelModel, disk: DiskRegion,
                   gamma: float, delta: float, slack: float = 2.0,
                   spec: ConcentrationSpectrum | None = None) -> LandauReport:
    """Compare the point count in ``disk`` with plateau counts at ``gamma`` and ``delta``.

    Checks ``count >= N(gamma) - c R`` and ``count <= N(delta) + c R`` with
    ``R = radius * sqrt(n)``.
    """
    if spec is None:
        spec = spectrum(concentration_matrix(kern, disk))
    R = disk.radius * np.sqrt(config.n)
    count = count_in_region(config, disk)
    ng = plateau_count(spec, gamma)
    nd = plateau_count(spec, delta)
    return LandauReport(count, ng, nd, gamma, delta, float(R), slack,
                        count >= ng - slack * R, count <= nd + slack * R)


def _inner_region(kern: KernelModel, margin: float):
    drop = kern.model.droplet
    inner = drop.shrunk(margin)
    if inner is None:
        raise ValueError(f"margin {margin:.4g} leaves an empty bulk region "
                         f"(droplet radius {drop.radius:.4g})")
    return inner


def sampling_gram(kern: KernelModel, config: Configuration, margin: float,
                  n_radial: int = 128, n_angular: int = 256):
    """Gram matrices of ``int_{S_n} |f|^2`` and ``(1/m) sum_j |f(z_j)|^2``."""
    inner = _inner_region(kern, margin)
    nodes, w = disk_rule(inner.center, inner.radius, n_radial, n_angular)
    g_area = _chunked_gram(kern, nodes, w)
    e_nodes = kern.weighted_basis(config.points)
    g_nodes = (e_nodes.T @ e_nodes.conj()) / kern.m
    return g_area, g_nodes


def sampling_ratio(config: Configuration, kern: KernelModel, trials: int,
                   seed: int, margin: float | None = None,
                   grams=None) -> float:
    """Max over random unit-norm ``f`` of ``int_{S_n}|f|^2 / ((1/m) sum_j |f(z_j)|^2)``.

    ``S_n`` is the droplet shrunk by ``margin`` (default twice the model's
    bulk margin at ``n = config.n``).
    """
    if margin is None:
        margin = 2.0 * kern.model.bulk_margin(config.n)
    g_area, g_nodes = grams if grams is not None else sampling_gram(kern, config, margin)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        for _attempt in range(10):
            c = rng.standard_normal(kern.m) + 1j * rng.standard_normal(kern.m)
            c /= np.linalg.norm(c)
            den = float(np.real(c @ g_nodes @ c.conj()))
            if den > 1e-300:
                break
        else:
            raise ResampleError("random polynomial vanished at every node")
        num = float(np.real(c @ g_area @ c.conj()))
        best = max(best, num / den)
    return best


def sampling_constant(config: Configuration, kern: KernelModel,
                      margin: float | None = None, grams=None) -> float:
    """Worst case of the sampling ratio: top generalized eigenvalue."""
    from scipy.linalg import eigh

    if margin is None:
        margin = 2.0 * kern.model.bulk_margin(config.n)
    g_area, g_nodes = grams if grams is not None else sampling_gram(kern, config, margin)
    # transpose: quadratic forms above are c G c^H
    vals = eigh(g_area.T, g_nodes.T, eigvals_only=True)
    return float(vals[-1])


def bulk_nodes(config: Configuration, model, margin: float) -> np.ndarray:
    """Indices of nodes at distance ``>= margin`` from the droplet boundary."""
    d = model.droplet.signed_distance(config.points)
    return np.flatnonzero(d >= margin)


def _lagrange_all(points, model, zs, idx):
    """Complex weighted Lagrange functions ``l_j(z) exp(-n(Q(z)-Q(z_j))/2)``.

    Returns shape ``(len(zs), len(idx))``.
    """
    n = points.size
    zs = np.asarray(zs, dtype=complex)
    diff_nodes = points[:, None] - points[None, :]
    np.fill_diagonal(diff_nodes, 1.0)
    logden = np.sum(np.log(diff_nodes), axis=1)  # complex
    with np.errstate(divide="ignore", invalid="ignore"):
        logdz = np.log(zs[:, None] - points[None, :])
        total = np.sum(logdz, axis=1)
        sub = idx
        lg = total[:, None] - logdz[:, sub] - logden[None, sub]
        lg = lg - 0.5 * n * (model.q(zs)[:, None] - model.q(points[sub])[None, :])
        out = np.exp(lg)
    # at z = z_j itself the product over i != j equals the denominator
    hit = zs[:, None] == points[None, sub]
    out[hit] = 1.0
    # z at another node: exp(-inf) already 0, guard nan from inf - inf
    out[~np.isfinite(out)] = 0.0
    return out


def peaked_lagrange_values(config: Configuration, kern_eps: KernelModel,
                           indices, zs) -> np.ndarray:
    """Complex ``L_j(z) = (K_eps(z, z_j) / K_eps(z_j, z_j))^2 l_j(z)`` on ``zs``."""
    pts = config.points
    idx = np.asarray(indices, dtype=int)
    zs = np.ravel(np.asarray(zs, dtype=complex))
    ell = _lagrange_all(pts, kern_eps.model, zs, idx)
    kz = kernel_matrix(kern_eps, zs, pts[idx])
    kd = kernel_diagonal(kern_eps, pts[idx])
    return (kz / kd[None, :]) ** 2 * ell


def peaked_lagrange(config: Configuration, kern_eps: KernelModel, j: int, z,
                    margin: float | None = None):
    """``|L_j(z)|`` for a single node ``j``."""
    import warnings

    if margin is None:
        margin = 2.0 * kern_eps.model.bulk_margin(config.n)
    if kern_eps.model.droplet.signed_distance(config.points[j]) < margin:
        warnings.warn(f"node {j} lies outside the bulk region", DomainWarning,
                      stacklevel=2)
    zz = np.asarray(z, dtype=complex)
    out = np.abs(peaked_lagrange_values(config, kern_eps, [j], zz.ravel()))[:, 0]
    out = out.reshape(zz.shape)
    return out if out.ndim else float(out)


def _plane_rule(kern: KernelModel, n_radial: int, n_angular: int):
    drop = kern.model.droplet
    return disk_rule(drop.center, drop.radius + kern.model.neighborhood,
                     n_radial, n_angular)


def peaked_lagrange_l1(config: Configuration, kern_eps: KernelModel, indices,
                       n_radial: int = 160, n_angular: int = 512) -> np.ndarray:
    """``int |L_j| dA`` for each index, over the droplet neighborhood."""
    nodes, w = _plane_rule(kern_eps, n_radial, n_angular)
    out = np.zeros(len(indices))
    for a in range(0, nodes.size, 8192):
        vals = peaked_lagrange_values(config, kern_eps, indices, nodes[a:a + 8192])
        out += w[a:a + 8192] @ np.abs(vals)
    return out


def peaked_lagrange_sum(config: Configuration, kern_eps: KernelModel, indices,
                        zs) -> np.ndarray:
    """``F_n(z) = sum_j |L_j(z)|`` over the given node indices."""
    zs = np.ravel(np.asarray(zs, dtype=complex))
    out = np.zeros(zs.size)
    for a in range(0, zs.size, 8192):
        out[a:a + 8192] = np.abs(
            peaked_lagrange_values(config, kern_eps, indices, zs[a:a + 8192])).sum(axis=1)
    return out


def interpolation_norm(config: Configuration, kern_eps: KernelModel, values=None,
                       seed: int = 0, indices=None, margin: float | None = None,
                       n_radial: int = 160, n_angular: int = 512) -> float:
    """``n int |sum_j c_j L_j|^2 dA / sum_j |c_j|^2``.

    ``indices`` default to the nodes at distance ``>= margin`` from the
    droplet boundary; ``values`` default to random signs drawn from ``seed``.
    """
    if margin is None:
        margin = 2.0 * kern_eps.model.bulk_margin(config.n)
    if indices is None:
        indices = bulk_nodes(config, kern_eps.model, margin)
    indices = np.asarray(indices, dtype=int)
    if values is None:
        rng = np.random.default_rng(seed)
        values = rng.choice([-1.0, 1.0], size=indices.size)
    c = np.asarray(values, dtype=complex)
    if c.size != indices.size:
        raise ValueError("values must match the node indices")
    denom = float(np.sum(np.abs(c) ** 2))
    if denom == 0.0:
        return 0.0
    nodes, w = _plane_rule(kern_eps, n_radial, n_angular)
    total = 0.0
    for a in range(0, nodes.size, 8192):
        vals = peaked_lagrange_values(config, kern_eps, indices, nodes[a:a + 8192])
        total += float(w[a:a + 8192] @ (np.abs(vals @ c) ** 2))
    return config.n * total / denom
