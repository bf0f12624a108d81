"""Desk-scale acceptance suite.

Each criterion returns a measured value, a tolerance description and a
verdict.  ``tolerance_scale`` multiplies every tolerance (0 forces the
tolerance bands shut, which is how the failure path is exercised).
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import boundary, special
from .cache import solve_cached
from .density import EdgeRule, FamilySweep, count_in_disk, density_profile
from .fekete import OptimizerSettings, leja_siciak, separation, solve_fekete
from .kernel import (NUMERIC, berezin, build_kernel, eval_K, kernel_matrix,
                     offdiag_ratio_grid)
from .potential import ginibre
from .quadrature import disk_rule
from .spectral import (DiskRegion, concentration_matrix, interpolation_norm,
                       landau_compare, sampling_ratio, spectrum, trace_direct)

FAMILY_N = (10, 50, 100, 200)


@dataclass
class CriterionResult:
    number: int
    name: str
    group: str
    measured: str
    tolerance: str
    passed: bool
    runtime: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.number:02d} {self.name:<32} measured={self.measured}"
                f"  tol: {self.tolerance}  ({self.runtime:.2f}s)")


@dataclass
class Context:
    cache_dir: object = None
    tolerance_scale: float = 1.0
    seed: int = 0
    _family: dict = field(default_factory=dict)

    @property
    def settings(self) -> OptimizerSettings:
        return OptimizerSettings(rng_seed=self.seed)

    def family(self, n: int):
        if n not in self._family:
            self._family[n], _ = solve_cached(n, ginibre(), self.settings, self.cache_dir)
        return self._family[n]

    def t(self, x: float) -> float:
        return x * self.tolerance_scale

    def band(self, lo: float, hi: float):
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo) * self.tolerance_scale
        return c - h, c + h


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, (float, np.floating)) else str(x)


# --- individual criteria; each returns (measured, tolerance, passed, details)

def c01_kernel_cross(ctx):
    g = ginibre()
    x = np.linspace(-1.2, 1.2, 13)
    pts = (x[:, None] + 1j * x[None, :]).ravel()
    pts = pts[np.abs(pts) <= 1.2]
    worst = {}
    for m in (10, 20, 30, 40):
        num = kernel_matrix(build_kernel(g, m, mode=NUMERIC), pts, pts)
        ref = eval_K(build_kernel(g, m), pts[:, None], pts[None, :])
        d = np.sqrt(np.real(np.diag(ref)))
        worst[m] = float(np.max(np.abs(num - ref) / np.outer(d, d)))
    err = max(worst.values())
    tol = ctx.t(1e-8)
    return err, f"<= {tol:g} (normalized)", err <= tol, {"per_m": worst}


def c02_analytic(ctx):
    g = ginibre()
    r2 = solve_fekete(2, g, ctx.settings).config.points
    r3 = solve_fekete(3, g, ctx.settings).config.points
    e2 = max(np.max(np.abs(np.abs(r2) - 0.5)), abs(r2.sum()))
    side = np.abs(r3[:, None] - r3[None, :])[~np.eye(3, dtype=bool)]
    e3 = max(np.max(np.abs(np.abs(r3) - 1 / np.sqrt(3))), np.max(np.abs(side - 1.0)))
    err = float(max(e2, e3))
    tol = ctx.t(1e-6)
    return err, f"<= {tol:g}", err <= tol, {"n2_error": float(e2), "n3_error": float(e3)}


def c03_containment(ctx):
    radii = {n: float(np.max(np.abs(ctx.family(n).config.points))) for n in FAMILY_N}
    worst = max(radii.values())
    lim = 1 + ctx.t(1e-6)
    return worst, f"<= 1 + {ctx.t(1e-6):g}", worst <= lim, {"max_radius": radii}


def c04_stationarity(ctx):
    det = {}
    ok = True
    for n in FAMILY_N:
        res = ctx.family(n)
        r = res.first_order_residual / n
        c = float(abs(res.config.points.sum())) / n
        det[n] = {"residual_over_n": r, "centroid_over_n": c,
                  "separation": separation(res.config)}
        ok &= r <= ctx.t(1e-6) and c <= ctx.t(1e-6)
    worst = max(max(v["residual_over_n"], v["centroid_over_n"]) for v in det.values())
    return worst, f"<= {ctx.t(1e-6):g} per n", bool(ok), det


def c05_bulk_density(ctx):
    cnt = count_in_disk(ctx.family(200).config, 0.0, 6.0)
    val = cnt / 36.0
    lo, hi = ctx.band(0.85, 1.15)
    return val, f"in [{lo:g}, {hi:g}]", lo <= val <= hi, {"count": cnt}


def c06_edge_density(ctx):
    sweep = FamilySweep({200: ctx.family(200)}, ginibre())
    prof = density_profile(sweep, [EdgeRule(0.0)], [5.0, 6.0, 7.0])
    vals = {r.R: r.normalized for r in prof.rows}
    lo, hi = ctx.band(0.38, 0.62)
    ok = all(lo <= v <= hi for v in vals.values())
    return (", ".join(f"{v:.3f}" for v in vals.values()), f"each in [{lo:g}, {hi:g}]",
            ok, {"normalized_by_R": vals})


def _trace_pair(m, center, R):
    kern = build_kernel(ginibre(), m)
    disk = DiskRegion(center, R / np.sqrt(m))
    spec = spectrum(concentration_matrix(kern, disk))
    return spec, trace_direct(kern, disk)


def c07_bulk_trace(ctx):
    m, R = 400, 4.0
    spec, direct = _trace_pair(m, 0.0, R)
    dev = abs(spec.trace / R ** 2 - 1)
    mismatch = abs(spec.trace - direct)
    ok = dev <= ctx.t(0.1) and mismatch <= ctx.t(1e-6) * m
    return (f"{dev:.4g} / {mismatch:.2e}", f"<= {ctx.t(0.1):g} / <= {ctx.t(1e-6) * m:g}",
            ok, {"trace": spec.trace, "trace_direct": direct})


def c08_edge_trace(ctx):
    spec, direct = _trace_pair(400, 1.0, 5.0)
    val = spec.trace / 25.0
    lo, hi = ctx.band(0.42, 0.58)
    return val, f"in [{lo:g}, {hi:g}]", lo <= val <= hi, {"trace_direct": direct}


def c09_plateau(ctx):
    n, R = 200, 5.0
    rep = landau_compare(ctx.family(n).config, build_kernel(ginibre(), n),
                         DiskRegion(0.0, R / np.sqrt(n)), 0.5, 0.5)
    gap = abs(rep.point_count - rep.plateau_gamma)
    return gap, f"<= {ctx.t(2 * R):g}", gap <= ctx.t(2 * R), {
        "point_count": rep.point_count, "plateau_count": rep.plateau_gamma}


def c10_lastl(ctx):
    res = {f"{z}|{rho}": boundary.lastl_identity_residual(z, rho)
           for z in (0, 0.5, -0.5, 1 + 1j) for rho in (0.5, 1.0)}
    worst = max(res.values())
    return worst, f"<= {ctx.t(1e-6):g}", worst <= ctx.t(1e-6), {"residuals": res}


def c11_dawson_bound(ctx):
    excess = boundary.dawson_bound_sweep(20, 3.0)
    return excess, f"max(|F| - bound) <= {ctx.t(1e-9):g}", excess <= ctx.t(1e-9), {}


def c12_edge_profile(ctx):
    zetas = [-2.0, -1.0, 0.0, 1.0, 2.0]
    got = boundary.rescaled_intensity(build_kernel(ginibre(), 1000), 1.0, zetas)
    ref = [float(special.phi(-2 * z).real) for z in zetas]
    err = max(abs(a - b) for a, b in zip(got, ref))
    return err, f"<= {ctx.t(0.05):g}", err <= ctx.t(0.05), {"intensity": got, "phi": ref}


def offdiag_grids(m: int, s: float = 0.5):
    """50 z-points and 50 w-points in ``D(0; 1 + s/sqrt(m))``; w is rotated half a step."""
    r = np.array([0.25, 0.6, 0.9, 1.0, 1.0 + s / np.sqrt(m)])
    th = 2 * np.pi * np.arange(10) / 10
    zs = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    return zs, zs * np.exp(1j * np.pi / 10)


def c13_offdiag(ctx):
    g = ginibre()
    mx = {}
    for m in (100, 400):
        zs, ws = offdiag_grids(m)
        mx[m] = float(offdiag_ratio_grid(build_kernel(g, m), zs, ws).max())
    growth = mx[400] / mx[100] - 1
    return growth, f"<= {ctx.t(0.10):g}", growth <= ctx.t(0.10), {"max_ratio": mx}


def bulk_asymptotic_ratio(m: int, z: complex = 0.0) -> float:
    """``sup_{|w-z| <= delta_m} ||K(z,w)| - predictor| / (m^2 delta_m^3)``."""
    kern = build_kernel(ginibre(), m)
    d = np.log(m) ** 2 / np.sqrt(m)
    w, _ = disk_rule(z, d, 40, 64)
    pred = m * np.exp(-0.5 * m * np.abs(w - z) ** 2)
    return float(np.max(np.abs(np.abs(eval_K(kern, z, w)) - pred)) / (m * m * d ** 3))


ROUNDOFF_FLOOR = 1e-12


def c14_bulk_scaling(ctx):
    a, b = bulk_asymptotic_ratio(200), bulk_asymptotic_ratio(800)
    # below the floor both values are rounding noise and their ratio means nothing
    ok = b <= (1 + ctx.t(0.2)) * a + ctx.t(ROUNDOFF_FLOOR)
    return f"{a:.3g} -> {b:.3g}", f"m=800 <= {1 + ctx.t(0.2):g} x m=200 (+{ctx.t(ROUNDOFF_FLOOR):g})", ok, {}


def c15_berezin(ctx):
    kern = build_kernel(ginibre(), 100)
    mass = {}
    for z in (0.0, 0.5):
        w, wt = disk_rule(z, 6.0 / np.sqrt(kern.m), 64, 128)
        mass[z] = float(np.sum(wt * berezin(kern, z, w)))
    err = max(abs(v - 1) for v in mass.values())
    return err, f"<= {ctx.t(1e-6):g}", err <= ctx.t(1e-6), {"mass": mass}


def desk_margin(n: int) -> float:
    """Bulk margin ``2/sqrt(n)`` used in place of ``2 log(n)^2/sqrt(n)``."""
    return 2.0 / np.sqrt(n)


def c16_sampling_interp(ctx):
    g = ginibre()
    samp, interp = {}, {}
    for n in (100, 200):
        cfg = ctx.family(n).config
        samp[n] = sampling_ratio(cfg, build_kernel(g, n, 0.8), 50, ctx.seed,
                                 margin=desk_margin(n))
        interp[n] = interpolation_norm(cfg, build_kernel(g, n, 0.2), seed=ctx.seed,
                                       margin=desk_margin(n))
    gs = samp[200] / samp[100] - 1
    gi = interp[200] / interp[100] - 1
    tol = ctx.t(0.2)
    return (f"{gs:+.3f} / {gi:+.3f}", f"each <= {tol:g}", gs <= tol and gi <= tol,
            {"sampling_ratio": samp, "interpolation_norm": interp})


def leja_grid():
    """30 points: a 6 x 5 lattice over [-2, 2] x [-1.6, 1.6]."""
    x = np.linspace(-2.0, 2.0, 6)
    y = np.linspace(-1.6, 1.6, 5)
    return (x[:, None] + 1j * y[None, :]).ravel()


def c17_leja(ctx):
    g = ginibre()
    z = leja_grid()
    excess = float(np.max(leja_siciak(ctx.family(100).config, z, g) - g.q_hat(z)))
    return excess, f"<= {ctx.t(0.05):g}", excess <= ctx.t(0.05), {}


def _phi_oracle(z: complex) -> complex:
    # real leg from -inf to Re z, then the vertical leg to z
    a, b = z.real, z.imag
    dens = lambda t: np.exp(-t * t / 2) / np.sqrt(2 * np.pi)
    real = integrate.quad(dens, -np.inf, a, epsabs=1e-15, epsrel=1e-13)[0]
    if b == 0:
        return complex(real)
    f = lambda s, part: part(1j * dens(a + 1j * s))
    re = integrate.quad(f, 0, b, args=(np.real,), epsabs=1e-15, epsrel=1e-13)[0]
    im = integrate.quad(f, 0, b, args=(np.imag,), epsabs=1e-15, epsrel=1e-13)[0]
    return complex(real + re, im)


def _dawson_oracle(t: float) -> float:
    return integrate.quad(lambda x: np.exp(x * x - t * t), 0, t,
                          epsabs=1e-15, epsrel=1e-13)[0]


PHI_POINTS = (-2.0, -0.5, 0.0, 1.0, 3.0, 1 + 1j, -2 + 3j, 0.5 - 2j)
DAWSON_POINTS = (0.25, 1.0, 2.0, 5.0, 10.0)


def c18_special(ctx):
    phi_err = max(abs(special.phi(z) - _phi_oracle(complex(z))) for z in PHI_POINTS)
    daw_err = max(abs(special.dawson(t) - _dawson_oracle(t)) / _dawson_oracle(t)
                  for t in DAWSON_POINTS)
    xs, ys = np.meshgrid(np.linspace(1.5, 2.5, 11), np.linspace(-3, 3, 25))
    strip = (xs + 1j * ys).ravel()
    a = special.erfc(strip, method="series")
    b = special.erfc(strip, method="cf")
    overlap = float(np.max(np.abs(a - b) / np.abs(b)))
    tt = np.linspace(12.0, 15.0, 31)
    ds = special.dawson(tt, method="series")
    overlap = max(overlap, float(np.max(np.abs(ds - special.dawson(tt, method="asymptotic")) / ds)))
    err = float(max(phi_err, daw_err))
    ok = err <= ctx.t(1e-10) and overlap <= ctx.t(1e-9)
    return (f"{err:.2e} / {overlap:.2e}", f"<= {ctx.t(1e-10):g} / overlap <= {ctx.t(1e-9):g}",
            ok, {"phi_error": float(phi_err), "dawson_rel_error": float(daw_err),
                 "overlap": overlap})


# number -> (name, group, function, runtime limit in seconds or None)
CRITERIA: dict[int, tuple[str, str, Callable, float | None]] = {
    1: ("kernel_cross_validation", "kernel", c01_kernel_cross, 30.0),
    2: ("analytic_fekete_configs", "fekete", c02_analytic, 10.0),
    3: ("containment", "fekete", c03_containment, 600.0),
    4: ("stationarity", "fekete", c04_stationarity, None),
    5: ("bulk_density", "density", c05_bulk_density, None),
    6: ("edge_density", "density", c06_edge_density, None),
    7: ("bulk_trace", "spectral", c07_bulk_trace, None),
    8: ("edge_trace", "spectral", c08_edge_trace, None),
    9: ("plateau_counting", "spectral", c09_plateau, None),
    10: ("lastl_identity", "boundary", c10_lastl, 10.0),
    11: ("dawson_bound", "boundary", c11_dawson_bound, None),
    12: ("edge_profile", "boundary", c12_edge_profile, 20.0),
    13: ("offdiag_damping", "kernel", c13_offdiag, None),
    14: ("bulk_asymptotics_scaling", "kernel", c14_bulk_scaling, None),
    15: ("berezin_normalization", "kernel", c15_berezin, None),
    16: ("sampling_interpolation", "spectral", c16_sampling_interp, None),
    17: ("leja_siciak_bound", "fekete", c17_leja, None),
    18: ("special_functions", "special", c18_special, None),
}

GROUPS = sorted({v[1] for v in CRITERIA.values()})


def select(only=None) -> list[int]:
    """Criterion numbers matching ``only`` (group names or numbers, comma separated)."""
    if not only:
        return sorted(CRITERIA)
    keys = [k.strip() for k in only.split(",") if k.strip()]
    out = set()
    for k in keys:
        if k.isdigit() and int(k) in CRITERIA:
            out.add(int(k))
        elif k in GROUPS:
            out.update(i for i, v in CRITERIA.items() if v[1] == k)
        else:
            raise ValueError(f"unknown criterion or group {k!r}; groups: {GROUPS}")
    return sorted(out)


def run_one(number: int, ctx: Context) -> CriterionResult:
    name, group, fn, limit = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        measured, tol, ok, details = fn(ctx)
    except Exception as exc:  # a crash is a failure, reported like one
        measured, tol, ok, details = f"error: {exc!r}", "-", False, {}
    dt = time.perf_counter() - t0
    if limit is not None:
        tol = f"{tol}; runtime < {limit:g}s"
        ok = ok and dt < limit
    return CriterionResult(number, name, group, _fmt(measured), tol, bool(ok), dt, details)


def run(only=None, ctx: Context | None = None, echo=print) -> list[CriterionResult]:
    ctx = ctx or Context()
    out = []
    for k in select(only):
        res = run_one(k, ctx)
        if echo:
            echo(res.line())
        out.append(res)
    return out


def report_json(results) -> dict:
    def clean(o):
        if isinstance(o, dict):
            return {str(k): clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        return o

    return {"schema": 1, "all_passed": all(r.passed for r in results),
            "criteria": [clean(asdict(r)) for r in results]}
