"""Disk counts and Beurling-Landau density estimates on Fekete families."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .cache import solve_cached
from .errors import MissingDataError
from .fekete import Configuration, FeketeResult, OptimizerSettings
from .potential import PotentialModel, distance_to_boundary, laplacian

DEFAULT_N = (50, 100, 200)
DEFAULT_R = (4.0, 5.0, 6.0, 7.0)


@dataclass
class FamilySweep:
    """Converged configurations indexed by ``n``.

    ``provenance`` records the optimizer settings; every stored result must
    satisfy ``first_order_residual <= residual_tol * n``.
    """

    results: dict
    potential: PotentialModel
    provenance: dict = field(default_factory=dict)
    residual_tol: float = 1e-6

    def __post_init__(self):
        for n, res in self.results.items():
            if res.first_order_residual > self.residual_tol * n:
                raise ValueError(f"n={n}: residual {res.first_order_residual:.3e} "
                                 f"exceeds {self.residual_tol} * n")

    @classmethod
    def build(cls, model: PotentialModel, n_list,
              settings: OptimizerSettings = OptimizerSettings(),
              cache_dir=None, use_cache: bool = True) -> "FamilySweep":
        results = {}
        for n in n_list:
            results[int(n)], _ = solve_cached(int(n), model, settings, cache_dir, use_cache)
        prov = {"grad_tol": settings.grad_tol, "restarts": settings.restarts,
                "seed": settings.rng_seed, "step_rule": settings.step_rule}
        return cls(results, model, prov)

    def __getitem__(self, n: int) -> FeketeResult:
        return self.results[n]

    def require(self, n_list):
        missing = set(int(n) for n in n_list) - set(self.results)
        if missing:
            raise MissingDataError(missing)


@dataclass(frozen=True)
class EdgeRule:
    """Centers ``(1 - L/sqrt(n)) u`` approaching the unit circle at depth ``L``."""

    depth: float
    u: complex = 1.0

    def center(self, n: int) -> complex:
        c = 1.0 - self.depth / np.sqrt(n)
        if c < 0:
            raise ValueError(f"depth {self.depth} puts the center past the origin for n={n}")
        return complex(c * self.u)

    def label(self) -> str:
        return f"edge(L={self.depth:g})"


CenterSpec = Union[complex, float, EdgeRule]


def _center(spec: CenterSpec, n: int) -> complex:
    return spec.center(n) if isinstance(spec, EdgeRule) else complex(spec)


def _label(spec: CenterSpec) -> str:
    if isinstance(spec, EdgeRule):
        return spec.label()
    c = complex(spec)
    return f"({c.real:g},{c.imag:g})"


def count_in_disk(config: Configuration, center: complex, R: float) -> int:
    """Points in the open disk ``|z - center| < R / sqrt(n)``."""
    if R <= 0:
        raise ValueError("R must be positive")
    r = R / np.sqrt(config.n)
    return int(np.count_nonzero(np.abs(config.points - center) < r))


@dataclass(frozen=True)
class DensityRow:
    n: int
    R: float
    center: complex
    depth: float
    count: int
    normalized: float
    label: str = ""


@dataclass
class DensityProfile:
    rows: list = field(default_factory=list)

    HEADER = ("n", "R", "cx", "cy", "depth", "count", "normalized")

    def to_csv(self, manifest: str | None = None) -> str:
        buf = io.StringIO()
        if manifest:
            buf.write(f"# manifest: {manifest}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        for r in self.rows:
            w.writerow([r.n, repr(float(r.R)), repr(r.center.real), repr(r.center.imag),
                        repr(float(r.depth)), r.count, repr(float(r.normalized))])
        return buf.getvalue()

    def select(self, **kw) -> list:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in kw.items())]

    def empirical_bounds(self) -> dict:
        """Proxies for the lower and upper densities per center.

        The min and max of the normalized counts over the two largest ``n``
        and the two largest ``R``.  These are finite-size proxies, not the
        iterated limits.
        """
        out = {}
        for lab in sorted({r.label for r in self.rows}):
            rows = [r for r in self.rows if r.label == lab]
            ns = sorted({r.n for r in rows})[-2:]
            rs = sorted({r.R for r in rows})[-2:]
            vals = [r.normalized for r in rows if r.n in ns and r.R in rs]
            out[lab] = {"D_minus_proxy": min(vals), "D_plus_proxy": max(vals),
                        "n_used": ns, "R_used": rs}
        return out


def _row(model, cfg, n, R, spec) -> DensityRow:
    c = _center(spec, n)
    cnt = count_in_disk(cfg, c, R)
    depth = float(np.sqrt(n) * distance_to_boundary(model, c))
    return DensityRow(n, float(R), c, depth, cnt, cnt / (R * R * laplacian(model, c)),
                      _label(spec))


def density_profile(sweep: FamilySweep, centers, R_grid, n_list=None) -> DensityProfile:
    """Normalized counts ``count / (R^2 DQ(center))`` over ``n x center x R``.

    ``centers`` holds fixed points or :class:`EdgeRule` instances.
    """
    n_list = sorted(sweep.results) if n_list is None else [int(n) for n in n_list]
    sweep.require(n_list)
    prof = DensityProfile()
    for n in n_list:
        cfg = sweep[n].config
        for spec in centers:
            for R in R_grid:
                prof.rows.append(_row(sweep.potential, cfg, n, R, spec))
    return prof


def density_vs_depth(sweep: FamilySweep, n: int, depths, R: float) -> DensityProfile:
    """Edge-rule centers on the positive real axis at each depth ``L``."""
    sweep.require([n])
    cfg = sweep[n].config
    return DensityProfile([_row(sweep.potential, cfg, n, R, EdgeRule(float(L)))
                           for L in depths])
