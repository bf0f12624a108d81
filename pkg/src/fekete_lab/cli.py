"""Command-line entry point.

Numerical modules are imported inside the commands so that ``--threads``
can set the BLAS thread variables before numpy loads.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

SCHEMA = 1
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _complex(text: str) -> complex:
    """``"x,y"`` or a Python complex literal."""
    if "," in text:
        x, y = text.split(",", 1)
        return complex(float(x), float(y))
    return complex(text.replace(" ", ""))


def _floats(text: str) -> list:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list:
    return [int(t) for t in text.split(",") if t.strip()]


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


class Run:
    """Output directory plus the manifest that every command writes."""

    def __init__(self, args, command: str):
        from . import __version__

        self.out = Path(args.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.manifest_name = f"{command.replace(' ', '_')}_manifest.json"
        params = {k: v for k, v in sorted(vars(args).items())
                  if k not in ("func", "out_dir", "cache_dir", "threads")}
        self.manifest = {"schema": SCHEMA, "tool": "fekete_lab", "version": __version__,
                         "command": command, "params": params, "outputs": []}

    def path(self, name: str) -> Path:
        self.manifest["outputs"].append(name)
        return self.out / name

    def csv(self, name: str, header, rows) -> Path:
        import csv

        p = self.path(name)
        with p.open("w", newline="") as fh:
            fh.write(f"# manifest: {self.manifest_name}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        return p

    def finish(self) -> None:
        _dump(self.out / self.manifest_name, self.manifest)


def _r(x) -> str:
    return repr(float(x))


# ----------------------------------------------------------------- fekete

def _settings(args):
    from .fekete import OptimizerSettings

    return OptimizerSettings(grad_tol=args.tol, restarts=args.restarts, rng_seed=args.seed,
                             max_iters=args.max_iters)


def _summary(res, model) -> dict:
    import numpy as np

    from .fekete import separation

    pts = res.config.points
    return {
        "schema": SCHEMA,
        "potential": model.name,
        "n": res.config.n,
        "energy": res.energy,
        "residual": res.first_order_residual,
        "grad_inf_norm": res.grad_inf_norm,
        "separation": separation(res.config) if res.config.n > 1 else None,
        "max_abs": float(np.max(np.abs(pts))),
        "centroid_abs": float(abs(pts.sum())) / res.config.n,
        "iterations": res.iterations,
        "restart_index": res.restart_index,
        "converged": res.converged,
        "points": res.config.to_xy(),
    }


def cmd_fekete(args) -> int:
    from . import cache
    from .errors import NonConvergenceError
    from .potential import by_name

    model = by_name(args.potential)
    settings = _settings(args)
    run = Run(args, f"fekete {args.action}")
    out_name = Path(args.out).name if args.out else f"fekete_{model.name}_n{args.n}.json"
    if args.action == "verify":
        res = cache.load(cache.resolve_cache_dir(args.cache_dir), model, args.n, settings)
        if res is None:
            print(f"no cache entry for {model.name} n={args.n}; run `fekete solve` first",
                  file=sys.stderr)
            return 2
        summary = _summary(res, model)
        tol_ok = summary["residual"] <= settings.grad_tol * args.n * 10
        inside = bool(model.droplet.contains(res.config.points, 1e-6).all())
        summary["verified"] = bool(tol_ok and inside)
        _dump(run.path(out_name), summary)
        run.finish()
        print(json.dumps({k: v for k, v in summary.items() if k != "points"}, indent=2))
        return 0 if summary["verified"] else 1
    try:
        res, hit = cache.solve_cached(args.n, model, settings, args.cache_dir,
                                      use_cache=not args.no_cache)
    except NonConvergenceError as exc:
        summary = _summary(exc.best, model)
        _dump(run.path(out_name), summary)
        run.finish()
        print(f"error: {exc}; best partial result written to {run.out / out_name}",
              file=sys.stderr)
        return 3
    summary = _summary(res, model)
    _dump(run.path(out_name), summary)
    run.finish()
    logging.getLogger(__name__).info("cache %s", "hit" if hit else "miss")
    print(json.dumps({k: v for k, v in summary.items() if k != "points"}, indent=2))
    return 0


# ----------------------------------------------------------------- kernel

def cmd_kernel(args) -> int:
    import warnings

    import numpy as np

    from .kernel import build_kernel, bulk_modulus_predictor, eval_K, offdiag_ratio
    from .potential import by_name

    model = by_name(args.potential)
    z = _complex(args.z)
    run = Run(args, "kernel check")
    rows = []
    for n in _ints(args.m_list):
        kern = build_kernel(model, n, args.rho)
        m = kern.m
        reach = args.reach / np.sqrt(m)
        ws = z + np.linspace(0.0, reach, args.points)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pred = bulk_modulus_predictor(kern, z, ws)
        kv = np.abs(eval_K(kern, z, ws))
        ratio = (offdiag_ratio(kern, z, ws) if kern.mode == "ginibre_closed_form"
                 else (1 + np.sqrt(m) * np.abs(ws - z)) * kv / m)
        for w, a, b, c in zip(ws, kv, np.atleast_1d(pred), np.atleast_1d(ratio)):
            rows.append([m, _r(z.real), _r(z.imag), _r(w.real), _r(w.imag), _r(a), _r(b), _r(c)])
    run.csv("kernel_check.csv",
            ["m", "z_re", "z_im", "w_re", "w_im", "K_abs", "predictor", "ratio"], rows)
    run.finish()
    print(f"wrote {len(rows)} rows to {run.out / 'kernel_check.csv'}")
    return 0


# --------------------------------------------------------------- spectrum

def cmd_spectrum(args) -> int:
    import numpy as np

    from .kernel import build_kernel
    from .potential import by_name
    from .spectral import DiskRegion, concentration_matrix, plateau_count, spectrum

    model = by_name(args.potential)
    kern = build_kernel(model, args.n, args.rho)
    disk = DiskRegion(_complex(args.center), args.R / np.sqrt(kern.m))
    spec = spectrum(concentration_matrix(kern, disk))
    run = Run(args, "spectrum")
    thresholds = _floats(args.threshold)
    report = {
        "schema": SCHEMA,
        "m": spec.m,
        "eigenvalues": [float(v) for v in spec.eigenvalues],
        "trace": spec.trace,
        "trace_square": spec.trace_square,
        "plateau_counts": {repr(t): plateau_count(spec, t) for t in thresholds},
    }
    _dump(run.path("spectrum.json"), report)
    run.csv("eigenvalues.csv", ["index", "eigenvalue"],
            [[i, _r(v)] for i, v in enumerate(spec.eigenvalues)])
    run.finish()
    print(f"m={spec.m} trace={spec.trace:.6f} trace_square={spec.trace_square:.6f} "
          f"plateau={report['plateau_counts']}")
    return 0


# ---------------------------------------------------------------- density

def cmd_density(args) -> int:
    from .density import DensityProfile, EdgeRule, FamilySweep, density_profile, density_vs_depth
    from .fekete import OptimizerSettings
    from .potential import by_name
    from .svg import line_plot

    model = by_name(args.potential)
    settings = OptimizerSettings(rng_seed=args.seed, restarts=args.restarts, grad_tol=args.tol)
    n_list = _ints(args.n_list)
    R_list = _floats(args.R_list)
    sweep = FamilySweep.build(model, n_list, settings, args.cache_dir)
    centers = [_complex(c) if isinstance(c, str) else complex(*c) if isinstance(c, list)
               else complex(c) for c in json.loads(args.centers)]
    centers += [EdgeRule(L) for L in _floats(args.edge_depths)]
    prof = density_profile(sweep, centers, R_list)
    run = Run(args, "density")
    name = "density.csv"
    run.path(name).write_text(prof.to_csv(manifest=run.manifest_name))
    series = {}
    depths = sorted(set(_floats(args.edge_depths)) | {0.0, 1.0, 2.0, 4.0, 8.0})
    R = R_list[-1]
    for n in n_list:
        tab = density_vs_depth(sweep, n, [L for L in depths if L <= n ** 0.5], R)
        series[f"n={n}"] = ([r.depth for r in tab.rows], [r.normalized for r in tab.rows])
    run.path("density_vs_depth.svg").write_text(
        line_plot(series, f"normalized count vs depth (R={R:g})", "depth L", "normalized"))
    bounds = prof.empirical_bounds()
    _dump(run.path("density_bounds.json"), {"schema": SCHEMA, "proxies": bounds})
    run.finish()
    for lab, b in bounds.items():
        print(f"{lab}: D- proxy {b['D_minus_proxy']:.3f}  D+ proxy {b['D_plus_proxy']:.3f}")
    return 0


# --------------------------------------------------------------- boundary

def cmd_boundary(args) -> int:
    import numpy as np

    from . import boundary
    from .kernel import build_kernel
    from .potential import ginibre

    kern = build_kernel(ginibre(), args.m)
    zetas = np.round(np.linspace(-3.0, 3.0, 61), 10)
    inten = boundary.rescaled_intensity(kern, 1.0, zetas)
    ref = [float(boundary.phi(-2 * z).real) for z in zetas]
    lastl = {f"{z}|{rho}": boundary.lastl_identity_residual(z, rho)
             for z in (0, 0.5, -0.5, 1 + 1j, -10) for rho in (0.5, 1.0)}
    diag = boundary.diag_lower_bound_check([100, 400, args.m])
    excess = boundary.dawson_bound_sweep()
    monotone = bool(np.all(np.diff(inten) <= 1e-12))
    checks = {
        "lastl_identity": {"max_residual": max(lastl.values()), "residuals": lastl,
                           "passed": max(lastl.values()) <= 1e-6},
        "dawson_bound": {"max_excess": excess, "passed": excess <= 1e-9},
        "edge_profile": {"max_error": max(abs(a - b) for a, b in zip(inten, ref)),
                         "monotone": monotone},
        "diag_lower_bound": diag.to_json(),
    }
    checks["edge_profile"]["passed"] = checks["edge_profile"]["max_error"] <= 0.05 and monotone
    report = {"schema": SCHEMA, "m": kern.m, "checks": checks,
              "all_passed": all(c["passed"] for c in checks.values())}
    run = Run(args, "boundary checks")
    _dump(run.path("boundary_checks.json"), report)
    run.csv("edge_profile.csv", ["zeta", "intensity", "phi_limit"],
            [[_r(z), _r(a), _r(b)] for z, a, b in zip(zetas, inten, ref)])
    run.finish()
    for k, c in checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {k}")
    return 0 if report["all_passed"] else 1


# ------------------------------------------------------------- acceptance

def cmd_acceptance(args) -> int:
    from . import acceptance as A

    ctx = A.Context(cache_dir=args.cache_dir, tolerance_scale=args.inject_tolerance,
                    seed=args.seed)
    results = A.run(args.only, ctx)
    run = Run(args, "acceptance")
    rep = A.report_json(results)
    for c in rep["criteria"]:
        c.pop("runtime")  # timings go to stdout only, so the file is reproducible
    _dump(run.path("acceptance.json"), rep)
    run.finish()
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        print("failed: " + ", ".join(f"{r.number:02d} {r.name}" for r in failed))
        return 1
    return 0


# ----------------------------------------------------------------- parser

def _global_flags(p, defaults: bool) -> None:
    # registered on the root parser and again on each subcommand, so the
    # flags may appear on either side of the subcommand name
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--out-dir", default=d("out"))
    p.add_argument("--cache-dir", default=d(None),
                   help="defaults to $FEKETE_LAB_CACHE or ~/.cache/fekete_lab")
    p.add_argument("--threads", type=int, default=d(None), help="BLAS threads")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fekete-lab", description=__doc__.splitlines()[0])
    _global_flags(p, True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, False)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, parents=[common], **kw)

    f = sub.add_parser("fekete", help="solve or verify a Fekete configuration")
    f.add_argument("action", choices=["solve", "verify"])
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--potential", default="ginibre")
    f.add_argument("--restarts", type=int, default=3)
    f.add_argument("--tol", type=float, default=1e-7)
    f.add_argument("--max-iters", type=int, default=20000)
    f.add_argument("--out", default=None, help="summary file name inside --out-dir")
    f.add_argument("--no-cache", action="store_true")
    f.set_defaults(func=cmd_fekete)

    k = sub.add_parser("kernel", help="kernel asymptotics sweep")
    k.add_argument("action", choices=["check"])
    k.add_argument("--m-list", default="100,400")
    k.add_argument("--rho", type=float, default=1.0)
    k.add_argument("--z", default="0,0")
    k.add_argument("--reach", type=float, default=4.0, help="|w - z| up to reach/sqrt(m)")
    k.add_argument("--points", type=int, default=41)
    k.add_argument("--potential", default="ginibre")
    k.set_defaults(func=cmd_kernel)

    s = sub.add_parser("spectrum", help="concentration operator eigenvalues")
    s.add_argument("--n", type=int, default=400)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--center", default="0,0")
    s.add_argument("--R", type=float, default=4.0)
    s.add_argument("--threshold", default="0.5")
    s.add_argument("--potential", default="ginibre")
    s.set_defaults(func=cmd_spectrum)

    d = sub.add_parser("density", help="disk counts on a Fekete family")
    d.add_argument("--n-list", default="50,100,200")
    d.add_argument("--R-list", default="4,5,6,7")
    d.add_argument("--centers", default="[[0, 0]]", help="JSON list of [x, y]")
    d.add_argument("--edge-depths", default="0")
    d.add_argument("--potential", default="ginibre")
    d.add_argument("--restarts", type=int, default=3)
    d.add_argument("--tol", type=float, default=1e-7)
    d.set_defaults(func=cmd_density)

    b = sub.add_parser("boundary", help="edge identities and bounds")
    b.add_argument("action", choices=["checks"])
    b.add_argument("--m", type=int, default=1000)
    b.set_defaults(func=cmd_boundary)

    a = sub.add_parser("acceptance", help="run the acceptance suite")
    a.add_argument("--only", default=None, help="groups or numbers, comma separated")
    a.add_argument("--inject-tolerance", type=float, default=1.0,
                   help="scale every tolerance (0 forces failures)")
    a.set_defaults(func=cmd_acceptance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads:
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    if args.cache_dir is None and os.environ.get("FEKETE_LAB_CACHE"):
        args.cache_dir = os.environ["FEKETE_LAB_CACHE"]
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
