"""On-disk JSON cache of converged configurations.

Entries are keyed by potential name, n, seed, gradient tolerance and restart
count.  Floats are written with ``repr`` precision, so a load round-trips
the solver output bit for bit.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

import numpy as np

from .fekete import (Configuration, FeketeResult, OptimizerSettings, energy,
                     first_order_residual, solve_fekete)
from .potential import PotentialModel

log = logging.getLogger(__name__)

SCHEMA = 1
ENV_VAR = "FEKETE_LAB_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "fekete_lab"


def resolve_cache_dir(cache_dir=None) -> Path:
    """Explicit argument, then ``$FEKETE_LAB_CACHE``, then ``~/.cache/fekete_lab``."""
    return Path(cache_dir) if cache_dir is not None else default_cache_dir()


def entry_path(cache_dir, potential: str, n: int, settings: OptimizerSettings) -> Path:
    name = (f"{potential}_n{n}_seed{settings.rng_seed}"
            f"_tol{settings.grad_tol:.3e}_r{settings.restarts}.json")
    return Path(cache_dir) / name


def result_to_json(result: FeketeResult, potential: str, seed: int,
                   settings: OptimizerSettings) -> dict:
    return {
        "schema": SCHEMA,
        "potential": potential,
        "n": result.config.n,
        "seed": seed,
        "grad_tol": settings.grad_tol,
        "restarts": settings.restarts,
        "points": result.config.to_xy(),
        "energy": result.energy,
        "residual": result.first_order_residual,
        "grad_inf_norm": result.grad_inf_norm,
        "iterations": result.iterations,
        "restart_index": result.restart_index,
    }


def result_from_json(data: dict, model: PotentialModel) -> FeketeResult:
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unsupported cache schema {data.get('schema')!r}")
    cfg = Configuration.from_xy(data["points"])
    e = energy(cfg, model)
    if not np.isclose(e, data["energy"], rtol=1e-10, atol=1e-10):
        raise ValueError("cached energy does not match the stored points")
    return FeketeResult(
        config=cfg,
        energy=float(data["energy"]),
        grad_inf_norm=float(data.get("grad_inf_norm", np.nan)),
        first_order_residual=first_order_residual(cfg, model),
        iterations=int(data.get("iterations", 0)),
        restart_index=int(data.get("restart_index", 0)),
    )


def load(cache_dir, model: PotentialModel, n: int, settings: OptimizerSettings):
    path = entry_path(cache_dir, model.name, n, settings)
    if not path.exists():
        return None
    try:
        return result_from_json(json.loads(path.read_text()), model)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        log.warning("ignoring bad cache entry %s: %s", path, exc)
        return None


def store(cache_dir, model: PotentialModel, result: FeketeResult,
          settings: OptimizerSettings) -> Path:
    path = entry_path(cache_dir, model.name, result.config.n, settings)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = result_to_json(result, model.name, settings.rng_seed, settings)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    tmp.replace(path)
    return path


def solve_cached(n: int, model: PotentialModel,
                 settings: OptimizerSettings = OptimizerSettings(),
                 cache_dir=None, use_cache: bool = True):
    """``(result, hit)``; solves and stores on a miss."""
    root = resolve_cache_dir(cache_dir)
    if use_cache:
        hit = load(root, model, n, settings)
        if hit is not None:
            return hit, True
    result = solve_fekete(n, model, settings)
    if use_cache:
        store(root, model, result, settings)
    return result, False
