import json

import numpy as np
import pytest

from fekete_lab import cache
from fekete_lab.cli import build_parser, main
from fekete_lab.fekete import OptimizerSettings
from fekete_lab.potential import ginibre

G = ginibre()
SMALL = OptimizerSettings(restarts=1)


def test_round_trip(tmp_path):
    res, hit = cache.solve_cached(12, G, SMALL, tmp_path)
    assert not hit
    again, hit = cache.solve_cached(12, G, SMALL, tmp_path)
    assert hit
    assert np.array_equal(res.config.points, again.config.points)
    assert again.energy == res.energy


def test_bad_entry_is_ignored(tmp_path):
    cache.solve_cached(6, G, SMALL, tmp_path)
    path = cache.entry_path(tmp_path, "ginibre", 6, SMALL)
    data = json.loads(path.read_text())
    data["energy"] += 1.0
    path.write_text(json.dumps(data))
    assert cache.load(tmp_path, G, 6, SMALL) is None
    data["schema"] = 99
    with pytest.raises(ValueError):
        cache.result_from_json(data, G)


def test_key_depends_on_settings(tmp_path):
    a = cache.entry_path(tmp_path, "ginibre", 10, SMALL)
    b = cache.entry_path(tmp_path, "ginibre", 10, OptimizerSettings(restarts=2))
    c = cache.entry_path(tmp_path, "ginibre", 10, OptimizerSettings(restarts=1, rng_seed=1))
    assert len({a, b, c}) == 3


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(cache.ENV_VAR, str(tmp_path / "x"))
    assert cache.resolve_cache_dir() == tmp_path / "x"
    assert cache.resolve_cache_dir(tmp_path) == tmp_path
    monkeypatch.delenv(cache.ENV_VAR)
    assert cache.default_cache_dir().name == "fekete_lab"


def run_cli(tmp_path, *args):
    return main(["--cache-dir", str(tmp_path / "cache"), *args])


def test_fekete_small_cases(tmp_path, capsys):
    assert run_cli(tmp_path, "fekete", "solve", "--n", "2", "--out-dir", str(tmp_path / "a")) == 0
    out = json.loads((tmp_path / "a" / "fekete_ginibre_n2.json").read_text())
    assert out["separation"] == pytest.approx(np.sqrt(2), rel=1e-6)
    assert out["max_abs"] == pytest.approx(0.5, rel=1e-6)
    assert run_cli(tmp_path, "fekete", "solve", "--n", "1", "--out-dir", str(tmp_path / "b")) == 0
    one = json.loads((tmp_path / "b" / "fekete_ginibre_n1.json").read_text())
    assert one["max_abs"] == pytest.approx(0.0, abs=1e-12)
    man = json.loads((tmp_path / "a" / "fekete_solve_manifest.json").read_text())
    assert man["outputs"] == ["fekete_ginibre_n2.json"] and "out_dir" not in man["params"]


def test_flags_on_either_side(tmp_path):
    a = build_parser().parse_args(["--seed", "4", "spectrum", "--n", "10"])
    b = build_parser().parse_args(["spectrum", "--n", "10", "--seed", "4"])
    assert a.seed == b.seed == 4


def test_reproducible_outputs(tmp_path):
    for d in ("r1", "r2"):
        assert run_cli(tmp_path, "density", "--n-list", "20,30", "--R-list", "2,3",
                       "--edge-depths", "0,1", "--out-dir", str(tmp_path / d)) == 0
    for name in ("density.csv", "density_bounds.json", "density_manifest.json",
                 "density_vs_depth.svg"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    text = (tmp_path / "r1" / "density.csv").read_text().splitlines()
    assert text[0] == "# manifest: density_manifest.json"


def test_spectrum_and_kernel(tmp_path):
    assert run_cli(tmp_path, "spectrum", "--n", "64", "--R", "3", "--out-dir", str(tmp_path)) == 0
    spec = json.loads((tmp_path / "spectrum.json").read_text())
    assert spec["trace"] == pytest.approx(9.0, abs=0.5)
    assert run_cli(tmp_path, "kernel", "check", "--m-list", "50", "--points", "5",
                   "--out-dir", str(tmp_path)) == 0
    assert (tmp_path / "kernel_check.csv").exists()


def test_boundary_checks(tmp_path):
    assert run_cli(tmp_path, "boundary", "checks", "--m", "400", "--out-dir", str(tmp_path)) == 0
    rep = json.loads((tmp_path / "boundary_checks.json").read_text())
    assert rep["all_passed"]


def test_acceptance_subset_and_injection(tmp_path, capsys):
    assert run_cli(tmp_path, "acceptance", "--only", "special,10",
                   "--out-dir", str(tmp_path / "ok")) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("[")]
    assert len(lines) == 2 and all(l.startswith("[PASS]") for l in lines)
    assert run_cli(tmp_path, "acceptance", "--only", "18", "--inject-tolerance", "0",
                   "--out-dir", str(tmp_path / "bad")) == 1
    rep = json.loads((tmp_path / "bad" / "acceptance.json").read_text())
    assert [c["passed"] for c in rep["criteria"]] == [False]


def test_bad_argument_exit_code(tmp_path, capsys):
    rc = run_cli(tmp_path, "density", "--n-list", "50", "--R-list", "4",
                 "--edge-depths", "20", "--out-dir", str(tmp_path))
    assert rc == 2
