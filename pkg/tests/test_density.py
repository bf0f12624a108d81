import numpy as np
import pytest
from scipy.stats import spearmanr

from fekete_lab.density import (DensityProfile, EdgeRule, FamilySweep, count_in_disk,
                                density_profile, density_vs_depth)
from fekete_lab.errors import MissingDataError
from fekete_lab.fekete import Configuration
from fekete_lab.potential import ginibre

G = ginibre()


@pytest.fixture(scope="module")
def sweep(family):
    return FamilySweep({n: family[n] for n in (50, 100, 200)}, G)


def test_count_examples():
    cfg = Configuration(np.array([0.5 + 0.5j, 0.5 - 0.5j]))
    assert count_in_disk(cfg, 0, 1e6) == 2
    assert count_in_disk(cfg, 0.5, 0.5 * np.sqrt(2) + 1e-9) == 2
    assert count_in_disk(cfg, 0.5, 0.5 * np.sqrt(2) - 1e-9) == 0
    assert count_in_disk(cfg, 0.5 + 0.5j, 0.1 * np.sqrt(2)) == 1
    with pytest.raises(ValueError):
        count_in_disk(cfg, 0, 0.0)


def test_bulk_profile(sweep):
    prof = density_profile(sweep, [0.0], [4.0, 5.0, 6.0, 7.0])
    assert len(prof.rows) == 12
    for r in prof.select(n=200):
        assert r.normalized == pytest.approx(r.count / r.R ** 2)
        assert abs(r.normalized - 1) <= 0.25
    b = prof.empirical_bounds()["(0,0)"]
    assert b["D_minus_proxy"] <= b["D_plus_proxy"]
    assert b["n_used"] == [100, 200] and b["R_used"] == [6.0, 7.0]


def test_edge_profile(sweep):
    prof = density_profile(sweep, [EdgeRule(0.0)], [4.0, 5.0])
    for r in prof.rows:
        assert abs(r.depth) < 1e-12
        assert 0.3 <= r.normalized <= 0.7


def test_depth_curve(sweep):
    depths = [0, 1, 2, 4, 8]
    prof = density_vs_depth(sweep, 200, depths + [10], 6.0)
    vals = [r.normalized for r in prof.rows]
    assert vals[0] == pytest.approx(0.5, abs=0.12)
    assert vals[-1] == pytest.approx(1.0, abs=0.15)
    assert spearmanr(depths, vals[:5]).correlation > 0.9
    assert [r.depth for r in prof.rows] == pytest.approx(depths + [10])


def test_edge_rule():
    assert EdgeRule(2.0, 1j).center(100) == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        EdgeRule(20.0).center(100)


def test_missing_data(sweep):
    with pytest.raises(MissingDataError):
        density_profile(sweep, [0.0], [4.0], n_list=[400])


def test_residual_gate(family):
    bad = family[50]
    with pytest.raises(ValueError):
        FamilySweep({50: bad}, G, residual_tol=bad.first_order_residual / 100)


def test_csv_layout(sweep):
    prof = density_profile(sweep, [0.0], [4.0], n_list=[50])
    text = prof.to_csv("m.json").splitlines()
    assert text[0] == "# manifest: m.json"
    assert text[1] == "n,R,cx,cy,depth,count,normalized"
    assert text[2].startswith("50,4.0,0.0,0.0,")
    assert DensityProfile().to_csv() == "n,R,cx,cy,depth,count,normalized\n"
