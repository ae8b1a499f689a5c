import math

import numpy as np
import pytest

from minoria.dataset import Dataset
from minoria.errors import DataError
from minoria.median_level import (
    dump_regions_csv,
    enumerate_median_regions,
    median_at,
    median_rank,
    sweep_events,
)

from conftest import TOY, random_positive


def direct_median(X, theta):
    f = np.array([math.cos(theta), math.sin(theta)])
    return int(np.argsort(X @ f, kind="stable")[median_rank(len(X))])


def check_tiling(regions):
    assert regions[0].theta_lo == 0.0
    assert regions[-1].theta_hi == math.pi / 2
    for a, b in zip(regions, regions[1:]):
        assert a.theta_hi == b.theta_lo
        assert a.median_index != b.median_index
    assert all(r.theta_lo < r.theta_hi for r in regions)


def test_median_rank():
    assert [median_rank(n) for n in (1, 2, 3, 4, 5)] == [0, 0, 1, 1, 2]


def test_toy_regions():
    regions = enumerate_median_regions(TOY)
    assert [r.median_index for r in regions] == [1, 0, 2]
    assert regions[0].theta_hi == pytest.approx(math.atan(2 / 3), abs=1e-12)
    assert regions[1].theta_hi == pytest.approx(math.atan(3), abs=1e-12)
    np.testing.assert_allclose(regions[0].boundary_vertex, [2 / 3, 4 / 9], atol=1e-9)
    np.testing.assert_allclose(regions[1].boundary_vertex, [0.2, 0.6], atol=1e-9)
    assert regions[2].boundary_vertex is None
    check_tiling(regions)


@pytest.mark.parametrize("theta, expected", [(math.pi / 4, 0), (0.0, 1), (1.4, 2), (math.pi / 2, 2)])
def test_toy_median_at(theta, expected):
    assert median_at(enumerate_median_regions(TOY), theta) == expected


def test_median_at_domain():
    with pytest.raises(ValueError):
        median_at(enumerate_median_regions(TOY), 2.0)


def test_single_row():
    regions = enumerate_median_regions(np.array([[1.0, 2.0]]))
    assert len(regions) == 1 and regions[0].median_index == 0


def test_duplicates_keep_lower_id():
    regions = enumerate_median_regions(np.array([[1.0, 2.0], [1.0, 2.0]]))
    assert len(regions) == 1 and regions[0].median_index == 0


def test_rejects_nonpositive_and_wrong_dimension():
    with pytest.raises(DataError, match="normalize_positive"):
        enumerate_median_regions(np.array([[0.0, 1.0], [1.0, 2.0]]))
    with pytest.raises(DataError):
        enumerate_median_regions(np.ones((3, 3)))


def test_accepts_dataset():
    assert len(enumerate_median_regions(Dataset(features=TOY))) == 3


def test_events_open_quadrant_only():
    X = np.array([[1.0, 1.0], [2.0, 1.0], [1.0, 3.0], [3.0, 0.5]])
    theta, i, j = sweep_events(X)
    assert np.all((theta > 0) & (theta < math.pi / 2))
    # rows sharing a coordinate never cross inside the open quadrant
    pairs = set(zip(i.tolist(), j.tolist()))
    assert (0, 1) not in pairs and (0, 2) not in pairs


def _assert_oracle(X, thetas):
    regions = enumerate_median_regions(X)
    check_tiling(regions)
    bad = [t for t in thetas if median_at(regions, t) != direct_median(X, t)
           and not _tied_at(X, t)]
    assert not bad


def _tied_at(X, theta, tol=1e-9):
    # at exact crossings the rank is ambiguous; the oracle check skips those angles
    f = np.array([math.cos(theta), math.sin(theta)])
    p = np.sort(X @ f)
    k = median_rank(len(X))
    near = [p[k - 1] if k > 0 else -np.inf, p[k + 1] if k + 1 < len(p) else np.inf]
    return min(abs(p[k] - near[0]), abs(near[1] - p[k])) <= tol * (1 + abs(p[k]))


def test_random_oracle_even_and_odd():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(2, 40))
        _assert_oracle(random_positive(rng, n), rng.uniform(0, math.pi / 2, 300))


def test_integer_grid_degeneracies():
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = int(rng.integers(3, 30))
        X = rng.integers(1, 5, size=(n, 2)).astype(float)
        _assert_oracle(X, rng.uniform(0, math.pi / 2, 300))


def test_collinear_and_concurrent_lines():
    # points on one line through (1, 1): all duals pass through a common point
    t = np.linspace(0.1, 0.9, 9)
    X = np.column_stack([1 + 3 * t, 1 + 3 * (1 - t)])
    rng = np.random.default_rng(3)
    _assert_oracle(X, rng.uniform(0, math.pi / 2, 500))
    # duplicated rows mixed with distinct ones
    Y = np.vstack([X, X[:4]])
    _assert_oracle(Y, rng.uniform(0, math.pi / 2, 500))


def test_region_count_bound():
    rng = np.random.default_rng(4)
    X = random_positive(rng, 30)
    assert len(enumerate_median_regions(X)) <= 30 * 29 // 2 + 1


def test_dump_csv(tmp_path):
    path = tmp_path / "r.csv"
    dump_regions_csv(enumerate_median_regions(TOY), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "theta_lo,theta_hi,median_index,vertex_x,vertex_y"
    assert len(lines) == 4
