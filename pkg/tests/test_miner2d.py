import math
import time

import numpy as np
import pytest

from minoria.dataset import Dataset, normalize_positive
from minoria.errors import DataError
from minoria.miner2d import (
    MiningParams,
    disparity,
    mine_raysweep,
    mine_warmup,
    p_tail,
    tail_size,
)
from minoria.skew import skew_naive

from conftest import DIAG, TOY, planted_loss_2d, random_positive


def test_tail_size_rounding():
    assert tail_size(3, 1.0) == 3
    assert tail_size(3, 0.33) == 1
    assert tail_size(3, 0.34) == 2
    assert tail_size(1000, 1e-6) == 1


def test_p_tail_examples(toy):
    assert sorted(p_tail(toy, DIAG, 1.0).tolist()) == [0, 1, 2]
    assert p_tail(toy, DIAG, 0.33).tolist() == [2]
    # zero skew takes the low side, ties by row id
    sym = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    assert p_tail(sym, [1.0, 0.0], 0.33).tolist() == [0]
    with pytest.raises(ValueError):
        p_tail(toy, DIAG, 0.0)


def test_p_tail_nested(toy):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 2))
    f = np.array([0.6, 0.8])
    small, large = p_tail(X, f, 0.05), p_tail(X, f, 0.2)
    assert large[: len(small)].tolist() == small.tolist()


def test_disparity_examples():
    ds = Dataset(features=TOY, loss=np.array([1.0, 0.0, 0.0]))
    assert disparity(ds, [0]) == pytest.approx(2 / 3)
    assert disparity(ds, [0, 1, 2]) == pytest.approx(0.0)
    flat = Dataset(features=TOY, loss=np.full(3, 0.4))
    assert disparity(flat, [1]) == pytest.approx(0.0)
    with pytest.raises(DataError):
        disparity(Dataset(features=TOY), [0])


def test_params_validation():
    with pytest.raises(ValueError):
        MiningParams(p=0.0)
    with pytest.raises(ValueError):
        MiningParams(passes=3)
    with pytest.raises(ValueError):
        MiningParams(min_sep_cos=0.0)


@pytest.mark.parametrize("miner", [mine_warmup, mine_raysweep])
def test_toy_planted_loss(toy_loss, miner):
    out = miner(toy_loss, MiningParams(l=1, p=0.33, tau=0.5))
    assert len(out) == 1
    assert out[0].tail.tolist() == [2]
    assert out[0].disparity == pytest.approx(2 / 3)
    assert out[0].accepted


@pytest.mark.parametrize("miner", [mine_warmup, mine_raysweep])
def test_unreachable_tau_and_zero_l(toy_loss, miner):
    assert miner(toy_loss, MiningParams(l=3, p=0.33, tau=5.0)) == []
    assert miner(toy_loss, MiningParams(l=0, p=0.33, tau=0.0)) == []


def test_requires_two_features():
    ds = Dataset(features=np.ones((4, 3)) + np.arange(12).reshape(4, 3), loss=np.zeros(4))
    with pytest.raises(DataError):
        mine_warmup(ds, MiningParams())


def test_tau_needs_loss(toy):
    with pytest.raises(DataError):
        mine_raysweep(toy, MiningParams(tau=0.1))
    assert len(mine_raysweep(toy, MiningParams(tau=None, l=2))) >= 1


def _scan_skew(X, thetas):
    F = np.column_stack([np.cos(thetas), np.sin(thetas)])
    P = X @ F.T
    nu = np.sort(P, axis=0)[(len(X) + 1) // 2 - 1]
    return np.abs(3 * (P.mean(axis=0) - nu) / P.std(axis=0))


def _scan_max(X, count=10**5, zooms=4, keep=20):
    # a uniform scan, then repeated local scans around the best grid points;
    # the maximum sits on a steep kink that a uniform grid alone cannot resolve
    thetas = np.linspace(0, 2 * math.pi, count, endpoint=False)
    values = _scan_skew(X, thetas)
    width = 2 * math.pi / count
    for _ in range(zooms):
        top = thetas[np.argsort(values)[-keep:]]
        thetas = np.concatenate([np.linspace(t - width, t + width, 2001) for t in top])
        values = _scan_skew(X, thetas)
        width /= 1000
    return values.max()


def test_raysweep_matches_dense_scan(toy):
    best = mine_raysweep(toy, MiningParams(l=1, tau=None))[0]
    scan = _scan_max(TOY)
    assert best.skew == pytest.approx(scan, abs=1e-6)
    assert best.skew >= scan - 1e-9


def test_raysweep_beats_scan_random():
    rng = np.random.default_rng(9)
    for _ in range(10):
        X = random_positive(rng, int(rng.integers(3, 30)))
        best = mine_raysweep(Dataset(features=X), MiningParams(l=1, tau=None))[0]
        scan = _scan_max(X, count=20000, zooms=3)
        assert best.skew == pytest.approx(scan, abs=1e-6)


def test_collinear_data_skips_degenerate_direction():
    t = np.linspace(0, 1, 9)
    ds = Dataset(features=np.column_stack([1 + t, 2 + 2 * t]), loss=(t > 0.8).astype(float))
    out = mine_raysweep(ds, MiningParams(l=3, p=0.2, tau=None))
    assert out and all(np.isfinite(c.skew) for c in out)


def _assert_contract(ds, out, params):
    skews = [c.skew for c in out]
    assert skews == sorted(skews, reverse=True)
    for a in range(len(out)):
        assert abs(np.linalg.norm(out[a].direction) - 1) < 1e-12
        assert skew_naive(ds, out[a].direction) == pytest.approx(out[a].skew, abs=1e-9)
        if params.tau is not None:
            assert disparity(ds, out[a].tail) >= params.tau
        for b in range(a):
            assert out[a].direction @ out[b].direction <= params.min_sep_cos


def test_contract_on_planted_data():
    rng = np.random.default_rng(3)
    params = MiningParams(l=4, p=0.1, tau=0.05)
    for _ in range(10):
        ds = normalize_positive(planted_loss_2d(rng, 80))
        for miner in (mine_warmup, mine_raysweep):
            _assert_contract(ds, miner(ds, params), params)


def test_boundary_mode_equals_warmup():
    rng = np.random.default_rng(4)
    for _ in range(25):
        ds = planted_loss_2d(rng, int(rng.integers(3, 42)))
        params = MiningParams(l=3, p=0.1, tau=0.0)
        a = mine_warmup(ds, params)
        b = mine_raysweep(ds, params, interior=False)
        assert [c.tail.tolist() for c in a] == [c.tail.tolist() for c in b]
        assert np.allclose([c.skew for c in a], [c.skew for c in b], atol=1e-9)


def test_interior_mode_never_worse():
    rng = np.random.default_rng(5)
    for _ in range(20):
        ds = planted_loss_2d(rng, 25)
        p = MiningParams(l=1, tau=None)
        assert mine_raysweep(ds, p)[0].skew >= mine_warmup(ds, p)[0].skew - 1e-9


def test_one_pass_stays_in_first_quadrant():
    ds = planted_loss_2d(np.random.default_rng(6), 40)
    for c in mine_raysweep(ds, MiningParams(l=5, tau=None, passes=1)):
        f = c.direction
        assert (f >= -1e-12).all() or (f <= 1e-12).all()


def test_runtime_scaling():
    rng = np.random.default_rng(8)

    def timed(n):
        ds = Dataset(features=random_positive(rng, n), loss=rng.uniform(size=n))
        best = math.inf
        for _ in range(2):
            t = time.perf_counter()
            mine_raysweep(ds, MiningParams(l=3, tau=None))
            best = min(best, time.perf_counter() - t)
        return best

    assert timed(800) / timed(400) <= 4.5
