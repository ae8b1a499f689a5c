import json

import numpy as np
import pytest

from minoria.dataset import Dataset
from minoria.errors import DataError
from minoria.miner2d import MiningCandidate
from minoria.report import (
    REPORT_HEADER,
    TailReport,
    candidate_metrics,
    metrics,
    read_report_csv,
    results_from_json,
    results_to_json,
    tail_report,
    write_report_csv,
)


def test_perfect_predictions():
    assert metrics([0, 1, 1], [0, 1, 1], [0, 1, 2]) == (1.0, 1.0)


def test_one_of_each_outcome():
    # TP, FP, FN, TN
    labels, preds = [1, 0, 1, 0], [1, 1, 0, 0]
    acc, f1 = metrics(labels, preds, range(4))
    assert acc == 0.5 and f1 == pytest.approx(0.5)


def test_all_negative_predictions():
    assert metrics([1, 0, 1], [0, 0, 0], range(3))[1] == 0.0


def test_positive_class_flag_and_strings():
    acc, f1 = metrics(["y", "n", "y"], ["y", "y", "y"], range(3), positive="y")
    assert acc == pytest.approx(2 / 3) and f1 == pytest.approx(0.8)


def test_macro_f1_for_three_classes():
    labels, preds = [0, 1, 2, 0, 1, 2], [0, 1, 2, 1, 1, 2]
    acc, f1 = metrics(labels, preds, range(6))
    per_class = [2 / 3, 0.8, 1.0]
    assert acc == pytest.approx(5 / 6) and f1 == pytest.approx(np.mean(per_class))
    with pytest.raises(DataError):
        metrics(labels, preds, range(6), positive=1)


def test_metrics_errors():
    with pytest.raises(DataError):
        metrics([1, 0], [1, 0], [])
    with pytest.raises(DataError):
        metrics([1, 0], [1], [0])


def _planted(n=1000):
    # the top 10% along x0 is 90% minority and 80% mispredicted
    rng = np.random.default_rng(0)
    x = np.arange(n, dtype=float)
    X = np.column_stack([x ** 2, rng.normal(size=n)])
    X[:, 1] *= 1e-6
    label = np.ones(n, dtype=int)
    pred = np.ones(n, dtype=int)
    group = np.array(["major"] * n, dtype=object)
    top = np.arange(n - n // 10, n)
    group[top[: 90]] = "minor"
    pred[top[: 80]] = 0
    return Dataset(features=X, label=label, prediction=pred, group=group)


def test_tail_report_planted():
    ds = _planted()
    rows = tail_report(ds, [1.0, 0.0], [0.1, 1.0])
    assert [r.percentile for r in rows] == [1.0, 0.1]
    whole, tail = rows
    assert whole.tail_size == 1000 and whole.accuracy == pytest.approx(0.92)
    assert whole.group_ratio == pytest.approx(0.09)
    assert tail.tail_size == 100
    assert tail.group_ratio == pytest.approx(0.9)
    assert tail.accuracy == pytest.approx(0.2)


def test_tail_report_tiny_percentile_and_no_group():
    ds = _planted()
    ds = Dataset(features=ds.features, label=ds.label, prediction=ds.prediction)
    rows = tail_report(ds, [1.0, 0.0], [1e-6])
    assert rows[0].tail_size == 1 and rows[0].group_ratio is None


def test_tail_report_needs_predictions():
    with pytest.raises(DataError):
        tail_report(Dataset(features=np.ones((3, 2)) * [[1], [2], [3]]), [1.0, 0.0], [0.5])


def test_report_csv_sorted_and_round_trip(tmp_path):
    rows = [TailReport(0.01, 0.5, 0.25, None, 10), TailReport(1.0, 0.9, 0.8, 0.1, 1000)]
    write_report_csv(rows, tmp_path / "r.csv")
    text = (tmp_path / "r.csv").read_text().splitlines()
    assert text[0] == ",".join(REPORT_HEADER)
    assert text[1].startswith("1.0,")
    assert read_report_csv(tmp_path / "r.csv") == sorted(rows, key=lambda r: -r.percentile)


def _candidate():
    return MiningCandidate(
        direction=np.array([0.6, 0.8]), skew=1.25, tail=np.array([4, 2, 9]),
        disparity=0.3, accepted=True, heuristic="raysweep",
        metrics={"accuracy": 0.5, "f1": 0.25, "group_ratio": 0.75},
    )


def test_json_schema_and_round_trip():
    text = results_to_json([_candidate()], {"direction_frame": "original"})
    doc = json.loads(text)
    assert set(doc["candidates"][0]) == {
        "heuristic", "direction", "skew", "tail_indices", "tail_size", "disparity", "accepted", "metrics",
    }
    assert doc["candidates"][0]["tail_size"] == 3
    cands, prov = results_from_json(text)
    assert results_to_json(cands, prov) == text


def test_json_rejects_incomplete():
    with pytest.raises(DataError):
        results_from_json('{"candidates": [{"skew": 1}]}')
    with pytest.raises(DataError):
        results_from_json("{}")


def test_candidate_metrics_optional_fields():
    ds = Dataset(features=np.ones((3, 2)) * [[1], [2], [3]])
    assert candidate_metrics(ds, [0]) == {"accuracy": None, "f1": None}
    ds = _planted()
    m = candidate_metrics(ds, np.arange(900, 1000))
    assert m["group_ratio"] == pytest.approx(0.9) and m["accuracy"] == pytest.approx(0.2)
