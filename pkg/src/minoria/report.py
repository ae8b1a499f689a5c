"""Evaluation metrics, per-percentile tail reports and result serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .baselines import minority_label
from .dataset import Dataset
from .errors import DataError
from .miner2d import MiningCandidate, p_tail

REPORT_HEADER = ["percentile", "accuracy", "f1", "group_ratio", "tail_size"]
DEFAULT_PERCENTILES = (1.0, 0.1, 0.01, 0.001, 0.0001)
CANDIDATE_FIELDS = ("heuristic", "direction", "skew", "tail_indices", "tail_size", "disparity", "accepted", "metrics")


@dataclass(frozen=True)
class TailReport:
    percentile: float
    accuracy: float
    f1: float
    group_ratio: Optional[float]
    tail_size: int


def _binary_f1(y, yhat, positive) -> float:
    tp = int(np.sum((yhat == positive) & (y == positive)))
    fp = int(np.sum((yhat == positive) & (y != positive)))
    fn = int(np.sum((yhat != positive) & (y == positive)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)


def default_positive(labels):
    classes = sorted(set(np.asarray(labels).tolist()), key=str)
    if 1 in classes:
        return 1
    return classes[-1]


def metrics(labels, predictions, subset, positive=None) -> tuple:
    """(accuracy, f1) over ``subset``.

    With at most two classes f1 is the binary score for ``positive``
    (default: class 1 when present, else the last class in sorted order).
    With more classes it is the macro average over the classes seen in
    ``labels``; passing ``positive`` then is an error.
    """
    y_all = np.asarray(labels)
    yhat_all = np.asarray(predictions)
    if len(y_all) != len(yhat_all):
        raise DataError("labels and predictions differ in length")
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        raise DataError("metrics over an empty subset are undefined")
    y, yhat = y_all[subset], yhat_all[subset]
    accuracy = float(np.mean(y == yhat))
    classes = sorted(set(y_all.tolist()), key=str)
    if len(classes) > 2:
        if positive is not None:
            raise DataError(f"labels have {len(classes)} classes; a single positive class does not apply")
        f1 = float(np.mean([_binary_f1(y, yhat, c) for c in classes]))
    else:
        f1 = _binary_f1(y, yhat, default_positive(y_all) if positive is None else positive)
    return accuracy, f1


def group_ratio(groups, subset, minority) -> float:
    g = np.asarray(groups)[np.asarray(subset, dtype=int)]
    return float(np.mean(g == minority))


def _require_predictions(ds: Dataset) -> None:
    if ds.label is None or ds.prediction is None:
        raise DataError("label and prediction columns are required for a tail report")


def tail_report(ds: Dataset, f, percentiles: Sequence[float] = DEFAULT_PERCENTILES, positive=None, minority=None) -> list:
    """One row per percentile, largest first.

    Tails are nested: the p-tail for a smaller p is a prefix of the tail for
    a larger p.  ``group_ratio`` is the minority share of the tail and is
    only filled when the dataset has a group column.
    """
    _require_predictions(ds)
    if ds.group is not None and minority is None:
        minority = minority_label(ds.group)
    out = []
    for p in sorted(set(float(x) for x in percentiles), reverse=True):
        tail = p_tail(ds, f, p)
        acc, f1 = metrics(ds.label, ds.prediction, tail, positive)
        ratio = group_ratio(ds.group, tail, minority) if ds.group is not None else None
        out.append(TailReport(p, acc, f1, ratio, len(tail)))
    return out


def write_report_csv(rows: Sequence[TailReport], path) -> None:
    rows = sorted(rows, key=lambda r: -r.percentile)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_HEADER)
        for r in rows:
            w.writerow([
                repr(r.percentile), repr(r.accuracy), repr(r.f1),
                "" if r.group_ratio is None else repr(r.group_ratio), r.tail_size,
            ])


def read_report_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_HEADER:
            raise DataError(f"report header must be {','.join(REPORT_HEADER)}")
        return [
            TailReport(
                float(r["percentile"]), float(r["accuracy"]), float(r["f1"]),
                None if r["group_ratio"] == "" else float(r["group_ratio"]), int(r["tail_size"]),
            )
            for r in reader
        ]


# -- candidate JSON -------------------------------------------------------------

def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def candidate_metrics(ds: Dataset, tail, positive=None, minority=None) -> dict:
    out = {"accuracy": None, "f1": None}
    if ds.label is not None and ds.prediction is not None:
        out["accuracy"], out["f1"] = metrics(ds.label, ds.prediction, tail, positive)
    if ds.group is not None:
        if minority is None:
            minority = minority_label(ds.group)
        out["group_ratio"] = group_ratio(ds.group, tail, minority)
    return out


def candidate_to_dict(c: MiningCandidate) -> dict:
    return {
        "heuristic": c.heuristic,
        "direction": [float(v) for v in c.direction],
        "skew": _num(c.skew),
        "tail_indices": [int(i) for i in c.tail],
        "tail_size": int(len(c.tail)),
        "disparity": _num(c.disparity),
        "accepted": bool(c.accepted),
        "metrics": {k: _num(v) for k, v in c.metrics.items()},
    }


def candidate_from_dict(obj: dict) -> MiningCandidate:
    missing = [k for k in CANDIDATE_FIELDS if k not in obj]
    if missing:
        raise DataError(f"candidate is missing fields {missing}")
    tail = np.asarray(obj["tail_indices"], dtype=int)
    if len(tail) != obj["tail_size"]:
        raise DataError("tail_size does not match tail_indices")
    return MiningCandidate(
        direction=np.asarray(obj["direction"], dtype=float),
        skew=obj["skew"],
        tail=tail,
        disparity=obj["disparity"],
        accepted=obj["accepted"],
        heuristic=obj["heuristic"],
        metrics=dict(obj["metrics"]),
    )


def results_to_json(candidates: Sequence[MiningCandidate], provenance: Optional[dict] = None) -> str:
    doc = {"candidates": [candidate_to_dict(c) for c in candidates], "provenance": provenance or {}}
    return json.dumps(doc, indent=2, sort_keys=True)


def results_from_json(text: str) -> tuple:
    doc = json.loads(text)
    if "candidates" not in doc:
        raise DataError("results JSON needs a 'candidates' list")
    return [candidate_from_dict(c) for c in doc["candidates"]], doc.get("provenance", {})
