"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 no candidate passed
the disparity threshold.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import baselines, report
from .dataset import (
    Dataset,
    SynthSpec,
    default_rotation_constant,
    generate_synthetic,
    load_csv,
    normalize_positive,
    write_csv,
)
from .errors import DataError, MinoriaError
from .miner2d import MiningParams, mine_raysweep, mine_warmup
from .minerhd import (
    EEParams,
    FocusedParams,
    GridParams,
    ee_search,
    focused_explore,
    grid_search,
    qp_search,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_CANDIDATE = 0, 1, 2, 3
SEED_ENV = "MINORIA_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def resolve_seed(flag: Optional[int]) -> int:
    """The ``--seed`` flag wins over the environment variable; the default is 0."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _columns(sub):
    sub.add_argument("csv", help="input CSV with a header row")
    sub.add_argument("--features", help="comma-separated feature columns (default: all unmapped columns)")
    sub.add_argument("--loss", help="per-row loss column")
    sub.add_argument("--label", help="true label column")
    sub.add_argument("--prediction", help="predicted label column")
    sub.add_argument("--group", help="group column, used only for evaluation")


def _mining(sub, tau_default: Optional[float]):
    sub.add_argument("--p", type=float, default=0.1, help="tail fraction")
    sub.add_argument("--tau", type=float, default=tau_default, help="disparity threshold")
    sub.add_argument("--no-tau", action="store_true", help="accept candidates without a loss gate")
    sub.add_argument("--l", type=int, default=3, help="number of candidates")
    sub.add_argument("--min-sep-deg", type=float, default=15.0, help="minimum angle between candidates")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out", help="results JSON path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minoria", description="Mine skewed projection directions with elevated tail loss.")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m2 = subs.add_parser("mine2d", help="exact 2-D mining")
    _columns(m2)
    _mining(m2, 0.0)
    m2.add_argument("--mode", choices=["warmup", "raysweep"], default="raysweep")
    m2.add_argument("--passes", type=int, choices=[1, 2], default=2)
    m2.add_argument("--boundary-only", action="store_true", help="raysweep: skip interior stationary directions")

    hd = subs.add_parser("mine-hd", help="heuristic mining for d > 2")
    _columns(hd)
    _mining(hd, 0.0)
    hd.add_argument("--method", choices=["focused", "grid", "qp", "ee"], default="focused")
    hd.add_argument("--error-fraction", type=float, default=0.1, help="focused: error-region fraction")
    hd.add_argument("--tail-error-fraction", type=float, default=1.0, help="focused: tail-error fraction")
    hd.add_argument("--error-samples", type=int, default=50)
    hd.add_argument("--other-samples", type=int, default=50)
    hd.add_argument("--gate", choices=["tail_error", "tail"], default="tail_error")
    hd.add_argument("--angle-step", type=float, default=math.pi / 8, help="grid: spacing in radians")
    hd.add_argument("--samples", type=int, default=20, help="grid: diverse sample size; qp: added directions")
    hd.add_argument("--explore-prob", type=float, default=0.4, help="ee: exploration probability")
    hd.add_argument("--cone-cos", type=float, default=0.9, help="ee: cone cosine")
    hd.add_argument("--iterations", type=int, default=1000)
    hd.add_argument("--starts", type=int, default=6)

    sy = subs.add_parser("synth", help="two-Gaussian synthetic data")
    sy.add_argument("--d", type=int, required=True)
    sy.add_argument("--n-major", type=int, required=True)
    sy.add_argument("--n-minor", type=int, required=True)
    sy.add_argument("--separation", type=float, default=6.0, help="distance between means along the diagonal, in sd units")
    sy.add_argument("--seed", type=int)
    sy.add_argument("--out", required=True)

    km = subs.add_parser("kmeans", help="k-means baseline with per-cluster group ratios")
    _columns(km)
    km.add_argument("--k", type=int, required=True)
    km.add_argument("--max-iter", type=int, default=300)
    km.add_argument("--ratio", choices=list(baselines.RATIO_MODES), default="total")
    km.add_argument("--seed", type=int)
    km.add_argument("--out", required=True, help="per-cluster ratio CSV")
    km.add_argument("--assignment-out")

    rp = subs.add_parser("report", help="per-percentile accuracy/F1/group ratio along a direction")
    _columns(rp)
    rp.add_argument("--results", required=True, help="results JSON from a mining run")
    rp.add_argument("--candidate", type=int, default=0)
    rp.add_argument("--percentiles", default="1,0.1,0.01,0.001,0.0001")
    rp.add_argument("--out", required=True)
    return parser


def _load(args) -> Dataset:
    features = args.features.split(",") if args.features else None
    ds = load_csv(args.csv, features=features, label=args.label, prediction=args.prediction,
                  loss=args.loss, group=args.group)
    if ds.loss is None and ds.label is not None and ds.prediction is not None:
        # default loss: 0/1 misclassification
        ds = Dataset(
            features=ds.features, label=ds.label, prediction=ds.prediction,
            loss=(ds.label != ds.prediction).astype(float), group=ds.group,
            feature_names=ds.feature_names,
        )
    return ds


def _tau(args) -> Optional[float]:
    return None if args.no_tau else args.tau


def _finish(ds: Dataset, candidates, provenance: dict, args, tau) -> int:
    for c in candidates:
        c.metrics = report.candidate_metrics(ds, c.tail)
    text = report.results_to_json(candidates, provenance)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if not candidates and tau is not None:
        print("no candidate passed the disparity threshold", file=sys.stderr)
        return EXIT_NO_CANDIDATE
    return EXIT_OK


def _cmd_mine2d(args) -> int:
    tau = _tau(args)
    params = MiningParams(l=args.l, p=args.p, tau=tau,
                          min_sep_cos=math.cos(math.radians(args.min_sep_deg)), passes=args.passes)
    ds = _load(args)
    if ds.d != 2:
        raise DataError(f"mine2d needs exactly 2 features, got {ds.d}; pass --features a,b")
    norm = normalize_positive(ds)
    if args.mode == "warmup":
        cands = mine_warmup(norm, params)
    else:
        cands = mine_raysweep(norm, params, interior=not args.boundary_only)
    provenance = {
        "command": "mine2d",
        "mode": args.mode,
        "feature_names": list(ds.feature_names),
        "normalization_offset": [float(v) for v in norm.offset],
        "rotation_constant": default_rotation_constant(norm) if args.passes == 2 else None,
        "direction_frame": "original",
    }
    return _finish(ds, cands, provenance, args, tau)


def _cmd_mine_hd(args) -> int:
    ds = _load(args)
    seed = resolve_seed(args.seed)
    tau = _tau(args)
    sep = math.cos(math.radians(args.min_sep_deg))
    if args.method == "focused":
        cands = focused_explore(ds, FocusedParams(
            error_fraction=args.error_fraction, tail_error_fraction=args.tail_error_fraction, error_samples=args.error_samples, other_samples=args.other_samples,
            p=args.p, tau=tau, l=args.l, min_sep_cos=sep, seed=seed, gate=args.gate))
    elif args.method == "grid":
        cands = grid_search(ds, GridParams(angle_step=args.angle_step, l=args.samples, seed=seed),
                            p=args.p, tau=tau, l=args.l, min_sep_cos=sep)
    elif args.method == "qp":
        cands = qp_search(ds, args.samples, seed, p=args.p, tau=tau, l=args.l, min_sep_cos=sep)
    else:
        cands = ee_search(ds, EEParams(explore_prob=args.explore_prob, cone_cos=args.cone_cos,
                                       iterations=args.iterations, starts=args.starts, seed=seed,
                                       p=args.p, tau=tau, l=args.l, min_sep_cos=sep))
    provenance = {"command": "mine-hd", "method": args.method, "seed": seed,
                  "feature_names": list(ds.feature_names), "direction_frame": "original"}
    return _finish(ds, cands, provenance, args, tau)


def _cmd_synth(args) -> int:
    seed = resolve_seed(args.seed)
    mean_minor = np.full(args.d, args.separation / math.sqrt(args.d))
    spec = SynthSpec(args.d, args.n_major, args.n_minor, np.zeros(args.d), mean_minor, seed=seed)
    write_csv(generate_synthetic(spec), args.out)
    return EXIT_OK


def _cmd_kmeans(args) -> int:
    ds = _load(args)
    if ds.group is None:
        raise DataError("kmeans needs --group to compute group ratios")
    clustering = baselines.kmeans(ds, args.k, resolve_seed(args.seed), args.max_iter)
    baselines.write_ratio_csv(baselines.cluster_group_ratios(ds, clustering, mode=args.ratio), args.out)
    if args.assignment_out:
        baselines.write_assignment_csv(clustering, args.assignment_out)
    return EXIT_OK


def _cmd_report(args) -> int:
    ds = _load(args)
    with open(args.results, encoding="utf-8") as fh:
        cands, _ = report.results_from_json(fh.read())
    if not 0 <= args.candidate < len(cands):
        raise DataError(f"results file has {len(cands)} candidates; index {args.candidate} is out of range")
    f = cands[args.candidate].direction
    if len(f) != ds.d:
        raise DataError(f"direction has {len(f)} components but the data has {ds.d} features")
    try:
        percentiles = [float(x) for x in args.percentiles.split(",")]
    except ValueError:
        raise UsageError(f"--percentiles must be comma-separated numbers, got {args.percentiles!r}") from None
    report.write_report_csv(report.tail_report(ds, f, percentiles), args.out)
    return EXIT_OK


COMMANDS = {
    "mine2d": _cmd_mine2d,
    "mine-hd": _cmd_mine_hd,
    "synth": _cmd_synth,
    "kmeans": _cmd_kmeans,
    "report": _cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, MinoriaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # parameter validation in the params dataclasses
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
