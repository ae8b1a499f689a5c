"""Find linear projection directions whose tails hold under-represented, under-performing rows."""

from .baselines import Clustering, cluster_group_ratios, kmeans
from .dataset import (
    Dataset,
    SynthSpec,
    generate_synthetic,
    load_csv,
    normalize_positive,
    rotate_negative,
    write_csv,
)
from .errors import DataError, MinoriaError
from .median_level import MedianRegion, enumerate_median_regions, median_at
from .miner2d import MiningCandidate, MiningParams, mine_raysweep, mine_warmup, p_tail
from .minerhd import EEParams, FocusedParams, GridParams, ee_search, focused_explore
from .report import TailReport, metrics, tail_report
from .skew import precompute_aggregates, skew_fast, skew_naive

__version__ = "0.1.0"
