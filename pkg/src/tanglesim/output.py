"""CSV writers. Comma separated, header row, LF line endings, floats in repr form."""

from __future__ import annotations

import csv
from dataclasses import astuple
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metrics import ExitProfile, MetricsRecord, tip_histogram

TIPS_HEADER = ("time", "tip_count")
TIP_HIST_HEADER = ("tip_count", "probability")
APPROVAL_HEADER = ("tx_id", "issue_time", "t_A")
CW_HEADER = ("tx_id", "elapsed", "weight")
EXIT_HEADER = ("rank", "probability")
SCALING_HEADER = ("lambda", "selector", "alpha", "mean_tips", "std_tips", "mean_tA", "std_tA")
ATTACK_HEADER = ("kind", "selector", "alpha", "kappa", "attacker_size", "honest_tips",
                 "confidence_of_double_spend")
BENCH_HEADER = ("selector", "alpha", "weights_updated", "n", "seconds")
BATCH_HEADER = ("run", "seed", "mean_tips", "std_tips", "mean_tA", "std_tA", "orphans", "n_transactions")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def write_tips(path, record: MetricsRecord) -> Path:
    return write_csv(path, TIPS_HEADER, zip(record.tip_times, record.tip_counts))


def write_tip_hist(path, records: Sequence[MetricsRecord]) -> Path:
    return write_csv(path, TIP_HIST_HEADER, zip(*tip_histogram(records)))


def write_approval(path, record: MetricsRecord) -> Path:
    return write_csv(path, APPROVAL_HEADER,
                     zip(record.approval_ids, record.approval_issue, record.approval_times))


def write_cw(path, record: MetricsRecord) -> Path:
    rows = ((x, e, w) for x, (el, wt) in sorted(record.cw_trajectories.items()) for e, w in zip(el, wt))
    return write_csv(path, CW_HEADER, rows)


def write_exit_profile(path, profile: ExitProfile) -> Path:
    return write_csv(path, EXIT_HEADER, enumerate(profile.probabilities, start=1))


def write_rows(path, header: Sequence[str], rows: Iterable) -> Path:
    """Dataclass rows written field by field in declaration order."""
    return write_csv(path, header, (astuple(r) for r in rows))


def write_config(path, settings: Mapping[str, object]) -> Path:
    path = Path(path)
    path.write_text("".join(f"{k} = {_cell(v)}\n" for k, v in sorted(settings.items())))
    return path
