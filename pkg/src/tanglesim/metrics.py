"""Measurements on grown Tangles: tip counts, approval times, weight growth,
exit probabilities and confidence levels.

Tip-count statistics are time-weighted: each observed L(t) counts for as long
as it held, so busy stretches are not over-represented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .selector import SelectorKind, _hits
from .tangle import GENESIS, Tangle


@dataclass
class MetricsRecord:
    lam: float
    selector: str
    alpha: float
    start: float
    end: float
    tip_times: np.ndarray
    tip_counts: np.ndarray
    approval_ids: np.ndarray
    approval_issue: np.ndarray
    approval_times: np.ndarray
    cw_trajectories: dict[int, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    orphan_count: int = 0
    n_transactions: int = 1
    truncated: bool = False

    @classmethod
    def empty(cls, config, end: float, truncated: bool = False) -> "MetricsRecord":
        z = np.zeros(0)
        zi = np.zeros(0, dtype=np.int64)
        return cls(config.lam, config.selector, config.alpha, config.warmup, end,
                   z, zi, zi, z, z, truncated=truncated)

    def holding_times(self) -> np.ndarray:
        if len(self.tip_times) == 0:
            return np.zeros(0)
        return np.diff(np.append(self.tip_times, max(self.end, self.tip_times[-1])))

    @property
    def tip_histogram(self) -> tuple[np.ndarray, np.ndarray]:
        """(tip_count values, probability) of the time-weighted empirical PDF of L(t)."""
        return tip_histogram([self])


def build_record(state: Tangle, config, tip_times, tip_counts, end: float, truncated: bool) -> MetricsRecord:
    """Collect a run's measurements.

    The approval time t_A of x runs from x's reveal to the reveal of its first
    approver, i.e. the wait for selection plus the approver's own delay h; it
    equals the gap between the two issue times. Only transactions issued after
    warm-up and visible for at least ``orphan_horizon`` are eligible; those not
    approved within the horizon are orphans and excluded from t_A.
    """
    n = state.n
    issue = state.issue_times()
    reveal = state.reveal_times()
    first = state.first_approval_times()
    ids = np.arange(n)
    eligible = (ids > GENESIS) & (issue >= config.warmup) & (reveal <= end - config.orphan_horizon)
    on_time = ~np.isnan(first) & (first <= reveal + config.orphan_horizon)
    approved = eligible & on_time
    rec = MetricsRecord(
        lam=config.lam, selector=config.selector, alpha=config.alpha,
        start=config.warmup, end=end,
        tip_times=tip_times, tip_counts=tip_counts,
        approval_ids=ids[approved], approval_issue=issue[approved],
        approval_times=first[approved] - reveal[approved],
        orphan_count=int((eligible & ~on_time).sum()),
        n_transactions=n, truncated=truncated,
    )
    for x in config.track:
        if 0 <= x < n and state.is_revealed(x):
            rec.cw_trajectories[int(x)] = weight_trajectory(state, x)
    return rec


def weight_trajectory(state: Tangle, x: int) -> tuple[np.ndarray, np.ndarray]:
    """(time since issuance, cumulative weight) at every change of x's weight."""
    cone = state.future_cone(x)
    cone[x] = False
    reveal = state.reveal_times()
    issue_x = state.issue_times()[x]
    times = np.sort(reveal[cone])
    elapsed = np.concatenate([[reveal[x] - issue_x], times - issue_x])
    return elapsed, np.arange(1, len(elapsed) + 1, dtype=np.int64)


# ----------------------------------------------------------------- tips


def _tip_moments(records: Iterable[MetricsRecord]):
    w_sum = m1 = m2 = 0.0
    for rec in records:
        if len(rec.tip_counts) == 0:
            continue
        w = rec.holding_times()
        if w.sum() == 0:
            w = np.ones_like(w)
        x = rec.tip_counts.astype(float)
        w_sum += w.sum()
        m1 += (w * x).sum()
        m2 += (w * x * x).sum()
    return w_sum, m1, m2


def summarize_tips(record: MetricsRecord) -> tuple[float, float]:
    """Time-weighted mean and standard deviation of L(t) over the recorded window."""
    return summarize_tips_many([record])


def summarize_tips_many(records: Sequence[MetricsRecord]) -> tuple[float, float]:
    """Pooled time-weighted mean and standard deviation over several runs."""
    w, m1, m2 = _tip_moments(records)
    if w == 0:
        raise ValueError("empty tip series")
    mean = m1 / w
    return mean, math.sqrt(max(m2 / w - mean * mean, 0.0))


def tip_histogram(records: Sequence[MetricsRecord]) -> tuple[np.ndarray, np.ndarray]:
    values, weights = [], []
    for rec in records:
        if len(rec.tip_counts):
            values.append(rec.tip_counts)
            w = rec.holding_times()
            weights.append(w if w.sum() > 0 else np.ones_like(w))
    if not values:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    v = np.concatenate(values)
    mass = np.bincount(v, weights=np.concatenate(weights))
    support = np.flatnonzero(mass)
    return support, mass[support] / mass.sum()


# ------------------------------------------------------------ approvals


def summarize_approval(record: MetricsRecord) -> tuple[float, float]:
    return summarize_approval_many([record])


def summarize_approval_many(records: Sequence[MetricsRecord]) -> tuple[float, float]:
    """Mean and standard deviation of the time until first approval (orphans excluded)."""
    t = np.concatenate([r.approval_times for r in records]) if records else np.zeros(0)
    if len(t) == 0:
        raise ValueError("no approved transactions")
    return float(t.mean()), float(t.std(ddof=1)) if len(t) > 1 else 0.0


def check_tip_approval_relation(mean_tips: float, t_approval: float, lam: float) -> float:
    """Relative residual of L = (t_A - 1) * 2 * lambda, which holds for uniform selection."""
    return abs(mean_tips - (t_approval - 1.0) * 2.0 * lam) / mean_tips


# ----------------------------------------------------- weight growth phases


@dataclass(frozen=True)
class GrowthFit:
    c: float
    d: float
    a: float
    b: float
    changepoint: float
    sse_exp: float
    sse_line: float
    # a straight line fitted to the same early segment, for comparison with the exponential
    sse_early_line: float

    def exp(self, x):
        return np.exp(self.c * np.asarray(x) + self.d)

    def line(self, x):
        return self.a * np.asarray(x) + self.b


def _line_fit(x, y):
    if len(x) < 2:
        return math.nan, math.nan, 0.0
    a, b = np.polyfit(x, y, 1)
    return float(a), float(b), float(((a * x + b - y) ** 2).sum())


def _exp_fit(x, y):
    if len(x) < 3:
        return math.nan, math.nan, 0.0
    c0, d0 = np.polyfit(x, np.log(np.maximum(y, 1e-12)), 1)
    try:
        (c, d), _ = curve_fit(lambda t, c, d: np.exp(c * t + d), x, y, p0=(c0, d0), maxfev=2000)
    except (RuntimeError, ValueError):
        c, d = c0, d0
    return float(c), float(d), float(((np.exp(c * x + d) - y) ** 2).sum())


def fit_growth_phases(elapsed, weight, grid: int = 400, candidates: int = 120, min_late: int = 3) -> GrowthFit:
    """Exponential-then-linear fit of a cumulative weight trajectory.

    The trajectory is interpolated onto a uniform time grid, then every
    candidate changepoint splits it into an early part fitted by
    ``exp(c*x + d)`` and a late part fitted by ``a*x + b``; the split with the
    smallest combined squared error wins (earliest on ties).
    """
    elapsed = np.asarray(elapsed, dtype=float)
    weight = np.asarray(weight, dtype=float)
    if len(elapsed) < 6 or elapsed[-1] <= elapsed[0]:
        raise ValueError("trajectory too short for two growth phases")
    x = np.linspace(elapsed[0], elapsed[-1], grid)
    y = np.interp(x, elapsed, weight)
    best = None
    for k in np.unique(np.linspace(0, grid - min_late, candidates).astype(int)):
        c, d, sse_e = _exp_fit(x[:k], y[:k])
        a, b, sse_l = _line_fit(x[k:], y[k:])
        total = sse_e + sse_l
        if best is None or total < best[0]:
            best = (total, k, c, d, sse_e, a, b, sse_l)
    _, k, c, d, sse_e, a, b, sse_l = best
    _, _, sse_early_line = _line_fit(x[:k], y[:k])
    return GrowthFit(c, d, a, b, float(x[k]), sse_e, sse_l, sse_early_line)


# ------------------------------------------------------------ tip growth


@dataclass(frozen=True)
class TipGrowth:
    slope: float
    intercept: float
    r2: float
    stderr: float


def tip_growth_slope(record_or_series, step: float = 0.1, hac_window: float = 5.0) -> TipGrowth:
    """Least-squares line through L(t).

    The series is resampled on a uniform grid (L is piecewise constant) and the
    slope's standard error is Newey-West, since neighbouring samples of L(t)
    are strongly correlated.
    """
    import statsmodels.api as sm

    if isinstance(record_or_series, MetricsRecord):
        t, counts = record_or_series.tip_times, record_or_series.tip_counts
        end = record_or_series.end
    else:
        t, counts = (np.asarray(a, dtype=float) for a in record_or_series)
        end = t[-1] if len(t) else 0.0
    if len(t) < 3 or end <= t[0]:
        raise ValueError("tip series too short for a regression")
    grid = np.arange(t[0], end + 1e-12, step)
    if len(grid) < 3:
        raise ValueError("tip series too short for a regression")
    y = counts[np.searchsorted(t, grid, side="right") - 1].astype(float)
    X = sm.add_constant(grid)
    lags = max(int(hac_window / step), 1)
    fit = sm.OLS(y, X).fit(cov_type="HAC", cov_kwds={"maxlags": lags})
    b, a = fit.params
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - ((y - fit.fittedvalues) ** 2).sum() / ss_tot if ss_tot > 0 else 1.0
    se = float(fit.bse[1]) if np.isfinite(fit.bse[1]) else 0.0
    return TipGrowth(float(a), float(b), float(r2), se)


# ------------------------------------------------- exit probabilities


@dataclass
class ExitProfile:
    probabilities: np.ndarray
    runs: int
    walks_per_run: int

    def __len__(self):
        return len(self.probabilities)


def sorted_exit_vector(counts: dict[int, int] | np.ndarray) -> np.ndarray:
    c = np.fromiter(counts.values(), dtype=float) if isinstance(counts, dict) else np.asarray(counts, float)
    return np.sort(c / c.sum())[::-1]


def average_profiles(vectors: Sequence[np.ndarray], walks_per_run: int) -> ExitProfile:
    """Zero-pad per-run sorted exit vectors to the longest one and average them."""
    width = max(len(v) for v in vectors)
    padded = np.zeros((len(vectors), width))
    for i, v in enumerate(vectors):
        padded[i, : len(v)] = v
    return ExitProfile(padded.mean(axis=0), len(vectors), walks_per_run)


def profile_gap(p: ExitProfile, q: ExitProfile) -> float:
    """Largest element-wise difference between two profiles (shorter one zero-padded)."""
    width = max(len(p), len(q))
    a = np.pad(p.probabilities, (0, width - len(p)))
    b = np.pad(q.probabilities, (0, width - len(q)))
    return float(np.abs(a - b).max())


# --------------------------------------------------------- confidence


def confidence_level(state: Tangle, x: int, kind: SelectorKind, samples: int,
                     rng: Optional[np.random.Generator] = None) -> float:
    """Fraction of ``samples`` tip selections that return a tip indirectly approving ``x``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not state.is_revealed(x):
        return 0.0
    if kind.needs_weights and not state.track_weights:
        raise ValueError("biased walk needs cumulative weights; call state.recompute_weights() first")
    rng = rng if rng is not None else np.random.default_rng()
    target = state.future_cone(x)
    return _hits(state.arrays, kind.is_walk, kind.alpha, rng, int(samples), target) / samples
