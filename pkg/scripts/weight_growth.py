"""Cumulative weight of one transaction over time, split into its two growth phases."""
import argparse
from pathlib import Path

import numpy as np

from tanglesim import SimConfig, fit_growth_phases, run_simulation
from tanglesim.metrics import weight_trajectory
from tanglesim.output import CW_HEADER, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda", dest="lam", type=float, default=100.0)
    ap.add_argument("--selector", default="urts", choices=["urts", "walk"])
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--issue-time", type=float, default=20.0, help="track the first transaction issued after this")
    ap.add_argument("--duration", type=float, default=100.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/weight_growth.csv")
    args = ap.parse_args()

    cfg = SimConfig(lam=args.lam, selector=args.selector, alpha=args.alpha, duration=args.duration,
                    warmup=0.0, seed=args.seed)
    state, _ = run_simulation(cfg, record=False)
    x = int(np.searchsorted(state.issue_times(), args.issue_time))
    elapsed, w = weight_trajectory(state, x)
    fit = fit_growth_phases(elapsed, w)
    print(f"tx={x} weight={w[-1]} changepoint={fit.changepoint:.2f}")
    print(f"early: exp({fit.c:.4f} t + {fit.d:.3f})  sse={fit.sse_exp:.4g} (line on same segment {fit.sse_early_line:.4g})")
    print(f"late:  {fit.a:.3f} t + {fit.b:.2f}  sse={fit.sse_line:.4g}")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, CW_HEADER, ((x, e, int(v)) for e, v in zip(elapsed, w)))


if __name__ == "__main__":
    main()
