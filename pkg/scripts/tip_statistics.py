"""Mean tip count, its spread and the approval time across arrival rates.

Prints one row per (selector, lambda) together with the residual of
L = (t_A - 1) * 2 * lambda, and writes them to a CSV.
"""
import argparse
from pathlib import Path

from tanglesim import SimConfig, check_tip_approval_relation
from tanglesim.output import SCALING_HEADER, write_rows
from tanglesim.studies import default_jobs, loglog_slope, scaling_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", default="10,100,1000")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--duration", type=float, default=150.0)
    ap.add_argument("--warmup", type=float, default=50.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=default_jobs())
    ap.add_argument("--out", default="out/tip_statistics.csv")
    args = ap.parse_args()

    lambdas = [float(x) for x in args.lambdas.split(",")]
    rows = []
    for selector in ("urts", "walk"):
        base = SimConfig(selector=selector, duration=args.duration, warmup=args.warmup, seed=args.seed)
        part = scaling_study(base, lambdas, args.runs, args.jobs)
        for r in part:
            res = check_tip_approval_relation(r.mean_tips, r.mean_tA, r.lam)
            print(f"{selector:5s} lambda={r.lam:<7g} EL={r.mean_tips:9.3f} sigma={r.std_tips:7.3f} "
                  f"tA={r.mean_tA:.4f} residual={res:.4f}")
        if len(lambdas) > 1:
            print(f"{selector}: sigma ~ lambda^{loglog_slope(lambdas, [r.std_tips for r in part]):.3f}")
        rows += part
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_rows(args.out, SCALING_HEADER, rows)


if __name__ == "__main__":
    main()
