"""Sorted exit-probability profiles for several biases on independently grown Tangles."""
import argparse
from pathlib import Path

from tanglesim import SimConfig
from tanglesim.metrics import profile_gap
from tanglesim.output import write_exit_profile
from tanglesim.studies import default_jobs, exit_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda", dest="lam", type=float, default=100.0)
    ap.add_argument("--alphas", default="0,0.001,0.1")
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--walks", type=int, default=100_000)
    ap.add_argument("--duration", type=float, default=100.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=default_jobs())
    ap.add_argument("--out-dir", default="out/exit_profiles")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles = {}
    for alpha in (float(a) for a in args.alphas.split(",")):
        cfg = SimConfig(lam=args.lam, selector="walk", alpha=alpha, duration=args.duration, warmup=0.0,
                        seed=args.seed)
        profiles[alpha] = p = exit_profile(cfg, args.runs, args.walks, args.jobs)
        write_exit_profile(out / f"alpha_{alpha:g}.csv", p)
        print(f"alpha={alpha:g} ranks={len(p)} top5={' '.join(f'{v:.4f}' for v in p.probabilities[:5])}")
    ref = min(profiles)
    for alpha, p in profiles.items():
        if alpha != ref:
            print(f"max gap to alpha={ref:g}: alpha={alpha:g} -> {profile_gap(profiles[ref], p):.5f}")


if __name__ == "__main__":
    main()
