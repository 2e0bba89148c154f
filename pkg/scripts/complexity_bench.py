"""Wall-clock growth time against Tangle size, with log-log exponents per selector."""
import argparse
from pathlib import Path

from tanglesim.cli import parse_selector
from tanglesim.output import BENCH_HEADER, write_rows
from tanglesim.studies import bench, bench_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--selectors", default="urts,urw,brw:0.001")
    ap.add_argument("--tx-counts", default="10000,30000,100000,300000")
    ap.add_argument("--lambda", dest="lam", type=float, default=100.0)
    ap.add_argument("--out", default="out/complexity_bench.csv")
    args = ap.parse_args()

    sizes = [int(float(n)) for n in args.tx_counts.split(",")]
    rows = []
    for s in args.selectors.split(","):
        part = bench(parse_selector(s), sizes, lam=args.lam)
        for r in part:
            print(f"{s:10s} n={r.n:<8d} {r.seconds:9.3f}s", flush=True)
        k = bench_exponent(part)
        if k is not None:
            print(f"{s:10s} exponent={k:.3f}")
        rows += part
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_rows(args.out, BENCH_HEADER, rows)


if __name__ == "__main__":
    main()
