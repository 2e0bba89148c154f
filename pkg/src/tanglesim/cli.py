"""Command line entry point.

    tanglesim simulate --lambda 100 --selector urts --duration 150 --seed 7
    tanglesim batch --lambda 100 --selector walk --runs 100 --jobs 4
    tanglesim scaling --lambdas 10,100,1000 --runs 100
    tanglesim exitprofile --lambda 100 --alpha 0.001 --selector walk --runs 50 --walks 100000
    tanglesim attack --kind cut_set_chain --kappa 0.6 --eval urts,walk:0,walk:0.5
    tanglesim bench --selector walk --alpha 0 --tx-counts 10000,30000,100000

Every setting can also come from a ``key = value`` file given with
``--config``; command-line flags override the file. All settings are checked
before the output directory is touched.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from . import output
from .arrival import SimConfig, run_seed, run_simulation
from .attack import CUT_SET_CHAIN, TIP_FLOOD
from .metrics import weight_trajectory
from .selector import SelectorKind
from .studies import (AttackScenario, bench, bench_exponent, default_jobs, exit_profile, loglog_slope,
                      run_attack, scaling_row, scaling_study, summarize_run, batch)


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(v)) for v in str(text).split(",") if v.strip())


def _bool(text: str) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _count(text: str) -> int:
    return int(float(text))


def parse_selector(text: str) -> SelectorKind:
    """``urts``, ``urw``, ``walk:ALPHA`` or ``brw:ALPHA``."""
    name, _, alpha = str(text).strip().lower().partition(":")
    if name == "urts" and not alpha:
        return SelectorKind("urts")
    if name == "urw" and not alpha:
        return SelectorKind("walk", 0.0)
    if name in ("walk", "brw"):
        return SelectorKind("walk", float(alpha or 0.0))
    raise ValueError(f"unknown selector spec {text!r}")


def _selectors(text: str) -> tuple[SelectorKind, ...]:
    return tuple(parse_selector(v) for v in str(text).split(",") if v.strip())


# key -> (converter, help); the key doubles as the flag name (underscores become dashes)
SETTINGS = {
    "lambda": (float, "arrival rate per delay unit"),
    "alpha": (float, "walk bias (0 = unbiased walk)"),
    "selector": (str, "urts or walk"),
    "duration": (float, "simulated time"),
    "warmup": (float, "time excluded from statistics"),
    "seed": (int, "root seed; run i uses seed + i"),
    "runs": (_count, "number of independent runs"),
    "walks": (_count, "selections per run for exit profiles"),
    "output_dir": (str, "directory for CSV output"),
    "jobs": (int, "worker processes (default: all CPUs)"),
    "orphan_horizon": (float, "time without approval after which a transaction is an orphan"),
    "update_weights": (_bool, "maintain cumulative weights (default: only for biased walks)"),
    "track": (_ints, "comma-separated ids whose weight growth goes to cw.csv"),
    "lambdas": (_floats, "comma-separated arrival rates"),
    "kind": (str, "attack kind: tip_flood or cut_set_chain"),
    "attacker_size": (_count, "attacker transactions (chain: budget)"),
    "size_factor": (float, "tip flood size as a multiple of the honest tip count"),
    "kappa": (float, "acceptance threshold for the cut-set chain"),
    "samples": (_count, "selections used to estimate a confidence level"),
    "lead": (float, "time between the honest payment and the attack"),
    "eval": (_selectors, "selectors to evaluate, e.g. urts,walk:0,walk:0.5"),
    "tx_counts": (_ints, "comma-separated transaction counts to time"),
}

DEFAULTS = {
    "lambda": 100.0, "alpha": 0.0, "selector": "urts", "duration": 150.0, "warmup": 50.0, "seed": 0,
    "jobs": None, "orphan_horizon": 20.0, "update_weights": None, "track": None,
    "samples": 100_000, "kappa": 0.6, "size_factor": 3.0, "attacker_size": None, "lead": 10.0,
    "kind": TIP_FLOOD, "eval": (SelectorKind("urts"), SelectorKind("walk", 0.0)),
    "lambdas": (10.0, 100.0, 1000.0), "tx_counts": (10_000, 30_000, 100_000, 300_000),
}

COMMAND_DEFAULTS = {
    "simulate": {"runs": 1},
    "batch": {"runs": 100},
    "scaling": {"runs": 100},
    "exitprofile": {"runs": 50, "walks": 100_000},
    "attack": {},
    "bench": {},
}


def read_config_file(path) -> dict:
    settings = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            settings[key] = SETTINGS[key][0](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tanglesim", description="Tangle DAG simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMAND_DEFAULTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value settings file; flags override it")
        for key, (conv, help_) in SETTINGS.items():
            flags = ["--" + key.replace("_", "-")]
            if key == "attacker_size":
                flags.append("--size")
            p.add_argument(*flags, dest=key, type=conv, default=None, help=help_)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    settings = dict(DEFAULTS)
    settings.update(COMMAND_DEFAULTS[args.command])
    settings.setdefault("runs", 1)
    settings.setdefault("walks", 100_000)
    settings["output_dir"] = str(Path("out") / args.command)
    if args.config:
        try:
            settings.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    for key in SETTINGS:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if settings["jobs"] is None:
        settings["jobs"] = default_jobs()
    return settings


def sim_config(s: dict) -> SimConfig:
    return SimConfig(lam=s["lambda"], alpha=s["alpha"], selector=s["selector"], duration=s["duration"],
                     warmup=s["warmup"], seed=s["seed"], update_weights=s["update_weights"],
                     orphan_horizon=s["orphan_horizon"], track=tuple(s["track"] or ()))


def _check_counts(s: dict, *keys):
    for key in keys:
        if s[key] is None or s[key] < 1:
            raise ConfigError(f"{key} must be >= 1")


def _fmt(v: float) -> str:
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.4f}"


def _summary_line(cfg: SimConfig, el, sd, ta) -> str:
    return f"lambda={cfg.lam:g} selector={cfg.kind.label} EL={_fmt(el)} sigma={_fmt(sd)} tA={_fmt(ta)}"


def _track_first_after_warmup(config: SimConfig):
    """Observer adding the weight trajectory of the first transaction issued after warm-up."""

    def hook(state, record):
        issue = state.issue_times()
        later = [x for x in range(1, state.n) if issue[x] >= config.warmup]
        if later and state.is_revealed(later[0]):
            record.cw_trajectories[later[0]] = weight_trajectory(state, later[0])

    return hook


# -------------------------------------------------------------- commands


def cmd_simulate(s: dict) -> int:
    cfg = sim_config(s)
    out = _prepare(s)
    observers = [] if cfg.track else [_track_first_after_warmup(cfg)]
    _, rec = run_simulation(cfg, observers)
    output.write_tips(out / "tips.csv", rec)
    output.write_tip_hist(out / "tip_hist.csv", [rec])
    output.write_approval(out / "approval.csv", rec)
    output.write_cw(out / "cw.csv", rec)
    row = summarize_run(0, cfg.seed, rec)
    print(_summary_line(cfg, row.mean_tips, row.std_tips, row.mean_tA))
    return 0


def cmd_batch(s: dict) -> int:
    cfg = sim_config(s)
    _check_counts(s, "runs")
    out = _prepare(s)
    records = batch(cfg, s["runs"], s["jobs"])
    rows = [summarize_run(i, run_seed(cfg.seed, i), r) for i, r in enumerate(records)]
    output.write_rows(out / "batch.csv", output.BATCH_HEADER, rows)
    output.write_tip_hist(out / "tip_hist.csv", records)
    pooled = scaling_row(cfg, records)
    output.write_rows(out / "scaling.csv", output.SCALING_HEADER, [pooled])
    print(_summary_line(cfg, pooled.mean_tips, pooled.std_tips, pooled.mean_tA))
    return 0


def cmd_scaling(s: dict) -> int:
    cfg = sim_config(s)
    _check_counts(s, "runs")
    lambdas = s["lambdas"]
    if not lambdas or min(lambdas) <= 0:
        raise ConfigError("lambdas must be a non-empty list of positive rates")
    out = _prepare(s)
    rows = scaling_study(cfg, lambdas, s["runs"], s["jobs"])
    output.write_rows(out / "scaling.csv", output.SCALING_HEADER, rows)
    for r in rows:
        print(_summary_line(replace(cfg, lam=r.lam), r.mean_tips, r.std_tips, r.mean_tA))
    if len(set(lambdas)) > 1:
        lam = [r.lam for r in rows]
        print(f"loglog slope EL={loglog_slope(lam, [r.mean_tips for r in rows]):.4f} "
              f"sigma={loglog_slope(lam, [r.std_tips for r in rows]):.4f}")
    return 0


def cmd_exitprofile(s: dict) -> int:
    cfg = sim_config(s)
    _check_counts(s, "runs", "walks")
    out = _prepare(s)
    profile = exit_profile(cfg, s["runs"], s["walks"], s["jobs"])
    output.write_exit_profile(out / "exit_profile.csv", profile)
    print(f"selector={cfg.kind.label} runs={profile.runs} walks={profile.walks_per_run} "
          f"ranks={len(profile)} top={profile.probabilities[0]:.6f}")
    return 0


def cmd_attack(s: dict) -> int:
    cfg = sim_config(s)
    if s["kind"] not in (TIP_FLOOD, CUT_SET_CHAIN):
        raise ConfigError(f"kind must be {TIP_FLOOD} or {CUT_SET_CHAIN}")
    scenario = AttackScenario(kind=s["kind"], size=s["attacker_size"], size_factor=s["size_factor"],
                              kappa=s["kappa"], evaluate=tuple(s["eval"]), samples=s["samples"],
                              lead=s["lead"])
    if cfg.duration - scenario.lead < cfg.warmup:
        raise ConfigError("duration - lead must not be below warmup")
    out = _prepare(s)
    rows = run_attack(cfg, scenario)
    output.write_rows(out / "attack.csv", output.ATTACK_HEADER, rows)
    for r in rows:
        print(f"kind={r.kind} selector={SelectorKind(r.selector, r.alpha).label} size={r.attacker_size} "
              f"honest_tips={r.honest_tips} confidence={r.confidence:.4f}")
    return 0


def cmd_bench(s: dict) -> int:
    kind = SelectorKind(s["selector"], s["alpha"])
    sim_config(s)
    counts = s["tx_counts"]
    if not counts or min(counts) < 2:
        raise ConfigError("tx_counts must be a non-empty list of counts >= 2")
    out = _prepare(s)
    rows = bench(kind, counts, lam=s["lambda"], update_weights=s["update_weights"], seed=s["seed"])
    output.write_rows(out / "bench.csv", output.BENCH_HEADER, rows)
    for r in rows:
        print(f"selector={kind.label} weights_updated={r.weights_updated} n={r.n} seconds={r.seconds:.3f}")
    k = bench_exponent(rows)
    if k is not None:
        print(f"exponent={k:.3f}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "batch": cmd_batch,
    "scaling": cmd_scaling,
    "exitprofile": cmd_exitprofile,
    "attack": cmd_attack,
    "bench": cmd_bench,
}


def _prepare(s: dict) -> Path:
    out = Path(s["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    output.write_config(out / "config_used.txt", {k: _plain(v) for k, v in s.items()})
    return out


def _plain(v):
    if isinstance(v, tuple):
        return ",".join(f"{x.name}:{x.alpha:g}" if isinstance(x, SelectorKind) else f"{x:g}" for x in v)
    return "" if v is None else v


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve(args)
        return COMMANDS[args.command](settings)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
