import csv

import numpy as np
import pytest

from tanglesim import SimConfig
from tanglesim.cli import main, parse_selector, read_config_file, ConfigError
from tanglesim.selector import SelectorKind
from tanglesim.studies import (AttackScenario, batch, bench, bench_exponent, exit_profile, loglog_slope,
                               run_attack, scaling_study)


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_writes_files_and_is_deterministic(tmp_path, capsys):
    args = ["simulate", "--lambda", "30", "--duration", "40", "--warmup", "10", "--seed", "7"]
    assert main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("lambda=30 selector=URTS EL=") and "sigma=" in line and "tA=" in line
    assert main(args + ["--output-dir", str(tmp_path / "b")]) == 0
    for name, header in [("tips.csv", ["time", "tip_count"]), ("tip_hist.csv", ["tip_count", "probability"]),
                         ("approval.csv", ["tx_id", "issue_time", "t_A"]), ("cw.csv", ["tx_id", "elapsed", "weight"])]:
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        assert b"\r" not in a
        rows = _read(tmp_path / "a" / name)
        assert rows[0] == header and len(rows) > 1
    assert (tmp_path / "a" / "config_used.txt").exists()
    probs = [float(r[1]) for r in _read(tmp_path / "a" / "tip_hist.csv")[1:]]
    assert abs(sum(probs) - 1) < 1e-9
    # the default tracked transaction is the first one issued after warm-up
    cw = _read(tmp_path / "a" / "cw.csv")[1:]
    assert len({r[0] for r in cw}) == 1 and cw[0][2] == "1"


@pytest.mark.parametrize("argv", [
    ["simulate", "--lambda", "0"],
    ["simulate", "--warmup", "200", "--duration", "100"],
    ["attack", "--kind", "tip_flood", "--size", "0"],
    ["attack", "--kind", "sybil"],
    ["batch", "--runs", "0"],
    ["bench", "--tx-counts", ""],
])
def test_invalid_settings_write_nothing(tmp_path, argv, capsys):
    out = tmp_path / "out"
    assert main(argv + ["--output-dir", str(out)]) != 0
    assert "error" in capsys.readouterr().err
    assert not out.exists()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "scenario.txt"
    cfg.write_text("# small run\nlambda = 20\nduration = 30\nwarmup = 5\nseed = 3\n")
    assert main(["simulate", "--config", str(cfg), "--lambda", "25", "--output-dir", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.startswith("lambda=25 ")
    used = (tmp_path / "o" / "config_used.txt").read_text()
    assert "lambda = 25.0" in used and "duration = 30.0" in used
    bad = tmp_path / "bad.txt"
    bad.write_text("lambda = 20\ncolour = blue\n")
    with pytest.raises(ConfigError):
        read_config_file(bad)
    assert main(["simulate", "--config", str(bad), "--output-dir", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_batch_and_scaling_commands(tmp_path, capsys):
    common = ["--duration", "30", "--warmup", "10", "--orphan-horizon", "5", "--runs", "3", "--jobs", "1"]
    assert main(["batch", "--lambda", "20", *common, "--output-dir", str(tmp_path / "b")]) == 0
    rows = _read(tmp_path / "b" / "batch.csv")
    assert rows[0][:3] == ["run", "seed", "mean_tips"] and len(rows) == 4
    assert [r[1] for r in rows[1:]] == ["0", "1", "2"]
    assert main(["scaling", "--lambdas", "5,20", *common, "--output-dir", str(tmp_path / "s")]) == 0
    rows = _read(tmp_path / "s" / "scaling.csv")
    assert rows[0] == ["lambda", "selector", "alpha", "mean_tips", "std_tips", "mean_tA", "std_tA"]
    assert len(rows) == 3
    assert "loglog slope" in capsys.readouterr().out


def test_exitprofile_and_attack_commands(tmp_path):
    assert main(["exitprofile", "--lambda", "20", "--duration", "20", "--warmup", "0", "--runs", "2", "--walks", "2000",
                 "--jobs", "1", "--selector", "walk", "--output-dir", str(tmp_path / "e")]) == 0
    rows = _read(tmp_path / "e" / "exit_profile.csv")
    assert rows[0] == ["rank", "probability"]
    p = [float(r[1]) for r in rows[1:]]
    assert all(a >= b for a, b in zip(p, p[1:])) and abs(sum(p) - 1) < 1e-9
    assert main(["attack", "--lambda", "20", "--duration", "30", "--warmup", "0", "--kind", "cut_set_chain",
                 "--eval", "urts,walk:0,walk:0.5", "--samples", "2000",
                 "--output-dir", str(tmp_path / "a")]) == 0
    rows = _read(tmp_path / "a" / "attack.csv")
    assert rows[0] == ["kind", "selector", "alpha", "kappa", "attacker_size", "honest_tips",
                       "confidence_of_double_spend"]
    assert [r[1] for r in rows[1:]] == ["urts", "walk", "walk"]


def test_bench_command(tmp_path, capsys):
    assert main(["bench", "--tx-counts", "2000", "--output-dir", str(tmp_path / "b")]) == 0
    out = capsys.readouterr().out
    assert "exponent" not in out
    rows = _read(tmp_path / "b" / "bench.csv")
    assert rows[0] == ["selector", "alpha", "weights_updated", "n", "seconds"] and len(rows) == 2
    assert main(["bench", "--tx-counts", "2000,4000", "--output-dir", str(tmp_path / "c")]) == 0
    assert "exponent=" in capsys.readouterr().out


def test_parse_selector():
    assert parse_selector("urts") == SelectorKind("urts")
    assert parse_selector("urw") == SelectorKind("walk", 0.0)
    assert parse_selector("walk:0.5") == SelectorKind("walk", 0.5)
    with pytest.raises(ValueError):
        parse_selector("urts:0.1")


def test_batch_runs_are_individually_reproducible():
    cfg = SimConfig(lam=20, duration=25, warmup=5, seed=40)
    recs = batch(cfg, 3, jobs=1)
    from tanglesim import run_simulation
    single = run_simulation(cfg.with_seed(42))[1]
    assert np.array_equal(recs[2].tip_counts, single.tip_counts)


def test_parallel_batch_matches_serial():
    cfg = SimConfig(lam=20, duration=25, warmup=5, seed=1)
    a = batch(cfg, 3, jobs=1)
    b = batch(cfg, 3, jobs=2)
    assert all(np.array_equal(x.tip_counts, y.tip_counts) for x, y in zip(a, b))


def test_scaling_single_lambda():
    rows = scaling_study(SimConfig(duration=25, warmup=5, orphan_horizon=5), [20], runs=2)
    assert len(rows) == 1 and rows[0].lam == 20
    with pytest.raises(ValueError):
        loglog_slope([20], [rows[0].mean_tips])


def test_exit_profile_urts_entries_near_uniform():
    prof = exit_profile(SimConfig(lam=10, duration=20, warmup=0), runs=1, walks_per_run=200_000)
    p = prof.probabilities
    L = len(p)
    assert np.all(np.abs(p - 1 / L) < 5 * np.sqrt((1 / L) / 200_000))


def test_attack_driver_rejects_short_runs():
    with pytest.raises(ValueError):
        run_attack(SimConfig(duration=55, warmup=50), AttackScenario(lead=10))


def test_bench_rows():
    rows = bench(SelectorKind("urts"), [1000, 2000], lam=50)
    assert [r.n for r in rows] == [1000, 2000] and not rows[0].weights_updated
    assert bench_exponent(rows) is not None
    assert bench_exponent(rows[:1]) is None
