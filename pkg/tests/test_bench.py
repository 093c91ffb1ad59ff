import json
import math
import subprocess
import sys

import pytest

from irasolve.bench import (ConfigError, ExperimentConfig, aggregate, expand_batch, run, run_batch,
                            with_seed, word_count)
from irasolve.cli import main
from irasolve.trace import RunTrace, TraceRow, WORD_COLUMNS, interpolate_at


def row(it, ex, **kw):
    base = dict(iteration=it, exploitability_sum=ex, abstract_infoset_count=10, mapping_words=0,
                strategy_words=4, regret_words=0, aux_words=0, cache_peak_words=0,
                br_strategy_peak_words=0, wall_seconds=0.0)
    base.update(kw)
    return TraceRow(**base)


# ------------------------------------------------------------------ traces
def test_trace_rejects_bad_rows():
    t = RunTrace()
    t.append(row(0, 1.0))
    with pytest.raises(ValueError):
        t.append(row(0, 0.5))
    with pytest.raises(ValueError):
        t.append(row(1, 0.5, aux_words=-1))


def test_csv_round_trip(tmp_path):
    res = run(ExperimentConfig("GS3", "cfr_ira", max_iterations=40, check_every=10, seed=2))
    path = tmp_path / "t.csv"
    res.trace.to_csv(path)
    back = RunTrace.from_csv(path)
    assert back == res.trace
    assert RunTrace.from_csv(res.trace.to_csv()) == res.trace


def test_interpolation_between_checkpoints():
    t = RunTrace([])
    for r in (row(0, 1.0, strategy_words=10), row(10, 0.5, strategy_words=20), row(20, 0.1, strategy_words=30)):
        t.append(r)
    assert interpolate_at(t, "strategy_words", [1.0, 0.75, 0.3, 0.05]) [:3] == [10.0, 15.0, 25.0]
    assert math.isnan(interpolate_at(t, "strategy_words", [0.05])[0])


# --------------------------------------------------------------- aggregate
def test_aggregate_single_trace_has_zero_stderr():
    res = run(ExperimentConfig("GS3", "cfr_plus", max_iterations=60, check_every=10))
    agg = aggregate([res])
    assert agg["strategy_words"]["stderr"] == [0.0] * len(agg["thresholds"])
    assert agg["thresholds"][0] == pytest.approx(res.trace[0].exploitability_sum)


def test_aggregate_identical_traces():
    res = run(ExperimentConfig("GS3", "cfr_ira", max_iterations=60, check_every=10, seed=1))
    again = run(with_seed(res.config, 1))
    agg = aggregate([res, again])
    assert all(s == 0.0 for s in agg["abstract_infoset_count"]["stderr"])


def test_aggregate_rejects_mixed_configs():
    a = run(ExperimentConfig("GS2", "cfr_plus", max_iterations=5))
    b = run(ExperimentConfig("GS2", "cfr_plus", max_iterations=5, epsilon=0.01))
    with pytest.raises(ConfigError):
        aggregate([a, b])
    c = run(ExperimentConfig("GS2", "cfr_plus", max_iterations=5, seed=3))
    aggregate([a, c])


# ------------------------------------------------------------------ config
def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("GS3", "magic")
    with pytest.raises(ConfigError):
        ExperimentConfig("GS3", "fpira", k_b=3)
    with pytest.raises(ConfigError):
        ExperimentConfig("GS3", "cfr_ira", k_b=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"domain": "GS3", "algorithm": "fp", "colour": 1})
    cfg = ExperimentConfig("GS3", "cfr_ira")
    assert (cfg.k_b, cfg.k_h) == (10, 90)


@pytest.mark.parametrize("alg", ["fp", "fpira", "cfr_plus", "cfr_ira"])
def test_zero_budget_gives_initial_row_only(alg):
    res = run(ExperimentConfig("P111", alg, max_iterations=0, epsilon=1e-9))
    assert len(res.trace) == 1 and not res.converged


def test_word_count_totals():
    res = run(ExperimentConfig("GS3", "cfr_ira", max_iterations=30, check_every=10))
    w = word_count(res)
    assert w["total"] == sum(w[c] for c in WORD_COLUMNS) == res.trace.final.total_words


# -------------------------------------------------------------------- batch
def test_expand_batch_fans_out_seeds(tmp_path):
    spec = {"out_dir": "o", "runs": [{"domain": "GS3", "algorithm": "cfr_ira", "seeds": [0, 1]},
                                     {"domain": "GS2", "algorithm": "fp"}]}
    runs = expand_batch(spec, tmp_path)
    assert [r["seed"] for r in runs] == [0, 1, 0]
    assert runs[0]["out"].endswith("o/GS3_cfr_ira_B10H90_s0.csv")
    assert runs[2]["out"].endswith("o/GS2_fp_s0.csv")


def test_run_batch_writes_index(tmp_path):
    spec = {"runs": [{"domain": "GS2", "algorithm": "cfr_plus", "epsilon": 0.01, "max_iterations": 500,
                      "check_every": 10, "seeds": [0, 1]}]}
    cfg = tmp_path / "batch.json"
    cfg.write_text(json.dumps(spec))
    index = run_batch(cfg, workers=1)
    assert len(index["runs"]) == 2 and all(r["converged"] for r in index["runs"])
    stored = json.loads((tmp_path / "traces" / "index.json").read_text())
    assert stored["runs"][0]["out"].endswith("GS2_cfr_plus_s0.csv")
    assert len(RunTrace.from_csv((tmp_path / "traces" / "GS2_cfr_plus_s1.csv"))) >= 1


# ---------------------------------------------------------------------- CLI
def test_cli_solve_converged(tmp_path, capsys):
    out = tmp_path / "mp.csv"
    code = main(["solve", "--domain", "matching_pennies", "--alg", "cfr_plus", "--eps", "0.01",
                 "--max-iter", "2000", "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["converged"] and out.exists()


def test_cli_not_converged_and_errors(capsys):
    assert main(["solve", "--domain", "P111", "--alg", "fp", "--eps", "1e-9", "--max-iter", "3"]) == 3
    assert main(["solve", "--domain", "XX9", "--alg", "fp"]) == 2
    assert main(["solve", "--domain", "GS3", "--alg", "fp", "--kb", "2"]) == 2
    assert main(["solve", "--domain", "GP3", "--alg", "fp", "--graph", "/nonexistent"]) == 2
    assert main(["bench", "--config", "/nonexistent.json"]) == 2
    err = capsys.readouterr().err
    assert "irasolve:" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "irasolve.cli", "solve", "--domain", "GS2", "--alg", "cfr_ira",
                           "--kb", "0", "--kh", "0", "--max-iter", "500", "--check-every", "10"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["converged"]
