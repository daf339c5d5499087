import hashlib
import json
from pathlib import Path

import pytest

from fatflow.cli import config_from_args, main
from fatflow.experiment import (ConfigError, ExperimentConfig, emit_plot_data,
                                run_experiment, summarize)

FAST = dict(elephants=6, arrival_rate=2.0, flow_duration=2.0, duration=5.0,
            demand=5e6, seeds=[1, 2])


def fast_config(**overrides):
    return ExperimentConfig(**{**FAST, **overrides})


def tree_digest(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


def test_bundle_layout(tmp_path):
    cfg = fast_config(schedulers=["hybrid", "ecmp"], out_dir=str(tmp_path / "b"))
    out = run_experiment(cfg)
    reports = sorted(p.name for p in (out / "reports").glob("*.json"))
    assert len(reports) == 4  # 2 schedulers x 2 seeds
    assert (out / "summary.json").is_file()
    assert (out / "config.json").is_file()
    plots = sorted(p.name for p in (out / "plots").glob("*.csv"))
    assert plots == ["bisection_means.csv", "mice_loss.csv",
                     "rtt_deviation.csv", "utilization_cdf.csv"]


def test_default_grid_is_40_reports():
    cfg = ExperimentConfig()
    assert len(cfg.schedulers) * len(cfg.seeds) == 40  # hybrid+ecmp x 20 seeds


def test_reports_have_schema_and_bounds(tmp_path):
    cfg = fast_config(schedulers=["hybrid"], seeds=[3], out_dir=str(tmp_path / "b"))
    out = run_experiment(cfg)
    report = json.loads(next((out / "reports").glob("*.json")).read_text())
    assert report["schema_version"] == 1
    assert report["scheduler"] == "hybrid"
    assert report["bisection"]["mean_bps"] >= 0
    assert report["bounds"]["t_min_bps"] <= report["bounds"]["t_max_bps"]
    assert 0 <= report["bounds"]["balance_efficiency"] <= 1
    assert len(report["bounds"]["per_edge_load_bps"]) == 8
    assert len(report["bounds"]["per_agg_load_bps"]) == 8
    assert report["monitoring"]["polls"] == 5
    assert report["monitoring"]["port_stat_reads"] == 5 * 80


def test_bundle_is_bit_identical_across_runs(tmp_path):
    a = run_experiment(fast_config(out_dir=str(tmp_path / "a")))
    b = run_experiment(fast_config(out_dir=str(tmp_path / "b")))
    assert tree_digest(a) == tree_digest(b)


def test_cdf_csv_labels_and_rows(tmp_path):
    cfg = fast_config(schedulers=["nonblocking", "hybrid", "hedera", "ecmp"],
                      seeds=[1], out_dir=str(tmp_path / "b"))
    out = run_experiment(cfg)
    rows = [l for l in (out / "plots" / "utilization_cdf.csv").read_text().splitlines()
            if l and not l.startswith("#") and not l.startswith("scheduler,")]
    labels = {r.split(",")[0] for r in rows}
    assert labels == {"nonblocking", "hybrid", "hedera", "ecmp"}
    per = {lab: sum(1 for r in rows if r.startswith(lab + ",")) for lab in labels}
    # 64 unidirectional switch-to-switch links on the k=4 fat-tree; the star
    # baseline has only its 32 access links
    assert per["hybrid"] == per["hedera"] == per["ecmp"] == 64
    assert per["nonblocking"] == 32


def test_summary_recomputable_from_reports(tmp_path):
    cfg = fast_config(out_dir=str(tmp_path / "b"))
    out = run_experiment(cfg)
    reports = [json.loads(p.read_text())
               for p in sorted((out / "reports").glob("*.json"))]
    assert json.loads((out / "summary.json").read_text()) == json.loads(
        json.dumps(summarize(reports)))


def test_emit_plot_data_requires_reports(tmp_path):
    (tmp_path / "reports").mkdir()
    with pytest.raises(RuntimeError, match="incomplete bundle"):
        emit_plot_data(tmp_path)


def test_config_validation_names_field():
    with pytest.raises(ConfigError, match="k:"):
        ExperimentConfig(k=5).validate()
    with pytest.raises(ConfigError, match="seeds:"):
        ExperimentConfig(seeds=[]).validate()
    with pytest.raises(ConfigError, match="duration:"):
        ExperimentConfig(duration=0).validate()
    with pytest.raises(ConfigError, match="schedulers:"):
        ExperimentConfig(schedulers=["sieve"]).validate()
    with pytest.raises(ConfigError, match="pattern:"):
        ExperimentConfig(pattern="ring").validate()


def test_cli_flags_override_defaults():
    cfg = config_from_args([
        "--k", "6", "--capacity", "20e6", "--scheduler", "ecmp",
        "--seed", "5", "--seed", "6", "--duration", "7.5",
        "--pattern", "stride", "--alpha", "2.5", "--elephant-threshold", "0.2",
        "--poll-interval", "0.5", "--out", "/tmp/x", "--flow-duration", "none",
    ], env={})
    assert cfg.k == 6
    assert cfg.capacity == 20e6
    assert cfg.schedulers == ["ecmp"]
    assert cfg.seeds == [5, 6]
    assert cfg.duration == 7.5
    assert cfg.pattern == "stride"
    assert cfg.alpha == 2.5
    assert cfg.elephant_threshold == 0.2
    assert cfg.poll_interval == 0.5
    assert cfg.out_dir == "/tmp/x"
    assert cfg.flow_duration is None


def test_config_file_and_env(tmp_path):
    cfg_file = tmp_path / "exp.conf"
    cfg_file.write_text(
        "# comment\n"
        "k = 4\n"
        "schedulers = hybrid, ecmp\n"
        "seeds = 1, 2, 3\n"
        "duration = 9\n"
        "probe_interval = none\n"
    )
    cfg = config_from_args(["--config", str(cfg_file)], env={"FATFLOW_OUT": "/tmp/envout"})
    assert cfg.seeds == [1, 2, 3]
    assert cfg.duration == 9.0
    assert cfg.probe_interval is None
    assert cfg.out_dir == "/tmp/envout"
    # explicit flag beats the environment
    cfg = config_from_args(["--config", str(cfg_file), "--out", "/tmp/flag"],
                           env={"FATFLOW_OUT": "/tmp/envout"})
    assert cfg.out_dir == "/tmp/flag"


def test_config_file_unknown_key(tmp_path):
    cfg_file = tmp_path / "exp.conf"
    cfg_file.write_text("frobnicate = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        config_from_args(["--config", str(cfg_file)], env={})


def test_main_exit_codes(tmp_path, capsys):
    assert main(["--k", "5"]) == 1
    assert "config error" in capsys.readouterr().err
    assert main(["--k", "4", "--duration", "0"]) == 1
    ok = main(["--scheduler", "ecmp", "--seed", "1", "--duration", "3",
               "--elephants", "4", "--flow-duration", "1",
               "--out", str(tmp_path / "r")])
    assert ok == 0
    assert (tmp_path / "r" / "summary.json").is_file()


def test_main_runtime_failure_is_exit_2(tmp_path):
    blocker = tmp_path / "blocked"
    blocker.write_text("not a directory")
    code = main(["--scheduler", "ecmp", "--seed", "1", "--duration", "2",
                 "--elephants", "2", "--out", str(blocker / "sub")])
    assert code == 2


def test_events_flag_writes_jsonl(tmp_path):
    cfg = fast_config(schedulers=["ecmp"], seeds=[1], write_events=True,
                      out_dir=str(tmp_path / "b"))
    out = run_experiment(cfg)
    events = (out / "events" / "ecmp_seed1.jsonl").read_text().splitlines()
    recs = [json.loads(l) for l in events]
    assert all({"seq", "t", "type"} <= set(r) for r in recs)
    times = [r["t"] for r in recs]
    assert times == sorted(times)  # processed strictly in time order
