import json
import os
import stat

import numpy as np
import pytest

from fedsched.cli import export_csv, main, run_experiment
from fedsched.config import ConfigError, parse_config, parse_config_dict
from fedsched.simulator import RoundRecord

MINIMAL = {
    "seed": 1,
    "fed": {"n_clients": 3, "rounds": 4, "local_steps": 2, "learning_rate": 0.1},
    "workload": {"kind": "quadratic", "dim": 4, "samples_per_client": 5},
}


def write_config(tmp_path, doc, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_defaults_applied(tmp_path):
    cfg = parse_config(write_config(tmp_path, MINIMAL))
    assert cfg.lyapunov.v_weight == 1000.0
    assert cfg.fed.minibatch_size == 32
    assert cfg.moving_average_window == 500
    assert cfg.channel.bandwidth_hz == 22e6
    assert cfg.policy == "lyapunov"


def test_full_defaults_need_only_n_clients():
    cfg = parse_config_dict({"fed": {"n_clients": 2}})
    assert cfg.fed.local_steps == 10 and cfg.fed.learning_rate == 0.01


def test_negative_lambda_names_key():
    doc = {**MINIMAL, "lyapunov": {"lambda_weight": -1.0}}
    with pytest.raises(ConfigError, match="lambda_weight"):
        parse_config_dict(doc)


def test_unknown_key_typo_guard():
    doc = {**MINIMAL, "lamda": 3}
    with pytest.raises(ConfigError, match="lamda"):
        parse_config_dict(doc)
    doc2 = dict(MINIMAL)
    doc2["lyapunov"] = {"v": 1.0}
    with pytest.raises(ConfigError, match="'v'"):
        parse_config_dict(doc2)


def test_missing_required_key_named():
    with pytest.raises(ConfigError, match="n_clients"):
        parse_config_dict({"fed": {"rounds": 3}})


def test_uniform_requires_m():
    with pytest.raises(ConfigError, match="uniform_m"):
        parse_config_dict({**MINIMAL, "policy": "uniform"})


def test_sigma_group_shorthand():
    doc = {**MINIMAL, "channel": {"sigma": [[1, 0.2], [2, 1.2]]}}
    cfg = parse_config_dict(doc)
    assert cfg.channel.sigma.tolist() == [0.2, 1.2, 1.2]
    bad = {**MINIMAL, "channel": {"sigma": [0.5, 0.5]}}
    with pytest.raises(ConfigError, match="sigma"):
        parse_config_dict(bad)


def test_run_experiment_deterministic_bytes(tmp_path):
    config = write_config(tmp_path, MINIMAL)
    m1 = run_experiment(config, str(tmp_path / "out1"))
    m2 = run_experiment(config, str(tmp_path / "out2"))
    b1 = open(m1.metrics_csv, "rb").read()
    b2 = open(m2.metrics_csv, "rb").read()
    assert b1 == b2
    snap = open(m1.config_snapshot, "rb").read()
    assert snap == open(config, "rb").read()


def test_run_experiment_seed_override(tmp_path):
    config = write_config(tmp_path, MINIMAL)
    m1 = run_experiment(config, str(tmp_path / "o"), seed_override=1)
    m2 = run_experiment(config, str(tmp_path / "o"), seed_override=2)
    assert m1.seed == 1 and m2.seed == 2
    assert open(m1.metrics_csv).read() != open(m2.metrics_csv).read()


def test_unwritable_out_dir(tmp_path):
    # a regular file in the path makes directory creation fail, even as root
    config = write_config(tmp_path, MINIMAL)
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    with pytest.raises(OSError):
        run_experiment(config, str(blocker / "out"))


def _record(t, loss=0.123456789012345):
    return RoundRecord(t=t, train_loss=loss, test_accuracy=0.5, round_comm_time_s=0.1,
                       cumulative_comm_time_s=0.1 * (t + 1), selected_count=1,
                       sum_inv_q=2.0, forced_selection=0)


def test_export_csv_roundtrip(tmp_path):
    path = str(tmp_path / "m.csv")
    export_csv([_record(0)], path)
    lines = open(path).read().strip().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("t,train_loss,test_accuracy")
    import csv as _csv

    row = next(iter(_csv.DictReader(open(path))))
    assert float(row["train_loss"]) == 0.123456789012345
    with pytest.raises(ValueError):
        export_csv([], str(tmp_path / "empty.csv"))


def test_cli_run_and_estimate_m(tmp_path, capsys):
    config = write_config(tmp_path, MINIMAL)
    rc = main(["run", "--config", config, "--out", str(tmp_path / "out")])
    assert rc == 0
    csv_path = capsys.readouterr().out.strip()
    assert os.path.exists(csv_path)
    rc = main(["estimate-m", "--config", config, "--rounds", "10"])
    assert rc == 0
    m = float(capsys.readouterr().out.strip())
    assert 0.0 < m <= 3.0


def test_cli_sweep_three_values(tmp_path, capsys):
    config = write_config(tmp_path, MINIMAL)
    out = str(tmp_path / "sweep")
    rc = main([
        "sweep", "--config", config, "--param", "lyapunov.v_weight",
        "--values", "1,1000,100000", "--out", out,
    ])
    assert rc == 0
    manifests = [f for f in os.listdir(out) if f.startswith("run-")]
    assert len(manifests) == 3
    for d in manifests:
        assert os.path.exists(os.path.join(out, d, "metrics.csv"))
        assert os.path.exists(os.path.join(out, d, "manifest.json"))


def test_cli_reports_config_errors(tmp_path, capsys):
    config = write_config(tmp_path, {**MINIMAL, "lamda": 1})
    rc = main(["run", "--config", config, "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "lamda" in capsys.readouterr().err
