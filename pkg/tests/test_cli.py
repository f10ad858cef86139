import json
import subprocess
import sys

import numpy as np
import pytest

from spcanet import io as fileio
from spcanet.cli import RunConfig, cmd_ablate, cmd_run, cmd_sweep, main
from spcanet.errors import ContractViolation


@pytest.fixture
def small(tmp_path):
    out = tmp_path / "data"
    assert main(["synth", "--output-dir", str(out), "--d", "20", "--n", "40", "--c", "3",
                 "--informative-count", "5", "--seed", "2"]) == 0
    return out


def base_config(small, out, **kw):
    values = dict(data_path=str(small / "data.csv"), labels_path=str(small / "labels.csv"),
                  output_dir=str(out), feature_counts=[5, 10], repeats=3, iterations=5,
                  grid_lambda=[0.01, 0.1], grid_mu=[0.1])
    values.update(kw)
    return RunConfig.from_dict(values)


def test_unknown_key_rejected():
    with pytest.raises(ContractViolation, match="bogus"):
        RunConfig.from_dict({"data_path": "x.csv", "bogus": 1})


def test_invalid_values_rejected():
    with pytest.raises(ContractViolation):
        RunConfig.from_dict({"data_path": "x.csv", "mode": "fast"})
    with pytest.raises(ContractViolation):
        RunConfig.from_dict({"data_path": "x.csv", "alpha": -1.0})
    with pytest.raises(ContractViolation):
        RunConfig.from_dict({})


def test_missing_file_is_an_error(tmp_path, capsys):
    code = main(["run", "--data-path", str(tmp_path / "nope.csv"), "--output-dir", str(tmp_path / "o")])
    assert code != 0
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"data_path": "a.csv", "nonsense": 3}')
    assert main(["run", "--config", str(cfg)]) == 2
    cfg.write_text("[1, 2]")
    assert main(["run", "--config", str(cfg)]) == 2


def test_run_admm_outputs(small, tmp_path):
    out = tmp_path / "o"
    assert cmd_run(base_config(small, out)) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["config.json", "eval.csv", "history.csv", "loss.txt", "x.csv"]
    x = fileio.load_matrix(out / "x.csv")
    assert x.shape == (20, 3)
    assert json.loads((out / "config.json").read_text())["m"] == 3


def test_flags_override_config(small, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"data_path": str(small / "data.csv"), "m": 2, "lam": 5.0}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--m", "4", "--output-dir", str(out)]) == 0
    saved = json.loads((out / "config.json").read_text())
    assert saved["m"] == 4 and saved["lam"] == 5.0
    assert fileio.load_matrix(out / "x.csv").shape == (20, 4)


def test_untrained_network_matches_admm(small, tmp_path):
    a_out, s_out = tmp_path / "a", tmp_path / "s"
    cmd_run(base_config(small, a_out, max_iters=5, tol=0.0))
    cmd_run(base_config(small, s_out, mode="spcanet", iterations=0))
    xa = fileio.load_matrix(a_out / "x.csv")
    xs = fileio.load_matrix(s_out / "x.csv")
    # exp(log(v)) rounding is the only difference
    np.testing.assert_allclose(xs, xa, atol=1e-10)
    assert (s_out / "model.txt").exists() and (s_out / "train_history.csv").exists()


def test_gridsearch_writes_grid(small, tmp_path):
    out = tmp_path / "o"
    cmd_run(base_config(small, out, mode="gridsearch"))
    lines = (out / "grid.csv").read_text().splitlines()
    assert lines[0] == "lam,mu,loss" and len(lines) == 3
    best = min(float(l.split(",")[2]) for l in lines[1:])
    assert float((out / "loss.txt").read_text()) == best


def test_ablate_has_four_rows(small, tmp_path):
    out = tmp_path / "o"
    cmd_ablate(base_config(small, out))
    lines = (out / "ablation.csv").read_text().splitlines()
    assert lines[0].startswith("config,loss,acc")
    assert [l.split(",")[0] for l in lines[1:]] == ["gridsearch", "untrained", "static", "dynamic"]


def test_sweep_rows(small, tmp_path):
    out = tmp_path / "o"
    cmd_sweep(base_config(small, out, k_max=3, iterations=2))
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "n_stages,loss" and len(lines) == 4


def test_run_is_deterministic(small, tmp_path):
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for out in outs:
        cmd_run(base_config(small, out, mode="spcanet", seed=3))
    for f in outs[0].iterdir():
        if f.name == "config.json":
            continue
        assert f.read_bytes() == (outs[1] / f.name).read_bytes()


def test_eval_and_binary(small, tmp_path):
    bdir = tmp_path / "b"
    assert main(["synth", "--output-dir", str(bdir), "--d", "20", "--n", "40", "--c", "3",
                 "--informative-count", "5", "--seed", "2", "--binary"]) == 0
    np.testing.assert_array_equal(fileio.load_matrix(bdir / "data.spm"), fileio.load_matrix(small / "data.csv"))
    run = tmp_path / "run"
    cmd_run(base_config(small, run))
    ev = tmp_path / "ev"
    assert main(["eval", "--data-path", str(small / "data.csv"), "--labels-path", str(small / "labels.csv"),
                 "--x-path", str(run / "x.csv"), "--output-dir", str(ev), "--feature-counts", "5,10",
                 "--repeats", "3"]) == 0
    assert (ev / "eval.csv").read_text() == (run / "eval.csv").read_text()


def test_output_dir_from_environment(small, tmp_path, monkeypatch):
    monkeypatch.setenv("SPCANET_OUTPUT_DIR", str(tmp_path / "envout"))
    assert main(["run", "--data-path", str(small / "data.csv"), "--max-iters", "3"]) == 0
    assert (tmp_path / "envout" / "x.csv").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spcanet.cli", "synth", "--output-dir", str(tmp_path),
                           "--d", "5", "--n", "8", "--c", "2", "--informative-count", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "labels.csv").exists()
