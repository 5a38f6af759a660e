import csv
import json
import xml.etree.ElementTree as ET

import pytest

from rankcompat import cli

SUBCOMMANDS = ["gen-data", "split", "train", "evaluate", "update-experiment",
               "combinatorics", "btc-sweep"]
SVG = "{http://www.w3.org/2000/svg}"

TINY = {
    "synth": {"n": 400, "d": 4, "prevalence": 0.3, "class_separation": 1.0},
    "split": {"n_original": 100, "n_updated": 160},
    "candidates": {"n_resample": 1, "n_shuffle": 1, "reg_grid": [0.01]},
    "train": {"max_epochs": 15, "patience": 2},
}


def run(*argv):
    return cli.run([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def series_labels(path):
    root = ET.parse(path).getroot()
    return [g.get("data-label") for g in root.iter(f"{SVG}g") if g.get("class") == "series"]


@pytest.fixture
def tiny_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(TINY))
    return p


@pytest.fixture
def workspace(tmp_path):
    """Synthetic CSV, its partitions and an original model."""
    data = tmp_path / "data.csv"
    assert run("gen-data", "--out", data, "--n", 400, "--d", 3, "--class-separation", 1.0,
               "--prevalence", 0.3, "--seed", 1) == 0
    assert run("split", "--data", data, "--out-dir", tmp_path / "parts",
               "--n-original", 100, "--n-updated", 200) == 0
    parts = tmp_path / "parts"
    assert run("train", "--dev", parts / "orig_dev.csv", "--val", parts / "orig_val.csv",
               "--out", tmp_path / "orig.json", "--max-epochs", 20) == 0
    return tmp_path


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_documents_flags(sub, capsys):
    assert run(sub, "--help") == 0
    text = capsys.readouterr().out
    parser = cli.build_parser()
    subparser = parser._subparsers._group_actions[0].choices[sub]
    for action in subparser._actions:
        for opt in action.option_strings:
            assert opt in text


def test_usage_errors(capsys):
    assert run() == 1
    assert run("no-such-command") == 1
    assert run("gen-data") == 1
    assert run("gen-data", "--out", "x.csv", "--n", "many") == 1
    assert "usage" in capsys.readouterr().err


def test_parse_range():
    assert cli.parse_range("0..1") == tuple(i / 10 for i in range(11))
    assert cli.parse_range("0..0.95:0.05")[-1] == 0.95
    assert cli.parse_range("0.65,0.75") == (0.65, 0.75)


def test_pipeline_end_to_end(workspace, capsys):
    parts = workspace / "parts"
    assert [len(read_csv(parts / f)) - 1 for f in cli.PARTITION_FILES] == [50, 50, 100, 100, 100]
    assert run("train", "--dev", parts / "upd_dev.csv", "--val", parts / "upd_val.csv",
               "--original", workspace / "orig.json", "--alpha", 0.5,
               "--out", workspace / "upd.json", "--max-epochs", 20) == 0
    capsys.readouterr()
    assert run("evaluate", "--original", workspace / "orig.json",
               "--updated", workspace / "upd.json", "--data", parts / "eval.csv", "--json") == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep) >= {"auroc_o", "auroc_u", "rbc", "btc", "pop"}
    assert rep["pop"]["m"] == rep["pop"]["m_pp"] + rep["pop"]["m_pm"] + rep["pop"]["m_mp"] + rep["pop"]["m_mm"]


def test_evaluate_identical_models(workspace, capsys):
    m = workspace / "orig.json"
    capsys.readouterr()
    assert run("evaluate", "--original", m, "--updated", m,
               "--data", workspace / "parts" / "eval.csv") == 0
    lines = capsys.readouterr().out.splitlines()
    assert "rbc 1.0" in lines
    assert "btc 1.0" in lines


def test_resolved_config_echoed(workspace, capsys):
    assert run("gen-data", "--out", workspace / "x.csv", "--n", 20, "--seed", 3) == 0
    echoed = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert echoed["synth"]["n"] == 20 and echoed["synth"]["seed"] == 3
    assert echoed["synth"]["d"] == 50


def test_flags_override_config(tmp_path, tiny_config):
    assert run("gen-data", "--config", tiny_config, "--out", tmp_path / "a.csv") == 0
    assert len(read_csv(tmp_path / "a.csv")) == 401
    assert run("gen-data", "--config", tiny_config, "--out", tmp_path / "b.csv", "--n", 50) == 0
    assert len(read_csv(tmp_path / "b.csv")) == 51


def test_seed_environment_fallback(tmp_path, monkeypatch):
    assert run("gen-data", "--out", tmp_path / "flag.csv", "--n", 30, "--d", 2, "--seed", 5) == 0
    monkeypatch.setenv("RANKCOMPAT_SEED", "5")
    assert run("gen-data", "--out", tmp_path / "env.csv", "--n", 30, "--d", 2) == 0
    monkeypatch.setenv("RANKCOMPAT_SEED", "6")
    assert run("gen-data", "--out", tmp_path / "other.csv", "--n", 30, "--d", 2) == 0
    flag = (tmp_path / "flag.csv").read_bytes()
    assert flag == (tmp_path / "env.csv").read_bytes()
    assert flag != (tmp_path / "other.csv").read_bytes()
    monkeypatch.setenv("RANKCOMPAT_SEED", "abc")
    assert run("gen-data", "--out", tmp_path / "bad.csv", "--n", 30) == 2


def test_data_errors_exit_2(tmp_path, workspace):
    assert run("split", "--data", tmp_path / "missing.csv", "--out-dir", tmp_path / "o") == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("y,f0\n0,1.0\n2,0.5\n")
    assert run("split", "--data", bad, "--out-dir", tmp_path / "o") == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"synth": {"bogus": 1}}))
    assert run("gen-data", "--config", cfg, "--out", tmp_path / "x.csv") == 2
    parts = workspace / "parts"
    assert run("train", "--dev", parts / "upd_dev.csv", "--val", parts / "upd_val.csv",
               "--alpha", 0.5, "--out", tmp_path / "m.json") == 2
    assert run("gen-data", "--out", tmp_path / "x.csv", "--prevalence", 1.5) == 2


def test_degenerate_errors_exit_3(tmp_path, workspace):
    one_class = tmp_path / "one.csv"
    one_class.write_text("y,f0,f1,f2\n1,0.1,0.2,0.3\n1,0.3,0.2,0.1\n")
    m = workspace / "orig.json"
    assert run("evaluate", "--original", m, "--updated", m, "--data", one_class) == 3


def test_combinatorics(tmp_path, capsys):
    assert run("combinatorics", "--m", 400, "--auroc-o", 0.65,
               "--auroc-u", "0.65,0.75,0.85,0.95", "--out-dir", tmp_path) == 0
    out = capsys.readouterr().out.splitlines()
    peaks = {float(l.split()[1]): float(l.split()[5]) for l in out}
    for au, peak in peaks.items():
        assert abs(peak - au) <= 1 / 260
    rows = read_csv(tmp_path / "nu_curves.csv")
    assert rows[0] == ["auroc_u", "k", "rbc", "log10_count"]
    assert {r[0] for r in rows[1:]} == {"0.65", "0.75", "0.85", "0.95"}
    assert len(series_labels(tmp_path / "nu_curves.svg")) == 4


def test_combinatorics_infeasible(tmp_path):
    assert run("combinatorics", "--auroc-o", 0.0, "--out-dir", tmp_path) == 3


def test_update_experiment_full_grid(tmp_path, tiny_config):
    out = tmp_path / "exp"
    assert run("update-experiment", "--config", tiny_config, "--out-dir", out,
               "--replications", 2, "--alphas", "0..1", "--betas", "0..1", "--seed", 4) == 0
    rows = read_csv(out / "summary.csv")
    assert rows[0] == ["alpha", "beta", "mean_drbc", "drbc_lo", "drbc_hi",
                       "mean_dauroc", "dauroc_lo", "dauroc_hi", "improvement"]
    assert len(rows) - 1 == 121
    assert {r[-1] for r in rows[1:]} <= {"true", "false"}
    assert len(read_csv(out / "replications.csv")) - 1 == 2 * 121
    assert len(series_labels(out / "scatter.svg")) == 1 + 11
    hist = read_csv(out / "phi_pp_histogram.csv")
    assert len(hist) - 1 == 100
    assert sum(float(r[2]) for r in hist[1:]) == pytest.approx(2.0)


def test_update_experiment_needs_two_replications(tmp_path, tiny_config):
    assert run("update-experiment", "--config", tiny_config, "--out-dir", tmp_path,
               "--replications", 1) == 2


def test_update_experiment_deterministic(tmp_path, tiny_config):
    args = ["update-experiment", "--config", tiny_config, "--replications", 2,
            "--alphas", "0.5", "--betas", "0.5", "--seed", 8]
    assert run(*args, "--out-dir", tmp_path / "a") == 0
    assert run(*args, "--out-dir", tmp_path / "b") == 0
    for f in ("summary.csv", "replications.csv", "scatter.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_btc_sweep(tmp_path, tiny_config):
    assert run("btc-sweep", "--config", tiny_config, "--out-dir", tmp_path, "--replications", 2,
               "--tau-o", "0.1,0.5", "--tau-u", "0..0.9:0.3") == 0
    rows = read_csv(tmp_path / "btc_sweep.csv")
    assert rows[0] == ["tau_o", "tau_u", "btc", "degenerate", "acc_o", "acc_u"]
    assert len(rows) - 1 == 2 * 4
    assert len(series_labels(tmp_path / "btc_sweep.svg")) == 1
