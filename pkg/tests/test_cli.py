import json
import subprocess
import sys
from pathlib import Path

import pytest

from rationeval.cli import main

from conftest import FIXTURE_JSONL, FIXTURE_TRAIN, FIXTURE_TSV


def run_cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "rationeval.cli", *argv],
        capture_output=True,
        text=True,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_ingest_stats_matches_fixture(capsys):
    assert main(["ingest", "--data", str(FIXTURE_JSONL), "--stats"]) == 0
    out = capsys.readouterr().out
    assert "parsed 8 instances" in out
    lines = {l.split("\t")[0]: l.split("\t")[1:] for l in out.splitlines() if "\t" in l}
    assert lines["Number of Sentences"] == ["3", "1", "2", "2", "8"]
    assert lines["Number of Empty intersections"][-1] == "2"
    assert lines["Words per sentence"][-1] == "19.38"


def test_ingest_tsv_roundtrip(tmp_path, capsys):
    out_path = tmp_path / "canonical.jsonl"
    assert main(["ingest", "--data", str(FIXTURE_TSV), "--out", str(out_path)]) == 0
    capsys.readouterr()
    assert len(out_path.read_text().splitlines()) == 8


def test_explain_single_id_one_line(tmp_path, capsys):
    out_path = tmp_path / "e.jsonl"
    code = main([
        "explain", "--data", str(FIXTURE_JSONL),
        "--model", f"builtin-nb:{FIXTURE_TRAIN}",
        "--explainer", "shap", "--ids", "t1", "--samples", "100",
        "--out", str(out_path),
    ])
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert len(lines) == 1
    obj = json.loads(lines[0])
    assert obj["instance_id"] == "t1" and obj["explainer"] == "shap"


def test_metrics_and_report_pipeline(tmp_path, capsys):
    expl = tmp_path / "e.jsonl"
    metrics = tmp_path / "m.csv"
    summaries = tmp_path / "s.json"
    assert main([
        "explain", "--data", str(FIXTURE_JSONL),
        "--model", f"builtin-nb:{FIXTURE_TRAIN}",
        "--explainer", "lime", "--samples", "100", "--out", str(expl),
    ]) == 0
    assert main([
        "metrics", "--data", str(FIXTURE_JSONL), "--explanations", str(expl),
        "--model-name", "nb", "--out", str(metrics),
    ]) == 0
    assert main(["report", "--metrics", str(metrics), "--out", str(summaries)]) == 0
    payload = json.loads(summaries.read_text())
    assert "by_explainer_mode" in payload


def test_faithfulness_subcommand(tmp_path, capsys):
    expl = tmp_path / "e.jsonl"
    out = tmp_path / "f.csv"
    main([
        "explain", "--data", str(FIXTURE_JSONL),
        "--model", f"builtin-nb:{FIXTURE_TRAIN}",
        "--explainer", "lime", "--samples", "100", "--out", str(expl),
    ])
    assert main([
        "faithfulness", "--data", str(FIXTURE_JSONL), "--explanations", str(expl),
        "--model", f"builtin-nb:{FIXTURE_TRAIN}",
        "--epsilons", "0.1,0.2", "--out", str(out),
    ]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3  # header + two epsilons


def test_run_with_config_file(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text(
        f"""
[run]
dataset = {FIXTURE_JSONL}
models = builtin-nb:{FIXTURE_TRAIN}
explainers = lime, shap
output = {tmp_path / 'out'}
seed = 3

[explainer]
num_samples = 120
anchor_budget = 800

[epsilons]
lime = 0.1, 0.2
shap = 0.1
"""
    )
    assert main(["run", "--config", str(config)]) == 0
    header = (tmp_path / "out" / "faithfulness.csv").read_text().splitlines()[0]
    assert header == "model,baseline,lime_eps0.1,lime_eps0.2,shap_eps0.1"


def test_run_seed_env_override(tmp_path, capsys, monkeypatch):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    args = [
        "run", "--data", str(FIXTURE_JSONL), "--model", f"builtin-nb:{FIXTURE_TRAIN}",
        "--explainers", "lime", "--samples", "100",
    ]
    monkeypatch.setenv("RATIONEVAL_SEED", "99")
    assert main(args + ["--out", str(out_a), "--seed", "1"]) == 0
    monkeypatch.delenv("RATIONEVAL_SEED")
    assert main(args + ["--out", str(out_b), "--seed", "99"]) == 0
    assert (out_a / "metrics.csv").read_bytes() == (out_b / "metrics.csv").read_bytes()


def test_unknown_flag_exit_1():
    code, _, err = run_cli("ingest", "--data", str(FIXTURE_JSONL), "--bogus")
    assert code == 1
    assert "usage" in err.lower()


def test_missing_subcommand_exit_1():
    code, _, _ = run_cli()
    assert code == 1


def test_validation_error_exit_1(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("sentence without enough columns\n")
    code, _, err = run_cli("ingest", "--data", str(bad), "--format", "tsv")
    assert code == 1
    assert "error" in err.lower()


def test_transport_error_exit_2(tmp_path):
    code, _, err = run_cli(
        "explain", "--data", str(FIXTURE_JSONL),
        "--model", "cmd:echo", "--explainer", "lime",
    )
    assert code == 2


def test_run_determinism_cli(tmp_path):
    args = [
        "run", "--data", str(FIXTURE_JSONL), "--model", f"builtin-nb:{FIXTURE_TRAIN}",
        "--explainers", "lime,anchors", "--samples", "100", "--seed", "5",
    ]
    code_a, _, _ = run_cli(*args, "--out", str(tmp_path / "ra"))
    code_b, _, _ = run_cli(*args, "--out", str(tmp_path / "rb"))
    assert code_a == code_b == 0
    a = json.loads((tmp_path / "ra" / "manifest.json").read_text())
    b = json.loads((tmp_path / "rb" / "manifest.json").read_text())
    assert a["config_hash"] == b["config_hash"]
    assert (tmp_path / "ra" / "metrics.csv").read_bytes() == (
        tmp_path / "rb" / "metrics.csv"
    ).read_bytes()
