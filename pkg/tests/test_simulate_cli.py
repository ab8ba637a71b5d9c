"""CLI behavior: exit codes, simulation determinism, analyze outputs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from charla.cli import main
from charla.gateways import COMPLETION_URL_ENV


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_summary(out: str) -> dict:
    return json.loads(out.strip().splitlines()[-1])


def log_bytes(root: Path) -> dict[str, bytes]:
    return {
        path.name: path.read_bytes()
        for path in sorted(root.iterdir())
        if path.is_file()
    }


def test_simulate_writes_a_log_directory(tmp_path, capsys):
    out = tmp_path / "logs"
    code, stdout, _ = run_cli(
        capsys, "simulate", "--seed", "3", "--users", "4", "--days", "2", "--out", str(out)
    )
    assert code == 0
    summary = read_summary(stdout)
    assert summary["users"] == 4
    assert summary["turns"] > 0
    assert list(out.glob("turns-*.jsonl"))
    assert (out / "profiles.jsonl").exists()


def test_simulate_same_seed_same_bytes(tmp_path, capsys):
    for name in ("a", "b"):
        code, _, _ = run_cli(
            capsys,
            "simulate",
            "--seed",
            "11",
            "--users",
            "5",
            "--out",
            str(tmp_path / name),
        )
        assert code == 0
    assert log_bytes(tmp_path / "a") == log_bytes(tmp_path / "b")


def test_simulate_different_seed_differs(tmp_path, capsys):
    run_cli(capsys, "simulate", "--seed", "1", "--users", "5", "--out", str(tmp_path / "a"))
    run_cli(capsys, "simulate", "--seed", "2", "--users", "5", "--out", str(tmp_path / "b"))
    assert log_bytes(tmp_path / "a") != log_bytes(tmp_path / "b")


def test_analyze_renders_report_and_figures(tmp_path, capsys):
    logs = tmp_path / "logs"
    run_cli(capsys, "simulate", "--seed", "5", "--users", "8", "--out", str(logs))
    out = tmp_path / "analysis"
    code, stdout, _ = run_cli(
        capsys, "analyze", "--logs", str(logs), "--out", str(out)
    )
    assert code == 0
    summary = read_summary(stdout)
    assert summary["users"] > 0
    assert (out / "report.json").exists()
    header = (out / "features.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("alias,criterion,char_count,word_count")
    figures = sorted(p.name for p in (out / "figures").glob("*.png"))
    assert "messages_per_day.png" in figures
    assert "correlation_matrix.png" in figures
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["users"]["total"] == summary["users"]


def test_analyze_can_skip_figures(tmp_path, capsys):
    logs = tmp_path / "logs"
    run_cli(capsys, "simulate", "--seed", "5", "--users", "3", "--out", str(logs))
    out = tmp_path / "analysis"
    code, _, _ = run_cli(
        capsys, "analyze", "--logs", str(logs), "--out", str(out), "--no-figures"
    )
    assert code == 0
    assert not (out / "figures").exists()


def test_analyze_missing_logs_is_usage_error(tmp_path, capsys):
    code, _, stderr = run_cli(
        capsys, "analyze", "--logs", str(tmp_path / "nope"), "--out", str(tmp_path / "out")
    )
    assert code == 2
    assert "not found" in stderr


def test_bad_config_path_is_usage_error(tmp_path, capsys):
    code, _, stderr = run_cli(
        capsys,
        "--config",
        str(tmp_path / "missing.json"),
        "simulate",
        "--out",
        str(tmp_path / "logs"),
    )
    assert code == 2
    assert "configuration error" in stderr


def test_unparseable_config_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    code, _, stderr = run_cli(
        capsys, "--config", str(bad), "simulate", "--out", str(tmp_path / "logs")
    )
    assert code == 2
    assert "configuration error" in stderr


def test_import_interviews_round_trip(tmp_path, capsys):
    logs = tmp_path / "logs"
    logs.mkdir()
    csv_path = tmp_path / "interviews.csv"
    csv_path.write_text(
        "alias,topic_id,level\nana,12,indicated\nbea,8,Healthy\n", encoding="utf-8"
    )
    code, stdout, _ = run_cli(
        capsys, "import-interviews", "--csv", str(csv_path), "--logs", str(logs)
    )
    assert code == 0
    assert read_summary(stdout) == {"imported": 2}
    from charla.store import SensitivityStore

    store = SensitivityStore(logs)
    assert store.user_criterion("ana") == "indicated"
    assert store.user_criterion("bea") == "healthy"


def test_import_interviews_rejects_bad_header(tmp_path, capsys):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("nombre,tema\nana,12\n", encoding="utf-8")
    code, _, stderr = run_cli(
        capsys, "import-interviews", "--csv", str(csv_path), "--logs", str(tmp_path / "logs")
    )
    assert code == 2
    assert "header" in stderr


def test_serve_replay_adapter_is_stubbed(tmp_path, capsys):
    code, _, stderr = run_cli(capsys, "serve", "--adapter", "replay")
    assert code == 2
    assert "replay" in stderr


def test_serve_platform_adapter_needs_endpoint(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv(COMPLETION_URL_ENV, raising=False)
    code, _, stderr = run_cli(capsys, "serve", "--adapter", "platform")
    assert code == 2
    assert COMPLETION_URL_ENV in stderr


def test_scripted_simulation(tmp_path, capsys):
    script = {
        "users": [
            {
                "alias": "guion1",
                "persona": "/Hugo",
                "age": 15,
                "gender": "Masculino",
                "messages": [
                    "/Tema12",
                    "No",
                    "No",
                    "1",
                    "pues juego bastante por las tardes",
                    "sobre todo cuando me aburro en casa",
                ],
            },
            {
                "alias": "guion2",
                "messages": [
                    "/Tema8",
                    "Sí",
                    "No",
                    "2",
                    "me cuesta dormirme por las noches",
                ],
                "start_offset_hours": 30,
            },
        ]
    }
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(script), encoding="utf-8")
    logs = tmp_path / "logs"
    code, stdout, _ = run_cli(
        capsys, "simulate", "--script", str(script_path), "--out", str(logs)
    )
    assert code == 0
    assert read_summary(stdout)["users"] == 2
    from charla.store import ProfileStore, SensitivityStore

    profiles = ProfileStore(logs)
    assert profiles.get("guion1")["persona_id"] == "Hugo"
    assert profiles.get("guion2") is not None
    sens = SensitivityStore(logs)
    assert sens.user_criterion("guion2") == "indicated"
    assert sens.user_criterion("guion1") == "healthy"


def test_scripted_simulation_rejects_bad_alias(tmp_path, capsys):
    script_path = tmp_path / "script.json"
    script_path.write_text(
        json.dumps({"users": [{"alias": "con espacios", "messages": ["hola"]}]}),
        encoding="utf-8",
    )
    code, _, stderr = run_cli(
        capsys, "simulate", "--script", str(script_path), "--out", str(tmp_path / "logs")
    )
    assert code == 2
    assert "bad alias" in stderr
