# src/test/test_cli_reports.py

import json
import os
import sys

import pandas as pd
import pytest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from main import main
from src.analysis.report import Report, emit_report, load_report, make_report, render_html
from src.config.models import parse_config, read_config_file
from src.pipeline.runner import run_experiment
from src.utils.errors import InvalidValue, IoFailure, UnknownCommand


def _out(tmp_path):
    return ["--output-dir", str(tmp_path / "output"), "--base-logdir", str(tmp_path / "logs")]


def test_parse_valid_rigidity_config():
    config = parse_config(["rigidity", "--p", "23", "--n", "2", "--d", "3", "--cosets", "0"])
    assert config.command == "rigidity"
    assert (config.p, config.n, config.d, config.cosets) == (23, 2, 3, [0])
    assert config.jobs == 1
    assert config.search_cap == 2 ** 28


def test_duplicate_cosets_rejected():
    with pytest.raises(InvalidValue) as exc:
        parse_config(["rigidity", "--p", "23", "--n", "2", "--d", "3", "--cosets", "0,0"])
    assert exc.value.key == "cosets"


def test_unknown_command_and_option():
    with pytest.raises(UnknownCommand):
        parse_config(["frobnicate"])
    with pytest.raises(UnknownCommand):
        parse_config([])
    with pytest.raises(InvalidValue):
        parse_config(["rigidity", "--colour", "blue"])


def test_bad_mode_rejected():
    with pytest.raises(InvalidValue) as exc:
        parse_config(["clique", "--p", "3", "--d", "2", "--mode", "weil"])
    assert exc.value.key == "mode"


def test_flags_override_file(tmp_path):
    path = tmp_path / "lab.cfg"
    path.write_text("# rigidity run\np = 37\nn = 2\nd = 2\ncosets = 0\njobs = 4\n", encoding="utf-8")
    assert read_config_file(str(path))["p"] == "37"
    config = parse_config(["rigidity", "--config", str(path), "--p", "23", "--d", "3"])
    assert config.p == 23
    assert config.d == 3
    assert config.jobs == 4


def test_unknown_file_key_rejected(tmp_path):
    path = tmp_path / "lab.cfg"
    path.write_text("p = 5\nflavour = 3\n", encoding="utf-8")
    with pytest.raises(InvalidValue) as exc:
        parse_config(["field-info", "--config", str(path)])
    assert exc.value.key == "flavour"


def test_report_round_trip(tmp_path):
    report = make_report("rigidity", {"p": 23}, {"survivor_count": 3, "M": [0, 1]}, [], 0.5)
    path = tmp_path / "r.json"
    code = emit_report(report, str(path), echo=False)
    assert code == 0
    assert load_report(str(path)) == report
    assert json.loads(path.read_text())["violations"] == "none"


def test_violations_give_exit_one(tmp_path, capsys):
    report = make_report("rigidity", {}, {}, ["THEOREM VIOLATION: example"], 0.1)
    assert emit_report(report, str(tmp_path / "r.json")) == 1
    assert "THEOREM VIOLATION" in capsys.readouterr().out


def test_emit_report_writes_html_and_csv(tmp_path):
    report = make_report("charsum", {}, {"audits": 2}, [], 0.1, notes=["sample note"])
    tables = {"audits": pd.DataFrame({"kind": ["weil", "weil"], "margin": [1.0, 2.0]})}
    html_path = tmp_path / "r.html"
    csv_path = tmp_path / "r.csv"
    emit_report(report, str(tmp_path / "r.json"), html_path=str(html_path), tables=tables,
                csv_path=str(csv_path), echo=False)
    assert "table table-bordered table-sm" in html_path.read_text()
    assert len(pd.read_csv(csv_path)) == 2
    assert "sample note" in render_html(report)


def test_emit_report_io_failure(tmp_path):
    report = Report(command="field-info")
    with pytest.raises(IoFailure):
        emit_report(report, str(tmp_path / "missing" / "r.json"), echo=False)


def test_runner_field_info():
    report, tables = run_experiment(parse_config(["field-info", "--p", "5", "--n", "2"]))
    assert report.clean
    assert report.payload["modulus"] == [2, 0, 1]
    assert len(tables["exp_table"]) == 24


def test_runner_directions_with_coeffs():
    report, _ = run_experiment(parse_config(["directions", "--p", "5", "--n", "2", "--coeffs", "1,10",
                                             "--d", "6", "--cosets", "0,1,4"]))
    assert report.payload["direction_count"] == 6
    assert report.payload["additive"]
    assert report.payload["frobenius_witness"] is None


def test_runner_missing_parameter():
    with pytest.raises(InvalidValue):
        run_experiment(parse_config(["rigidity", "--n", "2"]))


def test_runner_catalog_mode_is_clean_with_notes():
    report, _ = run_experiment(parse_config(["clique", "--p", "3", "--d", "2", "--cosets", "0,1",
                                             "--mode", "catalog"]))
    assert report.clean
    assert report.notes


def test_runner_progress_callback():
    messages = []
    run_experiment(parse_config(["example-f25"]), logger_callback=messages.append)
    assert any("F_25" in m for m in messages)


def test_main_exit_codes(tmp_path):
    out = tmp_path / "f25.json"
    assert main(["example-f25", "--out", str(out)] + _out(tmp_path)) == 0
    assert load_report(str(out)).clean
    assert main(["rigidity", "--p", "4", "--d", "3"] + _out(tmp_path)) == 2
    assert main(["nonsense"]) == 2
    assert main(["directions-theorem", "--q", "5", "--html"] + _out(tmp_path)) == 0


def test_same_config_gives_identical_report_json():
    argv = ["charsum", "audit", "--mode", "weil", "--count", "20", "--seed", "5"]
    first, _ = run_experiment(parse_config(argv))
    second, _ = run_experiment(parse_config(argv))
    timing = {"wall_time_seconds", "generated"}
    assert first.model_dump_json(exclude=timing) == second.model_dump_json(exclude=timing)


def test_charsum_payload_lists_skipped_fields():
    report, _ = run_experiment(parse_config(["charsum", "audit", "--mode", "cor23", "--count", "5"]))
    assert report.clean
    assert "17^4" in report.payload["fields_skipped"]
    assert report.payload["fields_sampled"] > 0
    assert any("not sampled" in note for note in report.notes)
