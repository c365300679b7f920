import json
import subprocess
import sys

import pytest

from kstar.cli import REPORT_SOURCES, build_parser, main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate_lists_classes_and_count(capsys):
    code, out, _ = _run(capsys, "enumerate", "--n", "2", "--m", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "count: 4"
    assert all(line.startswith("n=2 m=2;") for line in lines[:-1])
    assert len(lines) == 5


def test_enumerate_generalized_counts(capsys):
    code, out, _ = _run(capsys, "enumerate", "--n", "2", "--m", "2", "--generalized")
    assert code == 0
    assert out.strip().splitlines()[-1] == "count: 10"


def test_enumerate_out_of_range_exits_2(capsys):
    code, _, err = _run(capsys, "enumerate", "--n", "9", "--m", "2")
    assert code == 2
    assert "enumeration supports" in err


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--chart", "sideways"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["weights", "--samples", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_report_requires_out():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["report"])


def test_report_with_missing_artifacts_fails(capsys, tmp_path):
    code, _, err = _run(capsys, "report", "--out", str(tmp_path))
    assert code == 1
    assert "verify-poisson.report.json" in err


def test_verify_poisson_passes_with_flags(capsys, tmp_path):
    code, out, err = _run(capsys, "verify-poisson", "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    statuses = {c["name"]: c["status"] for c in report["checks"]}
    assert "fail" not in statuses.values()
    assert "flagged" in statuses.values()
    assert "flagged:" in err
    assert json.loads((tmp_path / "verify-poisson.report.json").read_text()) == report


def test_takhtajan_writes_table(capsys, tmp_path):
    code, out, _ = _run(capsys, "takhtajan", "--out", str(tmp_path))
    assert code == 0
    table = json.loads((tmp_path / "startable.json").read_text())
    assert set(table) == {"cochains", "table"}
    assert len(table["table"]) == 16
    assert table["table"]["a*b"] == ["a*b", "1/2*a*b", "-1/8*a*b"]
    assert json.loads(out)["command"] == "takhtajan"


def test_takhtajan_order_range_exits_2(capsys):
    code, _, _ = _run(capsys, "takhtajan", "--order", "7")
    assert code == 2


def test_weights_json_listing(capsys, tmp_path):
    code, out, _ = _run(capsys, "weights", "--samples", "4000", "--seed", "11", "--out", str(tmp_path))
    assert code == 0
    listing = json.loads(out)
    assert listing == json.loads((tmp_path / "weights.json").read_text())
    assert {"graph", "estimate", "std_error", "snapped"} <= set(listing[0])
    assert listing[0]["snapped"] == "1/2"


def test_weights_seed_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("KSTAR_SEED", "13")
    code, out_env, _ = _run(capsys, "weights", "--samples", "4000", "--out", str(tmp_path))
    assert code == 0
    monkeypatch.delenv("KSTAR_SEED")
    _, out_flag, _ = _run(capsys, "weights", "--samples", "4000", "--seed", "13")
    assert out_env == out_flag
    report = json.loads((tmp_path / "weights.report.json").read_text())
    assert report["inputs"]["seed"] == 13


def test_compare_exponential_certificate(capsys, tmp_path):
    code, out, _ = _run(capsys, "compare", "--chart", "exponential", "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    status = {c["name"]: c["status"] for c in report["checks"]}
    assert status["infeasibility certified"] == "pass"
    assert status["forward substitution into printed row 6"] == "pass"
    assert "exponential" in json.loads((tmp_path / "certificate.json").read_text())
    assert "exponential" in json.loads((tmp_path / "system.json").read_text())


def test_full_pipeline_and_report(capsys, tmp_path):
    steps = [
        ["verify-poisson"],
        ["enumerate", "--n", "2", "--m", "2"],
        ["takhtajan"],
        ["weights", "--samples", "4000", "--seed", "1"],
        ["compare", "--chart", "exponential"],
        ["compare", "--chart", "ordinary"],
    ]
    for argv in steps:
        assert main(argv + ["--out", str(tmp_path)]) == 0
    capsys.readouterr()
    for name in REPORT_SOURCES:
        assert (tmp_path / f"{name}.report.json").exists()
    charts = json.loads((tmp_path / "system.json").read_text())
    assert set(charts) == {"exponential", "ordinary"}
    code, out, _ = _run(capsys, "report", "--out", str(tmp_path), "--format", "md")
    assert code == 0
    assert out.startswith("# kstar report")
    assert (tmp_path / "report.md").read_text() == out
    code, out, _ = _run(capsys, "report", "--out", str(tmp_path))
    assert set(json.loads(out)) == set(REPORT_SOURCES)


def test_outputs_are_deterministic(capsys, tmp_path):
    first, second = tmp_path / "one", tmp_path / "two"
    for target in (first, second):
        assert main(["takhtajan", "--out", str(target)]) == 0
        assert main(["compare", "--chart", "exponential", "--out", str(target)]) == 0
    capsys.readouterr()
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "kstar", "enumerate", "--n", "1", "--m", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip().splitlines()[-1] == "count: 1"
