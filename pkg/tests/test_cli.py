import json
from pathlib import Path

import pytest

from sslfusion import sensors as sn
from sslfusion.cli import SCHEMA_VERSION, main

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv,golden",
    [
        (["theory", "6.25", "1", "1"], "theory_6.25_1_1.json"),
        (["theory", "0.25", "1", "100"], "theory_0.25_1_100.json"),
        (["table1", "--n", "1000", "--seed", "3"], "table1_n1000_seed3.json"),
    ],
)
def test_golden(capsys, argv, golden):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


def test_theory_report(capsys):
    code, out, _ = run(capsys, "theory", "6.25", "1", "1")
    doc = json.loads(out)
    assert doc["schema_version"] == SCHEMA_VERSION and doc["kind"] == "theory"
    r = doc["result"]
    assert abs(r["e_fused"] - 0.49) <= 0.005
    assert abs(r["sigma_f2_threshold"] - 11.57) <= 0.01
    assert r["favorable"] is True


def test_theory_condition_i_and_unfavorable(capsys):
    assert json.loads(run(capsys, "theory", "1", "1", "5")[1])["result"]["condition"] == "i"
    assert json.loads(run(capsys, "theory", "6.25", "1", "16")[1])["result"]["favorable"] is False


@pytest.mark.parametrize("argv", [["theory", "0", "1", "1"], ["theory", "1", "-2", "1"], ["verify", "1", "1", "nan"]])
def test_invalid_parameters_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_usage_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["theory", "1"])
    assert exc.value.code == 2


def test_text_and_csv_formats(capsys):
    _, text, _ = run(capsys, "theory", "6.25", "1", "1", "--format", "text")
    assert "sigma_f2_threshold" in text and "11.5728" in text
    _, csv_out, _ = run(capsys, "table1", "--n", "500", "--format", "csv")
    lines = csv_out.strip().splitlines()
    assert lines[0].startswith("sigma_t2,sigma_g2,sigma_f2,n,")
    assert len(lines) == 5


def test_verify_and_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2000, "seed": 4}))
    _, out, _ = run(capsys, "verify", "6.25", "1", "1", "--config", str(cfg), "--n", "3000")
    r = json.loads(out)["result"]
    assert r["n"] == 3000 and r["seed"] == 4


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2000, "colour": "blue"}))
    code, _, err = run(capsys, "verify", "6.25", "1", "1", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_verify_numerical_failure_exit_1(capsys):
    # a window no x_g falls into leaves the variance proxy undefined
    code, _, err = run(capsys, "verify", "6.25", "1", "1", "--n", "200", "--window", "1000,1001")
    assert code == 1 and "failed" in err


def test_synth_and_casestudy(capsys, tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps({"duration_s": 120, "seed": 3}))
    log_path = tmp_path / "log.csv"
    assert run(capsys, "synth", "--config", str(cfg), "--out", str(log_path))[0] == 0
    assert sn.load_log(log_path) == sn.synthesize_log(sn.SynthConfig(duration_s=120, seed=3))
    code, out, _ = run(capsys, "casestudy", str(log_path), "--runs", "4", "--splits", "0.8,0.1,0.1")
    assert code == 0
    reports = json.loads(out)["result"]
    assert [r["config"]["primary_cue"] for r in reports] == ["sonar", "barometer"]
    assert all(len(r["runs"]) == 4 for r in reports)
    code, text, _ = run(capsys, "casestudy", str(log_path), "--runs", "2", "--primary", "sonar", "--format", "text")
    assert code == 0 and "sonar" in text and "barometer" not in text
    out_path = tmp_path / "runs.csv"
    run(capsys, "casestudy", str(log_path), "--runs", "3", "--format", "csv", "--out", str(out_path))
    assert len(out_path.read_text().strip().splitlines()) == 1 + 2 * 3


def test_synth_to_stdout(capsys):
    code, out, _ = run(capsys, "synth", "--seed", "1")
    assert code == 0
    assert out.splitlines()[0] == "time_s,truth_m,sonar_m,pressure_pa"


def test_casestudy_bad_log(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,truth_m,sonar_m,pressure_pa\n0,1,1,0\n")
    code, _, err = run(capsys, "casestudy", str(bad))
    assert code == 2 and "bad.csv:2" in err
    code, _, err = run(capsys, "casestudy", str(tmp_path / "missing.csv"))
    assert code == 2


def test_casestudy_bad_splits(capsys, tmp_path):
    log_path = tmp_path / "log.csv"
    sn.synthesize_log(sn.SynthConfig(duration_s=60)).write_csv(log_path)
    code, _, _ = run(capsys, "casestudy", str(log_path), "--splits", "0.5,0.5,0.5")
    assert code == 2


def test_analyze_log_and_values(capsys, tmp_path):
    log_path = tmp_path / "log.csv"
    sn.synthesize_log(sn.SynthConfig(duration_s=60)).write_csv(log_path)
    hist = tmp_path / "hist.csv"
    code, out, _ = run(capsys, "analyze", str(log_path), "--reps", "300", "--hist-out", str(hist))
    assert code == 0
    r = json.loads(out)["result"]
    assert r["n"] == 1200 and 0 <= r["p_value"] <= 1
    assert hist.read_text().splitlines()[0] == "bin_lo,bin_hi,count"
    values = tmp_path / "v.txt"
    values.write_text("value\n" + "\n".join(str(i % 7) for i in range(100)) + "\n")
    code, out, _ = run(capsys, "analyze", str(values), "--reps", "200", "--format", "text")
    assert code == 0 and "chi_square" in out


def test_analyze_malformed(capsys, tmp_path):
    values = tmp_path / "v.txt"
    values.write_text("1\n2\nthree\n")
    assert run(capsys, "analyze", str(values))[0] == 2
    values.write_text("1\n2\n3\n")
    assert run(capsys, "analyze", str(values))[0] == 2


def test_deterministic_json(capsys, tmp_path):
    log_path = tmp_path / "log.csv"
    sn.synthesize_log(sn.SynthConfig(duration_s=90)).write_csv(log_path)
    a = run(capsys, "casestudy", str(log_path), "--runs", "3", "--seed", "9")[1]
    b = run(capsys, "casestudy", str(log_path), "--runs", "3", "--seed", "9")[1]
    assert a == b
