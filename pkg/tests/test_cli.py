import csv
import json
import math

import pytest

from sdrt.cli import main, observed_orders, parse_angle, parse_h_list, UsageError


def test_parse_angle_forms():
    assert parse_angle("pi/8") == pytest.approx(math.pi / 8)
    assert parse_angle("3*pi/8") == pytest.approx(3 * math.pi / 8)
    assert parse_angle("0.25") == 0.25
    with pytest.raises(UsageError):
        parse_angle("tau")


def test_parse_h_list_requires_halvings():
    assert parse_h_list("0.1,0.05") == [0.1, 0.05]
    with pytest.raises(UsageError):
        parse_h_list("0.1,0.025")
    with pytest.raises(UsageError):
        parse_h_list("0.03")


def test_observed_orders():
    assert observed_orders([4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])
    assert observed_orders([1.0, 0.0]) == [None]


def test_verify_and_tamper(capsys):
    assert main(["verify"]) == 0
    assert "12/12" in capsys.readouterr().out
    assert main(["verify", "--tamper", "y:0,-1:1,2:7"]) == 1
    assert "L^y_(0, -1)[1,2]: hardcoded=7" in capsys.readouterr().out


def test_verify_json(tmp_path):
    assert main(["verify", "--format", "json", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert all(c["passed"] for c in report)


def test_appendix(capsys):
    assert main(["appendix"]) == 0
    assert "b = -1/6, c = 1/2, d = -1" in capsys.readouterr().out


def test_converge_writes_table(tmp_path):
    rc = main(["converge", "--phi", "pi/8", "--h", "0.1,0.05,0.025", "--out", str(tmp_path)])
    assert rc == 0
    rows = list(csv.DictReader(open(tmp_path / "convergence.csv")))
    assert [r["n_blocks"] for r in rows] == ["10", "20", "40"]
    assert abs(float(rows[-1]["order_max"]) - 2) < 0.3
    assert (tmp_path / "plot_convergence.py").exists()
    cfg = json.loads((tmp_path / "converge_config.json").read_text())
    assert cfg["h"] == [0.1, 0.05, 0.025] and cfg["cfl"] == 0.1


def test_converge_json_and_parallel(tmp_path):
    args = ["converge", "--omega", "1,0", "--degree", "0", "--h", "0.1,0.05", "--format", "json"]
    assert main(args + ["--jobs", "2", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "convergence.json").read_text())
    assert abs(rows[1]["order_max"] - 1) < 0.3


def test_converge_constant_profile(tmp_path):
    assert main(["converge", "--profile", "constant", "--h", "0.1,0.05", "--out", str(tmp_path)]) == 0


def test_usage_errors(tmp_path, capsys):
    assert main(["converge", "--h", "0.1,0.03", "--out", str(tmp_path)]) == 2
    assert main(["converge", "--omega=-1,0", "--out", str(tmp_path)]) == 2
    assert main(["converge", "--phi", "pi", "--out", str(tmp_path)]) == 2
    assert main(["longtime", "--tmax", "5", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as err:
        main(["converge", "--rk", "2"])
    assert err.value.code == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    rc = main(["converge", "--cfl", "0.9", "--h", "0.1,0.05", "--tmax", "200", "--out", str(tmp_path)])
    assert rc == 3
    assert "blow-up" in capsys.readouterr().err


def test_stability_coarse(tmp_path):
    rc = main(["stability", "--xi-step", "pi/10", "--phi-step", "pi/10", "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "stability_summary.json").read_text())
    assert summary["sample_count"] == 2400
    with open(tmp_path / "stability_samples.csv") as fh:
        assert fh.readline().strip() == "xi,phi_x,phi_y,min_re_lambda,cond"


def test_longtime_outputs(tmp_path, capsys):
    rc = main(["longtime", "--omega", "0.6,0.8", "--h", "0.1,0.05", "--tmax", "20",
               "--sample-every", "5", "--out", str(tmp_path)])
    assert rc in (0, 1)
    assert (tmp_path / "trace_n10.csv").exists() and (tmp_path / "trace_n20.csv").exists()
    rows = list(csv.DictReader(open(tmp_path / "longtime_ratios.csv")))
    assert [float(r["t"]) for r in rows] == [5.0, 10.0, 15.0, 20.0]
    assert "L2 ratio" in capsys.readouterr().out
