import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from qbtangle.cli import main, read_config, sweep_rows
from qbtangle.errors import ConfigError
from qbtangle.propagator import StateClass


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float) if len(rows) > 1 else None


def test_trajectory_csv_format(capsys):
    code, out, _ = run(["trajectory", "--class", "b2", "--omega-sq", "6", "--k", "1", "--optimal", "--steps", "5"], capsys)
    assert code == 0
    assert "\r" not in out and out.endswith("\n")
    lines = out.splitlines()
    assert lines[0] == "tau,tau13,tau123"
    assert len(lines) == 6
    assert not any(line.endswith(",") for line in lines)
    # 17 significant digits round-trip every value
    tau = float(lines[2].split(",")[0])
    assert lines[2].split(",")[0] == f"{tau:.17g}"
    assert tau == 2 * (math.pi / 2) / 4


def test_trajectory_ghz_law_with_seconds(capsys):
    code, out, _ = run(
        ["trajectory", "--class", "ghz", "--omega-sq", "14", "--k", "1.59", "--optimal", "--j12-hz", "46"], capsys
    )
    assert code == 0
    head, data = table(out)
    assert head == ["tau", "tau13", "tau123", "t_seconds"]
    tau_star = math.sqrt(2) * math.pi / (4 * 2.59)
    assert data[-1, 0] == pytest.approx(2 * tau_star, rel=1e-15)
    np.testing.assert_allclose(data[:, 1], np.sin(math.sqrt(2) * 2.59 * data[:, 0]) ** 4, atol=1e-12)
    np.testing.assert_array_equal(data[:, 3], data[:, 0] / 46)


@pytest.mark.parametrize("mode", ["chain", "oracle"])
def test_trajectory_modes_agree_with_closed(mode, capsys):
    base = ["trajectory", "--class", "w", "--omega-sq", "5", "--k", "0.4", "--phi", "1", "--omega-big", "-1", "--tau-max", "1.5", "--steps", "7"]
    _, closed = table(run(base, capsys)[1])
    code, out, _ = run(base + ["--mode", mode], capsys)
    assert code == 0
    np.testing.assert_allclose(table(out)[1], closed, atol=1e-8 if mode == "oracle" else 1e-12)


def test_trajectory_is_bit_identical(capsys, tmp_path):
    argv = ["trajectory", "--class", "b2", "--omega-sq", "6", "--k", "1.59", "--optimal"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(["--out", str(b)] + argv) == 0
    assert a.read_bytes() == b.read_bytes()


def test_trajectory_plot(tmp_path, capsys):
    png = tmp_path / "fig.png"
    code, _, _ = run(["trajectory", "--class", "ghz", "--omega-sq", "14", "--k", "1", "--optimal", "--plot", str(png)], capsys)
    assert code == 0 and png.stat().st_size > 1000


def test_optimal_ghz(capsys):
    code, out, _ = run(["optimal", "--class", "ghz", "--omega-sq", "14", "--k", "1"], capsys)
    assert code == 0
    rec = dict(line.split("=", 1) for line in out.splitlines())
    assert rec["tau_star"].startswith("0.55536")
    assert float(rec["B0"]) == 2.0
    assert rec["Bz"].startswith("2.82842")
    assert rec["branch"] == "GHZ" and rec["diagnostics"] == "none"


def test_optimal_b2_branch2(capsys):
    code, out, _ = run(["optimal", "--class", "b2", "--omega-sq", "6", "--k", "1.59"], capsys)
    rec = dict(line.split("=", 1) for line in out.splitlines())
    assert code == 0 and rec["branch"] == "Branch2" and rec["tau_star"].startswith("1.8707")


def test_optimal_branch1_negative_bz(capsys):
    code, out, err = run(["optimal", "--class", "b2", "--omega-sq", "6", "--k", "2"], capsys)
    assert code == 2
    assert "branch=Branch1" in out and "diagnostics=NegativeBzSquared" in out
    assert "NegativeBzSquared" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["trajectory", "--class", "b2", "--omega-sq", "2", "--k", "2", "--tau-max", "1"],
        ["optimal", "--class", "b2", "--omega-sq", "6", "--k", "3"],
        ["optimal", "--class", "s", "--omega-sq", "6", "--k", "1"],
        ["trajectory", "--class", "ghz", "--omega-sq", "3", "--k", "1", "--optimal"],
    ],
)
def test_domain_errors_exit_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["trajectory", "--class", "b2"],
        ["trajectory", "--class", "xx", "--omega-sq", "6", "--k", "1"],
        ["trajectory", "--class", "b2", "--omega-sq", "6", "--k", "1"],
        ["trajectory", "--class", "b2", "--omega-sq", "6", "--k", "1", "--optimal", "--phi", "1"],
        ["trajectory", "--class", "b2", "--omega-sq", "6", "--k", "1", "--optimal", "--steps", "1"],
        ["trajectory", "--class", "b2", "--omega-sq", "6", "--k", "1", "--tau-max", "-1"],
        ["sweep", "--class", "ghz", "--omega-sq", "14", "--k-min", "1", "--k-max", "0", "--k-steps", "3"],
        ["trajectory", "--config", "/nonexistent/file.cfg"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# figure 3\nclass = ghz\nomega-sq=14\nk=1\noptimal=yes\nsteps=11  # coarse\n", encoding="utf-8")
    code, out, _ = run(["trajectory", "--config", str(cfg)], capsys)
    assert code == 0 and len(out.splitlines()) == 12
    code, out, _ = run(["--config", str(cfg), "trajectory", "--steps", "3", "--k", "1.59"], capsys)
    _, data = table(out)
    assert code == 0 and len(data) == 3
    assert data[-1, 0] == pytest.approx(2 * math.sqrt(2) * math.pi / (4 * 2.59))


@pytest.mark.parametrize(
    "text,match",
    [("k 1\n", "run.cfg:1"), ("\nsteps=abc\n", "run.cfg:2"), ("colour=red\n", "unknown key"), ("mode=fast\n", "run.cfg:1")],
)
def test_config_errors_name_the_line(tmp_path, text, match):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match=match):
        read_config(cfg)
    assert main(["trajectory", "--config", str(cfg)]) == 1


def test_sweep_ghz_monotone_with_exact_endpoints(capsys):
    code, out, _ = run(["sweep", "--class", "ghz", "--omega-sq", "14", "--k-min", "-2.9", "--k-max", "1.9", "--k-steps", "25"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "K,branch,tau_star,B0,Bz,Omega,valid"
    rows = [line.split(",") for line in lines[1:]]
    assert rows[0][0] == "-2.8999999999999999" and float(rows[0][0]) == -2.9
    assert float(rows[-1][0]) == 1.9
    ts = [float(r[2]) for r in rows]
    # strictly decreasing only where 1 + K > 0
    right = [t for r, t in zip(rows, ts) if float(r[0]) > -1]
    assert all(a > b for a, b in zip(right, right[1:]))
    assert all(r[6] == "1" for r in rows if abs(float(r[0]) + 1) > 1e-9)


def test_sweep_b2_rows():
    rows = sweep_rows(StateClass.B2, 6.0, -3.0, 3.0, 61)
    for k, branch, tau_star, b0, bz, om, valid in rows:
        if branch == "Branch2":
            assert valid and b0**2 + bz**2 == pytest.approx(6 - 1 - k * k, abs=1e-12)
        if k == 2.0:
            assert branch == "Branch1" and not valid
            assert tau_star == pytest.approx(math.sqrt(3) * math.pi / 4)
        if abs(k) > math.sqrt(5):
            assert branch == "OutOfRange" and not valid


def test_verify_malformed_scenarios(tmp_path, capsys):
    bad = tmp_path / "sc.txt"
    bad.write_text("class=b2 omega_sq=6\n", encoding="utf-8")
    code, _, err = run(["verify", "--scenarios", str(bad)], capsys)
    assert code == 1 and f"{bad}:1" in err


def test_verify_custom_scenarios_without_search(tmp_path, capsys):
    sc = tmp_path / "sc.txt"
    sc.write_text("name=g class=ghz omega_sq=14 k=1\n", encoding="utf-8")
    out = tmp_path / "report.txt"
    fig = tmp_path / "figs"
    code, _, _ = run(["verify", "--scenarios", str(sc), "--no-search", "--out", str(out), "--fig-dir", str(fig)], capsys)
    assert code == 0
    text = out.read_text(encoding="utf-8")
    assert "[scenario.g]" in text and "check.conservation=PASS" in text
    assert (fig / "g.png").exists()


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "qbtangle.cli", "optimal", "--class", "ghz", "--omega-sq", "14", "--k", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "branch=GHZ" in proc.stdout
