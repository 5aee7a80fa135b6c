import csv
import hashlib
import io
import subprocess
import sys

import pytest

from irsnet import cli

SMALL_CFG = """\
irs_count = 200
radius_m = 300
elements = 8
sinr_grid_db = -10 0 10
"""


def _cfg(tmp_path, text=SMALL_CFG, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _read(path):
    text = open(path, encoding="utf-8").read()
    lines = text.splitlines()
    meta = dict(l[2:].split(": ", 1) for l in lines if l.startswith("# "))
    rows = list(csv.reader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    return text, meta, rows[0], rows[1:]


def test_analytic_csv_schema_and_hash(tmp_path):
    out = tmp_path / "a.csv"
    assert cli.run(["--config", _cfg(tmp_path), "--out", str(out)]) == cli.EXIT_OK
    text, meta, header, rows = _read(out)
    assert header == ["A", "C_ID", "C_D", "C", "R_ID", "R_D", "R", "EE_ID", "EE_D", "EE", "p_ID", "p_D"]
    assert len(rows) == 1
    for k in ("scenario_hash", "seed", "irsnet", "numpy", "scipy", "python", "generated"):
        assert k in meta
    lines = text.splitlines(True)
    assert lines[1].startswith("# generated:")
    assert hashlib.sha256("".join(lines[2:]).encode()).hexdigest() == meta["content_sha256"]


def test_identical_runs_are_byte_identical(tmp_path):
    cfg = _cfg(tmp_path)
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.csv"
        assert cli.run(["--config", cfg, "--out", str(out)]) == 0
        outs.append(cli.strip_timestamp(out.read_text()))
    assert outs[0] == outs[1]


def test_sweep_one_row_per_axis_value(tmp_path):
    out = tmp_path / "sw.csv"
    assert cli.run(["--command", "sweep", "--axis", "N=10:10:150", "--out", str(out)]) == 0
    _, meta, header, rows = _read(out)
    assert header[0] == "N" and "R_ID" in header and "R_D" in header
    assert [int(r[0]) for r in rows] == list(range(10, 151, 10))
    assert meta["axis"] == "N=10:10:150"


def test_sweep_file_key_axis_converts_units(tmp_path):
    out = tmp_path / "sw.csv"
    args = ["--config", _cfg(tmp_path), "--command", "sweep", "--axis", "sinr_threshold_db=-10:10:0",
            "--out", str(out)]
    assert cli.run(args) == 0
    _, _, header, rows = _read(out)
    assert header[0] == "sinr_threshold_db" and len(rows) == 2
    assert float(rows[0][2]) >= float(rows[1][2])          # C_ID falls with the threshold


@pytest.mark.parametrize("axis", ["N", "N=1:2", "N=a:1:3", "N=10:-1:20", "bogus=1:1:2",
                                  "mix_source=1:1:2"])
def test_parse_axis_errors(axis):
    with pytest.raises(cli.UsageError):
        cli.parse_axis(axis)


def test_parse_axis_values():
    name, field, raw, vals = cli.parse_axis("elements=10:20:50")
    assert (name, field, vals) == ("elements", "N", [10, 30, 50])
    _, field, _, vals = cli.parse_axis("sinr_threshold_db=-10:10:0")
    assert field == "tau" and vals == pytest.approx([0.1, 1.0])


def test_malformed_heights_exit_2(tmp_path, capsys):
    cfg = _cfg(tmp_path, "height_irs_m = 30\nheight_bs_m = 20\n")
    assert cli.run(["--config", cfg]) == cli.EXIT_USAGE
    assert "heights" in capsys.readouterr().err


def test_unknown_key_reports_line(tmp_path, capsys):
    cfg = _cfg(tmp_path, "elements = 8\nwhat = 1\n")
    assert cli.run(["--config", cfg]) == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "line 2" in err and "'what'" in err


def test_usage_errors(tmp_path, monkeypatch):
    assert cli.run(["--command", "sweep"]) == cli.EXIT_USAGE
    assert cli.run(["--command", "figure"]) == cli.EXIT_USAGE
    assert cli.run(["--command", "simulate", "--trials", "0"]) == cli.EXIT_USAGE
    assert cli.run(["--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_RUNTIME
    monkeypatch.setenv("IRSNET_THREADS", "x")
    assert cli.run([]) == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.run(["--command", "figure", "--figure", "fig99"])
    assert exc.value.code == 2


def test_simulate_batch_reuse_and_threads(tmp_path, monkeypatch):
    cfg = _cfg(tmp_path)
    b = tmp_path / "b.bin"
    o1, o2, o3 = (tmp_path / f"{k}.csv" for k in "123")
    monkeypatch.setenv("IRSNET_THREADS", "1")
    assert cli.run(["--config", cfg, "--command", "simulate", "--trials", "600", "--seed", "5",
                    "--save-batch", str(b), "--out", str(o1)]) == 0
    monkeypatch.setenv("IRSNET_THREADS", "2")
    assert cli.run(["--config", cfg, "--command", "simulate", "--trials", "600", "--seed", "5",
                    "--out", str(o2)]) == 0
    assert cli.run(["--config", cfg, "--command", "simulate", "--seed", "5", "--batch", str(b),
                    "--out", str(o3)]) == 0
    t1, t2, t3 = (cli.strip_timestamp(o.read_text()) for o in (o1, o2, o3))
    assert t1 == t2 == t3
    _, meta, header, rows = _read(o1)
    assert header[:2] == ["tau_dB", "C_ID_empirical"] and len(rows) == 3
    assert meta["trials"] == "600"
    other = _cfg(tmp_path, SMALL_CFG + "elements = 9\n", "other.cfg")
    assert cli.run(["--config", other, "--command", "simulate", "--batch", str(b)]) == cli.EXIT_USAGE


def test_validate_reports_and_flags_failures(tmp_path, capsys):
    out = tmp_path / "v.csv"
    code = cli.run(["--config", _cfg(tmp_path), "--command", "validate", "--trials", "300",
                    "--out", str(out)])
    assert code in (cli.EXIT_OK, cli.EXIT_TOLERANCE)
    _, meta, header, rows = _read(out)
    assert header == ["check", "x", "analytic", "empirical", "stderr", "gap", "tol", "passed"]
    checks = {r[0] for r in rows}
    assert {"lt_I_B", "lt_I_B_hat", "lt_S_R0", "lt_I_R", "coverage_ID", "coverage_D"} == checks
    err = capsys.readouterr().err
    assert err.count("PASS") + err.count("FAIL") == 6
    assert (meta["passed"] == "1") == (code == cli.EXIT_OK)


@pytest.mark.xfail(reason="the Gaussian IRS-interference transform misses the simulated one by "
                          "about 0.3 at the default scenario, so validate exits 3", strict=False)
def test_default_validate_exits_zero(tmp_path):
    assert cli.run(["--command", "validate", "--trials", "1000", "--out", str(tmp_path / "v.csv")]) == 0


def test_figure_command(tmp_path):
    out = tmp_path / "f.csv"
    assert cli.run(["--config", _cfg(tmp_path), "--command", "figure", "--figure", "fig6",
                    "--trials", "200", "--out", str(out)]) == 0
    _, meta, header, rows = _read(out)
    assert meta["figure"] == "fig6" and header[0] == "s" and len(rows) == 25


def test_render_csv_rejects_ragged_rows():
    with pytest.raises(ValueError):
        cli.render_csv(["a", "b"], [[1]], {})


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "irsnet", "--config", _cfg(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("# content_sha256: ")
