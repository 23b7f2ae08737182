import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from chrw import cli
from chrw.cli import UsageError, main, parse_config, parse_grid
from chrw.errors import DimensionOverflow, NoConvergence


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_fig4_dynamics():
    cfg = parse_config("dynamics --method chrw --omega0 1.436881 --a1 0.5 --r 1 --delta 0.2 "
                       "--tmax 600 --points 4000".split())
    assert cfg.command == "dynamics"
    assert cfg.methods == ("chrw",)
    assert cfg.tmax == 600 and cfg.points == 4000
    p = cfg.params(cfg.omega0.start)
    assert p.omega0 == 1.436881
    assert abs(p.omega2 - 1.2) < 1e-15


def test_ratio_derives_second_amplitude():
    cfg = parse_config("dynamics --omega0 1 --a1 0.5 --r 1".split())
    assert cfg.params(1.0).A2 == 0.5
    cfg = parse_config("dynamics --omega0 1 --a1 0.5 --r 0.5".split())
    assert cfg.params(1.0).A2 == 0.25


@pytest.mark.parametrize("argv", [
    "dynamics --a1 0.5",
    "dynamics --omega0 1",
    "dynamics --omega0 1 --a1 0.5 --method magic",
    "dynamics --omega0 0.5:1.5:3 --a1 0.5",
    "dscan --omega0 0.5:1.5:3 --a1 0.5 --method gft",
    "pbar-scan --omega0 0.5:1.5:3 --a1 0.5 --method rk",
    "resonance --omega0 1.2 --a1 0.5",
    "bandmap --omega0 0.5:1.5:3 --a1 0:1:3 --method chrw,gft",
    "pbar-scan --omega0 1.5:0.5:3 --a1 0.5",
    "pbar-scan --omega0 a:b --a1 0.5",
    "dynamics --omega0 1 --a1 -0.5",
    "dynamics --omega0 1 --a1 0.5 --tmax -1",
    "explode --omega0 1 --a1 0.5",
    "dynamics --omega0 1 --a1 0.5 --bogus 3",
])
def test_usage_errors(argv, capsys):
    assert main(argv.split()) == 2
    err = capsys.readouterr().err
    assert err.strip() and "\n" not in err.strip()


def test_grid_syntax():
    assert parse_grid("1.5", "x").count == 1
    g = parse_grid("0.2:2.0:181", "x")
    assert g.values()[0] == 0.2 and g.values()[-1] == 2.0 and g.values().size == 181
    assert parse_grid("0.2:2.0", "x", 181).count == 181
    with pytest.raises(UsageError):
        parse_grid("1:2:0", "x")
    with pytest.raises(UsageError):
        parse_grid("1:2:3:4", "x")


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# Fig. 2 settings\nomega0 = 0.2:2.0:181\na1 = 0.5\nr = 0.5\nmethod = chrw,gft\n")
    cfg = parse_config(["pbar-scan", "--config", str(conf), "--r", "1"])
    assert cfg.r == 1.0
    assert cfg.methods == ("chrw", "gft")
    assert cfg.omega0.count == 181
    bad = tmp_path / "bad.conf"
    bad.write_text("omega0 = 1\ncolour = blue\n")
    with pytest.raises(UsageError):
        parse_config(["dynamics", "--config", str(bad), "--a1", "0.5"])


def test_worker_count(monkeypatch):
    monkeypatch.setenv("CHRW_WORKERS", "3")
    assert parse_config("dynamics --omega0 1 --a1 0.5".split()).workers == 3
    assert parse_config("dynamics --omega0 1 --a1 0.5 --workers 2".split()).workers == 2
    monkeypatch.setenv("CHRW_WORKERS", "many")
    with pytest.raises(UsageError):
        parse_config("dynamics --omega0 1 --a1 0.5".split())


def test_dynamics_output(tmp_path):
    out = tmp_path / "dyn.csv"
    assert main(f"dynamics --omega0 1.436881 --a1 0.5 --tmax 60 --points 61 -o {out}".split()) == 0
    rows = read_csv(out)
    assert rows[0] == ["t_omega1", "P"]
    assert len(rows) == 62
    assert float(rows[1][1]) < 1e-14
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["config"]["a1"]["start"] == 0.5
    assert meta["version"] and meta["wall_seconds"] >= 0
    assert meta["results"]["chrw"]["truncation"] >= 1


def test_pbar_scan_three_methods(tmp_path):
    out = tmp_path / "scan.csv"
    argv = f"pbar-scan --method chrw,gft,rwa --omega0 0.8:1.4:4 --a1 0.5 --truncation 6 --workers 1 -o {out}"
    assert main(argv.split()) == 0
    rows = read_csv(out)
    assert rows[0] == ["omega0", "pbar_chrw", "pbar_gft", "pbar_rwa", "status"]
    assert [r[-1] for r in rows[1:]] == ["ok"] * 4
    assert all(0 <= float(x) <= 0.5 for r in rows[1:] for x in r[1:4])


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = "dscan --omega0 1.1:1.5:9 --a1 0.5 --method chrw,rwa --workers 1"
    assert main(f"{base} -o {a}".split()) == 0
    assert main(f"{base} -o {b}".split()) == 0
    assert a.read_bytes() == b.read_bytes()
    assert read_csv(a)[0] == ["omega0", "d_chrw", "d_rwa", "status"]


def test_resonance_command(tmp_path):
    out = tmp_path / "res.csv"
    assert main(f"resonance --omega0 1.1:1.5 --a1 0.5 --workers 1 -o {out}".split()) == 0
    rows = read_csv(out)
    assert rows[0] == ["omega0_star", "a1", "method", "bracket_width", "d", "status"]
    found = sorted(float(r[0]) for r in rows[1:])
    np.testing.assert_allclose(found, [1.179967, 1.436881], atol=2e-4)


def test_bandmap_command(tmp_path):
    out = tmp_path / "map.csv"
    assert main(f"bandmap --omega0 0.8:1.4:3 --a1 0.1:0.3:2 --workers 1 -o {out}".split()) == 0
    rows = read_csv(out)
    assert rows[0] == ["omega0", "a1", "pbar", "status"]
    assert [(r[0], r[1]) for r in rows[1:4]] == [("0.8", "0.1"), ("1.1", "0.1"), ("1.4", "0.1")]
    assert len(rows) == 7


def test_benchmark_small(tmp_path):
    out = tmp_path / "bench.csv"
    argv = f"benchmark --omega0 1 --a1 0.2 --delta 0.005 --tmax 100 --points 101 --gft-cap 400 -o {out}"
    assert main(argv.split()) == 0
    rows = read_csv(out)
    assert rows[0] == ["method", "truncation", "dimension", "seconds", "max_dev_vs_rk", "status"]
    assert rows[1][0] == "chrw"
    assert {r[0] for r in rows[2:]} == {"gft"}
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["results"]["speedup"] > 0


def test_solver_failure_exit_code(tmp_path):
    # the grid is still written, with the failure recorded per row
    out = tmp_path / "fail.csv"
    code = main(f"pbar-scan --omega0 0.5:1.5:3 --a1 0.5 --truncation 0 --workers 1 -o {out}".split())
    assert code == 4
    assert [r[-1] for r in read_csv(out)[1:]] == ["TruncationTooSmall"] * 3


def test_io_error_exit_code(tmp_path):
    out = tmp_path / "missing" / "x.csv"
    assert main(f"dynamics --omega0 1 --a1 0.5 --tmax 10 --points 11 -o {out}".split()) == 5


def test_exit_code_mapping():
    assert cli._exit_code([]) == 0
    assert cli._exit_code([NoConvergence("x")]) == 3
    assert cli._exit_code([DimensionOverflow("x")]) == 4
    assert cli._exit_code(["DimensionOverflow"]) == 4


def test_console_entry_point(tmp_path):
    out = tmp_path / "d.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "chrw.cli", "dynamics", "--omega0", "1", "--a1", "0.5",
         "--tmax", "10", "--points", "11", "-o", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
