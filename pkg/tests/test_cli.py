import csv

from thintube.cli import main


def test_sweep_writes_requested_formats(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("geometry.kind = circle\ngeometry.radius = 1\nsweep.n_max = 2\n")
    code = main(["sweep", "--config", str(cfg), "--eps", "0.2,0.1", "--case", "dn,neumann",
                 "--out", str(tmp_path / "out"), "--format", "csv,json", "--workers", "2"])
    assert code == 0
    with (tmp_path / "out" / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 2 * 2
    assert (tmp_path / "out" / "sweep.json").exists()


def test_geometry_flag_overrides_file(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("geometry.kind = circle\ngeometry.radius = 1\n")
    code = main(["sweep", "--config", str(cfg), "--geometry", "segment,length=2", "--eps", "0.1",
                 "--out", str(tmp_path), "--format", "csv", "--n-max", "1"])
    assert code == 0
    assert "0.1" in (tmp_path / "sweep.csv").read_text()


def test_invalid_config_exits_with_usage_code(tmp_path, capsys):
    code = main(["sweep", "--geometry", "circle,radius=1,orientation=inward", "--eps", "2.0",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "admissible" in capsys.readouterr().err


def test_oracle_command(capsys):
    assert main(["oracle", "--geometry", "circle,radius=1", "--eps", "0.1", "--k", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and "radial-ODE" in lines[0]
    assert main(["oracle", "--geometry", "ellipse,a=1,b=0.5", "--eps", "0.1"]) == 2


def test_verify_subset(tmp_path, capsys):
    cfg = tmp_path / "v.ini"
    cfg.write_text(f"sweep.eps = 0.2, 0.1\nsweep.n_max = 1\noutput.dir = {tmp_path}\n")
    code = main(["verify", "--config", str(cfg), "--only", "10"])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] 10" in out
    assert (tmp_path / "verify.csv").exists()
