import csv
import math
import subprocess
import sys
from dataclasses import asdict, replace

import pytest

from thintube.config import Config
from thintube.harness import SweepReport, run_sweep
from thintube.report import (CSV_COLUMNS, ReportError, emit_report, read_json, write_csv,
                             write_json)


@pytest.fixture(scope="module")
def report():
    cfg = replace(Config(), eps_list=(0.2, 0.1), n_max=3)
    return run_sweep(cfg)


def test_empty_report_is_header_only(tmp_path):
    path = write_csv(SweepReport([], ("dn",)), tmp_path / "empty.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_cardinality_and_columns(report, tmp_path):
    path = write_csv(report, tmp_path / "r.csv")
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 6
    # 17 significant digits round-trip exactly
    assert float(rows[1][3]) == report.records[0].lambda_n


def test_json_round_trip_is_bit_exact(report, tmp_path):
    back = read_json(write_json(report, tmp_path / "r.json"))
    for a, b in zip(report.records, back.records):
        for key, value in asdict(a).items():
            other = getattr(b, key)
            if isinstance(value, float) and math.isnan(value):
                assert math.isnan(other)
            else:
                assert value == other
    assert back.strong_coupling == report.strong_coupling


def test_plot_script_runs(report, tmp_path):
    paths = emit_report(report, ("plot",), tmp_path)
    pytest.importorskip("matplotlib")
    out = subprocess.run([sys.executable, paths["plot"].name], cwd=tmp_path,
                         capture_output=True, text=True, timeout=120)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "sweep_plot.png").exists()


def test_io_errors_carry_the_path(report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError, match="file"):
        emit_report(report, ("csv",), blocker / "sub")
