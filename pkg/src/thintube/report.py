"""CSV, JSON and plot-script output for sweep reports."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, fields
from pathlib import Path

from .errors import ThinTubeError
from .harness import SweepRecord, SweepReport

CSV_COLUMNS = ("case", "eps", "n", "lambda", "leading", "mu", "residual", "nu",
               "sandwich_ok", "orth_fraction", "err_lambda", "err_mu")
_FIELD_FOR = {"lambda": "lambda_n", "mu": "mu_n", "nu": "nu_n"}


class ReportError(ThinTubeError, OSError):
    """Writing or reading a report file failed."""


def _num(value) -> str:
    return format(float(value), ".17g")


def _csv_row(rec: SweepRecord) -> list:
    row = []
    for col in CSV_COLUMNS:
        value = getattr(rec, _FIELD_FOR.get(col, col))
        if col == "case":
            row.append(value)
        elif col == "n":
            row.append(str(int(value)))
        elif col == "sandwich_ok":
            row.append("true" if value else "false")
        else:
            row.append(_num(value))
    return row


def write_csv(report: SweepReport, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in report.records:
                writer.writerow(_csv_row(rec))
    except OSError as exc:
        raise ReportError(f"cannot write CSV {path}: {exc}") from exc
    return path


def read_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(value):
    """Replace non-finite floats by null (JSON has no NaN) and keep the rest."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def report_to_dict(report: SweepReport) -> dict:
    return _jsonable({
        "cases": list(report.cases),
        "records": [asdict(r) for r in report.records],
        "strong_coupling": report.strong_coupling,
        "provenance": report.provenance,
    })


def _restore(value):
    return float("nan") if value is None else value


def report_from_dict(data: dict) -> SweepReport:
    names = {f.name for f in fields(SweepRecord)}
    floats = {"eps", "lambda_n", "leading", "mu_n", "residual", "nu_n", "orth_fraction",
              "err_lambda", "err_mu", "err_nu"}
    records = []
    for raw in data.get("records", []):
        kwargs = {k: (float(_restore(v)) if k in floats else v) for k, v in raw.items() if k in names}
        records.append(SweepRecord(**kwargs))
    strong = {case: [{k: float(_restore(v)) for k, v in row.items()} for row in rows]
              for case, rows in data.get("strong_coupling", {}).items()}
    return SweepReport(records, tuple(data.get("cases", ())), strong, data.get("provenance", {}))


def write_json(report: SweepReport, path) -> Path:
    path = Path(path)
    try:
        # repr round-trips floats exactly
        path.write_text(json.dumps(report_to_dict(report), indent=1, allow_nan=False) + "\n")
    except OSError as exc:
        raise ReportError(f"cannot write JSON {path}: {exc}") from exc
    return path


def read_json(path) -> SweepReport:
    path = Path(path)
    try:
        return report_from_dict(json.loads(path.read_text()))
    except OSError as exc:
        raise ReportError(f"cannot read JSON {path}: {exc}") from exc


_PLOT_TEMPLATE = '''"""Residual and strong-coupling plots for a thin-tube sweep (generated)."""
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RECORDS = {records}
STRONG = {strong}

fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.5))
for case in sorted({{r["case"] for r in RECORDS}}):
    for n in sorted({{r["n"] for r in RECORDS if r["case"] == case}}):
        rows = [r for r in RECORDS if r["case"] == case and r["n"] == n
                and r["residual"] is not None and math.isfinite(r["residual"])]
        if rows:
            left.plot([1.0 / r["eps"] for r in rows], [r["residual"] for r in rows],
                      marker="o", label=f"{{case}} n={{n}}")
left.set_xlabel("1/eps")
left.set_ylabel("lambda_n - leading - mu_n")
left.set_title("residual versus 1/eps")
left.legend(fontsize="small")
for case, rows in STRONG.items():
    eps = [r["eps"] for r in rows]
    right.plot(eps, [r["eps_mu1"] for r in rows], marker="o", label=f"{{case}}: eps mu_1")
    if rows:
        right.axhline(rows[0]["inf_kappa"], linestyle="--", color="gray", label="inf kappa")
right.set_xscale("log")
right.set_xlabel("eps")
right.set_title("eps mu_1 versus inf kappa")
right.legend(fontsize="small")
fig.tight_layout()
fig.savefig("{png}", dpi=120)
print("wrote {png}")
'''


def write_plot_script(report: SweepReport, path) -> Path:
    path = Path(path)
    data = report_to_dict(report)
    records = [{"case": r["case"], "eps": r["eps"], "n": r["n"], "residual": r["residual"]}
               for r in data["records"]]
    script = _PLOT_TEMPLATE.format(records=repr(records), strong=repr(data["strong_coupling"]),
                                   png=path.with_suffix(".png").name)
    try:
        path.write_text(script)
    except OSError as exc:
        raise ReportError(f"cannot write plot script {path}: {exc}") from exc
    return path


def emit_report(report: SweepReport, formats, out_dir, stem: str = "sweep") -> dict:
    """Write the requested formats into ``out_dir``; returns ``{format: path}``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create output directory {out}: {exc}") from exc
    writers = {"csv": (write_csv, ".csv"), "json": (write_json, ".json"),
               "plot": (write_plot_script, "_plot.py")}
    paths = {}
    for fmt in formats:
        if fmt not in writers:
            raise ReportError(f"unknown report format {fmt!r}")
        writer, suffix = writers[fmt]
        paths[fmt] = writer(report, out / f"{stem}{suffix}")
    return paths
