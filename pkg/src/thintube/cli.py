"""Command line entry point: ``sweep``, ``oracle`` and ``verify``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .acceptance import Suite
from .config import Config, config_from_mapping, load_config, parse_geometry_flag
from .errors import ThinTubeError
from .geometry import Circle, Segment, Sphere
from .harness import run_sweep
from .oracles import merged_shell_spectrum, rectangle_spectrum
from .report import emit_report

log = logging.getLogger("thintube")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _csv_list(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def _apply_overrides(cfg: Config, args) -> Config:
    values = {}
    if getattr(args, "geometry", None):
        values.update(parse_geometry_flag(args.geometry))
    if getattr(args, "eps", None):
        values["sweep.eps"] = args.eps
    if getattr(args, "case", None):
        values["sweep.cases"] = args.case
    if getattr(args, "format", None):
        values["output.formats"] = args.format
    if getattr(args, "out", None):
        values["output.dir"] = args.out
    if getattr(args, "n_max", None) is not None:
        values["sweep.n_max"] = str(args.n_max)
    if getattr(args, "seed", None) is not None:
        values["solver.seed"] = str(args.seed)
    cfg = config_from_mapping(values, cfg) if values else cfg
    if getattr(args, "workers", None) is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _load(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    return _apply_overrides(cfg, args).validate()


def cmd_sweep(args) -> int:
    cfg = _load(args)
    report = run_sweep(cfg)
    paths = emit_report(report, cfg.formats, cfg.out_dir)
    for fmt, path in paths.items():
        print(f"{fmt}: {path}")
    failures = sorted({r.error for r in report.records if r.error})
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_FAILED if failures else EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _apply_overrides(Config(), args)
    geom = cfg.geometry()
    k = args.k
    for eps in cfg.eps_list:
        if isinstance(geom, Segment):
            spec = rectangle_spectrum(geom.length, eps, args.conditions, k)
        elif isinstance(geom, (Circle, Sphere)):
            spec = merged_shell_spectrum(geom.dim, geom.radius, geom.orientation, eps, k,
                                         args.conditions, mode_max=args.mode_max)
        else:
            print(f"no oracle for geometry {geom.ident()}", file=sys.stderr)
            return EXIT_USAGE
        for n, (val, acc) in enumerate(zip(spec.eigenvalues, spec.accuracy), start=1):
            print(f"eps={eps:.17g} n={n} lambda={val:.17g} accuracy={acc:.3g} source={spec.source}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args)
    suite = Suite(workers=cfg.resolved_workers())
    only = {int(x) for x in _csv_list(args.only)} if args.only else None
    results = suite.run(only)
    for res in results:
        print(res.line(), flush=True)
    report = run_sweep(cfg)
    paths = emit_report(report, ("csv",), cfg.out_dir, stem="verify")
    print(f"csv: {paths['csv']}")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return EXIT_FAILED if failed or report.failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thintube", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="ini-style file with dotted keys")
        p.add_argument("--geometry", help="e.g. circle,radius=1,orientation=inward")
        p.add_argument("--eps", help="comma-separated decreasing eps values")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel solves (default: $THINTUBE_WORKERS or 1)")
        p.add_argument("--seed", help="solver seed (int, hex allowed)")

    sw = sub.add_parser("sweep", help="run an eps sweep and write reports")
    common(sw)
    sw.add_argument("--case", help="comma-separated subset of dn,dirichlet,neumann,effective")
    sw.add_argument("--format", help="comma-separated subset of csv,json,plot")
    sw.add_argument("--n-max", type=int, dest="n_max")
    sw.set_defaults(func=cmd_sweep)

    orc = sub.add_parser("oracle", help="reference spectra for segment, circle and sphere tubes")
    orc.add_argument("--geometry", required=True)
    orc.add_argument("--eps", required=True)
    orc.add_argument("--k", type=int, default=5)
    orc.add_argument("--conditions", default="DN", choices=("DN", "DD", "NN"))
    orc.add_argument("--mode-max", type=int, default=8, dest="mode_max")
    orc.set_defaults(func=cmd_oracle)

    ver = sub.add_parser("verify", help="run the acceptance suite; nonzero exit on failure")
    common(ver, config_required=True)
    ver.add_argument("--only", help="comma-separated criterion numbers")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except ThinTubeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
