"""Epsilon sweeps comparing tube spectra against the reduced operators.

For every case, eps and eigenvalue index ``n`` a :class:`SweepRecord` holds the
tube eigenvalue, the leading transverse term, the second-term eigenvalue and
their residual ``lambda_n - leading - mu_n``, together with the bare
Laplace-Beltrami eigenvalue ``nu_n`` used by the sandwich check.

Cases:

``dn``        Dirichlet on the base, Neumann on the parallel surface; leading
              term ``(pi/2eps)^2``, second term from ``-Delta_g + kappa/eps``.
``dirichlet`` Dirichlet on both; leading ``(pi/eps)^2``, second term from
              ``-Delta_g + V_eff``.
``neumann``   Neumann everywhere; leading 0, second term from the Neumann
              Laplace-Beltrami operator.
``effective`` only the reduced operator ``-Delta_g + kappa/eps`` (no tube solve).
"""
from __future__ import annotations

import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__
from .assembly import (Resolution, assemble_effective_dirichlet, assemble_effective_dn,
                       assemble_surface, assemble_tube)
from .config import Config
from .convergence import converged_eigenvalues, exact_pair_values
from .errors import DomainError, ThinTubeError
from .geometry import Geometry, Sphere, SurfaceOfRevolution, kappa_extrema
from .transverse import transverse_project

log = logging.getLogger(__name__)

TUBE_PATTERN = {"dn": "DN", "dirichlet": "DD", "neumann": "NN"}


def leading_term(case: str, eps: float) -> float:
    if case == "dn":
        return (math.pi / (2.0 * eps)) ** 2
    if case == "dirichlet":
        return (math.pi / eps) ** 2
    return 0.0


@dataclass
class SweepRecord:
    case: str
    eps: float
    n: int
    lambda_n: float
    leading: float
    mu_n: float
    residual: float
    nu_n: float
    sandwich_ok: bool
    orth_fraction: float
    err_lambda: float
    err_mu: float
    err_nu: float = 0.0
    error: str = ""


@dataclass
class SweepReport:
    records: list
    cases: tuple
    strong_coupling: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def select(self, case: str, n: int | None = None) -> list:
        return [r for r in self.records if r.case == case and (n is None or r.n == n)]

    def series(self, case: str, n: int, name: str) -> np.ndarray:
        """Values of one record field along the eps list."""
        return np.array([getattr(r, name) for r in self.select(case, n)], dtype=float)

    def eps_list(self, case: str) -> list:
        return sorted({r.eps for r in self.select(case)}, reverse=True)

    @property
    def failed(self) -> bool:
        return any(r.error for r in self.records)


# ---------------------------------------------------------------------------
# per-block work


def block_modes(geom: Geometry, mode_max: int) -> list:
    if isinstance(geom, (Sphere, SurfaceOfRevolution)):
        return list(range(mode_max + 1))
    return [0]


def block_multiplicity(geom: Geometry, mode: int) -> int:
    if isinstance(geom, Sphere):
        return 2 * mode + 1
    if isinstance(geom, SurfaceOfRevolution):
        return 1 if mode == 0 else 2
    return 1


def _surface_weights(geom: Geometry, dof_map) -> np.ndarray:
    if dof_map.u is None or isinstance(geom, Sphere):
        return np.ones(dof_map.shape[0])
    if isinstance(geom, SurfaceOfRevolution):
        return dof_map.u_weights * geom.radius(dof_map.u)
    return dof_map.u_weights * np.sqrt(geom.metric_diag(dof_map.u)[0])


def _solve_kwargs(cfg: Config, shift: float) -> dict:
    return {"tol": cfg.solver_tol, "shift": shift, "seed": cfg.seed}


def _solver_err(cfg, values):
    return cfg.solver_tol * np.maximum(1.0, np.abs(values))


def _ladder(cfg, build, res, k, shift):
    return converged_eigenvalues(build, res, k, tol_disc=cfg.tol_disc, extrapolate=cfg.extrapolate,
                                 max_levels=cfg.max_levels, **_solve_kwargs(cfg, shift))


def _surface_ladder(cfg, geom, build, res, k, shift):
    if isinstance(geom, Sphere):
        return exact_pair_values(build, res, k, **_solve_kwargs(cfg, shift))
    return _ladder(cfg, build, res, k, shift)


def solve_block(cfg: Config, case: str, eps: float, mode: int, k: int | None = None,
                with_surface: bool = True) -> dict:
    """Tube, second-term and bare surface eigenvalues for one (case, eps, block)."""
    geom = cfg.geometry()
    k = k or cfg.n_max
    res = Resolution(cfg.n_surface, cfg.n_t, mode)
    ext = kappa_extrema(geom)
    out = {"mode": mode, "mult": block_multiplicity(geom, mode), "timings": {}}

    if case != "effective":
        pattern = TUBE_PATTERN[case]
        lead = leading_term(case, eps)
        shift = -1.0 if case == "neumann" else lead - 2.0 * ext.kappa_norm / eps - 1.0
        started = time.perf_counter()
        tube = _ladder(cfg, lambda r: assemble_tube(geom, eps, r, pattern), res, k, shift)
        out["timings"]["tube"] = time.perf_counter() - started
        out["tube"] = (tube.values, tube.error + _solver_err(cfg, tube.values))
        out["tube_converged"] = tube.converged
        if case == "dn":
            dof = tube.finest_pair.dof_map
            grid = dof.scatter(tube.finest.eigenvectors[:, 0])
            _, frac = transverse_project(grid, dof.t, _surface_weights(geom, dof))
            out["orth_fraction"] = frac
    if not with_surface:
        return out

    if case in ("dn", "effective"):
        build_mu = lambda r: assemble_effective_dn(geom, eps, r)  # noqa: E731
        shift_mu = ext.inf_kappa / eps - 1.0
    elif case == "dirichlet":
        build_mu = lambda r: assemble_effective_dirichlet(geom, r)  # noqa: E731
        shift_mu = -0.5 * ext.max_principal ** 2 * (geom.dim - 1) - 1.0
    else:
        build_mu = lambda r: assemble_surface(geom, r, "N")  # noqa: E731
        shift_mu = -1.0
    bc_nu = "N" if case == "neumann" else "D"
    started = time.perf_counter()
    mu = _surface_ladder(cfg, geom, build_mu, res, k, shift_mu)
    nu = _surface_ladder(cfg, geom, lambda r: assemble_surface(geom, r, bc_nu), res, k, -1.0)
    out["timings"]["surface"] = time.perf_counter() - started
    out["mu"] = (mu.values, mu.error + _solver_err(cfg, mu.values))
    out["nu"] = (nu.values, nu.error + _solver_err(cfg, nu.values))
    return out


def _run_task(args):
    cfg, case, eps, mode, k, with_surface = args
    try:
        return solve_block(cfg, case, eps, mode, k, with_surface)
    except (ThinTubeError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        log.warning("solve failed for case=%s eps=%s mode=%s: %s", case, eps, mode, exc)
        return {"mode": mode, "error": f"{type(exc).__name__}: {exc}"}


def _merge(blocks: list, key: str, count: int):
    values, errors = [], []
    for blk in blocks:
        if key not in blk:
            continue
        vals, errs = blk[key]
        for v, e in zip(vals, errs):
            if np.isfinite(v):
                values.extend([v] * blk["mult"])
                errors.extend([e] * blk["mult"])
    order = np.argsort(values, kind="stable")[:count]
    vals = np.full(count, np.nan)
    errs = np.full(count, np.nan)
    vals[: order.size] = np.asarray(values)[order] if order.size else []
    errs[: order.size] = np.asarray(errors)[order] if order.size else []
    return vals, errs


def cutoff_ok(merged: np.ndarray, omitted_bottom: float, margin: float = 2.0) -> bool:
    """The first omitted block must sit above the reported range with room to spare.

    Distances are measured from the bottom of the merged spectrum:
    ``omitted - lambda_1 >= margin * (lambda_nmax - lambda_1)``.
    """
    lo, hi = merged[0], merged[-1]
    return bool(omitted_bottom > hi and omitted_bottom - lo >= margin * (hi - lo))


def sandwich_check(record: SweepRecord, kappa_norm: float, slack: float | None = None) -> bool:
    """``eps nu - ||kappa|| <= eps mu <= eps nu + ||kappa||`` up to an additive slack."""
    if slack is None:
        slack = record.eps * (record.err_mu + record.err_nu)
    lhs = record.eps * record.mu_n
    centre = record.eps * record.nu_n
    return bool(centre - kappa_norm - slack <= lhs <= centre + kappa_norm + slack)


def _sandwich_norm(case, geom, eps, ext):
    if case in ("dn", "effective"):
        return ext.kappa_norm
    if case == "dirichlet":
        u = geom.sample_grid(2048)
        kap = geom.curvatures(u)
        veff = -0.5 * np.sum(kap ** 2, axis=0) + 0.25 * np.sum(kap, axis=0) ** 2
        return eps * float(np.abs(veff).max())
    return 0.0


def run_sweep(cfg: Config, workers: int | None = None) -> SweepReport:
    cfg.validate()
    geom = cfg.geometry()
    ext = kappa_extrema(geom)
    modes = block_modes(geom, cfg.mode_max)
    symmetric = len(modes) > 1
    tasks = []
    for case in cfg.cases:
        for eps in cfg.eps_list:
            for mode in modes:
                tasks.append((cfg, case, eps, mode, cfg.n_max, True))
            if symmetric:
                tasks.append((cfg, case, eps, cfg.mode_max + 1, 1, case == "effective"))
    started = time.perf_counter()
    workers = workers or cfg.resolved_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    by_key = {(t[1], t[2], t[3]): r for t, r in zip(tasks, results)}

    records = []
    strong = {}
    timings = []
    for case in cfg.cases:
        for eps in cfg.eps_list:
            blocks = [by_key[(case, eps, m)] for m in modes]
            errors = sorted({b["error"] for b in blocks if "error" in b})
            timings.extend(b.get("timings", {}).get("tube", 0.0) for b in blocks)
            if case == "effective":
                lam, err_lam = np.full(cfg.n_max, np.nan), np.full(cfg.n_max, np.nan)
            else:
                lam, err_lam = _merge(blocks, "tube", cfg.n_max)
            mu, err_mu = _merge(blocks, "mu", cfg.n_max)
            nu, err_nu = _merge(blocks, "nu", cfg.n_max)
            if symmetric:
                omitted = by_key[(case, eps, cfg.mode_max + 1)]
                key = "mu" if case == "effective" else "tube"
                if "error" in omitted:
                    errors.append(omitted["error"])
                elif not cutoff_ok(lam if key == "tube" else mu, omitted[key][0][0]):
                    errors.append(f"mode cutoff {cfg.mode_max} too small")
            frac = np.nan
            if case == "dn":
                ground = [b for b in blocks if "tube" in b]
                if ground:
                    best = min(ground, key=lambda b: b["tube"][0][0])
                    frac = best.get("orth_fraction", np.nan)
            lead = leading_term(case, eps)
            norm = _sandwich_norm(case, geom, eps, ext)
            for i in range(cfg.n_max):
                rec = SweepRecord(
                    case=case, eps=eps, n=i + 1, lambda_n=float(lam[i]), leading=lead,
                    mu_n=float(mu[i]), residual=float(lam[i] - lead - mu[i]), nu_n=float(nu[i]),
                    sandwich_ok=False, orth_fraction=float(frac) if i == 0 else float("nan"),
                    err_lambda=float(err_lam[i]), err_mu=float(err_mu[i]), err_nu=float(err_nu[i]),
                    error="; ".join(errors),
                )
                rec.sandwich_ok = sandwich_check(rec, norm) if np.isfinite(rec.mu_n) else False
                records.append(rec)
            if case in ("dn", "effective"):
                strong.setdefault(case, []).append({
                    "eps": eps, "eps_mu1": eps * float(mu[0]), "inf_kappa": ext.inf_kappa,
                    "error": abs(eps * float(mu[0]) - ext.inf_kappa),
                })

    provenance = {
        "config_sha256": cfg.digest(),
        "geometry": geom.ident(),
        "versions": {"thintube": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time": time.perf_counter() - started,
        "tube_solve_times": timings,
        "workers": workers,
        "kappa": asdict(ext),
    }
    return SweepReport(records, tuple(cfg.cases), strong, provenance)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class DiagnosticTable:
    rows: list
    passed: bool
    rule: str


def strong_coupling_check(report: SweepReport, geom: Geometry, case: str = "dn",
                          fraction: float = 0.1, tol: float = 1e-6) -> DiagnosticTable:
    """Compare ``eps * mu_1(eps)`` with ``inf kappa`` along the sweep.

    Non-constant curvature: the error must decrease monotonically and end
    below ``fraction * (sup kappa - inf kappa)``.  Constant curvature: the
    ground state is ``nu_1 + kappa/eps`` exactly, so ``eps mu_1 - kappa - eps nu_1``
    must vanish to ``tol``.
    """
    rows = report.strong_coupling.get(case, [])
    if len(rows) < 3:
        raise DomainError("strong-coupling check needs at least 3 eps values")
    ext = kappa_extrema(geom)
    spread = ext.sup_kappa - ext.inf_kappa
    errors = [r["error"] for r in rows]
    if spread <= 1e-12:
        nus = {r.eps: r.nu_n for r in report.select(case, 1)}
        defects = [abs(r["eps_mu1"] - ext.inf_kappa - r["eps"] * nus[r["eps"]]) for r in rows]
        return DiagnosticTable(rows, bool(max(defects) <= tol), f"constant kappa: |defect| <= {tol:g}")
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    final_ok = errors[-1] <= fraction * spread
    return DiagnosticTable(rows, bool(monotone and final_ok),
                           f"decreasing and final <= {fraction:g} * {spread:.6g}")


@dataclass
class TrendResult:
    n: int
    abs_residuals: np.ndarray
    max_abs: float
    median_abs: float
    slope: float
    passed: bool


def residual_trend(report: SweepReport, case: str = "dn", tol: float | None = None) -> list:
    """No-growth test for ``|r_n|`` against ``1/eps``, one :class:`TrendResult` per ``n``.

    Passes when ``max|r| <= 3 median|r| + tol`` and the least-squares slope of
    ``|r|`` versus ``1/eps`` satisfies ``|slope| eps_min <= 0.1 median|r| + tol``.
    """
    out = []
    eps = np.array(report.eps_list(case))
    ns = sorted({r.n for r in report.select(case)})
    for n in ns:
        r = np.abs(report.series(case, n, "residual"))
        err = report.series(case, n, "err_lambda") + report.series(case, n, "err_mu")
        t = float(np.nanmax(err)) if tol is None else tol
        med = float(np.median(r))
        slope = float(np.polyfit(1.0 / eps, r, 1)[0]) if eps.size >= 2 else 0.0
        ok = r.max() <= 3.0 * med + t and abs(slope) * eps.min() <= 0.1 * med + t
        out.append(TrendResult(n, r, float(r.max()), med, slope, bool(ok)))
    return out


def neumann_convergence(report: SweepReport, fraction: float = 0.05, tol: float | None = None) -> list:
    """``|lambda_n^N - mu_n^N|`` must not grow along the sweep and end below ``fraction (1 + |mu|)``."""
    out = []
    for n in sorted({r.n for r in report.select("neumann")}):
        lam = report.series("neumann", n, "lambda_n")
        mu = report.series("neumann", n, "mu_n")
        err = report.series("neumann", n, "err_lambda") + report.series("neumann", n, "err_mu")
        t = float(np.nanmax(err)) if tol is None else tol
        gap = np.abs(lam - mu)
        decreasing = all(b <= a + t for a, b in zip(gap, gap[1:]))
        final = gap[-1] <= fraction * (1.0 + abs(mu[-1])) + t
        out.append((n, gap, bool(decreasing and final)))
    return out


def localization_ratios(report: SweepReport, case: str = "dn") -> list:
    """``orth_fraction(eps_{k+1}) / orth_fraction(eps_k)`` for the ground state."""
    frac = report.series(case, 1, "orth_fraction")
    return [float(b / a) for a, b in zip(frac, frac[1:])]
