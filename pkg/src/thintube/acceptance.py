"""The acceptance suite: eleven numbered property and oracle checks.

Each check returns a :class:`CriterionResult`.  Sweeps are cached on the
:class:`Suite` so the sandwich check can revisit every record produced by the
earlier criteria without solving again.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .assembly import Resolution, assemble_tube, v_eff
from .config import Config
from .eigensolve import dense_reference, smallest_eigenpairs
from .geometry import Circle, Sphere, kappa_extrema
from .harness import (localization_ratios, neumann_convergence, residual_trend, run_sweep,
                      solve_block, strong_coupling_check)
from .oracles import merged_shell_spectrum, radial_shell_spectrum, rectangle_spectrum
from .report import write_csv

SWEEP_EPS = (0.2, 0.1, 0.05, 0.025)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.detail} ({self.elapsed:.1f}s)"


def _base(**kw) -> Config:
    """Acceptance configurations share a tight solver tolerance."""
    params = kw.pop("params")
    return replace(Config(solver_tol=1e-8, workers=1), geometry_params=tuple(sorted(params.items())), **kw)


@dataclass
class Suite:
    workers: int = 1
    reports: dict = field(default_factory=dict)

    def sweep(self, key: str, cfg: Config):
        if key not in self.reports:
            self.reports[key] = run_sweep(replace(cfg, workers=self.workers))
        return self.reports[key]

    # 1 ------------------------------------------------------------------
    def flat_exactness(self) -> CriterionResult:
        cfg = _base(geometry_kind="segment", params={"length": repr(math.pi)},
                    eps_list=(0.1, 0.05), n_max=5, cases=("dn",))
        rep = self.sweep("segment-dn", cfg)
        worst_lam = worst_res = 0.0
        for eps in cfg.eps_list:
            exact = rectangle_spectrum(math.pi, eps, "DN", cfg.n_max).eigenvalues
            recs = [r for r in rep.select("dn") if r.eps == eps]
            lam = np.array([r.lambda_n for r in recs])
            worst_lam = max(worst_lam, float(np.max(np.abs(lam - exact))))
            worst_res = max(worst_res, max(abs(r.residual) for r in recs))
        ok = worst_lam <= 1e-3 and worst_res <= 1e-3 and not rep.failed
        return CriterionResult(1, "flat exactness", ok,
                               f"max|lambda - exact| = {worst_lam:.2e}, max|r_n| = {worst_res:.2e} (tol 1e-3)")

    # 2 ------------------------------------------------------------------
    def circle_oracle(self) -> CriterionResult:
        worst = 0.0
        for orientation in ("outward", "inward"):
            cfg = _base(geometry_kind="circle", params={"radius": "1.0"}, orientation=orientation,
                        eps_list=(0.1, 0.05), n_max=5, cases=("dn",))
            rep = self.sweep(f"circle-{orientation}-oracle", cfg)
            sigma = 1 if orientation == "outward" else -1
            for eps in cfg.eps_list:
                ref = merged_shell_spectrum(2, 1.0, sigma, eps, cfg.n_max, "DN").eigenvalues
                lam = np.array([r.lambda_n for r in rep.select("dn") if r.eps == eps])
                worst = max(worst, float(np.max(np.abs(lam - ref) / np.abs(ref))))
        return CriterionResult(2, "circle vs radial oracle", worst <= 1e-4,
                               f"max relative deviation {worst:.2e} (tol 1e-4)")

    # 3 ------------------------------------------------------------------
    def sphere_oracle(self) -> CriterionResult:
        eps, l_max = 0.1, 4
        cfg = _base(geometry_kind="sphere", params={"radius": "1.0"}, eps_list=(eps,),
                    n_max=16, cases=("dn",), mode_max=l_max)
        worst = 0.0
        for l in range(l_max + 1):
            block = solve_block(cfg, "dn", eps, l, k=3, with_surface=False)
            ref = radial_shell_spectrum(3, 1.0, eps, "D", "N", l, 3).eigenvalues
            worst = max(worst, float(np.max(np.abs(block["tube"][0] - ref) / ref)))
        rep = self.sweep("sphere-dn", cfg)
        lam = np.array([r.lambda_n for r in rep.select("dn")])
        groups = _cluster_sizes(lam, 1e-9)
        expected = [1, 3, 5, 7]
        merged_ref = merged_shell_spectrum(3, 1.0, 1, eps, cfg.n_max, "DN", mode_max=l_max).eigenvalues
        merged_dev = float(np.max(np.abs(lam - merged_ref) / merged_ref))
        ok = worst <= 1e-4 and groups == expected and merged_dev <= 1e-4 and not rep.failed
        return CriterionResult(3, "sphere blocks vs radial oracle", ok,
                               f"per-l max rel dev {worst:.2e}, merged {merged_dev:.2e}, "
                               f"multiplicities {groups} (expect {expected})")

    # 4 ------------------------------------------------------------------
    def trend(self) -> CriterionResult:
        parts, ok = [], True
        for key, kind, params, orient in (("circle-out-sweep", "circle", {"radius": "1.0"}, "outward"),
                                          ("ellipse-in-sweep", "ellipse", {"a": "1.0", "b": "0.5"}, "inward")):
            cfg = _base(geometry_kind=kind, params=params, orientation=orient,
                        eps_list=SWEEP_EPS, n_max=3, cases=("dn",))
            rep = self.sweep(key, cfg)
            trends = residual_trend(rep, "dn")
            lead = rep.series("dn", 1, "leading")
            growth = lead[-1] / lead[0]
            ok &= all(t.passed for t in trends) and abs(growth - 64.0) < 1e-9 and not rep.failed
            slopes = ", ".join(f"{t.slope:+.3g}" for t in trends)
            parts.append(f"{kind}: slopes [{slopes}], max|r| {max(t.max_abs for t in trends):.3g}, "
                         f"leading x{growth:.0f}")
        return CriterionResult(4, "residual trend", ok, "; ".join(parts))

    # 5 ------------------------------------------------------------------
    def strong_coupling(self) -> CriterionResult:
        cfg = _base(geometry_kind="ellipse", params={"a": "1.0", "b": "0.5"}, orientation="inward",
                    eps_list=SWEEP_EPS + (0.0125,), n_max=1, cases=("effective",))
        rep = self.sweep("ellipse-in-effective", cfg)
        geom = cfg.geometry()
        inf_kappa = kappa_extrema(geom).inf_kappa
        errors = [row["error"] for row in rep.strong_coupling["effective"]]
        decreasing = all(b < a for a, b in zip(errors, errors[1:]))
        final = errors[-1]
        ellipse_ok = decreasing and final <= 0.05
        circ_cfg = _base(geometry_kind="circle", params={"radius": "1.0"}, eps_list=SWEEP_EPS,
                         n_max=3, cases=("dn",))
        circ = self.sweep("circle-out-sweep", circ_cfg)
        table = strong_coupling_check(circ, circ_cfg.geometry(), "dn", tol=circ_cfg.solver_tol)
        ok = ellipse_ok and table.passed and abs(inf_kappa - 0.5) < 1e-9
        seq = ", ".join(f"{e:.4f}" for e in errors)
        return CriterionResult(5, "strong coupling", ok,
                               f"ellipse |eps mu_1 - {inf_kappa:.3g}| = [{seq}], decreasing={decreasing}, "
                               f"final {final:.4f} (need <= 0.05); circle exact={table.passed}")

    # 6 ------------------------------------------------------------------
    def sandwich(self) -> CriterionResult:
        for step in (self.flat_exactness, self.circle_oracle, self.sphere_oracle, self.trend,
                     self.strong_coupling):
            if not self._has_reports_for(step):
                step()
        checked = bad = 0
        for rep in self.reports.values():
            for rec in rep.records:
                if np.isfinite(rec.mu_n):
                    checked += 1
                    bad += not rec.sandwich_ok
        circle = self.reports["circle-out-sweep"].select("dn", 1)
        saturated = all(r.sandwich_ok for r in circle)
        gap = max(abs(r.eps * (r.mu_n - r.nu_n)) for r in circle)
        return CriterionResult(6, "sandwich bound", bad == 0 and saturated and checked > 0,
                               f"{checked - bad}/{checked} records inside; circle |eps(mu - nu)| = {gap:.12g}")

    def _has_reports_for(self, step) -> bool:
        keys = {"flat_exactness": ["segment-dn"],
                "circle_oracle": ["circle-outward-oracle", "circle-inward-oracle"],
                "sphere_oracle": ["sphere-dn"], "trend": ["circle-out-sweep", "ellipse-in-sweep"],
                "strong_coupling": ["ellipse-in-effective"]}[step.__name__]
        return all(k in self.reports for k in keys)

    # 7 ------------------------------------------------------------------
    def dirichlet(self) -> CriterionResult:
        cfg = _base(geometry_kind="circle", params={"radius": "1.0"}, eps_list=SWEEP_EPS,
                    n_max=3, cases=("dirichlet",))
        rep = self.sweep("circle-dirichlet", cfg)
        trends = residual_trend(rep, "dirichlet")
        mu = rep.series("dirichlet", 1, "mu_n")
        mu_ok = bool(np.all(np.abs(mu + 0.25) <= 1e-6))
        rng = np.random.default_rng(cfg.seed)
        sphere = Sphere(1.0)
        pts = np.column_stack([rng.uniform(0.05, math.pi - 0.05, 100), rng.uniform(0.0, 2 * math.pi, 100)])
        veff = max(abs(v_eff(sphere, p)) for p in pts)
        ok = all(t.passed for t in trends) and mu_ok and veff <= 1e-14 and not rep.failed
        slopes = ", ".join(f"{t.slope:+.3g}" for t in trends)
        return CriterionResult(7, "Dirichlet case", ok,
                               f"slopes [{slopes}], mu_1^D = {mu[0]:.10g} (expect -0.25), "
                               f"sphere max|V_eff| = {veff:.1e}")

    # 8 ------------------------------------------------------------------
    def neumann(self) -> CriterionResult:
        parts, ok = [], True
        for key, kind, params in (("segment-neumann", "segment", {"length": repr(math.pi)}),
                                  ("circle-neumann", "circle", {"radius": "1.0"})):
            cfg = _base(geometry_kind=kind, params=params, eps_list=SWEEP_EPS, n_max=3,
                        cases=("neumann",))
            rep = self.sweep(key, cfg)
            rows = neumann_convergence(rep, 0.05)
            ok &= all(passed for _, _, passed in rows) and not rep.failed
            final = max(float(gap[-1]) for _, gap, _ in rows)
            parts.append(f"{kind}: final max gap {final:.3g}")
        return CriterionResult(8, "Neumann case", ok, "; ".join(parts))

    # 9 ------------------------------------------------------------------
    def eigensolver(self, count: int = 200) -> CriterionResult:
        rng = np.random.default_rng(0x5EED)
        worst = 0.0
        for _ in range(count):
            A, B = random_pencil(rng)
            got = smallest_eigenpairs((A, B), 5, tol=1e-10, shift=-50.0).eigenvalues
            ref = dense_reference((A, B), 5).eigenvalues
            worst = max(worst, float(np.max(np.abs(got - ref))))
        pair = assemble_tube(Circle(1.0), 0.1, Resolution(32, 16))
        base = smallest_eigenpairs(pair, 5, tol=1e-10, shift=200.0).eigenvalues
        gauge = 0.0
        for c in (1e-3, 7.0, 1e4):
            scaled = smallest_eigenpairs(pair.scaled(c), 5, tol=1e-10, shift=200.0).eigenvalues
            gauge = max(gauge, float(np.max(np.abs(scaled - base) / np.abs(base))))
        ok = worst <= 1e-8 and gauge <= 1e-8
        return CriterionResult(9, "eigensolver vs dense", ok,
                               f"{count} pencils max|diff| {worst:.1e}; gauge rel change {gauge:.1e}")

    # 10 -----------------------------------------------------------------
    def localization(self) -> CriterionResult:
        cfg = _base(geometry_kind="circle", params={"radius": "1.0"}, eps_list=(0.1, 0.05),
                    n_max=5, cases=("dn",))
        rep = self.sweep("circle-outward-oracle", cfg)
        ratio = localization_ratios(rep, "dn")[0]
        return CriterionResult(10, "transverse localization", 0.3 <= ratio <= 0.8,
                               f"orth_fraction ratio {ratio:.4f} (need [0.3, 0.8])")

    # 11 -----------------------------------------------------------------
    def determinism(self, cfg: Config | None = None, scratch=None) -> CriterionResult:
        cfg = cfg or _base(geometry_kind="ellipse", params={"a": "1.0", "b": "0.5"},
                           orientation="inward", eps_list=(0.2, 0.1), n_max=3, cases=("dn", "effective"))
        with tempfile.TemporaryDirectory(dir=scratch) as tmp:
            blobs = []
            for i, workers in enumerate((1, 2)):
                path = write_csv(run_sweep(replace(cfg, workers=workers)), Path(tmp) / f"run{i}.csv")
                blobs.append(path.read_bytes())
        same = blobs[0] == blobs[1]
        return CriterionResult(11, "determinism", same,
                               f"serial and 2-worker CSV {'identical' if same else 'differ'} "
                               f"({len(blobs[0])} bytes)")

    def run(self, only=None) -> list:
        steps = [self.flat_exactness, self.circle_oracle, self.sphere_oracle, self.trend,
                 self.strong_coupling, self.sandwich, self.dirichlet, self.neumann,
                 self.eigensolver, self.localization, self.determinism]
        results = []
        for number, step in enumerate(steps, start=1):
            if only and number not in only:
                continue
            started = time.perf_counter()
            result = step()
            result.elapsed = time.perf_counter() - started
            results.append(result)
        return results


def _cluster_sizes(values, rtol):
    sizes = [1]
    for a, b in zip(values, values[1:]):
        if abs(b - a) <= rtol * abs(b):
            sizes[-1] += 1
        else:
            sizes.append(1)
    return sizes


def random_pencil(rng, n_range=(12, 60)):
    """Sparse symmetric ``A`` (possibly indefinite) and SPD ``B`` of random size."""
    n = int(rng.integers(*n_range))
    density = min(1.0, 6.0 / n)
    R = sp.random(n, n, density=density, random_state=rng, data_rvs=rng.standard_normal)
    A = (R + R.T) * 5.0 + sp.diags(rng.uniform(-2.0, 10.0, n))
    C = sp.random(n, n, density=density, random_state=rng, data_rvs=rng.standard_normal)
    B = C @ C.T * 0.1 + sp.diags(rng.uniform(0.5, 2.0, n))
    return sp.csr_matrix(A), sp.csr_matrix(B)
