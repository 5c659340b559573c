import math
from dataclasses import replace

import numpy as np
import pytest

from thintube import harness
from thintube.config import Config
from thintube.errors import ConvergenceError, DomainError
from thintube.harness import (SweepRecord, cutoff_ok, localization_ratios, neumann_convergence,
                              residual_trend, run_sweep, sandwich_check, strong_coupling_check)
from thintube.oracles import merged_shell_spectrum


def cfg_for(kind, params, **kw):
    return replace(Config(solver_tol=1e-8), geometry_kind=kind,
                   geometry_params=tuple(sorted(params.items())), **kw)


def test_segment_residual_vanishes():
    cfg = cfg_for("segment", {"length": repr(math.pi)}, eps_list=(0.1, 0.05), n_max=4)
    rep = run_sweep(cfg)
    assert len(rep.records) == 8
    for rec in rep.records:
        assert abs(rec.residual) < 1e-3
        assert rec.mu_n == pytest.approx(rec.n ** 2, abs=1e-3)
        assert rec.sandwich_ok


def test_sphere_ground_state():
    cfg = cfg_for("sphere", {"radius": "1"}, eps_list=(0.1,), n_max=4, mode_max=3)
    rep = run_sweep(cfg)
    first = rep.select("dn", 1)[0]
    assert first.mu_n == pytest.approx(-20.0, abs=1e-9)
    ref = merged_shell_spectrum(3, 1.0, 1, 0.1, 4).eigenvalues
    np.testing.assert_allclose([r.lambda_n for r in rep.records], ref, rtol=1e-6)
    assert math.isfinite(first.residual) and not rep.failed


def test_circle_sandwich_saturates():
    rec = SweepRecord("dn", 0.1, 1, 0.0, 0.0, -10.0, 0.0, 0.0, False, 0.0, 0.0, 1e-8, 1e-8)
    assert sandwich_check(rec, 1.0)
    assert not sandwich_check(replace(rec, mu_n=-10.5), 1.0)


def test_ellipse_sandwich_is_strict():
    cfg = cfg_for("ellipse", {"a": "1", "b": "0.5"}, orientation="inward", eps_list=(0.05,),
                  n_max=5, cases=("effective",))
    rep = run_sweep(cfg)
    norm = 4.0
    for rec in rep.records:
        gap = abs(rec.eps * (rec.mu_n - rec.nu_n))
        assert rec.sandwich_ok and gap < norm - 0.1


def test_cutoff_rule():
    merged = np.array([1.0, 2.0, 3.0])
    assert cutoff_ok(merged, 5.0)
    assert not cutoff_ok(merged, 4.5)
    assert not cutoff_ok(merged, 2.5)


def test_failed_solve_is_tagged_and_sweep_continues(monkeypatch):
    real = harness.solve_block

    def flaky(cfg, case, eps, mode, k=None, with_surface=True):
        if eps == 0.1:
            raise ConvergenceError("no luck", partial=None)
        return real(cfg, case, eps, mode, k, with_surface)

    monkeypatch.setattr(harness, "solve_block", flaky)
    rep = run_sweep(cfg_for("circle", {"radius": "1"}, eps_list=(0.2, 0.1), n_max=2))
    assert rep.failed
    bad = [r for r in rep.records if r.error]
    assert {r.eps for r in bad} == {0.1} and all(math.isnan(r.lambda_n) for r in bad)
    assert all(math.isfinite(r.lambda_n) for r in rep.records if r.eps == 0.2)


def test_strong_coupling_needs_three_eps():
    rep = run_sweep(cfg_for("circle", {"radius": "1"}, eps_list=(0.2, 0.1), n_max=1,
                            cases=("effective",)))
    with pytest.raises(DomainError):
        strong_coupling_check(rep, Config().geometry(), "effective")


def test_segment_strong_coupling_goes_to_zero():
    rep = run_sweep(cfg_for("segment", {"length": "2"}, eps_list=(0.2, 0.1, 0.05), n_max=1,
                            cases=("effective",)))
    rows = rep.strong_coupling["effective"]
    for row in rows:
        assert row["eps_mu1"] == pytest.approx(row["eps"] * (math.pi / 2) ** 2, rel=1e-4)


def test_dirichlet_and_neumann_cases():
    cfg = cfg_for("circle", {"radius": "1"}, eps_list=(0.2, 0.1, 0.05), n_max=3,
                  cases=("dirichlet", "neumann"))
    rep = run_sweep(cfg)
    assert all(r.leading == pytest.approx((math.pi / r.eps) ** 2) for r in rep.select("dirichlet"))
    mus = rep.series("dirichlet", 2, "mu_n")
    assert np.ptp(mus) < 1e-9
    assert all(t.passed for t in residual_trend(rep, "dirichlet"))
    assert all(ok for _, _, ok in neumann_convergence(rep, 0.1))


def test_localization_and_block_merge_order():
    cfg = cfg_for("torus", {"major": "2", "minor": "0.5"}, eps_list=(0.1, 0.05), n_max=3, mode_max=4)
    rep = run_sweep(cfg)
    assert not rep.failed
    lam = rep.series("dn", 1, "lambda_n")
    assert np.all(np.diff([r.lambda_n for r in rep.records if r.eps == 0.1]) >= 0)
    ratio = localization_ratios(rep)[0]
    assert 0.3 <= ratio <= 0.8
    assert lam[1] > lam[0]
