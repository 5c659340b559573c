import math

import numpy as np
import pytest

from thintube.errors import DegenerateTubeError, DomainError
from thintube.geometry import (Circle, Ellipse, ProfileCurve, Segment, Sphere, SurfaceOfRevolution,
                               fermi_metric, h_eps, kappa_extrema, make_geometry, max_admissible_eps,
                               parse_orientation, principal_curvatures)


def fd_curvature(geom, u, h=1e-4):
    """Signed curvature of the ellipse from central differences of its position."""
    p = [np.array(geom.position(u + k * h)) for k in (-1, 0, 1)]
    d1 = (p[2] - p[0]) / (2 * h)
    d2 = (p[2] - 2 * p[1] + p[0]) / h ** 2
    return (d1[0] * d2[1] - d1[1] * d2[0]) / np.hypot(*d1) ** 3


def test_ellipse_curvature_matches_finite_differences():
    """Outward convention: kappa = -(signed curvature of the ccw curve)."""
    geom = Ellipse(1.0, 0.5)
    for u in np.linspace(0.1, 6.0, 13):
        assert geom.curvatures(u)[0] == pytest.approx(-fd_curvature(geom, u), rel=1e-6)


def test_inward_ellipse_extrema_and_bound():
    geom = Ellipse(1.0, 0.5, -1)
    ext = kappa_extrema(geom)
    assert ext.inf_kappa == pytest.approx(0.5, abs=1e-12)
    assert ext.sup_kappa == pytest.approx(4.0, abs=1e-12)
    assert max_admissible_eps(geom) == pytest.approx(0.25)
    assert max_admissible_eps(geom.flipped(), ceiling=0.7) == 0.7


def test_circle_orientation_signs():
    out = principal_curvatures(Circle(2.0), (0.3,))
    inw = principal_curvatures(Circle(2.0, -1), (0.3,))
    assert out.kappa_sum == pytest.approx(-0.5)
    assert inw.kappa_sum == pytest.approx(0.5)


def test_sphere_weight_and_metric():
    geom = Sphere(1.0)
    assert h_eps(geom, (1.0, 0.5), 1.0, 0.1) == pytest.approx(1.21)
    metric = fermi_metric(geom, (math.pi / 2, 0.0), 0.5, 0.2)
    assert metric.G_diag[-1] == pytest.approx(0.04)
    assert metric.G_diag[0] == pytest.approx(1.1 ** 2)


def test_degenerate_tube_rejected():
    with pytest.raises(DegenerateTubeError):
        h_eps(Circle(1.0, -1), (0.0,), 1.0, 1.0)
    with pytest.raises(DomainError):
        h_eps(Circle(1.0), (0.0,), 1.5, 0.1)


def test_segment_is_flat():
    ext = kappa_extrema(Segment(2.0))
    assert ext.inf_kappa == ext.sup_kappa == 0.0


def test_torus_curvatures():
    geom = SurfaceOfRevolution.torus(2.0, 0.5)
    s = np.linspace(0.0, math.pi, 7)
    kap = geom.curvatures(s)
    np.testing.assert_allclose(kap[0], -2.0, atol=1e-10)
    # outer equator (s=0): parallel curvature -1/(c + r)
    assert kap[1][0] == pytest.approx(-1.0 / 2.5, rel=1e-8)


def test_profile_from_two_column_file(tmp_path):
    s = np.linspace(0.0, 2.0, 41)
    path = tmp_path / "cyl.txt"
    np.savetxt(path, np.column_stack([s, np.full_like(s, 1.5)]), header="s rho")
    prof = ProfileCurve.from_file(path)
    geom = SurfaceOfRevolution(prof, 1, "file")
    kap = geom.curvatures(np.array([0.5, 1.0]))
    np.testing.assert_allclose(kap[0], 0.0, atol=1e-10)
    np.testing.assert_allclose(kap[1], -1.0 / 1.5, rtol=1e-10)


def test_profile_rejects_axis_crossing():
    with pytest.raises(DomainError):
        ProfileCurve.from_samples([0, 1, 2, 3], [1.0, 0.5, 0.0, 0.5])


def test_make_geometry_and_orientation_parsing():
    geom = make_geometry("ellipse", {"a": "2", "b": "1"}, "inward")
    assert isinstance(geom, Ellipse) and geom.orientation == -1
    assert parse_orientation("outward") == 1
    with pytest.raises(DomainError):
        make_geometry("klein-bottle", {}, 1)
    with pytest.raises(DomainError):
        make_geometry("ellipse", {"a": "2"}, 1)
