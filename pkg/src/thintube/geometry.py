"""Supported hypersurfaces, their principal curvatures and Fermi-coordinate metric.

Every geometry is described in curvature-line coordinates, so both the surface
metric ``g`` and the tube metric ``G`` are diagonal.  The first surface
coordinate ``u`` carries all the non-trivial dependence; for the
three-dimensional kinds the second coordinate is the azimuth ``phi`` and is
handled by harmonic/azimuthal block reduction in :mod:`thintube.assembly`.

Sign convention: the principal curvatures are defined so that the Jacobian of
the tube map ``x + eps*t*n(x)`` is ``prod(1 - eps*kappa_mu*t)``.  With this
convention the outward tube around a circle of radius ``R`` has
``kappa = -1/R``, and flipping the orientation negates every curvature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateTubeError, DomainError

DEFAULT_EPS_CEILING = 1.0

_ORIENTATION_NAMES = {"outward": 1, "inward": -1, "+": 1, "-": -1, "+1": 1, "-1": -1}


def parse_orientation(value) -> int:
    """Map ``"outward"``/``"inward"``/``+1``/``-1`` to the sign flag."""
    if isinstance(value, str):
        key = value.strip().lower()
        if key in _ORIENTATION_NAMES:
            return _ORIENTATION_NAMES[key]
        raise DomainError(f"unknown orientation {value!r}")
    if value in (1, -1):
        return int(value)
    raise DomainError(f"orientation must be +1 or -1, got {value!r}")


@dataclass(frozen=True)
class CurvatureSample:
    point: tuple
    kappas: tuple
    kappa_sum: float


@dataclass(frozen=True)
class FermiMetric:
    g_diag: tuple
    G_diag: tuple  # tangential coefficients followed by G_tt = eps**2
    h: float
    sqrt_detG: float


@dataclass(frozen=True)
class KappaExtrema:
    inf_kappa: float
    sup_kappa: float
    sup_abs: tuple  # sup-norm of each principal curvature

    @property
    def kappa_norm(self) -> float:
        """Sup-norm of the curvature sum, ``||kappa||_inf``."""
        return max(abs(self.inf_kappa), abs(self.sup_kappa))

    @property
    def max_principal(self) -> float:
        """``C = max_mu ||kappa_mu||_inf`` used in the metric sandwich."""
        return max(self.sup_abs) if self.sup_abs else 0.0


class Geometry:
    """Base class; subclasses are frozen dataclasses."""

    kind: str = "abstract"
    dim: int = 2  # ambient dimension d
    has_boundary: bool = False
    periodic: bool = True  # whether the first surface coordinate is periodic
    orientation: int = 1

    # -- to be provided by subclasses -------------------------------------
    def param_bounds(self) -> tuple[float, float]:
        raise NotImplementedError

    def curvatures(self, u) -> np.ndarray:
        """Principal curvatures at first-coordinate values ``u``; shape (d-1, *u.shape)."""
        raise NotImplementedError

    def metric_diag(self, u) -> np.ndarray:
        """Diagonal surface-metric coefficients at ``u``; shape (d-1, *u.shape)."""
        raise NotImplementedError

    # -- shared ------------------------------------------------------------
    @property
    def period(self) -> float:
        lo, hi = self.param_bounds()
        return hi - lo

    def flipped(self) -> "Geometry":
        return replace(self, orientation=-self.orientation)

    def ident(self) -> str:
        return repr(self)

    def check_point(self, point) -> tuple:
        coords = tuple(np.atleast_1d(np.asarray(point, dtype=float)).tolist())
        lo, hi = self.param_bounds()
        if not lo <= coords[0] <= hi:
            raise DomainError(f"{self.kind}: coordinate {coords[0]} outside [{lo}, {hi}]")
        if len(coords) > 1 and not 0.0 <= coords[1] <= 2.0 * math.pi:
            raise DomainError(f"{self.kind}: azimuth {coords[1]} outside [0, 2pi]")
        return coords

    def sample_grid(self, resolution: int) -> np.ndarray:
        lo, hi = self.param_bounds()
        return np.linspace(lo, hi, resolution, endpoint=not self.periodic)


@dataclass(frozen=True)
class Segment(Geometry):
    """Straight segment of length ``L`` on the x-axis; normal ``orientation*(0, 1)``."""

    length: float
    orientation: int = 1
    kind = "segment"
    dim = 2
    has_boundary = True
    periodic = False

    def param_bounds(self):
        return 0.0, float(self.length)

    def curvatures(self, u):
        u = np.asarray(u, dtype=float)
        return np.zeros((1,) + u.shape)

    def metric_diag(self, u):
        u = np.asarray(u, dtype=float)
        return np.ones((1,) + u.shape)


@dataclass(frozen=True)
class Circle(Geometry):
    """Circle of radius ``R`` in arclength parameterization ``u in [0, 2 pi R)``."""

    radius: float
    orientation: int = 1
    kind = "circle"
    dim = 2
    has_boundary = False
    periodic = True

    def param_bounds(self):
        return 0.0, 2.0 * math.pi * self.radius

    def curvatures(self, u):
        u = np.asarray(u, dtype=float)
        return np.full((1,) + u.shape, -self.orientation / self.radius)

    def metric_diag(self, u):
        u = np.asarray(u, dtype=float)
        return np.ones((1,) + u.shape)


@dataclass(frozen=True)
class Ellipse(Geometry):
    """Ellipse ``(a cos u, b sin u)``, traversed counter-clockwise; ``u`` is not arclength."""

    a: float
    b: float
    orientation: int = 1
    kind = "ellipse"
    dim = 2
    has_boundary = False
    periodic = True

    def param_bounds(self):
        return 0.0, 2.0 * math.pi

    def speed(self, u):
        u = np.asarray(u, dtype=float)
        return np.sqrt((self.a * np.sin(u)) ** 2 + (self.b * np.cos(u)) ** 2)

    def curvatures(self, u):
        signed = self.a * self.b / self.speed(u) ** 3
        return (-self.orientation * signed)[None, ...]

    def metric_diag(self, u):
        return (self.speed(u) ** 2)[None, ...]

    def position(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack([self.a * np.cos(u), self.b * np.sin(u)])


@dataclass(frozen=True)
class Sphere(Geometry):
    """Round sphere of radius ``R``; point is (polar angle, azimuth)."""

    radius: float
    orientation: int = 1
    kind = "sphere"
    dim = 3
    has_boundary = False
    periodic = False

    def param_bounds(self):
        return 0.0, math.pi

    def curvatures(self, u):
        u = np.asarray(u, dtype=float)
        return np.full((2,) + u.shape, -self.orientation / self.radius)

    def metric_diag(self, u):
        u = np.asarray(u, dtype=float)
        r2 = self.radius ** 2
        return np.stack([np.full(u.shape, r2), r2 * np.sin(u) ** 2])


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Arclength-parameterized planar curve ``(rho(s), z(s))`` with ``rho > 0``.

    Derivative and curvature samples may be supplied; when they are not, they
    are obtained from the positions by second-order finite differences.
    """

    s: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    drho: np.ndarray
    dz: np.ndarray
    curvature: np.ndarray  # signed curvature rho' z'' - z' rho''
    closed: bool
    _splines: dict = field(default=None, repr=False, compare=False)

    @classmethod
    def from_samples(cls, s, rho, z=None, drho=None, dz=None, curvature=None, closed=False):
        s = np.asarray(s, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if s.ndim != 1 or s.size < 4 or s.shape != rho.shape:
            raise DomainError("profile needs at least 4 matching (s, rho) samples")
        if np.any(np.diff(s) <= 0):
            raise DomainError("profile arclength samples must be strictly increasing")
        if np.any(rho <= 0):
            raise DomainError("profile must stay off the rotation axis (rho > 0)")
        if drho is None:
            drho = _fd_derivative(s, rho, closed)
        drho = np.asarray(drho, dtype=float)
        if z is None:
            # two-column input: recover z from the unit-speed condition
            dz = np.sqrt(np.clip(1.0 - drho ** 2, 0.0, None)) if dz is None else np.asarray(dz, float)
            z = np.concatenate([[0.0], np.cumsum(0.5 * (dz[1:] + dz[:-1]) * np.diff(s))])
        z = np.asarray(z, dtype=float)
        if dz is None:
            dz = _fd_derivative(s, z, closed)
        dz = np.asarray(dz, dtype=float)
        if curvature is None:
            curvature = drho * _fd_derivative(s, dz, closed) - dz * _fd_derivative(s, drho, closed)
        curvature = np.asarray(curvature, dtype=float)
        splines = {}
        bc = "periodic" if closed else "not-a-knot"
        for name, values in (("rho", rho), ("z", z), ("drho", drho), ("dz", dz), ("curvature", curvature)):
            if closed:
                values = values.copy()
                values[-1] = values[0]
            splines[name] = CubicSpline(s, values, bc_type=bc)
        return cls(s, rho, z, drho, dz, curvature, bool(closed), splines)

    @classmethod
    def from_file(cls, path, closed=False):
        """Load whitespace-separated ``s rho [z]`` samples; ``#`` starts a comment."""
        path = Path(path)
        try:
            data = np.loadtxt(path, comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise DomainError(f"cannot read profile file {path}: {exc}") from exc
        if data.shape[1] == 2:
            return cls.from_samples(data[:, 0], data[:, 1], closed=closed)
        if data.shape[1] == 3:
            return cls.from_samples(data[:, 0], data[:, 1], data[:, 2], closed=closed)
        raise DomainError(f"{path}: expected 2 or 3 columns, got {data.shape[1]}")

    @property
    def length(self) -> float:
        return float(self.s[-1] - self.s[0])

    def __call__(self, name: str, u):
        u = np.asarray(u, dtype=float)
        if self.closed:
            u = self.s[0] + np.mod(u - self.s[0], self.length)
        return self._splines[name](u)


def _fd_derivative(s, y, closed):
    if not closed:
        return np.gradient(y, s, edge_order=2)
    # periodic samples repeat the first point at the end
    ds = np.diff(s)
    yp = np.empty_like(y)
    core = y[:-1]
    h_fwd = ds
    h_bwd = np.roll(ds, 1)
    fwd = np.roll(core, -1)
    bwd = np.roll(core, 1)
    yp[:-1] = (h_bwd ** 2 * fwd - h_fwd ** 2 * bwd + (h_fwd ** 2 - h_bwd ** 2) * core) / (
        h_fwd * h_bwd * (h_fwd + h_bwd)
    )
    yp[-1] = yp[0]
    return yp


@dataclass(frozen=True, eq=False)
class SurfaceOfRevolution(Geometry):
    """Surface swept by a profile curve around the z-axis; point is (s, phi).

    The normal is ``orientation * (z', -rho')`` in the meridian plane, which
    points outward for counter-clockwise closed profiles.
    """

    profile: ProfileCurve
    orientation: int = 1
    name: str = "revolution"
    kind = "revolution"
    dim = 3

    @property
    def has_boundary(self):
        return not self.profile.closed

    @property
    def periodic(self):
        return self.profile.closed

    def ident(self):
        return f"SurfaceOfRevolution({self.name}, orientation={self.orientation})"

    def param_bounds(self):
        return float(self.profile.s[0]), float(self.profile.s[-1])

    def curvatures(self, u):
        meridian = -self.orientation * self.profile("curvature", u)
        parallel = -self.orientation * self.profile("dz", u) / self.profile("rho", u)
        return np.stack([meridian, parallel])

    def metric_diag(self, u):
        rho = self.profile("rho", u)
        return np.stack([np.ones_like(rho), rho ** 2])

    def radius(self, u):
        return self.profile("rho", u)

    @classmethod
    def torus(cls, major: float, minor: float, orientation=1, samples: int = 513):
        if not major > minor > 0:
            raise DomainError("torus needs major > minor > 0")
        s = np.linspace(0.0, 2.0 * math.pi * minor, samples)
        a = s / minor
        prof = ProfileCurve.from_samples(
            s, major + minor * np.cos(a), minor * np.sin(a),
            drho=-np.sin(a), dz=np.cos(a), curvature=np.full(samples, 1.0 / minor), closed=True,
        )
        return cls(prof, parse_orientation(orientation), f"torus(c={major}, r={minor})")

    @classmethod
    def cylinder(cls, radius: float, length: float, orientation=1, samples: int = 65):
        s = np.linspace(0.0, length, samples)
        prof = ProfileCurve.from_samples(
            s, np.full(samples, float(radius)), s,
            drho=np.zeros(samples), dz=np.ones(samples), curvature=np.zeros(samples),
        )
        return cls(prof, parse_orientation(orientation), f"cylinder(R={radius}, L={length})")

    @classmethod
    def annulus(cls, inner: float, outer: float, orientation=1, samples: int = 65):
        s = np.linspace(0.0, outer - inner, samples)
        prof = ProfileCurve.from_samples(
            s, inner + s, np.zeros(samples),
            drho=np.ones(samples), dz=np.zeros(samples), curvature=np.zeros(samples),
        )
        return cls(prof, parse_orientation(orientation), f"annulus({inner}, {outer})")


# ---------------------------------------------------------------------------
# operations


def principal_curvatures(geom: Geometry, point) -> CurvatureSample:
    coords = geom.check_point(point)
    kappas = tuple(float(k) for k in geom.curvatures(coords[0]))
    return CurvatureSample(coords, kappas, float(sum(kappas)))


def _h_product(kappas, t, eps):
    h = 1.0
    for k in kappas:
        h = h * (1.0 - eps * k * t)
    return h


def h_eps(geom: Geometry, point, t: float, eps: float) -> float:
    """Tube Jacobian weight ``prod_mu (1 - eps kappa_mu t)``."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    sample = principal_curvatures(geom, point)
    h = _h_product(sample.kappas, t, eps)
    if h <= 0.0:
        raise DegenerateTubeError(f"h_eps={h} <= 0 at point={point}, t={t}, eps={eps}")
    return float(h)


def fermi_metric(geom: Geometry, point, t: float, eps: float) -> FermiMetric:
    coords = geom.check_point(point)
    h = h_eps(geom, coords, t, eps)
    kappas = geom.curvatures(coords[0])
    g = tuple(float(v) for v in geom.metric_diag(coords[0]))
    G = tuple(float((1.0 - eps * k * t) ** 2 * gm) for k, gm in zip(kappas, g)) + (eps * eps,)
    return FermiMetric(g, G, h, float(eps * math.sqrt(math.prod(g)) * h))


def kappa_extrema(geom: Geometry, resolution: int = 2048) -> KappaExtrema:
    """Curvature extrema over a uniform sample grid (exact for constant-curvature kinds)."""
    if resolution < 2:
        raise DomainError("kappa_extrema needs at least 2 samples")
    u = geom.sample_grid(resolution)
    kap = geom.curvatures(u)
    total = kap.sum(axis=0)
    return KappaExtrema(
        float(total.min()), float(total.max()), tuple(float(v) for v in np.abs(kap).max(axis=1))
    )


def max_admissible_eps(geom: Geometry, ceiling: float = DEFAULT_EPS_CEILING,
                       resolution: int = 4096) -> float:
    """Largest eps keeping every ``1 - eps*kappa_mu*t`` positive, capped at ``ceiling``.

    Closed forms are used for the analytic kinds.  For profiles only the local
    condition is checked; global injectivity of non-convex shapes is not.
    """
    if isinstance(geom, Segment):
        return ceiling
    if isinstance(geom, (Circle, Sphere)):
        return float(geom.radius) if geom.orientation < 0 else ceiling
    if isinstance(geom, Ellipse):
        if geom.orientation > 0:
            return ceiling
        return min(geom.a, geom.b) ** 2 / max(geom.a, geom.b)
    kap = geom.curvatures(geom.sample_grid(resolution))
    top = float(kap.max())
    return 1.0 / top if top > 0 and 1.0 / top < ceiling else ceiling


def make_geometry(kind: str, params: dict, orientation=1) -> Geometry:
    """Build a geometry from a kind name and keyword parameters (used by the config layer)."""
    sigma = parse_orientation(orientation)
    kind = kind.strip().lower()
    try:
        if kind == "segment":
            return Segment(float(params.get("length", params.get("L"))), sigma)
        if kind == "circle":
            return Circle(float(params.get("radius", params.get("R", 1.0))), sigma)
        if kind == "ellipse":
            return Ellipse(float(params["a"]), float(params["b"]), sigma)
        if kind == "sphere":
            return Sphere(float(params.get("radius", params.get("R", 1.0))), sigma)
        if kind == "torus":
            return SurfaceOfRevolution.torus(float(params["major"]), float(params["minor"]), sigma)
        if kind == "cylinder":
            return SurfaceOfRevolution.cylinder(float(params["radius"]), float(params["length"]), sigma)
        if kind in ("revolution", "surface_of_revolution"):
            closed = str(params.get("closed", "false")).lower() in ("1", "true", "yes")
            prof = ProfileCurve.from_file(params["profile"], closed=closed)
            return SurfaceOfRevolution(prof, sigma, str(params["profile"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"missing or invalid parameter for {kind}: {exc}") from exc
    raise DomainError(f"unknown geometry kind {kind!r}")

