"""Discretization of the tube and surface quadratic forms into (A, B) pairs.

All forms are written as

    a[psi] = sum_edges p * (jump of psi)**2 / spacing + sum_nodes q * psi**2 * cell
    b[psi] = sum_nodes w * psi**2 * cell

on uniform tensor grids: stiffness coefficients are sampled at edge
midpoints, mass and potential at nodes with trapezoidal cell weights.  This is
the weak (summation-by-parts) form of second-order centred differences, so
``A`` is symmetric, Neumann conditions are natural (no rows are added) and
Dirichlet nodes are simply dropped.

Tube coordinates are ``(u, t)`` with ``u`` the first surface coordinate and
``t in [0, 1]`` the scaled normal distance.  Three-dimensional kinds are
reduced by symmetry: the sphere to one radial block per harmonic degree ``l``
and surfaces of revolution to one ``(s, t)`` block per azimuthal mode ``m``.
The constant factor ``eps`` of the volume element is dropped, which leaves the
spectrum unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateTubeError, DomainError, UnsupportedGeometryError
from .geometry import Circle, Ellipse, Geometry, Segment, Sphere, SurfaceOfRevolution

TUBE_CONDITIONS = {
    # (t = 0, t = 1, lateral walls over the boundary of the surface)
    "DN": ("D", "N", "D"),
    "DD": ("D", "D", "D"),
    "NN": ("N", "N", "N"),
}


@dataclass(frozen=True)
class Resolution:
    n_surface: int = 64
    n_t: int = 32
    mode: int = 0  # azimuthal mode m, or harmonic degree l on the sphere

    def __post_init__(self):
        if self.n_surface < 8 or self.n_t < 8:
            raise DomainError(f"resolution too coarse: {self}")
        if self.mode < 0:
            raise DomainError("mode index must be non-negative")

    def refined(self, factor: int = 2) -> "Resolution":
        return replace(self, n_surface=self.n_surface * factor, n_t=self.n_t * factor)

    def with_mode(self, mode: int) -> "Resolution":
        return replace(self, mode=mode)


@dataclass(frozen=True, eq=False)
class Axis:
    """Uniform 1D grid with node weights and the set of kept (non-Dirichlet) nodes."""

    nodes: np.ndarray
    spacing: float
    periodic: bool
    weights: np.ndarray  # trapezoid cell weights (spacing, halved at the ends)
    keep: np.ndarray  # boolean mask of unknowns

    @classmethod
    def interval(cls, lo, hi, n, left="D", right="D"):
        nodes = np.linspace(lo, hi, n + 1)
        h = (hi - lo) / n
        weights = np.full(n + 1, h)
        weights[[0, -1]] *= 0.5
        keep = np.ones(n + 1, dtype=bool)
        keep[0] = left != "D"
        keep[-1] = right != "D"
        return cls(nodes, h, False, weights, keep)

    @classmethod
    def circle(cls, lo, period, n):
        h = period / n
        nodes = lo + h * np.arange(n)
        return cls(nodes, h, True, np.full(n, h), np.ones(n, dtype=bool))

    @property
    def size(self):
        return self.nodes.size

    def edges(self):
        left = np.arange(self.size if self.periodic else self.size - 1)
        right = (left + 1) % self.size
        return left, right, self.nodes[left] + 0.5 * self.spacing


@dataclass(frozen=True, eq=False)
class DofMap:
    """Relation between unknowns and the full ``(u, t)`` grid."""

    shape: tuple
    active: np.ndarray  # flat grid index of each unknown
    u: np.ndarray | None = None
    t: np.ndarray | None = None
    u_weights: np.ndarray | None = None

    def scatter(self, vector) -> np.ndarray:
        """Grid array with eliminated (Dirichlet) nodes filled by zeros."""
        vector = np.asarray(vector)
        full = np.zeros(int(np.prod(self.shape)), dtype=vector.dtype)
        full[self.active] = vector
        return full.reshape(self.shape)

    def gather(self, grid_values) -> np.ndarray:
        return np.asarray(grid_values).reshape(-1)[self.active]


@dataclass(frozen=True, eq=False)
class OperatorPair:
    A: sp.csr_matrix
    B: sp.csr_matrix
    dof_map: DofMap
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def scaled(self, factor: float) -> "OperatorPair":
        return OperatorPair(self.A * factor, self.B * factor, self.dof_map, dict(self.metadata))


def _edge_matrix(n, a, b, c):
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([c, c, -c, -c])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n))


def _restrict(M, keep_flat):
    idx = np.flatnonzero(keep_flat)
    M = M.tocsr()
    return M[idx][:, idx].tocsr(), idx


def _tensor_pair(u_axis: Axis, t_axis: Axis, p_u, p_t, q, w, metadata):
    """Assemble on the product grid; coefficient callables take broadcast (u, t) arrays."""
    nu, nt = u_axis.size, t_axis.size
    n = nu * nt
    index = np.arange(n).reshape(nu, nt)
    tn = t_axis.nodes
    parts = []

    a, b, umid = u_axis.edges()
    cu = p_u(umid[:, None], tn[None, :]) * t_axis.weights[None, :] / u_axis.spacing
    parts.append(_edge_matrix(n, index[a].ravel(), index[b].ravel(), cu.ravel()))

    a, b, tmid = t_axis.edges()
    ct = p_t(u_axis.nodes[:, None], tmid[None, :]) * u_axis.weights[:, None] / t_axis.spacing
    parts.append(_edge_matrix(n, index[:, a].ravel(), index[:, b].ravel(), ct.ravel()))

    cell = u_axis.weights[:, None] * t_axis.weights[None, :]
    U, T = u_axis.nodes[:, None], tn[None, :]
    A = sum(p.tocsr() for p in parts)
    if q is not None:
        A = A + sp.diags((q(U, T) * cell).ravel())
    B = sp.diags((w(U, T) * cell).ravel())
    keep = (u_axis.keep[:, None] & t_axis.keep[None, :]).ravel()
    A, idx = _restrict(A, keep)
    B, _ = _restrict(B, keep)
    dof = DofMap((nu, nt), idx, u_axis.nodes, tn, u_axis.weights)
    return OperatorPair(_symmetrize(A), B, dof, metadata)


def _line_pair(axis: Axis, p, q, w, metadata, t_axis=False):
    """Assemble a 1D form ``int p f'^2 + q f^2`` with mass ``int w f^2``."""
    n = axis.size
    a, b, mid = axis.edges()
    A = _edge_matrix(n, a, b, p(mid) / axis.spacing).tocsr()
    if q is not None:
        A = A + sp.diags(q(axis.nodes) * axis.weights)
    B = sp.diags(w(axis.nodes) * axis.weights)
    A, idx = _restrict(A, axis.keep)
    B, _ = _restrict(B, axis.keep)
    if t_axis:
        dof = DofMap((1, n), idx, np.zeros(1), axis.nodes, np.ones(1))
    else:
        dof = DofMap((n,), idx, axis.nodes, None, axis.weights)
    return OperatorPair(_symmetrize(A), B, dof, metadata)


def _symmetrize(A):
    return ((A + A.T) * 0.5).tocsr()


def surface_axis(geom: Geometry, n: int, lateral: str = "D") -> Axis:
    lo, hi = geom.param_bounds()
    if geom.periodic:
        return Axis.circle(lo, hi - lo, n)
    return Axis.interval(lo, hi, n, lateral, lateral)


def transverse_axis(n: int, bottom: str = "D", top: str = "N") -> Axis:
    return Axis.interval(0.0, 1.0, n, bottom, top)


def _check_tube(geom: Geometry, eps: float, kappa_fn):
    if not eps > 0:
        raise DomainError("eps must be positive")
    # kappa_fn samples the principal curvatures densely; each factor must stay positive at t = 1
    kap = kappa_fn(geom.sample_grid(4096))
    worst = float((1.0 - eps * kap).min())
    if worst <= 0.0:
        raise DegenerateTubeError(
            f"{geom.ident()}: 1 - eps*kappa_mu = {worst:.3g} <= 0 at eps={eps}"
        )


def assemble_tube(geom: Geometry, eps: float, res: Resolution, conditions: str = "DN",
                  weight: str = "exact") -> OperatorPair:
    """Tube form in Fermi coordinates with the exact metric.

    ``conditions`` picks the boundary pattern (``DN``: Dirichlet at t=0, Neumann at
    t=1, Dirichlet walls; ``DD``; ``NN``).  ``weight='truncated'`` replaces
    ``h_eps`` by its first-order expansion ``1 - eps*kappa*t`` in the volume
    element (used to measure the size of the neglected terms).
    """
    if conditions not in TUBE_CONDITIONS:
        raise DomainError(f"unknown boundary pattern {conditions!r}")
    if weight not in ("exact", "truncated"):
        raise DomainError(f"unknown weight {weight!r}")
    bottom, top, lateral = TUBE_CONDITIONS[conditions]
    _check_tube(geom, eps, geom.curvatures)
    meta = {"geometry": geom.ident(), "eps": eps, "resolution": res, "form": "tube",
            "conditions": conditions, "weight": weight, "mode": res.mode}
    t_axis = transverse_axis(res.n_t, bottom, top)
    inv_e2 = 1.0 / eps ** 2

    def weight_fn(factors, total_kappa, t):
        if weight == "exact":
            return np.prod(factors, axis=0)
        return 1.0 - eps * total_kappa * t

    if isinstance(geom, (Segment, Circle, Ellipse)):
        u_axis = surface_axis(geom, res.n_surface, lateral)

        def parts(u, t):
            kap = geom.curvatures(u)[0]
            jac = np.sqrt(geom.metric_diag(u)[0])
            a = 1.0 - eps * kap * t
            return jac, a, weight_fn(a[None], kap, t)

        def p_u(u, t):
            jac, a, h = parts(u, t)
            return h / (jac * a * a)

        def p_t(u, t):
            jac, a, h = parts(u, t)
            return jac * h * inv_e2

        def w(u, t):
            jac, a, h = parts(u, t)
            return jac * h

        return _tensor_pair(u_axis, t_axis, p_u, p_t, None, w, meta)

    if isinstance(geom, Sphere):
        k1 = -geom.orientation / geom.radius
        angular = res.mode * (res.mode + 1) / geom.radius ** 2

        def h_of(t):
            a = 1.0 - eps * k1 * t
            return a, weight_fn(np.stack([a, a]), 2.0 * k1, t)

        def p_t(t):
            return h_of(t)[1] * inv_e2

        def q(t):
            a, h = h_of(t)
            return angular * h / (a * a)

        def w(t):
            return h_of(t)[1]

        meta["multiplicity"] = 2 * res.mode + 1
        return _line_pair(t_axis, p_t, q, w, meta, t_axis=True)

    if isinstance(geom, SurfaceOfRevolution):
        u_axis = surface_axis(geom, res.n_surface, lateral)
        m2 = float(res.mode) ** 2

        def parts(u, t):
            kap = geom.curvatures(u)
            rho = geom.radius(u)
            a = 1.0 - eps * kap * t
            return rho, a, weight_fn(a, kap.sum(axis=0), t)

        def p_u(u, t):
            rho, a, h = parts(u, t)
            return rho * h / (a[0] * a[0])

        def p_t(u, t):
            rho, a, h = parts(u, t)
            return rho * h * inv_e2

        def q(u, t):
            rho, a, h = parts(u, t)
            return m2 * h / (rho * a[1] * a[1])

        def w(u, t):
            rho, a, h = parts(u, t)
            return rho * h

        meta["multiplicity"] = 1 if res.mode == 0 else 2
        return _tensor_pair(u_axis, t_axis, p_u, p_t, q if m2 else None, w, meta)

    raise UnsupportedGeometryError(f"no tube assembly for {type(geom).__name__}")


def v_eff(geom: Geometry, point) -> float:
    """Curvature potential of the pure Dirichlet limit: -sum(k^2)/2 + (sum k)^2/4."""
    coords = geom.check_point(point)
    kap = geom.curvatures(coords[0])
    return float(-0.5 * np.sum(kap ** 2) + 0.25 * np.sum(kap) ** 2)


def _v_eff_array(geom, u):
    kap = geom.curvatures(u)
    return -0.5 * np.sum(kap ** 2, axis=0) + 0.25 * np.sum(kap, axis=0) ** 2


def _surface_pair(geom: Geometry, res: Resolution, potential, bc: str, form: str, extra=None):
    """Shared builder for ``-Delta_g + potential(u)`` on the supported kinds."""
    meta = {"geometry": geom.ident(), "resolution": res, "form": form, "bc": bc, "mode": res.mode}
    if extra:
        meta.update(extra)
    if isinstance(geom, (Segment, Circle, Ellipse)):
        axis = surface_axis(geom, res.n_surface, bc)

        def jac(u):
            return np.sqrt(geom.metric_diag(u)[0])

        return _line_pair(axis, lambda u: 1.0 / jac(u), lambda u: potential(u) * jac(u), jac, meta)

    if isinstance(geom, Sphere):
        lam = res.mode * (res.mode + 1) / geom.radius ** 2 + float(potential(np.array([0.5 * math.pi]))[0])
        meta["multiplicity"] = 2 * res.mode + 1
        dof = DofMap((1,), np.zeros(1, dtype=int), np.zeros(1), None, np.ones(1))
        return OperatorPair(sp.csr_matrix([[lam]]), sp.csr_matrix([[1.0]]), dof, meta)

    if isinstance(geom, SurfaceOfRevolution):
        axis = surface_axis(geom, res.n_surface, bc)
        m2 = float(res.mode) ** 2
        rho = geom.radius
        meta["multiplicity"] = 1 if res.mode == 0 else 2
        return _line_pair(axis, rho, lambda u: m2 / rho(u) + potential(u) * rho(u), rho, meta)

    raise UnsupportedGeometryError(f"no surface assembly for {type(geom).__name__}")


def assemble_effective_dn(geom: Geometry, eps: float, res: Resolution) -> OperatorPair:
    """``-Delta_g + kappa/eps`` with Dirichlet conditions on the surface boundary."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return _surface_pair(geom, res, lambda u: geom.curvatures(u).sum(axis=0) / eps, "D",
                         "effective_dn", {"eps": eps})


def assemble_effective_dirichlet(geom: Geometry, res: Resolution) -> OperatorPair:
    """``-Delta_g + V_eff`` with Dirichlet conditions on the surface boundary."""
    return _surface_pair(geom, res, lambda u: _v_eff_array(geom, u), "D", "effective_dirichlet")


def assemble_surface(geom: Geometry, res: Resolution, bc: str = "D") -> OperatorPair:
    """Bare Laplace-Beltrami operator; ``bc`` only matters when the surface has a boundary."""
    if bc not in ("D", "N"):
        raise DomainError(f"bc must be 'D' or 'N', got {bc!r}")
    return _surface_pair(geom, res, lambda u: np.zeros(np.shape(u)), bc, "surface")


def transverse_pair(n: int, bottom: str = "D", top: str = "N") -> OperatorPair:
    """1D pair for ``-f''`` on (0, 1); with (D, N) its spectrum approximates ((2k-1) pi/2)^2."""
    axis = transverse_axis(n, bottom, top)
    one = lambda x: np.ones_like(x)  # noqa: E731
    return _line_pair(axis, one, None, one, {"form": "transverse", "n": n})


def write_coo(matrix, path) -> None:
    """Write ``row col value`` lines, sorted row-major, values with 17 significant digits."""
    M = sp.coo_matrix(matrix)
    M.sum_duplicates()
    order = np.lexsort((M.col, M.row))
    lines = [f"{r} {c} {v:.17g}\n" for r, c, v in zip(M.row[order], M.col[order], M.data[order])]
    Path(path).write_text("".join(lines))


def read_coo(path, shape=None) -> sp.csr_matrix:
    data = np.loadtxt(path, ndmin=2)
    rows, cols = data[:, 0].astype(int), data[:, 1].astype(int)
    if shape is None:
        n = int(max(rows.max(), cols.max())) + 1
        shape = (n, n)
    return sp.coo_matrix((data[:, 2], (rows, cols)), shape=shape).tocsr()


def dump_pair(pair: OperatorPair, prefix) -> tuple[Path, Path]:
    """Debug dump of ``A`` and ``B`` to ``<prefix>.A.coo`` and ``<prefix>.B.coo``."""
    prefix = Path(prefix)
    paths = (prefix.with_name(prefix.name + ".A.coo"), prefix.with_name(prefix.name + ".B.coo"))
    write_coo(pair.A, paths[0])
    write_coo(pair.B, paths[1])
    return paths
