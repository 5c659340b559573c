"""Independent reference spectra for exactly reducible tubes.

Nothing here touches :mod:`thintube.assembly` or the iterative solver.  The
rectangle spectrum is closed-form; annuli and spherical shells are reduced to
the radial equation

    -u'' - (dim - 1)/r u' + c/r^2 u = lambda u   on (r_in, r_out)

which is discretized in physical radius with a cell-centred finite-volume
scheme, solved densely at two resolutions and Richardson-extrapolated.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.optimize import brentq

from .errors import DomainError

_TRANSVERSE = {
    # j-th transverse eigenvalue on an interval of width eps, j >= 1
    "DN": lambda j, eps: ((2 * j - 1) * math.pi / (2.0 * eps)) ** 2,
    "DD": lambda j, eps: (j * math.pi / eps) ** 2,
    "NN": lambda j, eps: ((j - 1) * math.pi / eps) ** 2,
}


@dataclass(frozen=True)
class OracleSpectrum:
    eigenvalues: np.ndarray
    source: str  # "closed-form" or "radial-ODE"
    accuracy: np.ndarray


def rectangle_spectrum(length: float, eps: float, bc_t: str, k: int, lateral: str = "D") -> OracleSpectrum:
    """k smallest values of ``(n pi / L)^2 + tau_j(eps)``.

    ``lateral='D'`` uses ``n >= 1`` (Dirichlet ends), ``'N'`` uses ``n >= 0``.
    """
    if length <= 0 or eps <= 0:
        raise DomainError("length and eps must be positive")
    if bc_t not in _TRANSVERSE:
        raise DomainError(f"bc_t must be one of {sorted(_TRANSVERSE)}")
    if lateral not in ("D", "N"):
        raise DomainError("lateral must be 'D' or 'N'")
    tau = _TRANSVERSE[bc_t]
    n0 = 1 if lateral == "D" else 0
    # both sequences are increasing, so a heap walk yields the merged order
    heap = [((n0 * math.pi / length) ** 2 + tau(1, eps), n0, 1)]
    seen = {(n0, 1)}
    values = []
    while len(values) < k:
        val, n, j = heapq.heappop(heap)
        values.append(val)
        for nn, jj in ((n + 1, j), (n, j + 1)):
            if (nn, jj) not in seen:
                seen.add((nn, jj))
                heapq.heappush(heap, ((nn * math.pi / length) ** 2 + tau(jj, eps), nn, jj))
    return OracleSpectrum(np.array(values), "closed-form", np.zeros(k))


def _radial_levels(dim, r_in, r_out, inner_bc, outer_bc, c_mode, k, n):
    """Cell-centred FV eigenvalues of the radial operator with n cells."""
    h = (r_out - r_in) / n
    centers = r_in + (np.arange(n) + 0.5) * h
    faces = r_in + np.arange(n + 1) * h
    p = faces ** (dim - 1)
    weight = centers ** (dim - 1)
    K = np.zeros((n, n))
    inner = p[1:-1] / h ** 2
    idx = np.arange(n - 1)
    K[idx, idx] += inner
    K[idx + 1, idx + 1] += inner
    K[idx, idx + 1] -= inner
    K[idx + 1, idx] -= inner
    # Dirichlet faces: zero boundary value at half a cell from the first centre
    if inner_bc == "D":
        K[0, 0] += p[0] / (0.5 * h * h)
    if outer_bc == "D":
        K[-1, -1] += p[-1] / (0.5 * h * h)
    K[np.arange(n), np.arange(n)] += c_mode * centers ** (dim - 3)
    scale = 1.0 / np.sqrt(weight)
    S = K * scale[:, None] * scale[None, :]
    return la.eigh(S, eigvals_only=True, subset_by_index=[0, k - 1])


def radial_shell_spectrum(dim: int, R: float, eps: float, inner_bc: str, outer_bc: str,
                          mode: int, k: int, resolution: int = 256) -> OracleSpectrum:
    """Radial eigenvalues on ``(R, R + eps)`` for angular mode ``m`` (dim 2) or degree ``l`` (dim 3).

    For a tube built on the concave side pass ``R - eps`` as inner radius and
    swap the conditions.
    """
    if dim not in (2, 3):
        raise DomainError("dim must be 2 or 3")
    if R <= 0 or eps <= 0:
        raise DomainError("R and eps must be positive")
    if resolution < 64:
        raise DomainError(f"resolution {resolution} < 64 refused")
    if inner_bc not in ("D", "N") or outer_bc not in ("D", "N"):
        raise DomainError("boundary conditions must be 'D' or 'N'")
    c_mode = mode ** 2 if dim == 2 else mode * (mode + 1)
    coarse = _radial_levels(dim, R, R + eps, inner_bc, outer_bc, c_mode, k, resolution)
    fine = _radial_levels(dim, R, R + eps, inner_bc, outer_bc, c_mode, k, 2 * resolution)
    extrapolated = (4.0 * fine - coarse) / 3.0
    return OracleSpectrum(extrapolated, "radial-ODE", np.abs(fine - coarse) / 3.0)


def shell_l0_dn_root(R: float, eps: float, index: int = 1) -> float:
    """Exact l=0 eigenvalue of the spherical shell, Dirichlet at R, Neumann at R+eps.

    With ``u = v/r`` the problem is ``-v'' = lambda v``, ``v(R) = 0`` and
    ``v'(R+eps) = v(R+eps)/(R+eps)``, so ``v = sin(q (r - R))`` and
    ``q cos(q eps) (R + eps) = sin(q eps)``.
    """
    outer = R + eps

    def f(q):
        return q * outer * math.cos(q * eps) - math.sin(q * eps)

    # tan(q eps) = q (R + eps): the index-th positive root has q eps in ((i-1) pi, (i-1/2) pi)
    lo = ((index - 1) * math.pi + 1e-9) / eps
    hi = ((index - 0.5) * math.pi) / eps * (1.0 - 1e-12)
    q = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return q * q


def tube_radial_configuration(radius: float, orientation: int, eps: float, conditions: str = "DN"):
    """Map a circle/sphere tube to ``(inner radius, inner bc, outer bc)`` of the radial problem."""
    bottom, top = conditions[0], conditions[1]
    if orientation > 0:
        return radius, bottom, top
    return radius - eps, top, bottom


def merged_shell_spectrum(dim: int, radius: float, orientation: int, eps: float, k: int,
                          conditions: str = "DN", mode_max: int = 8,
                          resolution: int = 256) -> OracleSpectrum:
    """Merge the radial spectra of all angular modes up to ``mode_max`` with multiplicity."""
    r_in, inner_bc, outer_bc = tube_radial_configuration(radius, orientation, eps, conditions)
    values, errors = [], []
    for mode in range(mode_max + 1):
        mult = (1 if mode == 0 else 2) if dim == 2 else 2 * mode + 1
        spec = radial_shell_spectrum(dim, r_in, eps, inner_bc, outer_bc, mode, k, resolution)
        for v, e in zip(spec.eigenvalues, spec.accuracy):
            values.extend([v] * mult)
            errors.extend([e] * mult)
    order = np.argsort(values, kind="stable")[:k]
    return OracleSpectrum(np.asarray(values)[order], "radial-ODE", np.asarray(errors)[order])
