"""Dirichlet-Neumann transverse problem on (0, 1) and the mode-projection diagnostic.

``-f'' = tau f`` with ``f(0) = 0`` and ``f'(1) = 0`` has eigenpairs
``tau_k = ((2k - 1) pi / 2)**2`` and ``chi_k(t) = sqrt(2) sin((2k - 1) pi t / 2)``.
Only odd multiples of ``pi/2`` are admissible: even multiples violate the
Neumann condition at ``t = 1``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError


def _check_index(k):
    if int(k) != k or k < 1:
        raise DomainError(f"mode index must be an integer >= 1, got {k!r}")
    return int(k)


def chi(k: int, t):
    """Normalized transverse mode ``chi_k``; accepts scalar or array ``t``."""
    k = _check_index(k)
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0.0) | (t_arr > 1.0)):
        raise DomainError("t must lie in [0, 1]")
    value = math.sqrt(2.0) * np.sin((2 * k - 1) * math.pi * t_arr / 2.0)
    return float(value) if value.ndim == 0 else value


def chi_prime(k: int, t):
    k = _check_index(k)
    w = (2 * k - 1) * math.pi / 2.0
    return math.sqrt(2.0) * w * np.cos(w * np.asarray(t, dtype=float))


def transverse_eigenvalue(k: int) -> float:
    k = _check_index(k)
    return ((2 * k - 1) * math.pi / 2.0) ** 2


def _quad(values, t):
    return simpson(values, x=t, axis=-1)


def transverse_project(field, t, surface_weights=None):
    """Split ``field[x, t]`` into its ``chi_1`` component and the remainder.

    Returns ``(phi, orthogonal_fraction)`` where ``phi[x] = int_0^1 field chi_1 dt``
    and the fraction is ``||field - phi (x) chi_1|| / ||field||`` in the
    unweighted product norm (surface weights times ``dt``, no ``h_eps``).
    Quadrature is composite Simpson on the given t-grid.
    """
    field = np.atleast_2d(np.asarray(field, dtype=float))
    t = np.asarray(t, dtype=float)
    if field.shape[-1] != t.size or t.size < 3:
        raise DomainError("t-grid must match the last field axis and have >= 3 points")
    if surface_weights is None:
        surface_weights = np.ones(field.shape[0])
    w = np.asarray(surface_weights, dtype=float)
    chi1 = chi(1, t)
    phi = _quad(field * chi1, t)
    rest = field - phi[:, None] * chi1[None, :]
    total = float(w @ _quad(field ** 2, t))
    if total <= 0.0:
        raise DomainError("orthogonal fraction undefined for a zero field")
    orth = float(w @ _quad(rest ** 2, t))
    return phi, math.sqrt(max(orth, 0.0) / total)


def orthogonal_part(field, t):
    """``field - phi (x) chi_1``, the component orthogonal to ``chi_1`` along t."""
    field = np.atleast_2d(np.asarray(field, dtype=float))
    chi1 = chi(1, np.asarray(t, dtype=float))
    phi = _quad(field * chi1, t)
    return field - phi[:, None] * chi1[None, :]
