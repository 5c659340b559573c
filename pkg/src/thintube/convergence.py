"""Grid-refinement controller with Richardson extrapolation of eigenvalues."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import OperatorPair, Resolution
from .eigensolve import Spectrum, smallest_eigenpairs

DEFAULT_TOL_DISC = 1e-3


def richardson(coarse, fine, order: int = 2):
    """Eliminate the ``h**order`` term from values computed at ``h`` and ``h/2``."""
    factor = 2.0 ** order
    return (factor * np.asarray(fine) - np.asarray(coarse)) / (factor - 1.0)


@dataclass(frozen=True, eq=False)
class LadderResult:
    values: np.ndarray  # best estimate per eigenvalue
    error: np.ndarray  # estimated absolute discretization error
    raw: list  # eigenvalues at every level
    resolutions: list
    finest: Spectrum
    finest_pair: OperatorPair
    converged: bool


def converged_eigenvalues(build: Callable[[Resolution], OperatorPair], base: Resolution, k: int,
                          tol_disc: float = DEFAULT_TOL_DISC, extrapolate: bool = True,
                          max_levels: int = 5, **solve_kwargs) -> LadderResult:
    """Refine ``base`` by factors of two until the estimate moves by less than ``tol_disc``.

    With extrapolation, successive Richardson values from consecutive level
    pairs are compared (at least three levels); without it, raw eigenvalues.
    The reported error is the last change, per eigenvalue.
    """
    raw, resolutions = [], []
    estimates = []
    res = base
    spectrum = pair = None
    for level in range(max_levels):
        pair = build(res)
        kk = min(k, pair.dim)
        spectrum = smallest_eigenpairs(pair, kk, **solve_kwargs)
        values = np.full(k, np.nan)
        values[:kk] = spectrum.eigenvalues
        raw.append(values)
        resolutions.append(res)
        if extrapolate and level >= 1:
            estimates.append(richardson(raw[-2], raw[-1]))
        elif not extrapolate:
            estimates.append(values)
        if len(estimates) >= 2:
            change = np.abs(estimates[-1] - estimates[-2])
            if np.all(change[np.isfinite(change)] < tol_disc):
                return LadderResult(estimates[-1], change, raw, resolutions, spectrum, pair, True)
        res = res.refined()
    change = np.abs(estimates[-1] - estimates[-2]) if len(estimates) >= 2 else np.full(k, np.inf)
    return LadderResult(estimates[-1], change, raw, resolutions, spectrum, pair, False)


def exact_pair_values(build: Callable[[Resolution], OperatorPair], base: Resolution, k: int,
                      **solve_kwargs) -> LadderResult:
    """Single solve for pairs whose discretization is exact (e.g. 1x1 harmonic blocks)."""
    pair = build(base)
    kk = min(k, pair.dim)
    spectrum = smallest_eigenpairs(pair, kk, **solve_kwargs)
    values = np.full(k, np.nan)
    values[:kk] = spectrum.eigenvalues
    return LadderResult(values, np.zeros(k), [values], [base], spectrum, pair, True)
