"""Lowest eigenpairs of symmetric-definite pencils ``A x = lambda B x``.

The primary path is shift-invert block Lanczos.  ``A - sigma B`` is factorized
by SuperLU in symmetric mode without row pivoting, which makes the pivots an
``LDL^T`` diagonal; by Sylvester's law their signs count the eigenvalues below
``sigma``.  That count is used twice: to certify that the shift lies below the
whole spectrum (so the largest eigenvalues of the shift-inverted operator are
the smallest of the pencil) and, after the solve, to check that no eigenvalue
inside the reported range was missed because of multiplicity.

Residual norms are measured in the dual norm ``||r||_{B^-1}`` of a
``B``-normalized vector, which bounds the eigenvalue error in absolute terms.
A pair is accepted when that norm is below ``tol * max(1, |lambda|)``, or
below the round-off floor ``64 u || |A| |x| ||_{B^-1}`` that stiff fine-grid
pencils hit first.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DimensionCapError, DomainError, ShiftRetryError

DEFAULT_SEED = 0x5EED
DEFAULT_TOL = 1e-8
DENSE_CAP = 4000


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residual_norms: np.ndarray
    solver_stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def _as_pencil(pair):
    if isinstance(pair, tuple):
        A, B = pair
    else:
        A, B = pair.A, pair.B
    return sp.csr_matrix(A), sp.csr_matrix(B)


class ShiftedFactor:
    """Factorization of ``A - sigma B`` with its inertia."""

    def __init__(self, A, B, sigma):
        self.sigma = float(sigma)
        M = (A - self.sigma * B).tocsc()
        self.lu = spla.splu(M, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                            options={"SymmetricMode": True})
        pivots = self.lu.U.diagonal()
        if not np.all(np.isfinite(pivots)) or np.any(pivots == 0.0):
            raise np.linalg.LinAlgError("singular shifted matrix")
        if np.array_equal(self.lu.perm_r, self.lu.perm_c):
            self.below = int(np.count_nonzero(pivots < 0.0))
        else:
            # row pivoting broke the symmetric structure; count densely if affordable
            if M.shape[0] > DENSE_CAP:
                raise np.linalg.LinAlgError("inertia unavailable: pivoting occurred")
            self.below = int(np.count_nonzero(la.eigvalsh(M.toarray()) < 0.0))
        self.fill = int(self.lu.L.nnz + self.lu.U.nnz)

    def solve(self, rhs):
        return self.lu.solve(np.asarray(rhs, dtype=float))


def _dual_solver(B):
    d = B.diagonal()
    off = B - sp.diags(d)
    if off.count_nonzero() == 0 and np.all(d > 0):
        inv = 1.0 / d
        return lambda r: inv[:, None] * r if r.ndim == 2 else inv * r
    lu = spla.splu(B.tocsc())
    return lu.solve


def residual_norms(A, B, X, lam, dual=None):
    """``||A x - lam B x||_{B^-1} / ||x||_B`` column by column."""
    A, B = sp.csr_matrix(A), sp.csr_matrix(B)
    X = np.asarray(X, dtype=float).reshape(A.shape[0], -1)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    dual = dual or _dual_solver(B)
    BX = B @ X
    R = A @ X - BX * lam[None, :]
    num = np.einsum("ij,ij->j", R, dual(R))
    den = np.einsum("ij,ij->j", X, BX)
    return np.sqrt(np.abs(num) / den)


def _b_orthonormalize(W, B, basis, drop_tol=1e-10):
    """Orthonormalize ``W`` in the B-inner product against ``basis`` blocks and itself."""
    start = np.sqrt(np.maximum(np.einsum("ij,ij->j", W, B @ W), 0.0))
    scale = start.max() if start.size else 0.0
    if scale == 0.0:
        return W[:, :0]
    W = W / scale
    for _ in range(2):
        for Q in basis:
            W = W - Q @ ((B @ Q).T @ W)
        G = W.T @ (B @ W)
        G = 0.5 * (G + G.T)
        vals, vecs = la.eigh(G)
        keep = vals > drop_tol * max(vals.max(), 1e-300) if vals.size else vals > 0
        keep &= vals > drop_tol ** 2
        W = (W @ vecs[:, keep]) / np.sqrt(vals[keep])[None, :]
        if W.shape[1] == 0:
            break
    return W


def _rayleigh_ritz(A, B, X):
    BX = B @ X
    K = X.T @ (A @ X)
    M = X.T @ BX
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    vals, vecs = la.eigh(K, M)
    return vals, X @ vecs


def _scale(vals):
    return np.maximum(1.0, np.abs(vals))


def _accept_bound(A, X, vals, tol, dual):
    """Per-column acceptance threshold: relative tolerance or the round-off floor."""
    AX = abs(A) @ np.abs(X)
    floor = 64.0 * np.finfo(float).eps * np.sqrt(np.abs(np.einsum("ij,ij->j", AX, dual(AX))))
    return np.maximum(tol * _scale(vals), floor)


def _block_lanczos(A, B, factor, k, block, depth, tol, rng, max_restarts, dual):
    n = A.shape[0]
    X = rng.standard_normal((n, block))
    history = []
    for restart in range(1, max_restarts + 1):
        basis, images = [], []
        V = _b_orthonormalize(X, B, basis)
        size = 0
        for _ in range(depth):
            if V.shape[1] == 0:
                break
            W = factor.solve(B @ V)
            basis.append(V)
            images.append(W)
            size += V.shape[1]
            if size >= n:
                break
            V = _b_orthonormalize(W, B, basis)
        Q = np.hstack(basis)
        T = (B @ Q).T @ np.hstack(images)
        theta, S = la.eigh(0.5 * (T + T.T))
        order = np.argsort(-theta)
        take = min(block, Q.shape[1])
        ritz = Q @ S[:, order[:take]]
        vals, vecs = _rayleigh_ritz(A, B, ritz)
        res = residual_norms(A, B, vecs[:, :k], vals[:k], dual)
        bound = _accept_bound(A, vecs[:, :k], vals[:k], tol, dual)
        history.append(float((res / bound).max()))
        if np.all(res <= bound) or size >= n:
            return vals[:k], vecs[:, :k], res, restart, size
        X = vecs
    raise ConvergenceError(
        f"block Lanczos: residual at {history[-1]:.3g} x acceptance bound (tol {tol:.1e}) after {max_restarts} restarts",
        partial=Spectrum(vals[:k], vecs[:, :k], res, {"restarts": max_restarts, "history": history}),
    )


def _lobpcg(A, B, k, block, tol, rng, maxiter, dual, sigma):
    n = A.shape[0]
    X = rng.standard_normal((n, block))
    diag = (A - sigma * B).diagonal()
    diag = np.where(np.abs(diag) > 0, diag, 1.0)
    precond = spla.LinearOperator((n, n), matvec=lambda v: v / diag,
                                  matmat=lambda V: V / diag[:, None], dtype=float)
    with warnings.catch_warnings():
        # convergence is judged below with our own residual norm
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs = spla.lobpcg(A, X, B=B, M=precond, largest=False, tol=tol, maxiter=maxiter)
    vals, vecs = _rayleigh_ritz(A, B, vecs)
    res = residual_norms(A, B, vecs[:, :k], vals[:k], dual)
    return vals[:k], vecs[:, :k], res


def _admissible_shift(A, B, shift, max_tries):
    """Lower ``shift`` until ``A - shift B`` is factorizable with no eigenvalue below it."""
    scale = max(abs(shift), float(np.abs(A.diagonal()).max() / max(B.diagonal().min(), 1e-300)), 1.0)
    sigma = shift
    for attempt in range(max_tries):
        try:
            factor = ShiftedFactor(A, B, sigma)
        except (RuntimeError, np.linalg.LinAlgError):
            sigma = sigma - 1e-3 * scale * 2.0 ** attempt
            continue
        if factor.below == 0:
            return factor, attempt
        sigma = shift - scale * 2.0 ** (attempt - 6)
    raise ShiftRetryError(f"no admissible shift found below {shift} in {max_tries} tries")


def count_below(pair, sigma) -> int:
    """Number of eigenvalues of the pencil strictly below ``sigma``."""
    A, B = _as_pencil(pair)
    return ShiftedFactor(A, B, sigma).below


def smallest_eigenpairs(pair, k: int, tol: float = DEFAULT_TOL, shift: float | None = None,
                        seed: int = DEFAULT_SEED, method: str = "auto", vectors: bool = True,
                        max_restarts: int = 60, verify_count: bool = True,
                        lobpcg_threshold: int = 2_000_000) -> Spectrum:
    """The ``k`` algebraically smallest eigenpairs, with multiplicity.

    ``shift`` is a guess for a point just below the spectrum; it is lowered
    automatically if the inertia shows eigenvalues beneath it.
    """
    A, B = _as_pencil(pair)
    n = A.shape[0]
    if k < 1 or k > n:
        raise DomainError(f"k={k} must satisfy 1 <= k <= {n}")
    if method not in ("auto", "lanczos", "lobpcg"):
        raise DomainError(f"unknown method {method!r}")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    dual = _dual_solver(B)
    block = min(k + 4, n)
    sigma0 = 0.0 if shift is None else float(shift)
    stats = {"n": n, "k": k, "block": block}

    use_lobpcg = method == "lobpcg" or (method == "auto" and n > lobpcg_threshold)
    factor = None
    if not use_lobpcg:
        try:
            factor, retries = _admissible_shift(A, B, sigma0, max_tries=60)
            stats.update(shift=factor.sigma, shift_retries=retries, fill=factor.fill)
        except MemoryError:
            if method == "lanczos":
                raise
            use_lobpcg = True

    if use_lobpcg:
        if 5 * block >= n:
            raise DomainError("LOBPCG path needs n > 5 * block; use the Lanczos path")
        vals, vecs, res = _lobpcg(A, B, k, block, tol, rng, 20 * max_restarts, dual, sigma0)
        stats.update(method="lobpcg")
        if not np.all(res <= _accept_bound(A, vecs, vals, tol, dual)):
            raise ConvergenceError(f"LOBPCG residual {res.max():.3e} > {tol:.1e}",
                                   partial=Spectrum(vals, vecs, res, stats))
    else:
        depth = max(4, min(20, math.ceil(240 / block)))
        vals, vecs, res, restarts, size = _block_lanczos(
            A, B, factor, k, block, depth, tol, rng, max_restarts, dual)
        stats.update(method="block-lanczos", restarts=restarts, krylov_size=size)
        if verify_count and size < n:
            vals, vecs, res = _ensure_complete(A, B, k, vals, vecs, res, tol, stats, seed, max_restarts)

    stats["wall_time"] = time.perf_counter() - started
    return Spectrum(np.asarray(vals), vecs if vectors else None, np.asarray(res), stats)


def _ensure_complete(A, B, k, vals, vecs, res, tol, stats, seed, max_restarts):
    """Verify via inertia that no eigenvalue below the k-th was skipped."""
    gap = max(10 * tol, 1e-9 * max(1.0, abs(vals[-1])))
    for attempt in range(3):
        probe = vals[-1] + gap
        try:
            below = ShiftedFactor(A, B, probe).below
        except (RuntimeError, np.linalg.LinAlgError):
            gap *= 3.0
            continue
        found = int(np.count_nonzero(vals < probe))
        stats["count_check"] = (below, found)
        if below <= found:
            return vals, vecs, res
        # a missed eigenvalue: widen the block and solve again
        extra = below - found
        wider = smallest_eigenpairs((A, B), min(k + extra, A.shape[0]), tol=tol,
                                    shift=stats["shift"], seed=seed + attempt + 1,
                                    max_restarts=max_restarts, verify_count=False)
        vals = wider.eigenvalues[:k]
        vecs = wider.eigenvectors[:, :k]
        res = wider.residual_norms[:k]
        stats["widened"] = stats.get("widened", 0) + 1
    return vals, vecs, res


def dense_reference(pair, k: int, cap: int = DENSE_CAP) -> Spectrum:
    """Full dense symmetric-definite eigendecomposition truncated to ``k`` (validation only)."""
    A, B = _as_pencil(pair)
    n = A.shape[0]
    if n > cap:
        raise DimensionCapError(f"dimension {n} exceeds dense cap {cap}")
    if k < 1 or k > n:
        raise DomainError(f"k={k} must satisfy 1 <= k <= {n}")
    started = time.perf_counter()
    Ad, Bd = A.toarray(), B.toarray()
    vals, vecs = la.eigh(0.5 * (Ad + Ad.T), 0.5 * (Bd + Bd.T), subset_by_index=[0, k - 1])
    res = residual_norms(A, B, vecs, vals)
    return Spectrum(vals, vecs, res, {"method": "dense", "n": n,
                                      "wall_time": time.perf_counter() - started})
