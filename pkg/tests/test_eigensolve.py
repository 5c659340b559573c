import numpy as np
import pytest

from thintube.acceptance import random_pencil
from thintube.assembly import Resolution, assemble_tube
from thintube.eigensolve import count_below, dense_reference, smallest_eigenpairs
from thintube.errors import DomainError
from thintube.geometry import Circle, Ellipse


def test_random_pencils_match_dense():
    rng = np.random.default_rng(7)
    for _ in range(50):
        A, B = random_pencil(rng)
        got = smallest_eigenpairs((A, B), 5, tol=1e-10).eigenvalues
        ref = dense_reference((A, B), 5).eigenvalues
        np.testing.assert_allclose(got, ref, atol=1e-8)


def test_shift_above_spectrum_is_lowered():
    pair = assemble_tube(Ellipse(1.0, 0.5, -1), 0.1, Resolution(16, 8))
    ref = dense_reference(pair, 4).eigenvalues
    for shift in (-1e4, 0.0, 300.0, 1e4):
        spec = smallest_eigenpairs(pair, 4, tol=1e-10, shift=shift)
        np.testing.assert_allclose(spec.eigenvalues, ref, rtol=1e-10)
    assert spec.solver_stats["shift"] < ref[0]


def test_inertia_counts():
    A, B = random_pencil(np.random.default_rng(3))
    vals = dense_reference((A, B), A.shape[0]).eigenvalues
    for sigma in (vals[0] - 1, 0.5 * (vals[2] + vals[3]), vals[-1] + 1):
        assert count_below((A, B), sigma) == int(np.sum(vals < sigma))


def test_double_eigenvalues_are_both_found():
    pair = assemble_tube(Circle(1.0), 0.1, Resolution(32, 8))
    vals = smallest_eigenpairs(pair, 3, tol=1e-10, shift=200.0).eigenvalues
    assert vals[1] == pytest.approx(vals[2], rel=1e-10)
    assert vals[0] < vals[1]


def test_lobpcg_path_agrees_with_lanczos():
    pair = assemble_tube(Ellipse(1.0, 0.5), 0.2, Resolution(32, 16))
    lan = smallest_eigenpairs(pair, 4, tol=1e-7, method="lanczos").eigenvalues
    lob = smallest_eigenpairs(pair, 4, tol=1e-7, method="lobpcg", max_restarts=200)
    assert lob.solver_stats["method"] == "lobpcg"
    np.testing.assert_allclose(lob.eigenvalues, lan, rtol=1e-6)


def test_vectors_are_b_orthonormal_and_deterministic():
    pair = assemble_tube(Circle(1.0), 0.1, Resolution(16, 8))
    a = smallest_eigenpairs(pair, 3, tol=1e-10)
    b = smallest_eigenpairs(pair, 3, tol=1e-10)
    gram = a.eigenvectors.T @ (pair.B @ a.eigenvectors)
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-10)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.all(a.residual_norms <= 1e-10 * np.maximum(1, np.abs(a.eigenvalues)))


def test_bad_arguments():
    A, B = random_pencil(np.random.default_rng(1))
    with pytest.raises(DomainError):
        smallest_eigenpairs((A, B), 0)
    with pytest.raises(DomainError):
        smallest_eigenpairs((A, B), 3, method="arnoldi")
