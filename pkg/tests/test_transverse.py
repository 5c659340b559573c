import math

import numpy as np
import pytest

from thintube.assembly import transverse_pair
from thintube.eigensolve import smallest_eigenpairs
from thintube.errors import DomainError
from thintube.transverse import (chi, chi_prime, orthogonal_part, transverse_eigenvalue,
                                 transverse_project)


def test_modes_satisfy_boundary_conditions():
    for k in (1, 2, 5):
        assert chi(k, 0.0) == pytest.approx(0.0)
        assert chi_prime(k, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_first_eigenvalue():
    assert transverse_eigenvalue(1) == pytest.approx(math.pi ** 2 / 4)
    assert transverse_eigenvalue(3) == pytest.approx(25 * math.pi ** 2 / 4)
    with pytest.raises(DomainError):
        transverse_eigenvalue(0)


def test_discrete_transverse_pair_converges():
    vals = smallest_eigenpairs(transverse_pair(512), 3, shift=-1.0).eigenvalues
    exact = [transverse_eigenvalue(k) for k in (1, 2, 3)]
    np.testing.assert_allclose(vals, exact, rtol=1e-4)


def test_projection_of_pure_mode():
    t = np.linspace(0.0, 1.0, 129)
    field = np.outer([1.0, -2.0, 0.5], chi(1, t))
    phi, frac = transverse_project(field, t)
    np.testing.assert_allclose(phi, [1.0, -2.0, 0.5], rtol=1e-8)
    assert frac < 1e-6


def test_projection_of_second_mode_is_fully_orthogonal():
    t = np.linspace(0.0, 1.0, 129)
    _, frac = transverse_project(chi(2, t)[None, :], t)
    assert frac == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(orthogonal_part(chi(2, t), t)[0], chi(2, t), atol=1e-6)


def test_zero_field():
    t = np.linspace(0.0, 1.0, 17)
    with pytest.raises(DomainError):
        transverse_project(np.zeros((2, 17)), t)
    assert np.all(orthogonal_part(np.zeros((2, 17)), t) == 0.0)
