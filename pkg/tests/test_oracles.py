import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import jv, jvp, yv, yvp

from thintube.errors import DomainError
from thintube.oracles import (merged_shell_spectrum, radial_shell_spectrum, rectangle_spectrum,
                              shell_l0_dn_root, tube_radial_configuration)


def test_rectangle_closed_form():
    spec = rectangle_spectrum(math.pi, 0.1, "DN", 4)
    np.testing.assert_allclose(spec.eigenvalues, [n * n + (math.pi / 0.2) ** 2 for n in (1, 2, 3, 4)])
    neu = rectangle_spectrum(1.0, 0.5, "NN", 3, lateral="N")
    np.testing.assert_allclose(neu.eigenvalues, [0.0, math.pi ** 2, 4 * math.pi ** 2])


def test_shell_l0_against_exact_root():
    spec = radial_shell_spectrum(3, 1.0, 0.1, "D", "N", 0, 2)
    assert spec.eigenvalues[0] == pytest.approx(shell_l0_dn_root(1.0, 0.1), rel=1e-8)
    assert spec.eigenvalues[1] == pytest.approx(shell_l0_dn_root(1.0, 0.1, 2), rel=1e-7)


def bessel_dn_root(m, r1, r2, guess):
    """Dirichlet at r1, Neumann at r2: J_m(k r1) Y_m'(k r2) - Y_m(k r1) J_m'(k r2) = 0."""
    f = lambda k: jv(m, k * r1) * yvp(m, k * r2) - yv(m, k * r1) * jvp(m, k * r2)  # noqa: E731
    k0 = math.sqrt(guess)
    return brentq(f, 0.97 * k0, 1.03 * k0, xtol=1e-14) ** 2


@pytest.mark.parametrize("mode", [0, 1, 3])
def test_annulus_matches_bessel_cross_product(mode):
    spec = radial_shell_spectrum(2, 1.0, 0.1, "D", "N", mode, 1)
    exact = bessel_dn_root(mode, 1.0, 1.1, spec.eigenvalues[0])
    assert spec.eigenvalues[0] == pytest.approx(exact, rel=1e-8)
    assert spec.accuracy[0] < 1e-3 * exact


def test_inward_configuration_swaps_conditions():
    assert tube_radial_configuration(1.0, 1, 0.2) == (1.0, "D", "N")
    assert tube_radial_configuration(1.0, -1, 0.2) == (0.8, "N", "D")


def test_merged_sphere_multiplicities():
    vals = merged_shell_spectrum(3, 1.0, 1, 0.1, 9, mode_max=3).eigenvalues
    assert vals[1] == vals[2] == vals[3]
    assert vals[4] == vals[8]


def test_oracle_refuses_coarse_grids_and_bad_input():
    with pytest.raises(DomainError):
        radial_shell_spectrum(2, 1.0, 0.1, "D", "N", 0, 1, resolution=32)
    with pytest.raises(DomainError):
        radial_shell_spectrum(4, 1.0, 0.1, "D", "N", 0, 1)
    with pytest.raises(DomainError):
        rectangle_spectrum(1.0, 0.1, "ND", 1)
