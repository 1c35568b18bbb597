# test_special_functions.py
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm

from qnd_becs.numerics.common import CancellationWarning
from qnd_becs.numerics.special_functions import (
    HalfInteger,
    cg_table,
    clebsch_gordan,
    clebsch_gordan_twice,
    ln_binomial,
    ln_factorial,
    normalized_legendre_table,
    rotation_matrix_sx,
    rotation_matrix_sy,
    spherical_harmonic,
    sx_rotation_element,
    sy_rotation_element,
)
from qnd_becs.observables_module import spin_matrix


def test_ln_factorial_small_values():
    assert ln_factorial(0) == 0.0
    assert ln_factorial(1) == 0.0
    assert ln_factorial(20) == pytest.approx(math.log(2432902008176640000), rel=1e-12)


def test_ln_factorial_rejects_negative():
    with pytest.raises(ValueError):
        ln_factorial(-1)


def test_ln_factorial_large_argument():
    assert ln_factorial(10_000) == pytest.approx(math.lgamma(10_001), rel=1e-12)


def test_ln_binomial_values():
    assert ln_binomial(20, 10) == pytest.approx(math.log(184756), rel=1e-13)
    assert ln_binomial(7, 0) == 0.0
    assert ln_binomial(5, 7) == float("-inf")
    assert ln_binomial(5, -1) == float("-inf")


@given(st.integers(min_value=0, max_value=300), st.data())
@settings(max_examples=60, deadline=None)
def test_ln_binomial_matches_exact_integers(n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    assert ln_binomial(n, k) == pytest.approx(math.log(math.comb(n, k)), abs=1e-9)
    # symmetry holds bit for bit
    assert ln_binomial(n, k) == ln_binomial(n, n - k)


def test_half_integer_conversion():
    assert HalfInteger.of(Fraction(3, 2)).twice_value == 3
    assert HalfInteger.of(2).twice_value == 4
    assert str(HalfInteger(3)) == "3/2"
    assert (-HalfInteger(3)).value == -1.5
    with pytest.raises(ValueError):
        HalfInteger.of(Fraction(1, 3))


def test_singlet_coefficient():
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert clebsch_gordan(
        Fraction(1, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2), 0, 0
    ) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)


def test_selection_rules_give_zero():
    assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
    assert clebsch_gordan_twice(2, 2, 2, 0, 2, 4) == 0.0


@pytest.mark.parametrize("twice_j", [1, 2, 5, 20])
def test_coupling_to_zero(twice_j):
    j = twice_j / 2
    for twice_m in range(-twice_j, twice_j + 1, 2):
        m = twice_m / 2
        expected = (-1) ** round(j - m) / math.sqrt(twice_j + 1)
        assert clebsch_gordan(j, m, j, -m, 0, 0) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("twice_j1, twice_j2", [(1, 1), (2, 1), (6, 4), (20, 20)])
def test_clebsch_gordan_orthogonality(twice_j1, twice_j2):
    rows = [
        (tm1, tm2)
        for tm1 in range(-twice_j1, twice_j1 + 1, 2)
        for tm2 in range(-twice_j2, twice_j2 + 1, 2)
    ]
    columns = [
        (tJ, tM)
        for tJ in range(abs(twice_j1 - twice_j2), twice_j1 + twice_j2 + 1, 2)
        for tM in range(-tJ, tJ + 1, 2)
    ]
    assert len(rows) == len(columns)
    column_index = {key: i for i, key in enumerate(columns)}
    matrix = np.zeros((len(rows), len(columns)))
    for i, (tm1, tm2) in enumerate(rows):
        tM = tm1 + tm2
        for tJ in range(abs(twice_j1 - twice_j2), twice_j1 + twice_j2 + 1, 2):
            if abs(tM) <= tJ:
                matrix[i, column_index[(tJ, tM)]] = clebsch_gordan_twice(
                    twice_j1, tm1, twice_j2, tm2, tJ, tM
                )
    np.testing.assert_allclose(matrix @ matrix.T, np.eye(len(rows)), atol=1e-10)


def test_cg_table_is_read_only_and_consistent():
    table = cg_table(4)
    assert table.shape == (5, 5, 5)
    assert not table.flags.writeable
    # l=0 entries couple m1 with -m2 = -m1
    assert table[0, 1, 1] == pytest.approx(clebsch_gordan(2, -1, 2, 1, 0, 0))


def test_spherical_harmonic_landmarks():
    assert spherical_harmonic(0, 0, 0.4, 1.3) == pytest.approx(1 / (2 * math.sqrt(math.pi)))
    assert abs(spherical_harmonic(1, 0, math.pi / 2, 0.0)) < 1e-15
    theta, phi = 0.7, 0.3
    expected = -math.sqrt(15 / (8 * math.pi)) * math.sin(theta) * math.cos(theta) * np.exp(1j * phi)
    assert spherical_harmonic(2, 1, theta, phi) == pytest.approx(expected, abs=1e-12)
    assert spherical_harmonic(2, -1, theta, phi) == pytest.approx(-np.conj(expected), abs=1e-12)


def test_spherical_harmonic_domain_error():
    with pytest.raises(ValueError):
        spherical_harmonic(2, 3, 0.1, 0.2)


def test_legendre_table_orthonormal_under_quadrature():
    l_max = 24
    nodes, weights = leggauss(40)
    table = normalized_legendre_table(l_max, nodes)
    for q in range(l_max + 1):
        block = table[q:, q, :]
        gram = 2 * math.pi * (block * weights[None, :]) @ block.T
        np.testing.assert_allclose(gram, np.eye(l_max + 1 - q), atol=1e-9)


def test_sy_rotation_identity_at_zero_angle():
    np.testing.assert_allclose(rotation_matrix_sy(6, 0.0), np.eye(7), atol=1e-15)
    assert sx_rotation_element(6, 2, 2, 0.0) == pytest.approx(1.0)


def test_single_atom_rotation_convention():
    theta = 0.9
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    np.testing.assert_allclose(rotation_matrix_sy(1, theta), [[c, s], [-s, c]], atol=1e-15)


@pytest.mark.parametrize("n_atoms", [1, 4])
def test_rotations_match_matrix_exponential(n_atoms):
    theta = math.pi / 2
    s_y = spin_matrix("y", n_atoms).entries
    s_x = spin_matrix("x", n_atoms).entries
    np.testing.assert_allclose(rotation_matrix_sy(n_atoms, theta), expm(-0.5j * theta * s_y), atol=1e-10)
    np.testing.assert_allclose(rotation_matrix_sx(n_atoms, theta), expm(-0.5j * theta * s_x), atol=1e-10)


def test_sx_phase_pattern():
    theta = 1.1
    for k in range(5):
        for k_prime in range(5):
            value = sx_rotation_element(4, k, k_prime, theta)
            if (k_prime - k) % 4 == 0:
                assert value.imag == 0.0
            assert abs(value) == pytest.approx(abs(sy_rotation_element(4, k, k_prime, theta)))


def test_rotation_element_index_check():
    with pytest.raises(ValueError):
        sy_rotation_element(3, 4, 0, 0.2)


@pytest.mark.parametrize("n_atoms", range(1, 25))
def test_rotation_unitarity(n_atoms):
    for theta in np.linspace(0.0, 2 * math.pi, 16):
        for matrix in (rotation_matrix_sy(n_atoms, float(theta)), rotation_matrix_sx(n_atoms, float(theta))):
            np.testing.assert_allclose(matrix.conj().T @ matrix, np.eye(n_atoms + 1), atol=1e-10)


@pytest.mark.parametrize("j1, j2, J", [(1, 1, 1), (5, 5, 5), (10, 10, 5)])
def test_parity_zeros_are_silent(j1, j2, J):
    # <j1 0; j2 0 | J 0> vanishes when j1 + j2 + J is odd
    with warnings.catch_warnings():
        warnings.simplefilter("error", CancellationWarning)
        assert clebsch_gordan(j1, 0, j2, 0, J, 0) == pytest.approx(0.0, abs=1e-12)
