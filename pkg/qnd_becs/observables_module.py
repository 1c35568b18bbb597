# observables_module.py
"""
Spin-operator algebra on the two-BEC Fock grid.

Joint operators are never materialized on the (N+1)^2 product space; every
expectation is a contraction of single-BEC matrices against the 4-index
density tensor.
"""

import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np

from .models import AtomDensityMatrix, JointOperator, SpinAxis, SpinOperatorMatrix
from .numerics.common import check_hermitian, real_part
from .numerics.special_functions import rotation_matrix_sy

logger = logging.getLogger(__name__)

AXES = (SpinAxis.X, SpinAxis.Y, SpinAxis.Z)


@lru_cache(maxsize=128)
def spin_matrix(axis: SpinAxis, n_atoms: int) -> SpinOperatorMatrix:
    """
    Schwinger spin operator of one BEC with eigenvalues 2k - N.

    S^x and S^y couple k to k+1 with magnitude sqrt((k+1)(N-k)); the S^y
    phase is fixed so that [S^x, S^y] = 2i S^z.
    """
    axis = SpinAxis(axis)
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    k = np.arange(n_atoms)
    ladder = np.sqrt((k + 1.0) * (n_atoms - k))
    entries = np.zeros((n_atoms + 1, n_atoms + 1), dtype=complex)
    if axis is SpinAxis.Z:
        entries[np.diag_indices(n_atoms + 1)] = 2.0 * np.arange(n_atoms + 1) - n_atoms
    elif axis is SpinAxis.X:
        entries[k + 1, k] = ladder
        entries[k, k + 1] = ladder
    else:
        entries[k + 1, k] = -1j * ladder
        entries[k, k + 1] = 1j * ladder
    return SpinOperatorMatrix(axis=axis, entries=entries)


def _validated(rho: AtomDensityMatrix) -> np.ndarray:
    check_hermitian(rho.as_matrix(), "density matrix")
    return rho.entries


def two_body_expectation(rho: AtomDensityMatrix, op_1: np.ndarray, op_2: np.ndarray) -> complex:
    """Tr[(op_1 x op_2) rho] by direct contraction."""
    return complex(np.einsum("ca,db,abcd->", op_1, op_2, rho.entries))


def reduced_density_matrix(rho: AtomDensityMatrix, which_bec: int) -> np.ndarray:
    """Partial trace over the other BEC."""
    if which_bec == 1:
        return np.einsum("ikjk->ij", rho.entries)
    if which_bec == 2:
        return np.einsum("kikj->ij", rho.entries)
    raise ValueError(f"which_bec must be 1 or 2, got {which_bec}")


def expectation(rho: AtomDensityMatrix, which_bec: int, axis: SpinAxis) -> float:
    """
    Mean of one BEC's spin component.

    Raises:
        IntegrityError: if rho is not Hermitian within tolerance
    """
    _validated(rho)
    reduced = reduced_density_matrix(rho, which_bec)
    operator = spin_matrix(SpinAxis(axis), rho.n_atoms).entries
    return real_part(np.trace(reduced @ operator), f"<S{which_bec}{SpinAxis(axis).value}>")


def joint_variance(rho: AtomDensityMatrix, combo: JointOperator) -> float:
    """Variance of S1^a +/- S2^a for one of the three joint operators."""
    _validated(rho)
    combo = JointOperator(combo)
    operator = spin_matrix(combo.axis, rho.n_atoms).entries
    squared = operator @ operator
    rho_1 = reduced_density_matrix(rho, 1)
    rho_2 = reduced_density_matrix(rho, 2)

    mean = np.trace(rho_1 @ operator) + combo.sign * np.trace(rho_2 @ operator)
    second = (
        np.trace(rho_1 @ squared)
        + np.trace(rho_2 @ squared)
        + 2.0 * combo.sign * two_body_expectation(rho, operator, operator)
    )
    return real_part(second - mean * mean, f"Var({combo.value})")


def collective_moments(rho: AtomDensityMatrix, collective: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean vector and second-moment matrix of the total spin S1 + S2.

    With collective=False the moments of BEC 1 alone are returned.

    Returns:
        (mean, moments) with mean[a] = <S_a> and moments[a, b] = <S_a S_b>
        (complex; the real part is the symmetrized moment)
    """
    _validated(rho)
    n_atoms = rho.n_atoms
    operators = [spin_matrix(axis, n_atoms).entries for axis in AXES]
    rho_1 = reduced_density_matrix(rho, 1)
    rho_2 = reduced_density_matrix(rho, 2)

    mean = np.zeros(3)
    moments = np.zeros((3, 3), dtype=complex)
    for a, op_a in enumerate(operators):
        mean[a] = np.real(np.trace(rho_1 @ op_a))
        if collective:
            mean[a] += np.real(np.trace(rho_2 @ op_a))
        for b, op_b in enumerate(operators):
            product = op_a @ op_b
            moments[a, b] = np.trace(rho_1 @ product)
            if collective:
                moments[a, b] += (
                    np.trace(rho_2 @ product)
                    + two_body_expectation(rho, op_a, op_b)
                    + two_body_expectation(rho, op_b, op_a)
                )
    return mean, moments


@lru_cache(maxsize=128)
def _rotated_basis_cached(axis: SpinAxis, n_atoms: int) -> np.ndarray:
    if axis is SpinAxis.Z:
        basis = np.eye(n_atoms + 1, dtype=complex)
    else:
        # exp(-i S^y pi/4) turns the z basis into the x basis
        basis = np.array(rotation_matrix_sy(n_atoms, math.pi / 2.0), dtype=complex)
        if axis is SpinAxis.Y:
            eigenvalues = 2.0 * np.arange(n_atoms + 1) - n_atoms
            basis = np.exp(-1j * eigenvalues * math.pi / 4.0)[:, None] * basis
    basis.setflags(write=False)
    return basis


def rotated_basis(axis: SpinAxis, n_atoms: int) -> np.ndarray:
    """Eigenbasis of S^axis as columns, column k having eigenvalue 2k - N."""
    return _rotated_basis_cached(SpinAxis(axis), n_atoms)


def basis_probability_grid(
    rho: AtomDensityMatrix, basis1: SpinAxis, basis2: SpinAxis
) -> np.ndarray:
    """
    Joint outcome distribution p(k1, k2) for measuring BEC 1 along basis1 and
    BEC 2 along basis2.
    """
    entries = _validated(rho)
    v_1 = rotated_basis(basis1, rho.n_atoms)
    v_2 = rotated_basis(basis2, rho.n_atoms)
    half = np.einsum("abcd,ck,dl->abkl", entries, v_1, v_2)
    grid = np.einsum("ak,bl,abkl->kl", v_1.conj(), v_2.conj(), half)
    residue = float(np.max(np.abs(grid.imag)))
    if residue > 1e-9:
        logger.warning(f"Basis probability grid has imaginary residue {residue:.3e}")
    return np.real(grid)
