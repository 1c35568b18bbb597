# entanglement_module.py
"""
Entanglement Module

Quantifies two-BEC entanglement and evaluates correlation-based witnesses:
- Logarithmic negativity through the partial transpose
- Fidelity with the spin-EPR state
- Hofmann-Takeuchi, DGCZ, Wineland squeezing and EPR-steering criteria
- Optimal squeezing angle perpendicular to the mean spin
"""

import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh

from .models import (
    AtomDensityMatrix,
    CriterionReport,
    JointOperator,
    PerpendicularVariance,
    SpinAxis,
    SystemParams,
)
from .numerics.common import (
    DENOMINATOR_TOLERANCE,
    EIGENVALUE_CLAMP,
    NumericalError,
    check_hermitian,
)
from .observables_module import collective_moments, expectation, joint_variance

logger = logging.getLogger(__name__)

ZETA_GRID_SIZE = 720
STEERING_TOLERANCE = 1e-12
WITNESS_MARGIN = 1e-6
# Squeezing is measured on BEC 1 alone unless the collective spin is requested
WINELAND_COLLECTIVE = False


def partial_transpose(rho: AtomDensityMatrix) -> np.ndarray:
    """Transpose on BEC 2: (k1, k2, k1', k2') -> (k1, k2', k1', k2)."""
    return np.transpose(rho.entries, (0, 3, 2, 1))


def log_negativity(rho: AtomDensityMatrix) -> Tuple[float, float]:
    """
    Logarithmic negativity E and its ratio to E_max = log2(N + 1).

    Raises:
        NumericalError: if the eigensolver fails
    """
    dimension = rho.dimension
    transposed = partial_transpose(rho).reshape(dimension, dimension)
    transposed = 0.5 * (transposed + transposed.conj().T)
    try:
        eigenvalues = eigvalsh(transposed)
    except (LinAlgError, ValueError) as e:
        logger.error(f"Error computing log negativity: {str(e)}")
        raise NumericalError(f"eigensolver failed: {e}", point=rho.point())
    magnitudes = np.abs(eigenvalues)
    magnitudes[magnitudes < EIGENVALUE_CLAMP] = 0.0
    value = max(0.0, math.log2(float(np.sum(magnitudes))))
    return value, value / math.log2(rho.n_atoms + 1)


def epr_fidelity(rho: AtomDensityMatrix) -> float:
    """Overlap <EPR|rho|EPR> with |EPR> = (N+1)^{-1/2} sum_k |k>|k>."""
    diagonal_block = np.einsum("aabb->", rho.entries)
    return float(np.real(diagonal_block)) / (rho.n_atoms + 1)


def _variances(rho: AtomDensityMatrix) -> Dict[JointOperator, float]:
    return {combo: joint_variance(rho, combo) for combo in JointOperator}


def criterion_ht(
    rho: AtomDensityMatrix, variances: Optional[Dict[JointOperator, float]] = None
) -> float:
    """Sum of the three joint variances over 4N; below one witnesses entanglement."""
    variances = variances or _variances(rho)
    return sum(variances.values()) / (4.0 * rho.n_atoms)


def criterion_dgcz(
    rho: AtomDensityMatrix, variances: Optional[Dict[JointOperator, float]] = None
) -> Optional[float]:
    """DGCZ ratio, None when the mean x spins vanish."""
    denominator = 2.0 * (
        abs(expectation(rho, 1, SpinAxis.X)) + abs(expectation(rho, 2, SpinAxis.X))
    )
    if denominator < DENOMINATOR_TOLERANCE:
        return None
    variances = variances or _variances(rho)
    return (variances[JointOperator.Y_DIFFERENCE] + variances[JointOperator.Z_SUM]) / denominator


def criterion_steering(
    rho: AtomDensityMatrix, variances: Optional[Dict[JointOperator, float]] = None
) -> Optional[float]:
    """Steering from BEC 1 to BEC 2, None when <S1x>^2 vanishes."""
    mean_x = expectation(rho, 1, SpinAxis.X)
    if mean_x * mean_x < STEERING_TOLERANCE:
        return None
    variances = variances or _variances(rho)
    return variances[JointOperator.Y_DIFFERENCE] * variances[JointOperator.Z_SUM] / (mean_x * mean_x)


def _perpendicular_frame(theta: float, phi: float) -> Tuple[np.ndarray, np.ndarray]:
    n_2 = np.array([-math.cos(theta) * math.cos(phi), -math.cos(theta) * math.sin(phi), math.sin(theta)])
    n_3 = np.array([-math.sin(phi), math.cos(phi), 0.0])
    return n_2, n_3


def _perpendicular_from_moments(mean: np.ndarray, moments: np.ndarray) -> Optional[PerpendicularVariance]:
    length = float(np.linalg.norm(mean))
    if length < DENOMINATOR_TOLERANCE:
        return None
    theta = math.acos(max(-1.0, min(1.0, mean[2] / length)))
    phi = math.atan2(mean[1], mean[0])
    covariance = np.real(moments) - np.outer(mean, mean)
    covariance = 0.5 * (covariance + covariance.T)
    n_2, n_3 = _perpendicular_frame(theta, phi)

    a = float(n_3 @ covariance @ n_3)
    b = float(n_2 @ covariance @ n_2)
    c = float(n_3 @ covariance @ n_2)
    zeta_opt = 0.5 * (math.pi + math.atan2(2.0 * c, a - b))

    def variance_at(zeta):
        return (
            np.cos(zeta) ** 2 * a + np.sin(zeta) ** 2 * b + 2.0 * np.sin(zeta) * np.cos(zeta) * c
        )

    var_min = float(variance_at(zeta_opt))
    zeta_grid = np.linspace(0.0, 2.0 * math.pi, ZETA_GRID_SIZE, endpoint=False)
    grid_values = variance_at(zeta_grid)
    best = int(np.argmin(grid_values))
    if grid_values[best] < var_min - 1e-9 * max(1.0, abs(var_min)):
        logger.warning(
            f"Closed-form squeezing angle {zeta_opt:.6f} beaten by grid angle {zeta_grid[best]:.6f}"
        )
        zeta_opt, var_min = float(zeta_grid[best]), float(grid_values[best])
    return PerpendicularVariance(var_min=var_min, zeta_opt=zeta_opt, theta=theta, phi=phi)


def min_perpendicular_variance(
    rho: AtomDensityMatrix, collective: bool = WINELAND_COLLECTIVE
) -> Optional[PerpendicularVariance]:
    """
    Smallest spin variance perpendicular to the mean spin direction.

    The mean spin fixes (theta, phi); the perpendicular component is
    S_zeta = cos(zeta) S_n3 + sin(zeta) S_n2 with n3 the in-plane direction.
    The closed-form zeta_opt is checked against a 720-point zeta grid.
    By default the spin is that of BEC 1; collective=True uses S1 + S2.

    Returns:
        PerpendicularVariance, or None when the mean spin vanishes
    """
    mean, moments = collective_moments(rho, collective=collective)
    return _perpendicular_from_moments(mean, moments)


def criterion_wineland(
    rho: AtomDensityMatrix, collective: bool = WINELAND_COLLECTIVE
) -> Optional[float]:
    """Squeezing parameter xi^2 = 2 var_min / |<S>|, None when <S> vanishes."""
    mean, moments = collective_moments(rho, collective=collective)
    result = _perpendicular_from_moments(mean, moments)
    if result is None:
        return None
    return 2.0 * result.var_min / float(np.linalg.norm(mean))


def evaluate_criteria(rho: AtomDensityMatrix, params: Optional[SystemParams] = None) -> CriterionReport:
    """Compute every scalar diagnostic at one parameter point."""
    params = params or rho.params
    check_hermitian(rho.as_matrix(), "density matrix")
    try:
        negativity, normalized = log_negativity(rho)
        variances = _variances(rho)
        expectations = {
            f"S{bec}{axis.value}": expectation(rho, bec, axis)
            for bec in (1, 2)
            for axis in (SpinAxis.X, SpinAxis.Y, SpinAxis.Z)
        }
        c_ent = criterion_ht(rho, variances)
        c_dgcz = criterion_dgcz(rho, variances)
        c_steer = criterion_steering(rho, variances)
        xi_squared = criterion_wineland(rho)
        perpendicular = min_perpendicular_variance(rho)
    except Exception as e:
        logger.error(f"Error evaluating criteria: {str(e)}")
        raise

    return CriterionReport(
        tau=params.tau if params else 0.0,
        chi_bar=params.chi_bar if params else 0.0,
        log_negativity=negativity,
        log_negativity_normalized=normalized,
        epr_fidelity=epr_fidelity(rho),
        c_ent=c_ent,
        c_dgcz=c_dgcz,
        xi_squared=xi_squared,
        xi_squared_rescaled=None if xi_squared is None else 0.5 * xi_squared,
        c_steer_1to2=c_steer,
        zeta_opt=None if perpendicular is None else perpendicular.zeta_opt,
        mean_spin_angles=None if perpendicular is None else (perpendicular.theta, perpendicular.phi),
        expectations=expectations,
        variances={combo.value: value for combo, value in variances.items()},
    )


def detection_window(
    values: Sequence[Optional[float]], tau_grid: Sequence[float], bound: float = 1.0
) -> float:
    """
    Measure of the tau set where a criterion fires (value < bound - 1e-6).

    Each grid point carries the width of its Voronoi cell; undefined values
    never fire.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if len(values) != taus.size:
        raise ValueError("values and tau grid must have the same length")
    if taus.size < 2:
        return 0.0
    edges = np.concatenate(([taus[0]], 0.5 * (taus[1:] + taus[:-1]), [taus[-1]]))
    widths = np.diff(edges)
    fires = np.array([v is not None and v < bound - WITNESS_MARGIN for v in values])
    return float(np.sum(widths[fires]))
