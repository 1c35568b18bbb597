# wigner_module.py
import logging
import math
from typing import Optional, Tuple

import numpy as np

from .models import AtomDensityMatrix, WignerField
from .numerics.common import EmptyConditionalError, IntegrityError, check_hermitian
from .numerics.special_functions import cg_table, normalized_legendre_table
from .observables_module import reduced_density_matrix

logger = logging.getLogger(__name__)

DEFAULT_GRID = (181, 361)
EMPTY_BLOCK_THRESHOLD = 1e-300


def default_theta_grid(count: int = DEFAULT_GRID[0]) -> np.ndarray:
    return np.linspace(0.0, math.pi, count)


def default_phi_grid(count: int = DEFAULT_GRID[1]) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, count)


def rho_lq_coefficients(rho_single: np.ndarray) -> np.ndarray:
    """
    Multipole coefficients rho_lq of a single-BEC density matrix.

    rho_lq = sum (-1)^(j - m1 - q) <j m1; j -m2 | l q> <j m1|rho|j m2>
    with j = N/2 and |j m> = |k = j + m>.

    Args:
        rho_single: (N+1)x(N+1) Hermitian matrix on the Fock basis

    Returns:
        Complex array indexed [l, q + N], zero where |q| > l

    Raises:
        IntegrityError: if rho_single is not Hermitian
    """
    rho_single = np.asarray(rho_single, dtype=complex)
    check_hermitian(rho_single, "single-BEC density matrix")
    n_atoms = rho_single.shape[0] - 1
    k = np.arange(n_atoms + 1)
    # (-1)^(N - 2 k1 + k1') depends only on k1'
    sign = np.where((n_atoms + k) % 2 == 0, 1.0, -1.0)[None, :]
    weighted = cg_table(n_atoms) * (sign * rho_single)[None, :, :]

    coefficients = np.zeros((n_atoms + 1, 2 * n_atoms + 1), dtype=complex)
    for q in range(-n_atoms, n_atoms + 1):
        coefficients[:, q + n_atoms] = np.trace(weighted, offset=-q, axis1=1, axis2=2)
    return coefficients


def _check_increasing(grid: np.ndarray, name: str) -> None:
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError(f"{name} must be a nonempty strictly increasing 1-D grid")


def synthesize_wigner(
    coefficients: np.ndarray,
    theta_grid: Optional[np.ndarray] = None,
    phi_grid: Optional[np.ndarray] = None,
    label: str = "",
) -> WignerField:
    """
    Evaluate W(theta, phi) = sum_lq rho_lq Y_lq(theta, phi) on a grid.

    The sum separates into a Legendre part per q and a Fourier part in phi.
    """
    theta_grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    phi_grid = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    _check_increasing(theta_grid, "theta grid")
    _check_increasing(phi_grid, "phi grid")

    l_max = coefficients.shape[0] - 1
    q_values = np.arange(-l_max, l_max + 1)
    legendre = normalized_legendre_table(l_max, np.cos(theta_grid))  # [l, |q|, theta]
    # Y_{l,-q} = (-1)^q conj(Y_lq)
    signs = np.where((q_values < 0) & (q_values % 2 == 1), -1.0, 1.0)
    polar = np.einsum(
        "lq,lqt->tq", coefficients * signs[None, :], legendre[:, np.abs(q_values), :]
    )
    azimuthal = np.exp(1j * q_values[:, None] * phi_grid[None, :])
    field = polar @ azimuthal

    scale = max(1.0, float(np.max(np.abs(field.real))))
    residue = float(np.max(np.abs(field.imag)))
    if residue > 1e-9 * scale:
        logger.error(f"Error synthesizing Wigner field: imaginary residue {residue:.3e}")
        raise IntegrityError(f"Wigner field has imaginary residue {residue:.3e}")
    return WignerField(
        theta_grid=theta_grid.copy(), phi_grid=phi_grid.copy(), values=np.ascontiguousarray(field.real), label=label
    )


def _grids(grid: Tuple[int, int]):
    theta_count, phi_count = grid
    return default_theta_grid(theta_count), default_phi_grid(phi_count)


def conditional_wigner(
    rho: AtomDensityMatrix, k_project: int, grid: Tuple[int, int] = DEFAULT_GRID
) -> WignerField:
    """
    Wigner field of BEC 1 after projecting BEC 2 onto the Fock state |k_project>.

    The projected block is used unnormalized.

    Raises:
        EmptyConditionalError: if the projected block vanishes
    """
    if not 0 <= k_project <= rho.n_atoms:
        raise ValueError(f"k_project must lie in [0, {rho.n_atoms}], got {k_project}")
    block = np.array(rho.entries[:, k_project, :, k_project])
    if not np.any(np.abs(block) > EMPTY_BLOCK_THRESHOLD):
        logger.error(f"Error projecting on k2={k_project}: conditional block is empty")
        raise EmptyConditionalError(
            f"projection of BEC 2 on |{k_project}> leaves nothing", point=rho.point()
        )
    theta_grid, phi_grid = _grids(grid)
    return synthesize_wigner(
        rho_lq_coefficients(block), theta_grid, phi_grid, label=f"conditional k2={k_project}"
    )


def marginal_wigner(
    rho: AtomDensityMatrix, which_bec: int, grid: Tuple[int, int] = DEFAULT_GRID
) -> WignerField:
    """Wigner field of one BEC after tracing out the other."""
    theta_grid, phi_grid = _grids(grid)
    reduced = reduced_density_matrix(rho, which_bec)
    return synthesize_wigner(
        rho_lq_coefficients(reduced), theta_grid, phi_grid, label=f"marginal BEC {which_bec}"
    )


def scaled_to_unit_max(field: WignerField) -> WignerField:
    """Rescale a field so that max |W| = 1; used for per-panel display scaling."""
    peak = float(np.max(np.abs(field.values)))
    values = field.values / peak if peak > 0.0 else np.array(field.values)
    return WignerField(
        theta_grid=np.array(field.theta_grid), phi_grid=np.array(field.phi_grid),
        values=values, label=field.label,
    )
