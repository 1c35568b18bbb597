# state_module.py
import logging
import math
from typing import Optional

import numpy as np
from scipy.special import logsumexp, xlogy

from .models import AtomDensityMatrix, StateAmplitudes, SystemParams
from .numerics.common import OUTCOME_IMPOSSIBLE_THRESHOLD, OutcomeImpossibleError
from .numerics.special_functions import ln_binomial_row, ln_factorial

logger = logging.getLogger(__name__)

QUARTER_PI = math.pi / 4.0
LN_IMPOSSIBLE = math.log(OUTCOME_IMPOSSIBLE_THRESHOLD)


def _ln_poisson_prefactor(alpha: float, n_c: int, n_d: int, n_atoms: int) -> float:
    """ln of e^{-a^2} a^{2(n_c+n_d)} / (n_c! n_d!) * 2^{-2N}."""
    photons = n_c + n_d
    return (
        -alpha * alpha
        + float(xlogy(2 * photons, alpha))
        - ln_factorial(n_c)
        - ln_factorial(n_d)
        - 2 * n_atoms * math.log(2.0)
    )


def _phase_angles(n_atoms: int, tau: float, total_excitations: np.ndarray) -> np.ndarray:
    """M + pi/4 with M = (2 k1 + 2 k2 - 2N) tau, as a function of k1 + k2."""
    return (2.0 * total_excitations - 2.0 * n_atoms) * tau + QUARTER_PI


def _ln_abs_trig_powers(angles: np.ndarray, n_c: int, n_d: int):
    """log|sin^n_c cos^n_d| and its sign, with 0^0 = 1."""
    sines = np.sin(angles)
    cosines = np.cos(angles)
    with np.errstate(divide="ignore"):
        ln_magnitude = xlogy(n_c, np.abs(sines)) + xlogy(n_d, np.abs(cosines))
    sign = np.ones_like(angles)
    if n_c % 2:
        sign = sign * np.sign(sines)
    if n_d % 2:
        sign = sign * np.sign(cosines)
    return ln_magnitude, sign


def build_state(params: SystemParams) -> StateAmplitudes:
    """
    Post-measurement two-BEC wavefunction for the photon outcome (n_c, n_d).

    Args:
        params: Experiment configuration; chi_bar and gamma_bar are ignored

    Returns:
        L2-normalized amplitude grid over (k1, k2) and the outcome weight

    Raises:
        OutcomeImpossibleError: if the outcome probability is below 1e-300
    """
    n_atoms = params.n_atoms
    k = np.arange(n_atoms + 1)
    ln_binom = ln_binomial_row(n_atoms)

    angles = _phase_angles(n_atoms, params.tau, k[:, None] + k[None, :])
    ln_trig, sign = _ln_abs_trig_powers(angles, params.n_c, params.n_d)
    ln_amplitude = 0.5 * (ln_binom[:, None] + ln_binom[None, :]) + ln_trig

    ln_total = float(logsumexp(2.0 * ln_amplitude))
    ln_weight = _ln_poisson_prefactor(params.alpha, params.n_c, params.n_d, n_atoms) + ln_total
    if not np.isfinite(ln_weight) or ln_weight < LN_IMPOSSIBLE:
        logger.error(f"Error building state: outcome ({params.n_c}, {params.n_d}) is impossible")
        raise OutcomeImpossibleError(
            f"photon outcome ({params.n_c}, {params.n_d}) has vanishing probability",
            point=params.as_point(),
        )

    amplitudes = sign * np.exp(ln_amplitude - 0.5 * ln_total)
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return StateAmplitudes(amplitudes=amplitudes, norm_weight=math.exp(ln_weight), params=params)


def _ln_mixture_terms(n_atoms: int, alpha: float, tau: float, n_max: int):
    """
    Per-mode log Poisson terms of the photon distribution.

    The amplitude depends on (k1, k2) only through s = k1 + k2, and the two
    binomials combine into C(2N, s), so the distribution is a mixture over s
    of independent Poisson laws with means a^2 sin^2 and a^2 cos^2.
    """
    s = np.arange(2 * n_atoms + 1)
    ln_mixture_weight = ln_binomial_row(2 * n_atoms) - 2 * n_atoms * math.log(2.0)
    angles = _phase_angles(n_atoms, tau, s)
    mean_c = alpha * alpha * np.sin(angles) ** 2
    mean_d = alpha * alpha * np.cos(angles) ** 2
    counts = np.arange(n_max + 1)
    ln_counts_factorial = ln_factorial(counts)
    with np.errstate(divide="ignore"):
        ln_c = xlogy(counts[None, :], mean_c[:, None]) - ln_counts_factorial[None, :]
        ln_d = xlogy(counts[None, :], mean_d[:, None]) - ln_counts_factorial[None, :]
    return ln_mixture_weight - alpha * alpha, ln_c, ln_d


def outcome_probability(n_atoms: int, alpha: float, tau: float, n_c: int, n_d: int) -> float:
    """
    Probability of detecting (n_c, n_d) photons, equal to the norm weight of
    the corresponding post-measurement state.
    """
    ln_weight, ln_c, ln_d = _ln_mixture_terms(n_atoms, alpha, tau, max(n_c, n_d))
    ln_probability = logsumexp(ln_weight + ln_c[:, n_c] + ln_d[:, n_d])
    return float(np.exp(ln_probability))


def photon_distribution_grid(n_atoms: int, alpha: float, tau: float, n_max: int) -> np.ndarray:
    """
    Photon outcome distribution P(n_c, n_d) for 0 <= n_c, n_d <= n_max.

    Args:
        n_atoms: Atoms per BEC
        alpha: Coherent amplitude
        tau: Interaction time
        n_max: Largest photon count kept per mode; should cover the Poisson
            tail, n_max >= alpha^2 + 6 alpha

    Returns:
        Array indexed [n_c, n_d]
    """
    ln_weight, ln_c, ln_d = _ln_mixture_terms(n_atoms, alpha, tau, n_max)
    ln_grid = logsumexp(
        ln_weight[:, None, None] + ln_c[:, :, None] + ln_d[:, None, :], axis=0
    )
    grid = np.exp(ln_grid)
    missing = 1.0 - float(grid.sum())
    if missing > 1e-8:
        logger.warning(
            f"Photon grid with n_max={n_max} misses {missing:.3e} of the probability mass "
            f"(alpha={alpha}); raise n_max above {alpha * alpha + 6 * alpha:.0f}"
        )
    return grid


def hp_approx_state(params: SystemParams, exponent_scale: float = 4.0) -> StateAmplitudes:
    """
    Gaussian short-time approximation of the post-measurement state.

    Valid for |tau| <~ 1/sqrt(N). The weight is
    exp(-[(2k1-N)^2 + (2k2-N)^2] / 4N) * exp(-scale * N_p tau^2 (k1+k2-N)^2)
    with N_p = n_c + n_d. The default scale 4 comes from expanding the exact
    amplitudes; the published form uses 8, which overstates the squeezing.
    """
    n_atoms = params.n_atoms
    k = np.arange(n_atoms + 1)
    centred = (2 * k - n_atoms) ** 2
    excess = (k[:, None] + k[None, :] - n_atoms) ** 2
    ln_amplitude = (
        -(centred[:, None] + centred[None, :]) / (4.0 * n_atoms)
        - exponent_scale * params.photon_number * params.tau ** 2 * excess
    )
    amplitudes = np.exp(ln_amplitude - ln_amplitude.max())
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    weight = outcome_probability(n_atoms, params.alpha, params.tau, params.n_c, params.n_d)
    return StateAmplitudes(amplitudes=amplitudes, norm_weight=weight, params=params)


def epr_limit_state(n_atoms: int) -> StateAmplitudes:
    """Large N_p tau^2 limit of the Gaussian approximation, diagonal in (k1, k2)."""
    k = np.arange(n_atoms + 1)
    weights = np.exp(-2.0 * (k - n_atoms / 2.0) ** 2 / n_atoms)
    amplitudes = np.diag(weights / np.linalg.norm(weights))
    return StateAmplitudes(amplitudes=amplitudes, norm_weight=1.0)


def epr_state(n_atoms: int) -> StateAmplitudes:
    """Maximally entangled state (N+1)^{-1/2} sum_k |k>|k>."""
    amplitudes = np.eye(n_atoms + 1) / math.sqrt(n_atoms + 1)
    return StateAmplitudes(amplitudes=amplitudes, norm_weight=1.0)


def coherent_spin_state(n_atoms: int, theta: float, phi: float = 0.0) -> np.ndarray:
    """
    Single-BEC spin coherent state |theta, phi>> on the Fock basis.

    Amplitudes sqrt(C(N,k)) cos^k(theta/2) sin^{N-k}(theta/2) e^{i(N-k)phi}.
    """
    k = np.arange(n_atoms + 1)
    half = theta / 2.0
    with np.errstate(divide="ignore"):
        ln_magnitude = (
            0.5 * ln_binomial_row(n_atoms)
            + xlogy(k, abs(math.cos(half)))
            + xlogy(n_atoms - k, abs(math.sin(half)))
        )
    sign = np.where((k % 2 == 1) & (math.cos(half) < 0), -1.0, 1.0)
    sign = sign * np.where(((n_atoms - k) % 2 == 1) & (math.sin(half) < 0), -1.0, 1.0)
    return sign * np.exp(ln_magnitude) * np.exp(1j * (n_atoms - k) * phi)


def product_density_matrix(
    psi_1: np.ndarray, psi_2: np.ndarray, params: Optional[SystemParams] = None
) -> AtomDensityMatrix:
    """Density matrix of the product state psi_1 (BEC 1) times psi_2 (BEC 2)."""
    joint = np.outer(psi_1, psi_2)
    joint = joint / np.linalg.norm(joint)
    entries = np.einsum("ab,cd->abcd", joint, joint.conj())
    return AtomDensityMatrix(entries=entries, trace_weight=1.0, params=params)
