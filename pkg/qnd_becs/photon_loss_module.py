# photon_loss_module.py
import logging
import math

import numpy as np
from scipy.special import logsumexp, xlogy
from scipy.stats import poisson

from .models import AtomDensityMatrix, SystemParams
from .numerics.common import ConfigurationError, NumericalError
from .numerics.special_functions import ln_binomial_row, ln_factorial
from .state_module import build_state, outcome_probability, photon_distribution_grid

logger = logging.getLogger(__name__)

KRAUS_TERM_CUTOFF = 1e-14
KRAUS_COMPLETENESS_TOLERANCE = 1e-8
POISSON_TAIL_TOLERANCE = 1e-8


def _survival(params: SystemParams) -> float:
    """Light amplitude survival eta = exp(-2 chi_bar tau)."""
    return math.exp(-2.0 * params.chi_bar * params.tau)


def decoherence_factor(upsilon, params: SystemParams):
    """
    Off-diagonal multiplier L(upsilon) of the photon-loss channel.

    L(upsilon) = exp[-2 chi_bar tau (n_c + n_d)] * exp[(1 - e^{-2 chi_bar tau}) alpha^2 cos upsilon]
    """
    eta = _survival(params)
    value = np.exp(
        -2.0 * params.chi_bar * params.tau * params.photon_number
        + (1.0 - eta) * params.alpha ** 2 * np.cos(upsilon)
    )
    return float(value) if np.ndim(value) == 0 else value


def photons_remaining(chi_bar: float, tau: float, alpha: float) -> float:
    """Mean photon number left in the light after attenuation."""
    return math.exp(-2.0 * chi_bar * tau) * alpha * alpha


def lossy_photon_probability(params: SystemParams) -> float:
    """
    Probability of counting (n_c, n_d) photons after attenuation.

    Equal to N * L(0); attenuation of a coherent probe is the same as probing
    with the reduced amplitude sqrt(eta) alpha.
    """
    reduced_alpha = params.alpha * math.sqrt(_survival(params))
    return outcome_probability(params.n_atoms, reduced_alpha, params.tau, params.n_c, params.n_d)


def lossy_photon_distribution_grid(
    n_atoms: int, alpha: float, tau: float, chi_bar: float, n_max: int
) -> np.ndarray:
    """Photon distribution over (n_c, n_d) after attenuation, 0..n_max per mode."""
    reduced_alpha = alpha * math.exp(-chi_bar * tau)
    return photon_distribution_grid(n_atoms, reduced_alpha, tau, n_max)


def apply_photon_loss(params: SystemParams) -> AtomDensityMatrix:
    """
    Two-BEC density matrix after the photon-loss channel.

    Args:
        params: Full parameter point; gamma_bar is ignored

    Returns:
        Unit-trace density matrix; trace_weight holds the detection probability
        of the outcome under loss

    Raises:
        OutcomeImpossibleError: propagated from build_state
    """
    state = build_state(params)
    psi = state.amplitudes
    n_atoms = params.n_atoms
    k = np.arange(n_atoms + 1)
    total = k[:, None] + k[None, :]

    entries = np.einsum("ab,cd->abcd", psi, psi).astype(complex)
    if params.chi_bar > 0.0 and params.tau != 0.0:
        eta = _survival(params)
        upsilon = 2.0 * (total[:, :, None, None] - total[None, None, :, :]) * params.tau
        # L(upsilon) / L(0), equal to one on the diagonal
        ratio = np.exp((1.0 - eta) * params.alpha ** 2 * (np.cos(upsilon) - 1.0))
        entries = entries * ratio

    matrix = entries.reshape((n_atoms + 1) ** 2, (n_atoms + 1) ** 2)
    entries = entries / np.real(np.trace(matrix))
    weight = lossy_photon_probability(params)
    logger.debug(f"Applied photon loss at chi_bar={params.chi_bar}, tau={params.tau}")
    return AtomDensityMatrix(entries=entries, trace_weight=weight, params=params)


# ---------------------------------------------------------------------------
# Truncated Kraus oracle
# ---------------------------------------------------------------------------

def _coherent_columns(betas: np.ndarray, cutoff: int) -> np.ndarray:
    """Truncated Fock amplitudes of |beta>, one row per beta."""
    n = np.arange(cutoff + 1)
    magnitudes = np.abs(betas)
    with np.errstate(divide="ignore"):
        ln_magnitude = (
            -0.5 * magnitudes[:, None] ** 2
            + xlogy(n[None, :], magnitudes[:, None])
            - 0.5 * ln_factorial(n)[None, :]
        )
    phases = np.exp(1j * np.angle(betas)[:, None] * n[None, :])
    return np.exp(ln_magnitude) * phases


def _damping_weights(params: SystemParams, cutoff: int) -> np.ndarray:
    """
    w(n) = sum_m g_m(n)^2 for the combined phase-damping and attenuation
    factors, truncated where terms fall below KRAUS_TERM_CUTOFF of the largest.
    """
    gamma_tau = params.gamma_bar * params.tau
    chi_tau = params.chi_bar * params.tau
    weights = np.empty(cutoff + 1)
    for n in range(cutoff + 1):
        base = -2.0 * gamma_tau * n * n - 2.0 * chi_tau * n
        if gamma_tau == 0.0 or n == 0:
            weights[n] = math.exp(base)
            continue
        rate = 2.0 * gamma_tau * n * n
        m_max = int(rate + 12.0 * math.sqrt(rate) + 60)
        m = np.arange(m_max + 1)
        ln_terms = m * math.log(rate) - ln_factorial(m) + base
        kept = ln_terms[ln_terms >= ln_terms.max() + math.log(KRAUS_TERM_CUTOFF)]
        weights[n] = math.exp(float(logsumexp(kept)))
    return weights


def _mode_block(columns: np.ndarray, count: int, eta: float, weights: np.ndarray) -> np.ndarray:
    """E[s, s'] for one light mode projected on |count>."""
    cutoff = columns.shape[1] - 1
    block = np.zeros((columns.shape[0], columns.shape[0]), dtype=complex)
    for lost in range(cutoff - count + 1):
        with np.errstate(divide="ignore"):
            ln_c = xlogy(lost, 1.0 - eta) - ln_factorial(lost) if lost else 0.0
        ln_lower = 0.5 * (ln_factorial(count + lost) - ln_factorial(count))
        lowered = np.exp(ln_lower) * columns[:, count + lost]
        block += math.exp(ln_c) * weights[count] * np.outer(lowered, lowered.conj())
    return block


def _check_completeness(eta: float, weights: np.ndarray, point) -> None:
    """Sum over Kraus operators of M^dagger M must be the identity on the truncated space."""
    cutoff = weights.shape[0] - 1
    worst = 0.0
    for n_in in range(cutoff + 1):
        lost = np.arange(n_in + 1)
        with np.errstate(divide="ignore"):
            ln_terms = (
                xlogy(lost, 1.0 - eta) - ln_factorial(lost)
                + ln_factorial(n_in) - ln_factorial(n_in - lost)
            )
        total = float(np.sum(np.exp(ln_terms) * weights[n_in - lost]))
        worst = max(worst, abs(total - 1.0))
    if worst > KRAUS_COMPLETENESS_TOLERANCE:
        logger.error(f"Error checking Kraus completeness: deviation {worst:.3e}")
        raise NumericalError(f"Kraus operators incomplete (deviation {worst:.3e})", point=point)


def kraus_oracle(params: SystemParams, photon_cutoff: int) -> AtomDensityMatrix:
    """
    Brute-force loss channel on the full atom-light state.

    Builds the atom-light state with both light modes on a truncated Fock
    space, applies phase damping and amplitude attenuation Kraus operators,
    projects the light onto |n_c, n_d> and traces it out. Only feasible for
    small N and alpha.

    Raises:
        ConfigurationError: if the cutoff leaves more than 1e-8 of Poisson tail,
            or tau is negative
        NumericalError: if the truncated Kraus set is not complete
    """
    point = params.as_point()
    if params.tau < 0.0:
        raise ConfigurationError("Kraus oracle needs tau >= 0", point=point)
    tail = float(poisson.sf(photon_cutoff, params.alpha ** 2))
    if tail > POISSON_TAIL_TOLERANCE or photon_cutoff < max(params.n_c, params.n_d):
        logger.error(f"Error configuring Kraus oracle: cutoff {photon_cutoff} leaves tail {tail:.3e}")
        raise ConfigurationError(
            f"photon cutoff {photon_cutoff} too small (Poisson tail {tail:.3e})", point=point
        )

    n_atoms = params.n_atoms
    s = np.arange(2 * n_atoms + 1)
    phase = (2.0 * s - 2.0 * n_atoms) * params.tau
    half_alpha = params.alpha / math.sqrt(2.0)
    upper = half_alpha * np.exp(-1j * phase)
    lower = half_alpha * np.exp(1j * phase)
    beta_c = (upper - 1j * lower) / math.sqrt(2.0)
    beta_d = (1j * upper - lower) / math.sqrt(2.0)

    eta = _survival(params)
    weights = _damping_weights(params, photon_cutoff)
    _check_completeness(eta, weights, point)

    block_c = _mode_block(_coherent_columns(beta_c, photon_cutoff), params.n_c, eta, weights)
    block_d = _mode_block(_coherent_columns(beta_d, photon_cutoff), params.n_d, eta, weights)
    light = block_c * block_d

    k = np.arange(n_atoms + 1)
    ln_binom = ln_binomial_row(n_atoms)
    atom = np.exp(0.5 * (ln_binom[:, None] + ln_binom[None, :]) - n_atoms * math.log(2.0))
    total = k[:, None] + k[None, :]
    entries = (
        atom[:, :, None, None] * atom[None, None, :, :]
        * light[total[:, :, None, None], total[None, None, :, :]]
    )
    trace = float(np.real(np.einsum("abab->", entries)))
    if trace <= 0.0:
        raise NumericalError("Kraus oracle produced a vanishing trace", point=point)
    logger.info(f"Kraus oracle finished with cutoff {photon_cutoff}, trace {trace:.6e}")
    return AtomDensityMatrix(entries=entries / trace, trace_weight=trace, params=params)
