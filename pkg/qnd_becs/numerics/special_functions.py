"""
Special Functions Module

Numerically stable combinatorics and angular-momentum functions shared by the
state, observable and Wigner modules:
- Log-domain factorials and binomials
- Clebsch-Gordan coefficients (Racah closed form, memoized)
- Orthonormal spherical harmonics via normalized Legendre recurrences
- Finite-sum matrix elements of S^y and S^x rotations

All combinatorial factors are carried as log-magnitude plus sign so that
factorial ratios up to N and powers of trigonometric functions never overflow.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.special import gammaln

from .common import CANCELLATION_FLOOR, compensated_sum

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")

# (-i)^p for p mod 4
_MINUS_I_POWERS = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)


@dataclass(frozen=True, order=True)
class HalfInteger:
    """An exact integer or half-integer stored as twice its value."""

    twice_value: int

    @classmethod
    def of(cls, value: Union[int, float, Fraction, "HalfInteger"]) -> "HalfInteger":
        if isinstance(value, HalfInteger):
            return value
        doubled = Fraction(value) * 2
        if doubled.denominator != 1:
            raise ValueError(f"{value} is not an integer or half-integer")
        return cls(int(doubled))

    @property
    def value(self) -> float:
        return self.twice_value / 2

    def __neg__(self) -> "HalfInteger":
        return HalfInteger(-self.twice_value)

    def __str__(self) -> str:
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


# ---------------------------------------------------------------------------
# Factorials and binomials
# ---------------------------------------------------------------------------

def ln_factorial(n):
    """
    Natural logarithm of n!.

    Args:
        n: Nonnegative integer or integer array

    Returns:
        ln(n!) as a float (or float array for array input)
    """
    values = np.asarray(n)
    if np.any(values < 0):
        raise ValueError(f"ln_factorial requires n >= 0, got {n}")
    result = gammaln(values + 1.0)
    if result.ndim == 0:
        return float(result)
    return result


@lru_cache(maxsize=None)
def _ln_factorial_int(n: int) -> float:
    return float(gammaln(n + 1.0))


@lru_cache(maxsize=None)
def ln_binomial(n: int, k: int) -> float:
    """
    Natural logarithm of the binomial coefficient C(n, k).

    Out-of-range k (k < 0 or k > n) returns -inf, the log of a zero count.
    The smaller of k and n-k is always subtracted first, so the result is
    bitwise symmetric under k -> n-k.
    """
    if n < 0:
        raise ValueError(f"ln_binomial requires n >= 0, got {n}")
    if k < 0 or k > n:
        return NEG_INF
    small = min(k, n - k)
    return _ln_factorial_int(n) - _ln_factorial_int(small) - _ln_factorial_int(n - small)


def ln_binomial_row(n: int) -> np.ndarray:
    """ln C(n, k) for k = 0..n as an array."""
    return np.array([ln_binomial(n, k) for k in range(n + 1)])


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients
# ---------------------------------------------------------------------------

def _valid_pair(twice_j: int, twice_m: int) -> bool:
    return twice_j >= 0 and abs(twice_m) <= twice_j and (twice_j - twice_m) % 2 == 0


@lru_cache(maxsize=None)
def clebsch_gordan_twice(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    """
    Clebsch-Gordan coefficient with every argument given as twice its value.

    Returns 0.0 for any selection-rule or triangle violation.
    """
    if tM != tm1 + tm2:
        return 0.0
    if not (_valid_pair(tj1, tm1) and _valid_pair(tj2, tm2) and _valid_pair(tJ, tM)):
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2 or (tj1 + tj2 + tJ) % 2 != 0:
        return 0.0

    # integer arguments of the Racah formula
    a = (tj1 + tj2 - tJ) // 2      # j1+j2-J
    b = (tj1 - tm1) // 2           # j1-m1
    c = (tj2 + tm2) // 2           # j2+m2
    d = (tJ - tj2 + tm1) // 2      # J-j2+m1
    e = (tJ - tj1 - tm2) // 2      # J-j1-m2

    ln_prefactor = 0.5 * (
        math.log(tJ + 1)
        + _ln_factorial_int((tJ + tj1 - tj2) // 2)
        + _ln_factorial_int((tJ - tj1 + tj2) // 2)
        + _ln_factorial_int(a)
        - _ln_factorial_int((tj1 + tj2 + tJ) // 2 + 1)
        + _ln_factorial_int((tJ + tM) // 2)
        + _ln_factorial_int((tJ - tM) // 2)
        + _ln_factorial_int(b)
        + _ln_factorial_int((tj1 + tm1) // 2)
        + _ln_factorial_int((tj2 - tm2) // 2)
        + _ln_factorial_int(c)
    )

    k_min = max(0, -d, -e)
    k_max = min(a, b, c)
    terms = []
    for k in range(k_min, k_max + 1):
        ln_term = ln_prefactor - (
            _ln_factorial_int(k)
            + _ln_factorial_int(a - k)
            + _ln_factorial_int(b - k)
            + _ln_factorial_int(c - k)
            + _ln_factorial_int(d + k)
            + _ln_factorial_int(e + k)
        )
        sign = -1.0 if k % 2 else 1.0
        terms.append(sign * math.exp(ln_term))
    return compensated_sum(terms, label="Racah sum", floor=CANCELLATION_FLOOR)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """
    Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.

    Args:
        j1, m1, j2, m2, J, M: HalfInteger values (ints, floats or Fractions
            with half-integer values are accepted and converted)

    Returns:
        The coefficient in the Condon-Shortley convention; 0 when M != m1+m2
        or the triangle inequality fails
    """
    args = [HalfInteger.of(x).twice_value for x in (j1, m1, j2, m2, J, M)]
    return clebsch_gordan_twice(*args)


@lru_cache(maxsize=64)
def cg_table(n_atoms: int) -> np.ndarray:
    """
    Coupling coefficients <j m1; j -m2 | l m1-m2> for j = N/2.

    Returns:
        Read-only array indexed [l, k1, k1'] with m1 = k1 - j and
        m2 = k1' - j (Dicke indexing |j m> = |k = j+m>)
    """
    size = n_atoms + 1
    table = np.zeros((size, size, size))
    for l in range(size):
        for k1 in range(size):
            for k1p in range(size):
                q = k1 - k1p
                if abs(q) > l:
                    continue
                table[l, k1, k1p] = clebsch_gordan_twice(
                    n_atoms, 2 * k1 - n_atoms, n_atoms, n_atoms - 2 * k1p, 2 * l, 2 * q
                )
    table.setflags(write=False)
    logger.debug(f"Built Clebsch-Gordan table for N={n_atoms}")
    return table


# ---------------------------------------------------------------------------
# Spherical harmonics
# ---------------------------------------------------------------------------

def normalized_legendre_table(l_max: int, x) -> np.ndarray:
    """
    Fully normalized associated Legendre functions with Condon-Shortley phase.

    P[l, q] * exp(i q phi) is the orthonormal spherical harmonic Y_lq for
    q >= 0. The sectoral seeds P[q, q] are built from log-scaled prefactors,
    higher degrees by the standard three-term upward recurrence.

    Args:
        l_max: Largest degree
        x: cos(theta) values (scalar or array)

    Returns:
        Array of shape (l_max+1, l_max+1) + x.shape, zero for q > l
    """
    x = np.asarray(x, dtype=float)
    sine = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    table = np.zeros((l_max + 1, l_max + 1) + x.shape)
    with np.errstate(divide="ignore"):
        ln_sine = np.log(sine)

    for q in range(l_max + 1):
        ln_prefactor = 0.5 * (
            math.log(2 * q + 1) - math.log(4.0 * math.pi)
            + _ln_factorial_int(2 * q) - 2 * q * math.log(2.0) - 2 * _ln_factorial_int(q)
        )
        if q == 0:
            seed = np.full(x.shape, math.exp(ln_prefactor))
        else:
            seed = np.exp(ln_prefactor + q * ln_sine)
        table[q, q] = seed if q % 2 == 0 else -seed
        if q + 1 <= l_max:
            table[q + 1, q] = math.sqrt(2 * q + 3) * x * table[q, q]
        for l in range(q + 2, l_max + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - q * q))
            b = math.sqrt(((l - 1.0) ** 2 - q * q) / (4.0 * (l - 1.0) ** 2 - 1.0))
            table[l, q] = a * (x * table[l - 1, q] - b * table[l - 2, q])
    return table


def spherical_harmonic(l: int, q: int, theta, phi):
    """
    Orthonormal spherical harmonic Y_lq(theta, phi).

    Raises:
        ValueError: if |q| > l or l < 0
    """
    if l < 0 or abs(q) > l:
        raise ValueError(f"spherical harmonic needs |q| <= l, got l={l}, q={q}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    legendre = normalized_legendre_table(l, np.cos(theta))[l, abs(q)]
    value = legendre * np.exp(1j * abs(q) * phi)
    if q < 0:
        value = (-1) ** abs(q) * np.conj(value)
    if np.ndim(value) == 0:
        return complex(value)
    return value


# ---------------------------------------------------------------------------
# Rotation matrix elements
# ---------------------------------------------------------------------------

def _ln_abs_and_sign(value: float) -> Tuple[float, float]:
    if value == 0.0:
        return NEG_INF, 0.0
    return math.log(abs(value)), math.copysign(1.0, value)


def sy_rotation_element(n_atoms: int, k: int, k_prime: int, theta: float) -> float:
    """
    Matrix element <k| exp(-i S^y theta/2) |k'> on the Fock basis of one BEC.

    Evaluated as the finite alternating sum over n with every term assembled
    as log-magnitude and sign; terms with a negative factorial argument are
    outside the summation range and never formed.
    """
    if not (0 <= k <= n_atoms and 0 <= k_prime <= n_atoms):
        raise ValueError(f"Fock indices must lie in [0, {n_atoms}], got ({k}, {k_prime})")
    ln_cos, sign_cos = _ln_abs_and_sign(math.cos(theta / 2.0))
    ln_sin, sign_sin = _ln_abs_and_sign(math.sin(theta / 2.0))

    ln_norm = 0.5 * (
        _ln_factorial_int(k_prime) + _ln_factorial_int(n_atoms - k_prime)
        + _ln_factorial_int(k) + _ln_factorial_int(n_atoms - k)
    )
    terms = []
    for n in range(max(0, k - k_prime), min(k, n_atoms - k_prime) + 1):
        cos_power = k - k_prime + n_atoms - 2 * n
        sin_power = 2 * n + k_prime - k
        if (cos_power > 0 and sign_cos == 0.0) or (sin_power > 0 and sign_sin == 0.0):
            continue
        ln_term = ln_norm - (
            _ln_factorial_int(k - n)
            + _ln_factorial_int(n_atoms - k_prime - n)
            + _ln_factorial_int(n)
            + _ln_factorial_int(k_prime - k + n)
        )
        if cos_power:
            ln_term += cos_power * ln_cos
        if sin_power:
            ln_term += sin_power * ln_sin
        sign = -1.0 if n % 2 else 1.0
        if cos_power % 2 and sign_cos < 0:
            sign = -sign
        if sin_power % 2 and sign_sin < 0:
            sign = -sign
        terms.append(sign * math.exp(ln_term))
    return compensated_sum(terms, label="S^y rotation sum", floor=CANCELLATION_FLOOR)


def sx_rotation_element(n_atoms: int, k: int, k_prime: int, theta: float) -> complex:
    """
    Matrix element <k| exp(-i S^x theta/2) |k'>.

    Obtained from the S^y element by the phase (-i)^(k'-k), which follows
    from S^x = exp(i S^z pi/4) S^y exp(-i S^z pi/4).
    """
    phase = _MINUS_I_POWERS[(k_prime - k) % 4]
    return phase * sy_rotation_element(n_atoms, k, k_prime, theta)


@lru_cache(maxsize=256)
def rotation_matrix_sy(n_atoms: int, theta: float) -> np.ndarray:
    """Full (N+1)x(N+1) matrix of exp(-i S^y theta/2), read-only."""
    size = n_atoms + 1
    matrix = np.empty((size, size))
    for k in range(size):
        for k_prime in range(size):
            matrix[k, k_prime] = sy_rotation_element(n_atoms, k, k_prime, theta)
    matrix.setflags(write=False)
    return matrix


def rotation_matrix_sx(n_atoms: int, theta: float) -> np.ndarray:
    """Full (N+1)x(N+1) matrix of exp(-i S^x theta/2)."""
    k = np.arange(n_atoms + 1)
    phases = np.array(_MINUS_I_POWERS)[(k[None, :] - k[:, None]) % 4]
    return phases * rotation_matrix_sy(n_atoms, theta)
