# helpers.py
import math

import numpy as np

# N=20, alpha=10 sweeps share one tau grid over [0, pi/2]
TWENTY_ATOM_TAUS = np.linspace(0.0, math.pi / 2, 401)


def random_hermitian(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    return 0.5 * (raw + raw.conj().T)


def random_state_vector(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    vector = rng.normal(size=size) + 1j * rng.normal(size=size)
    return vector / np.linalg.norm(vector)
