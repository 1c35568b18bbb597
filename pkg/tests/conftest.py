# conftest.py
import json
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
import pytest

from qnd_becs.entanglement_module import evaluate_criteria, log_negativity
from qnd_becs.models import AtomDensityMatrix, CriterionReport, SystemParams
from qnd_becs.photon_loss_module import apply_photon_loss
from tests.helpers import TWENTY_ATOM_TAUS


def _twenty_atom_base(n_c: int, n_d: int, chi_bar: float) -> SystemParams:
    return SystemParams(n_atoms=20, alpha=10.0, n_c=n_c, n_d=n_d, chi_bar=chi_bar)


@lru_cache(maxsize=None)
def _criteria_curve(n_c: int, n_d: int, chi_bar: float) -> Tuple[CriterionReport, ...]:
    base = _twenty_atom_base(n_c, n_d, chi_bar)
    return tuple(
        evaluate_criteria(apply_photon_loss(base.updated(tau=float(tau)))) for tau in TWENTY_ATOM_TAUS
    )


@lru_cache(maxsize=None)
def _negativity_curve(n_c: int, n_d: int, chi_bar: float = 0.0, stop: float = math.pi / 2, count: int = 401):
    base = _twenty_atom_base(n_c, n_d, chi_bar)
    values = [
        log_negativity(apply_photon_loss(base.updated(tau=float(tau))))[1]
        for tau in np.linspace(0.0, stop, count)
    ]
    return np.array(values)


@pytest.fixture(scope="session")
def criteria_curve():
    """Criterion reports on TWENTY_ATOM_TAUS, computed once per (n_c, n_d, chi_bar)."""
    return _criteria_curve


@pytest.fixture(scope="session")
def negativity_curve():
    """Normalized log negativity over [0, stop], computed once per argument set."""
    return _negativity_curve


@pytest.fixture
def twenty_atom_params() -> SystemParams:
    """N=20, alpha=10 with the symmetric outcome n_c = n_d = 50."""
    return SystemParams(n_atoms=20, alpha=10.0, n_c=50, n_d=50)


@pytest.fixture
def small_params() -> SystemParams:
    return SystemParams(n_atoms=4, alpha=3.0, tau=0.3, n_c=4, n_d=5)


@pytest.fixture
def coherent_rho():
    """Density matrix of the tau=0 product of two x-polarized coherent states."""

    def build(n_atoms: int = 6) -> AtomDensityMatrix:
        return apply_photon_loss(SystemParams(n_atoms=n_atoms, alpha=4.0, n_c=8, n_d=8))

    return build


@pytest.fixture
def write_config(tmp_path):
    """Write a configuration dict to a JSON file and return its path."""

    def write(data, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
