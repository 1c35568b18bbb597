# test_acceptance.py
"""Figure-level checks at N=20, alpha=10."""

import math

import numpy as np
import pytest

from qnd_becs.entanglement_module import detection_window
from qnd_becs.models import JointOperator, SpinAxis, SystemParams
from qnd_becs.observables_module import expectation, joint_variance, spin_matrix, two_body_expectation
from qnd_becs.photon_loss_module import apply_photon_loss
from qnd_becs.state_module import photon_distribution_grid
from tests.helpers import TWENTY_ATOM_TAUS

pytestmark = pytest.mark.acceptance

N_ATOMS = 20
ALPHA = 10.0


def _off_diagonal_ratio(params: SystemParams, excitation_change: int) -> float:
    """Loss multiplier of elements whose k1 + k2 differs by excitation_change."""
    eta = math.exp(-2.0 * params.chi_bar * params.tau)
    upsilon = 2.0 * excitation_change * params.tau
    return math.exp((1.0 - eta) * params.alpha ** 2 * (math.cos(upsilon) - 1.0))


def _correlator(rho, axis: SpinAxis) -> float:
    operator = spin_matrix(axis, rho.n_atoms).entries
    return two_body_expectation(rho, operator, operator).real


def test_maximum_entanglement(criteria_curve):
    peak = max(report.log_negativity_normalized for report in criteria_curve(50, 50, 0.0))
    assert peak == pytest.approx(0.676, abs=0.01)


def test_no_entanglement_at_the_ends(criteria_curve):
    reports = criteria_curve(50, 50, 0.0)
    assert reports[0].log_negativity < 1e-9
    assert reports[-1].log_negativity < 1e-9


def test_quarter_period_staircase(criteria_curve):
    values = np.array([report.log_negativity for report in criteria_curve(50, 50, 0.0)])
    # pi/4 is 200 grid steps
    np.testing.assert_allclose(values[:201], values[200:], atol=1e-6)


def test_half_period_staircase_for_unequal_counts(negativity_curve):
    values = negativity_curve(40, 60, 0.0, math.pi, 161)
    np.testing.assert_allclose(values[:81], values[80:], atol=1e-6)


@pytest.mark.parametrize("n_c, n_d, floor", [(40, 60, 0.74), (30, 70, 0.80)])
def test_unequal_counts_reach_high_entanglement(negativity_curve, n_c, n_d, floor):
    assert float(np.max(negativity_curve(n_c, n_d))) > floor


def test_unequal_counts_entangle_more(negativity_curve):
    peaks = [float(np.max(negativity_curve(50 - shift, 50 + shift))) for shift in (0, 10, 20)]
    assert peaks[0] < peaks[1] < peaks[2]


def test_loss_never_adds_entanglement(criteria_curve):
    pure = np.array([report.log_negativity for report in criteria_curve(50, 50, 0.0)])
    lossy = np.array([report.log_negativity for report in criteria_curve(50, 50, 0.3)])
    assert np.all(lossy <= pure + 1e-8)
    assert lossy.max() > 0.0


def test_fidelity_starts_at_the_product_value(criteria_curve):
    assert criteria_curve(50, 50, 0.0)[0].epr_fidelity == pytest.approx(1.0 / 21.0, abs=1e-9)


def test_photon_distribution_mass():
    for tau in (0.0, 0.05, math.pi / 8):
        grid = photon_distribution_grid(N_ATOMS, ALPHA, tau, 220)
        assert float(grid.sum()) == pytest.approx(1.0, abs=1e-8)


def test_z_sum_variance_is_loss_invariant():
    base = SystemParams(n_atoms=N_ATOMS, alpha=ALPHA, n_c=50, n_d=50)
    for tau in np.linspace(0.0, math.pi / 2, 51):
        pure = joint_variance(apply_photon_loss(base.updated(tau=float(tau))), JointOperator.Z_SUM)
        lossy = joint_variance(
            apply_photon_loss(base.updated(tau=float(tau), chi_bar=0.7)), JointOperator.Z_SUM
        )
        assert abs(pure - lossy) < 1e-9


@pytest.mark.parametrize("tau", [0.02, 0.05])
def test_mean_x_spin_shrinks_under_loss(tau):
    base = SystemParams(n_atoms=N_ATOMS, alpha=ALPHA, tau=tau, n_c=50, n_d=50)
    lossy_params = base.updated(chi_bar=0.7)
    pure = expectation(apply_photon_loss(base), 1, SpinAxis.X)
    lossy = expectation(apply_photon_loss(lossy_params), 1, SpinAxis.X)
    assert pure > 1.0
    assert lossy == pytest.approx(_off_diagonal_ratio(lossy_params, 1) * pure, rel=1e-9)
    assert lossy < pure


@pytest.mark.parametrize("tau", [0.02, 0.1])
def test_loss_moves_correlation_from_x_to_y(tau):
    base = SystemParams(n_atoms=10, alpha=ALPHA, tau=tau, n_c=50, n_d=50)
    lossy_params = base.updated(chi_bar=0.3)
    pure_rho, lossy_rho = apply_photon_loss(base), apply_photon_loss(lossy_params)
    pure_xx, pure_yy = _correlator(pure_rho, SpinAxis.X), _correlator(pure_rho, SpinAxis.Y)
    lossy_xx, lossy_yy = _correlator(lossy_rho, SpinAxis.X), _correlator(lossy_rho, SpinAxis.Y)
    # x + y keeps the excitation-conserving part, x - y only the part changing k1 + k2 by 2
    assert lossy_xx + lossy_yy == pytest.approx(pure_xx + pure_yy, rel=1e-9, abs=1e-9)
    assert lossy_xx - lossy_yy == pytest.approx(
        _off_diagonal_ratio(lossy_params, 2) * (pure_xx - pure_yy), rel=1e-9, abs=1e-9
    )
    if tau == 0.02:
        assert pure_xx - pure_yy > 1.0
        assert lossy_xx < pure_xx
        assert lossy_yy > pure_yy


def test_coherent_state_boundary_values(criteria_curve):
    report = criteria_curve(50, 50, 0.0)[0]
    assert report.c_ent == pytest.approx(1.0, abs=1e-9)
    assert report.c_dgcz == pytest.approx(1.0, abs=1e-9)
    assert report.c_steer_1to2 == pytest.approx(4.0, abs=1e-9)


def test_criterion_ordering_under_loss(criteria_curve):
    reports = criteria_curve(50, 50, 0.3)
    windows = [
        detection_window([r.c_ent for r in reports], TWENTY_ATOM_TAUS),
        detection_window([r.c_dgcz for r in reports], TWENTY_ATOM_TAUS),
        detection_window([r.c_steer_1to2 for r in reports], TWENTY_ATOM_TAUS),
        detection_window([r.xi_squared_rescaled for r in reports], TWENTY_ATOM_TAUS),
    ]
    assert windows[0] > 0.0
    assert windows == sorted(windows, reverse=True)


def test_steering_fires_for_the_widest_outcome(criteria_curve):
    reports = criteria_curve(30, 70, 0.3)
    window = detection_window([r.c_steer_1to2 for r in reports], TWENTY_ATOM_TAUS)
    assert window == pytest.approx(0.059, abs=0.01)
