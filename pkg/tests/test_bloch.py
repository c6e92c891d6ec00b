from __future__ import annotations

import numpy as np
import pytest

from qmap_enm.bloch import (
    RateFunctions,
    consistency_check,
    constant_rates,
    integrate,
    ode_rate_functions,
    positivity_escape,
)
from qmap_enm.errors import ContractViolationError, SingularityError, ValidationError
from qmap_enm.families import (
    DepolarizingFamily,
    MixtureSpec,
    PauliMixtureFamily,
    amplitude_damping,
    exp_profile,
    generalized_amplitude_damping,
    phase_covariant_family,
)

TWO_WAY_EQUAL = PauliMixtureFamily(MixtureSpec(0.5, 0.5, 0.0), exp_profile(2.0))


def identity_family():
    one = lambda t: 1.0
    zero = lambda t: 0.0
    return phase_covariant_family(lam=one, lam_dot=zero, lam3=one, lam3_dot=zero,
                                  tau3=zero, tau3_dot=zero)


def test_zero_rates_keep_state_constant():
    trajectory = integrate(constant_rates(0.0, 0.0, 0.0), [0.3, -0.1, 0.7], 5.0, 1e-2)
    assert np.max(np.abs(trajectory.points - np.array([0.3, -0.1, 0.7]))) == 0.0
    assert trajectory.violation is None


def test_amplitude_damping_relaxes_to_north_pole():
    gamma = 1.0
    rates = ode_rate_functions(amplitude_damping(gamma))
    trajectory = integrate(rates, [0.0, 0.0, -1.0], 5.0, 1e-3)
    expected = 1.0 - 2.0 * np.exp(-gamma * trajectory.times)
    assert np.max(np.abs(trajectory.points[:, 2] - expected)) <= 1e-8
    assert np.max(np.abs(trajectory.points[:, :2])) == 0.0
    assert trajectory.violation is None


def test_amplitude_damping_transverse_decay():
    rates = ode_rate_functions(amplitude_damping(1.0))
    trajectory = integrate(rates, [1.0, 0.0, 0.0], 4.0, 1e-3)
    expected = np.exp(-0.5 * trajectory.times)
    assert np.max(np.abs(trajectory.points[:, 0] - expected)) <= 1e-8


def test_symmetric_gad_decoupled_exponentials():
    gamma = 1.0
    rates = ode_rate_functions(generalized_amplitude_damping(gamma, 0.0))
    r0 = np.array([0.4, -0.3, 0.6])
    trajectory = integrate(rates, r0, 4.0, 1e-3)
    assert np.max(np.abs(trajectory.points[:, 0]
                         - r0[0] * np.exp(-0.5 * trajectory.times))) <= 1e-8
    assert np.max(np.abs(trajectory.points[:, 2]
                         - r0[2] * np.exp(-trajectory.times))) <= 1e-8


def test_integrate_validates_inputs():
    rates = constant_rates(0.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        integrate(rates, [0, 0, 0], -1.0, 1e-3)
    with pytest.raises(ValidationError):
        integrate(rates, [0, 0, 0], 1.0, 0.0)
    with pytest.raises(ValidationError):
        integrate(rates, [0, 0, 0], 1.0, 0.5)
    with pytest.raises(ValidationError):
        integrate(rates, [0, 0], 1.0, 1e-2)


def test_integrate_halts_on_rate_failure():
    def failing(t):
        if t > 2.0:
            raise SingularityError("rate blown up", value=t)
        return 0.1

    trajectory = integrate(RateFunctions(failing, lambda t: 0.0, lambda t: 0.0),
                           [0.5, 0.0, 0.0], 5.0, 1e-2)
    assert trajectory.halted is not None
    assert trajectory.halted[0] <= 2.02
    assert len(trajectory.times) < 501


def test_integrate_detects_norm_violation():
    trajectory = integrate(constant_rates(0.0, 0.5), [0.0, 0.0, 0.0], 2.0, 1e-3)
    assert trajectory.violation is not None
    assert trajectory.violation.time == pytest.approx(1.001, abs=1e-9)
    assert trajectory.violation.component == 2


def test_positivity_escape_linear_case():
    escape = positivity_escape(0.5, lambda t: 0.0, lambda t: 0.5, [0.0, 0.0, 0.0],
                               step=1e-3)
    assert escape == pytest.approx(1.001, abs=2e-3)


def test_positivity_escape_from_boundary_is_immediate():
    escape = positivity_escape(0.5, lambda t: 0.0, lambda t: 0.5, [0.0, 0.0, -1.0],
                               step=1e-3)
    assert escape <= 2e-3


def test_positivity_escape_alpha_accelerates_descent():
    escape = positivity_escape(0.5, lambda t: 0.2, lambda t: 0.7, [0.0, 0.0, 0.0],
                               step=1e-3)
    assert escape < 1.0
    # exact linear solution: r3 = -3.5 (1 - e^{-0.4 t}), crossing -1 at ln(7/5)/0.4
    assert escape == pytest.approx(np.log(1.4) / 0.4, abs=2e-3)


def test_positivity_escape_rejects_rates_violating_precondition():
    with pytest.raises(ValidationError):
        positivity_escape(0.5, lambda t: 1.0, lambda t: 0.5, [0.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        positivity_escape(0.5, lambda t: -0.1, lambda t: 0.6, [0.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        positivity_escape(-1.0, lambda t: 0.0, lambda t: 0.5, [0.0, 0.0, 0.0])


def test_positivity_escape_contract_violation_with_sparse_validation():
    # passes the 2-point endpoint check but integrates to almost nothing
    beta = lambda t: 0.5 * (np.exp(-80.0 * t) + np.exp(-80.0 * (2.0 - t)))
    with pytest.raises(ContractViolationError):
        positivity_escape(0.4, lambda t: 0.0, beta, [0.0, 0.0, 0.0],
                          step=1e-3, validate_points=2)


def test_positivity_escape_bound():
    rng = np.random.default_rng(3)
    for _ in range(10):
        delta = rng.uniform(0.1, 1.0)
        r3 = rng.uniform(-0.9, 0.9)
        escape = positivity_escape(delta, lambda t: 0.0, lambda t, d=delta: d,
                                   [0.0, 0.0, r3], step=1e-3)
        assert escape <= (1.0 + r3) / (2.0 * delta) + 1e-3 + 1e-9


def test_consistency_check_two_way_equal_mix():
    assert consistency_check(TWO_WAY_EQUAL, [1.0, 0.0, 0.0], 5.0, 1e-3) <= 1e-6
    assert consistency_check(TWO_WAY_EQUAL, [0.3, -0.5, 0.8], 5.0, 1e-3) <= 1e-6


def test_consistency_check_identity_family_exact():
    assert consistency_check(identity_family(), [0.3, 0.2, -0.1], 5.0, 1e-2) == 0.0


def test_consistency_check_amplitude_damping():
    assert consistency_check(amplitude_damping(1.0), [0.0, 0.0, -1.0], 5.0, 1e-3) <= 1e-6
    assert consistency_check(amplitude_damping(1.0), [0.5, 0.5, 0.5], 5.0, 1e-3) <= 1e-6


def test_consistency_check_depolarizing():
    family = DepolarizingFamily(exp_profile(1.0))
    assert consistency_check(family, [0.6, -0.2, 0.5], 5.0, 1e-3) <= 1e-6


def test_step_halving_fourth_order():
    for family in (TWO_WAY_EQUAL, amplitude_damping(1.0)):
        coarse = consistency_check(family, [0.7, 0.1, -0.4], 5.0, 4e-3)
        fine = consistency_check(family, [0.7, 0.1, -0.4], 5.0, 2e-3)
        assert fine > 0
        assert coarse / fine >= 8.0


def test_ode_rate_functions_reject_asymmetric_mixture():
    lopsided = PauliMixtureFamily(MixtureSpec(0.7, 0.2, 0.1), exp_profile(1.0))
    with pytest.raises(ValidationError):
        ode_rate_functions(lopsided)


def test_contractive_rates_never_leave_ball():
    rng = np.random.default_rng(11)
    for _ in range(50):
        alpha = rng.uniform(0.0, 2.0)
        beta = rng.uniform(-1.0, 1.0) * alpha
        gamma3 = rng.uniform(0.0, 2.0)
        r0 = rng.uniform(-1.0, 1.0, 3)
        norm = np.linalg.norm(r0)
        if norm > 0.99:
            r0 *= 0.99 / norm
        trajectory = integrate(constant_rates(alpha, beta, gamma3), r0, 100.0, 0.05)
        assert trajectory.violation is None
