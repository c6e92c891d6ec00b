from __future__ import annotations

import numpy as np
import pytest

from qmap_enm.algebra import PAULIS, min_choi_eigenvalue
from qmap_enm.errors import ValidationError
from qmap_enm.families import (
    MixtureSpec,
    affine_rep_of,
    amplitude_damping,
    depolarizing_snapshot,
    exp_profile,
    generalized_amplitude_damping,
    mixture_eigenvalues,
    mixture_snapshot,
    nonunital_snapshot,
    pauli_semigroup_snapshot,
    phase_covariant_family,
)


def channel_eigenvalue_oracle(weights, p, axis):
    # Brute-force action of the mixed dephasing channel on sigma_axis.
    sigma = PAULIS[axis - 1]
    image = np.zeros((2, 2), dtype=complex)
    for w, conjugator in zip(weights, PAULIS):
        image += w * ((1 - p) * sigma + p * conjugator @ sigma @ conjugator)
    return 0.5 * np.trace(sigma @ image).real


def depolarizing_eigenvalue_oracle(p, axis):
    sigma = PAULIS[axis - 1]
    image = (1 - 0.75 * p) * sigma
    for conjugator in PAULIS:
        image += 0.25 * p * conjugator @ sigma @ conjugator
    return 0.5 * np.trace(sigma @ image).real


def test_exp_profile_initial_and_late_values():
    profile = exp_profile(1.0)
    assert profile.p(0.0) == 0.0
    assert profile.p_dot(0.0) == pytest.approx(0.5)
    assert profile.p(100.0) == pytest.approx(0.5, abs=1e-12)
    assert exp_profile(2.0).p(np.log(2) / 2) == pytest.approx(0.25)


def test_exp_profile_rejects_nonpositive_rate():
    with pytest.raises(ValidationError):
        exp_profile(0.0)
    with pytest.raises(ValidationError):
        exp_profile(-1.0)


def test_exp_profile_invariants():
    profile = exp_profile(1.7)
    ts = np.linspace(0.0, 30.0, 200)
    ps = np.array([profile.p(t) for t in ts])
    # strict monotonicity is only resolvable in float before p saturates
    resolvable = ts <= 20.0 / profile.c
    assert np.all(np.diff(ps[resolvable]) > 0)
    assert np.all(np.diff(ps) >= 0)
    assert np.all((ps >= 0) & (ps <= 0.5))
    assert np.all(ps[resolvable] < 0.5)
    assert all(profile.p_dot(t) > 0 for t in ts)
    assert all(profile.decay(t) == pytest.approx(1.0 - 2.0 * profile.p(t), abs=1e-15)
               for t in ts[ts <= 5.0])


def test_semigroup_snapshot_values():
    profile = exp_profile(1.0)
    assert pauli_semigroup_snapshot(3, profile, 0.0).lams == (1.0, 1.0, 1.0)

    snap = pauli_semigroup_snapshot(3, profile, 1.0)
    assert snap.lam1 == pytest.approx(np.exp(-1.0))
    assert snap.lam2 == pytest.approx(np.exp(-1.0))
    assert snap.lam3 == 1.0

    for t in (0.0, 0.5, 4.0):
        assert pauli_semigroup_snapshot(1, profile, t).lam1 == 1.0


def test_semigroup_snapshot_rejects_negative_time_and_bad_axis():
    profile = exp_profile(1.0)
    with pytest.raises(ValidationError):
        pauli_semigroup_snapshot(3, profile, -0.1)
    with pytest.raises(ValidationError):
        pauli_semigroup_snapshot(0, profile, 0.1)


def test_mixture_snapshot_equal_two_way_mix():
    profile = exp_profile(2.0)
    spec = MixtureSpec(0.5, 0.5, 0.0)
    for t in (0.0, 0.3, 1.0, 2.5):
        snap = mixture_snapshot(spec, profile, t)
        u = np.exp(-2.0 * t)
        assert snap.lam1 == pytest.approx((1 + u) / 2, abs=1e-14)
        assert snap.lam2 == pytest.approx((1 + u) / 2, abs=1e-14)
        assert snap.lam3 == pytest.approx(u, abs=1e-14)


def test_mixture_snapshot_two_way_eigenvalue_set():
    profile = exp_profile(1.3)
    a = 0.3
    spec = MixtureSpec(0.0, a, 1.0 - a)
    t = 0.8
    snap = mixture_snapshot(spec, profile, t)
    shrink = 1.0 - np.exp(-1.3 * t)
    assert snap.lam1 == pytest.approx(np.exp(-1.3 * t))
    expected = {1.0 - a * shrink, 1.0 - (1.0 - a) * shrink}
    assert {round(snap.lam2, 12), round(snap.lam3, 12)} == {round(v, 12) for v in expected}


def test_mixture_snapshot_matches_channel_action_oracle():
    rng = np.random.default_rng(42)
    profile = exp_profile(1.0)
    for _ in range(50):
        w = rng.dirichlet(np.ones(3))
        spec = MixtureSpec(*w)
        t = rng.uniform(0.0, 5.0)
        snap = mixture_snapshot(spec, profile, t)
        p = profile.p(t)
        for axis in (1, 2, 3):
            assert snap.lams[axis - 1] == pytest.approx(
                channel_eigenvalue_oracle(w, p, axis), abs=1e-12)


def test_mixture_snapshot_pure_semigroup_limit():
    profile = exp_profile(1.0)
    snap = mixture_snapshot(MixtureSpec(1.0, 0.0, 0.0), profile, 0.7)
    assert snap.lam1 == 1.0
    assert snap.lam2 == pytest.approx(np.exp(-0.7))
    assert snap.lam3 == pytest.approx(np.exp(-0.7))


def test_mixture_weights_must_sum_to_one():
    with pytest.raises(ValidationError):
        MixtureSpec(0.5, 0.5, 0.5)


def test_mixture_snapshot_affine_in_weights():
    profile = exp_profile(1.0)
    rng = np.random.default_rng(5)
    for _ in range(30):
        w = rng.dirichlet(np.ones(3))
        v = rng.dirichlet(np.ones(3))
        blend = rng.uniform()
        mixed = MixtureSpec(*(blend * w + (1 - blend) * v))
        t = rng.uniform(0.0, 4.0)
        left = np.array(mixture_snapshot(mixed, profile, t).lams)
        right = (blend * np.array(mixture_snapshot(MixtureSpec(*w), profile, t).lams)
                 + (1 - blend) * np.array(mixture_snapshot(MixtureSpec(*v), profile, t).lams))
        assert np.max(np.abs(left - right)) <= 1e-12


def test_convex_mixture_eigenvalues_decreasing_in_unit_interval():
    rng = np.random.default_rng(6)
    for _ in range(500):
        w = rng.dirichlet(np.ones(3))
        c = rng.uniform(0.2, 4.0)
        profile = exp_profile(c)
        spec = MixtureSpec(*w)
        t = rng.uniform(0.0, 6.0)
        now = np.array(mixture_snapshot(spec, profile, t).lams)
        later = np.array(mixture_snapshot(spec, profile, t + rng.uniform(0.01, 1.0)).lams)
        assert np.all(now > 0) and np.all(now <= 1.0)
        assert np.all(later <= now + 1e-12)


def test_depolarizing_snapshot():
    profile = exp_profile(1.0)
    assert depolarizing_snapshot(profile, 0.0).lams == (1.0, 1.0, 1.0)

    # p = 0.4 at t = -ln(0.2): compare against the brute-force channel action.
    t = -np.log(0.2)
    snap = depolarizing_snapshot(profile, t)
    p = profile.p(t)
    assert p == pytest.approx(0.4)
    for axis in (1, 2, 3):
        assert snap.lams[axis - 1] == pytest.approx(
            depolarizing_eigenvalue_oracle(p, axis), abs=1e-12)
        assert snap.lams[axis - 1] == pytest.approx(0.6)


def test_nonunital_snapshot_initial_condition():
    for family in (amplitude_damping(1.0), generalized_amplitude_damping(2.0, -0.5)):
        snap = nonunital_snapshot(family, 0.0)
        assert (snap.lam1, snap.lam2, snap.lam3, snap.tau3) == (1.0, 1.0, 1.0, 0.0)


def test_amplitude_damping_long_time_fixed_point():
    family = amplitude_damping(1.0)
    snap = nonunital_snapshot(family, 60.0)
    assert snap.lam1 == pytest.approx(0.0, abs=1e-12)
    assert snap.lam3 == pytest.approx(0.0, abs=1e-12)
    assert abs(snap.tau3) == pytest.approx(1.0, abs=1e-12)


def test_gad_symmetric_bath_is_unital():
    family = generalized_amplitude_damping(1.0, 0.0)
    for t in (0.0, 0.5, 3.0):
        assert nonunital_snapshot(family, t).tau3 == 0.0
        assert affine_rep_of(nonunital_snapshot(family, t)).is_unital


def test_nonunital_family_validation():
    with pytest.raises(ValidationError):
        amplitude_damping(0.0)
    with pytest.raises(ValidationError):
        generalized_amplitude_damping(1.0, 1.5)
    with pytest.raises(ValidationError):
        nonunital_snapshot(amplitude_damping(1.0), -1.0)


def test_affine_rep_of_snapshots():
    identity = affine_rep_of(mixture_snapshot(MixtureSpec(0.5, 0.5, 0.0), exp_profile(2.0), 0.0))
    assert np.allclose(identity.matrix, np.eye(3))
    assert np.allclose(identity.shift, 0.0)

    snap = mixture_snapshot(MixtureSpec(0.5, 0.5, 0.0), exp_profile(2.0), 1.3)
    rep = affine_rep_of(snap)
    assert rep.matrix[2, 2] == pytest.approx(np.exp(-2.6))
    assert rep.is_unital

    ad = affine_rep_of(nonunital_snapshot(amplitude_damping(1.0), 0.9))
    assert ad.shift[0] == 0.0 and ad.shift[1] == 0.0
    assert ad.shift[2] == pytest.approx(1.0 - np.exp(-0.9))


def test_custom_phase_covariant_family_passthrough():
    family = phase_covariant_family(
        lam=lambda t: np.exp(-t),
        lam_dot=lambda t: -np.exp(-t),
        lam3=lambda t: 1.0,
        lam3_dot=lambda t: 0.0,
        tau3=lambda t: 0.0,
        tau3_dot=lambda t: 0.0,
    )
    snap = nonunital_snapshot(family, 1.0)
    assert snap.lam1 == pytest.approx(np.exp(-1.0))
    assert snap.lam3 == 1.0


def test_convex_mixture_choi_positive():
    rng = np.random.default_rng(12)
    profile = exp_profile(1.0)
    for _ in range(40):
        spec = MixtureSpec(*rng.dirichlet(np.ones(3)))
        t = rng.uniform(0.0, 8.0)
        rep = affine_rep_of(mixture_snapshot(spec, profile, t))
        assert min_choi_eigenvalue(rep) >= -1e-10


def test_affine_mixture_choi_eigenvalue_closed_form():
    profile = exp_profile(1.0)
    spec = MixtureSpec(0.6, 0.6, -0.2)
    for t in np.linspace(0.05, 6.0, 40):
        rep = affine_rep_of(mixture_snapshot(spec, profile, t))
        assert min_choi_eigenvalue(rep) == pytest.approx(-0.2 * profile.p(t), abs=1e-10)


def test_mixture_eigenvalue_trajectory_derivatives():
    profile = exp_profile(1.4)
    spec = MixtureSpec(0.2, 0.35, 0.45)
    trajectory = mixture_eigenvalues(spec, profile)
    h = 1e-6
    for t in (0.1, 0.9, 3.0):
        numeric = (np.array(trajectory.lams(t + h)) - np.array(trajectory.lams(t - h))) / (2 * h)
        analytic = np.array(trajectory.lams_dot(t))
        assert np.max(np.abs(numeric - analytic)) <= 1e-8


def test_snapshot_identity_is_identity_matrix():
    snap = pauli_semigroup_snapshot(2, exp_profile(1.0), 0.0)
    rep = affine_rep_of(snap)
    assert np.allclose(rep.matrix, np.eye(3))
    assert np.allclose(rep.shift, 0.0)
