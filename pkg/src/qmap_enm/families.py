"""Parametrized constructors for the qubit map families under study.

Unital families are mixtures of the three Pauli dephasing semigroups

    Phi_i(t)[rho] = (1 - p(t)) rho + p(t) sigma_i rho sigma_i,

all sharing one exponential decoherence function p(t) = (1 - e^{-ct}) / 2.
A mixture with weights (w1, w2, w3), sum 1, acts diagonally on the Paulis
with eigenvalues lam_j(t) = w_j + (1 - w_j)(1 - 2 p(t)).  Negative weights
are allowed (affine mixing); convexity is tracked per spec.

Non-unital families are phase covariant: lam1 = lam2 = lam(t), a z-axis
translation tau3(t), including amplitude damping (AD) and generalized
amplitude damping (GAD).  The AD/GAD orientation convention is relaxation
toward the r3 = +1 pole, i.e. tau3(t) = r_inf (1 - e^{-Gamma t}) with
r_inf = +1 for AD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import AffineRep
from .errors import ValidationError

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DecoherenceProfile:
    """Exponential decoherence function p(t) = (1 - e^{-ct}) / 2, c > 0."""

    c: float

    def p(self, t: float) -> float:
        return 0.5 * (1.0 - math.exp(-self.c * t))

    def p_dot(self, t: float) -> float:
        return 0.5 * self.c * math.exp(-self.c * t)

    def decay(self, t: float) -> float:
        # 1 - 2 p(t), evaluated directly; computing it through p loses all
        # precision once p saturates near 1/2.
        return math.exp(-self.c * t)


def exp_profile(c: float) -> DecoherenceProfile:
    """Decoherence profile with decay constant ``c``.

    Raises:
        ValidationError: if c <= 0.
    """
    if not c > 0:
        raise ValidationError(f"decay constant c must be > 0, got {c}")
    return DecoherenceProfile(float(c))


@dataclass(frozen=True)
class MixtureSpec:
    """Mixing weights for the three dephasing semigroups, summing to 1."""

    w1: float
    w2: float
    w3: float

    def __post_init__(self):
        total = self.w1 + self.w2 + self.w3
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights must sum to 1, got {total!r}")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.w1, self.w2, self.w3)

    @property
    def convex(self) -> bool:
        return min(self.weights) >= 0.0


@dataclass(frozen=True)
class PauliDiagonalSnapshot:
    """Map eigenvalues (lam1, lam2, lam3) of a unital Pauli-diagonal map at time t."""

    lam1: float
    lam2: float
    lam3: float
    t: float

    @property
    def lams(self) -> tuple[float, float, float]:
        return (self.lam1, self.lam2, self.lam3)


@dataclass(frozen=True)
class NonUnitalSnapshot:
    """Eigenvalues plus z-translation (lam1, lam2, lam3, tau3) at time t."""

    lam1: float
    lam2: float
    lam3: float
    tau3: float
    t: float

    @property
    def lams(self) -> tuple[float, float, float]:
        return (self.lam1, self.lam2, self.lam3)


def _require_forward_time(t: float):
    if t < 0:
        raise ValidationError(f"time must be non-negative, got {t}")


def pauli_semigroup_snapshot(axis: int, profile: DecoherenceProfile,
                             t: float) -> PauliDiagonalSnapshot:
    """Single dephasing semigroup along ``axis`` (1, 2 or 3).

    The preserved axis keeps eigenvalue 1; the two others decay as 1 - 2 p(t).
    """
    if axis not in (1, 2, 3):
        raise ValidationError(f"axis must be 1, 2 or 3, got {axis}")
    _require_forward_time(t)
    decayed = profile.decay(t)
    lams = [decayed, decayed, decayed]
    lams[axis - 1] = 1.0
    return PauliDiagonalSnapshot(*lams, t=t)


def mixture_snapshot(spec: MixtureSpec, profile: DecoherenceProfile,
                     t: float) -> PauliDiagonalSnapshot:
    """Mixture of the three semigroups: lam_j = w_j + (1 - w_j)(1 - 2 p(t))."""
    _require_forward_time(t)
    decayed = profile.decay(t)
    lams = [w + (1.0 - w) * decayed for w in spec.weights]
    return PauliDiagonalSnapshot(*lams, t=t)


def depolarizing_snapshot(profile: DecoherenceProfile, t: float) -> PauliDiagonalSnapshot:
    """Symmetric depolarizing map: all three eigenvalues equal 1 - p(t)."""
    _require_forward_time(t)
    lam = 1.0 - profile.p(t)
    return PauliDiagonalSnapshot(lam, lam, lam, t=t)


@dataclass(frozen=True)
class NonUnitalFamily:
    """Phase-covariant non-unital family with analytic evaluators.

    ``kind`` is one of "ad", "gad" or "custom".  All evaluators are total on
    t >= 0 and derivatives are supplied analytically; nothing here is
    differentiated numerically.
    """

    kind: str
    gamma: float
    r_inf: float
    lam: Callable[[float], float]
    lam_dot: Callable[[float], float]
    lam3: Callable[[float], float]
    lam3_dot: Callable[[float], float]
    tau3: Callable[[float], float]
    tau3_dot: Callable[[float], float]
    time_scale: float

    def snapshot(self, t: float) -> NonUnitalSnapshot:
        _require_forward_time(t)
        lam = self.lam(t)
        return NonUnitalSnapshot(lam, lam, self.lam3(t), self.tau3(t), t=t)


def _relaxation_family(kind: str, gamma: float, r_inf: float) -> NonUnitalFamily:
    if not gamma > 0:
        raise ValidationError(f"relaxation rate must be > 0, got {gamma}")
    if abs(r_inf) > 1.0:
        raise ValidationError(f"stationary z-coordinate must be in [-1, 1], got {r_inf}")
    g = float(gamma)
    r = float(r_inf)
    return NonUnitalFamily(
        kind=kind,
        gamma=g,
        r_inf=r,
        lam=lambda t: math.exp(-0.5 * g * t),
        lam_dot=lambda t: -0.5 * g * math.exp(-0.5 * g * t),
        lam3=lambda t: math.exp(-g * t),
        lam3_dot=lambda t: -g * math.exp(-g * t),
        tau3=lambda t: r * (1.0 - math.exp(-g * t)),
        tau3_dot=lambda t: r * g * math.exp(-g * t),
        time_scale=g,
    )


def amplitude_damping(gamma: float) -> NonUnitalFamily:
    """Amplitude damping at rate ``gamma``, relaxing toward r3 = +1."""
    return _relaxation_family("ad", gamma, 1.0)


def generalized_amplitude_damping(gamma: float, r_inf: float) -> NonUnitalFamily:
    """Generalized amplitude damping toward stationary z-coordinate ``r_inf``."""
    return _relaxation_family("gad", gamma, r_inf)


def phase_covariant_family(lam, lam_dot, lam3, lam3_dot, tau3, tau3_dot,
                           time_scale: float = 1.0) -> NonUnitalFamily:
    """Custom phase-covariant family from analytic evaluators and derivatives."""
    if not time_scale > 0:
        raise ValidationError(f"time_scale must be > 0, got {time_scale}")
    return NonUnitalFamily("custom", gamma=float(time_scale), r_inf=0.0,
                           lam=lam, lam_dot=lam_dot, lam3=lam3, lam3_dot=lam3_dot,
                           tau3=tau3, tau3_dot=tau3_dot, time_scale=float(time_scale))


def nonunital_snapshot(family: NonUnitalFamily, t: float) -> NonUnitalSnapshot:
    """Snapshot (lam1, lam2, lam3, tau3) of a non-unital family at time t."""
    return family.snapshot(t)


def affine_rep_of(snapshot) -> AffineRep:
    """Affine representation diag(lam1, lam2, lam3) with shift (0, 0, tau3)."""
    shift3 = getattr(snapshot, "tau3", 0.0)
    return AffineRep.diagonal(snapshot.lam1, snapshot.lam2, snapshot.lam3, shift3)


@dataclass(frozen=True)
class PauliMixtureFamily:
    """Mixture weights plus a shared decoherence profile, as one evolution."""

    spec: MixtureSpec
    profile: DecoherenceProfile

    def snapshot(self, t: float) -> PauliDiagonalSnapshot:
        return mixture_snapshot(self.spec, self.profile, t)

    @property
    def time_scale(self) -> float:
        return self.profile.c

    @property
    def convex(self) -> bool:
        return self.spec.convex


@dataclass(frozen=True)
class DepolarizingFamily:
    """Symmetric depolarizing evolution driven by one decoherence profile."""

    profile: DecoherenceProfile

    def snapshot(self, t: float) -> PauliDiagonalSnapshot:
        return depolarizing_snapshot(self.profile, t)

    @property
    def time_scale(self) -> float:
        return self.profile.c


def affine_trajectory(family) -> Callable[[float], AffineRep]:
    """Time-indexed affine representation of any family with snapshots."""
    return lambda t: affine_rep_of(family.snapshot(t))


@dataclass(frozen=True)
class EigenvalueTrajectory:
    """Diagonal map eigenvalues and their analytic time derivatives."""

    lams: Callable[[float], tuple[float, float, float]]
    lams_dot: Callable[[float], tuple[float, float, float]]


def mixture_eigenvalues(spec: MixtureSpec, profile: DecoherenceProfile) -> EigenvalueTrajectory:
    """Analytic eigenvalue trajectory of a Pauli mixture."""
    weights = spec.weights

    def lams(t: float) -> tuple[float, float, float]:
        decayed = profile.decay(t)
        return tuple(w + (1.0 - w) * decayed for w in weights)

    def lams_dot(t: float) -> tuple[float, float, float]:
        p_dot = profile.p_dot(t)
        return tuple(-2.0 * (1.0 - w) * p_dot for w in weights)

    return EigenvalueTrajectory(lams, lams_dot)


def depolarizing_eigenvalues(profile: DecoherenceProfile) -> EigenvalueTrajectory:
    """Analytic eigenvalue trajectory of the symmetric depolarizing map."""

    def lams(t: float) -> tuple[float, float, float]:
        lam = 1.0 - profile.p(t)
        return (lam, lam, lam)

    def lams_dot(t: float) -> tuple[float, float, float]:
        d = -profile.p_dot(t)
        return (d, d, d)

    return EigenvalueTrajectory(lams, lams_dot)


def eigenvalue_trajectory(family) -> EigenvalueTrajectory:
    """Analytic eigenvalue trajectory for any unital family."""
    if isinstance(family, PauliMixtureFamily):
        return mixture_eigenvalues(family.spec, family.profile)
    if isinstance(family, DepolarizingFamily):
        return depolarizing_eigenvalues(family.profile)
    raise ValidationError(f"no eigenvalue trajectory for {type(family).__name__}")


# Convenience used by snapshots feeding numpy code.
def snapshot_array(snapshot) -> np.ndarray:
    """Eigenvalues of a snapshot as a numpy vector."""
    return np.asarray(snapshot.lams, dtype=float)
