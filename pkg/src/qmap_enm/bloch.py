"""Bloch-vector dynamics for phase-covariant evolutions.

The integrated equations of motion are

    r1_dot = -(alpha + 2 gamma3) r1
    r2_dot = -(alpha + 2 gamma3) r2
    r3_dot = -2 alpha r3 - 2 beta

so a positive ``beta`` coefficient drives r3 downward.  With the rate
convention of :mod:`qmap_enm.rates` (gamma_plus = alpha + beta is the
relaxation rate toward r3 = +1), the equation-of-motion coefficient is the
gamma_plus <-> gamma_minus relabeling image of the extracted beta, i.e. its
negative; :func:`ode_rate_functions` performs that bridge for the built-in
families.  For any phase-covariant family the transverse coefficient
satisfies alpha + 2 gamma3 = -lam_dot / lam exactly, so fixed-step
integration must reproduce the closed-form map action to integrator order.

The positivity-escape experiment keeps ``beta`` as supplied: rate functions
with alpha - beta <= -delta < 0 (an eternally negative transverse rate)
push r3 below -1 within (1 + r3(0)) / (2 delta), leaving the state space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .algebra import apply_affine
from .errors import ContractViolationError, QmapError, ValidationError
from .families import (
    DepolarizingFamily,
    NonUnitalFamily,
    PauliMixtureFamily,
    affine_trajectory,
)

NORM_VIOLATION_TOL = 1e-9


@dataclass(frozen=True)
class RateFunctions:
    """Equation-of-motion coefficients, total on t >= 0."""

    alpha: Callable[[float], float]
    beta: Callable[[float], float]
    gamma3: Callable[[float], float]


def constant_rates(alpha: float, beta: float, gamma3: float = 0.0) -> RateFunctions:
    """Time-independent coefficients."""
    return RateFunctions(lambda t: alpha, lambda t: beta, lambda t: gamma3)


class Violation(NamedTuple):
    """First node where the Bloch vector left the unit ball."""

    time: float
    component: int
    norm: float


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    points: np.ndarray  # shape (len(times), 3)
    violation: Violation | None
    halted: tuple[float, str] | None = None


def _derivative(rates: RateFunctions, t: float, r1: float, r2: float, r3: float):
    a = rates.alpha(t)
    g3 = rates.gamma3(t)
    b = rates.beta(t)
    transverse = -(a + 2.0 * g3)
    return transverse * r1, transverse * r2, -2.0 * a * r3 - 2.0 * b


def integrate(rates: RateFunctions, r0, horizon: float, step: float) -> Trajectory:
    """Classical fixed-step fourth-order integration of the Bloch equations.

    Detects |r| > 1 + 1e-9 at each node (first violation recorded).  A rate
    evaluator failure halts the run with the partial trajectory and the
    error recorded.
    """
    if horizon <= 0:
        raise ValidationError(f"horizon must be > 0, got {horizon}")
    if step <= 0:
        raise ValidationError(f"step must be > 0, got {step}")
    if step > horizon / 10.0:
        raise ValidationError(f"step {step} too large for horizon {horizon}")
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (3,):
        raise ValidationError("initial Bloch vector must have 3 components")

    n_steps = int(round(horizon / step))
    times = np.arange(n_steps + 1) * step
    points = np.empty((n_steps + 1, 3))
    points[0] = r0
    violation: Violation | None = None
    halted: tuple[float, str] | None = None

    r1, r2, r3 = float(r0[0]), float(r0[1]), float(r0[2])
    norm = math.sqrt(r1 * r1 + r2 * r2 + r3 * r3)
    if norm > 1.0 + NORM_VIOLATION_TOL:
        violation = Violation(0.0, int(np.argmax(np.abs(r0))), norm)

    half = 0.5 * step
    sixth = step / 6.0
    filled = n_steps + 1
    for i in range(n_steps):
        t = i * step
        try:
            a1, b1, c1 = _derivative(rates, t, r1, r2, r3)
            a2, b2, c2 = _derivative(rates, t + half,
                                     r1 + half * a1, r2 + half * b1, r3 + half * c1)
            a3, b3, c3 = _derivative(rates, t + half,
                                     r1 + half * a2, r2 + half * b2, r3 + half * c2)
            a4, b4, c4 = _derivative(rates, t + step,
                                     r1 + step * a3, r2 + step * b3, r3 + step * c3)
        except QmapError as err:
            halted = (t, str(err))
            filled = i + 1
            break
        r1 += sixth * (a1 + 2.0 * (a2 + a3) + a4)
        r2 += sixth * (b1 + 2.0 * (b2 + b3) + b4)
        r3 += sixth * (c1 + 2.0 * (c2 + c3) + c4)
        points[i + 1] = (r1, r2, r3)
        if violation is None:
            norm = math.sqrt(r1 * r1 + r2 * r2 + r3 * r3)
            if norm > 1.0 + NORM_VIOLATION_TOL:
                component = int(np.argmax(np.abs(points[i + 1])))
                violation = Violation(float(times[i + 1]), component, norm)

    return Trajectory(times[:filled], points[:filled], violation, halted)


def positivity_escape(delta: float, alpha_fn: Callable[[float], float],
                      beta_fn: Callable[[float], float], r0,
                      step: float = 1e-3, validate_points: int = 64) -> float:
    """First time the integrated r3 drops below -1 - 1e-9.

    The supplied coefficients must satisfy alpha - beta <= -delta and
    alpha >= 0 on the horizon (checked by sampling at ``validate_points``);
    escape is then guaranteed no later than (1 + r3(0)) / (2 delta) plus one
    step, and its absence raises :class:`ContractViolationError`.
    """
    if delta <= 0:
        raise ValidationError(f"delta must be > 0, got {delta}")
    if step <= 0:
        raise ValidationError(f"step must be > 0, got {step}")
    r0 = np.asarray(r0, dtype=float)
    bound = (1.0 + float(r0[2])) / (2.0 * delta)
    horizon = max(2.0 * bound, 10.0 * step)

    for t in np.linspace(0.0, horizon, max(2, validate_points)):
        a, b = alpha_fn(float(t)), beta_fn(float(t))
        if a - b > -delta + 1e-12:
            raise ValidationError(
                f"alpha - beta = {a - b:.6g} at t = {t:.6g} violates <= -{delta}")
        if a < -1e-12:
            raise ValidationError(f"alpha = {a:.6g} at t = {t:.6g} must be non-negative")

    rates = RateFunctions(alpha_fn, beta_fn, lambda t: 0.0)
    n_steps = int(math.ceil(horizon / step))
    r1, r2, r3 = float(r0[0]), float(r0[1]), float(r0[2])
    half = 0.5 * step
    sixth = step / 6.0
    if r3 < -1.0 - NORM_VIOLATION_TOL:
        return 0.0
    for i in range(n_steps):
        t = i * step
        a1, b1, c1 = _derivative(rates, t, r1, r2, r3)
        a2, b2, c2 = _derivative(rates, t + half,
                                 r1 + half * a1, r2 + half * b1, r3 + half * c1)
        a3, b3, c3 = _derivative(rates, t + half,
                                 r1 + half * a2, r2 + half * b2, r3 + half * c2)
        a4, b4, c4 = _derivative(rates, t + step,
                                 r1 + step * a3, r2 + step * b3, r3 + step * c3)
        r1 += sixth * (a1 + 2.0 * (a2 + a3) + a4)
        r2 += sixth * (b1 + 2.0 * (b2 + b3) + b4)
        r3 += sixth * (c1 + 2.0 * (c2 + c3) + c4)
        if r3 < -1.0 - NORM_VIOLATION_TOL:
            escape = (i + 1) * step
            if escape > bound + step + 1e-12:
                raise ContractViolationError(
                    f"escape at t = {escape:.6g} exceeds the bound {bound:.6g} + step")
            return escape
    raise ContractViolationError(
        f"no positivity escape within t = {horizon:.6g}; the supplied rate "
        "functions cannot satisfy alpha - beta <= -delta throughout")


def ode_rate_functions(family) -> RateFunctions:
    """Equation-of-motion coefficients for a built-in family.

    Only phase-covariant evolutions (lam1 = lam2) fit the integrated form;
    asymmetric Pauli mixtures are rejected.
    """
    if isinstance(family, NonUnitalFamily):
        def alpha(t: float) -> float:
            return -0.5 * family.lam3_dot(t) / family.lam3(t)

        def beta(t: float) -> float:
            ratio = family.lam3_dot(t) / family.lam3(t)
            return -(0.5 * family.tau3_dot(t) - 0.5 * family.tau3(t) * ratio)

        def gamma3(t: float) -> float:
            return 0.25 * (-2.0 * family.lam_dot(t) / family.lam(t)
                           + family.lam3_dot(t) / family.lam3(t))

        return RateFunctions(alpha, beta, gamma3)

    if isinstance(family, PauliMixtureFamily):
        w1, w2, w3 = family.spec.weights
        if abs(w1 - w2) > 1e-12:
            raise ValidationError(
                "Bloch integration needs a phase-covariant evolution; "
                f"weights ({w1}, {w2}) break lam1 = lam2")
        profile = family.profile
        c = profile.c

        def ratios(t: float) -> tuple[float, float]:
            decayed = profile.decay(t)
            lam = w1 + (1.0 - w1) * decayed
            lam3 = w3 + (1.0 - w3) * decayed
            return (-c * (1.0 - w1) * decayed / lam, -c * (1.0 - w3) * decayed / lam3)

        return RateFunctions(
            alpha=lambda t: -0.5 * ratios(t)[1],
            beta=lambda t: 0.0,
            gamma3=lambda t: 0.25 * (-2.0 * ratios(t)[0] + ratios(t)[1]),
        )

    if isinstance(family, DepolarizingFamily):
        profile = family.profile

        def ratio(t: float) -> float:
            return -profile.p_dot(t) / (1.0 - profile.p(t))

        return RateFunctions(
            alpha=lambda t: -0.5 * ratio(t),
            beta=lambda t: 0.0,
            gamma3=lambda t: -0.25 * ratio(t),
        )

    raise ValidationError(f"no equation-of-motion coefficients for {type(family).__name__}")


def consistency_check(family, r0, horizon: float, step: float) -> float:
    """Max deviation between the integrated trajectory and the closed-form
    map action over the node grid."""
    rates = ode_rate_functions(family)
    trajectory = affine_trajectory(family)
    integrated = integrate(rates, r0, horizon, step)
    r0 = np.asarray(r0, dtype=float)
    deviation = 0.0
    for t, point in zip(integrated.times, integrated.points):
        expected = apply_affine(trajectory(float(t)), r0)
        deviation = max(deviation, float(np.max(np.abs(point - expected))))
    return deviation
