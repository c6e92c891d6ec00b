"""Canonical decay rates of the time-local master equation.

Three independent routes are provided:

* the weight formula for Pauli mixtures, built from per-axis terms
  g(w, p) = (1 - w) / (1 - 2 (1 - w) p) * p_dot / 2;
* eigenvalue log-derivatives, gamma1 = (d1 - d2 - d3) / 4 with
  d_i = lam_i_dot / lam_i (cyclic for the others);
* a generic finite-difference generator F_dot . F^{-1} of the affine
  trajectory, which never consumes analytic derivatives.

Non-unital phase-covariant rates use alpha = -lam3_dot / (2 lam3),
beta = tau3_dot / 2 - tau3 lam3_dot / (2 lam3), gamma_pm = alpha +- beta,
and gamma3 = (-d1 - d2 + d3) / 4.  With the package's orientation
convention (relaxation toward r3 = +1) gamma_plus is the relaxation rate;
swapping gamma_plus and gamma_minus is a pure relabeling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .algebra import AffineRep, invert_affine
from .errors import SingularityError, ValidationError
from .families import (
    DecoherenceProfile,
    DepolarizingFamily,
    EigenvalueTrajectory,
    MixtureSpec,
    NonUnitalFamily,
    PauliMixtureFamily,
    eigenvalue_trajectory,
)

UNITAL_RATE_NAMES = ("gamma1", "gamma2", "gamma3")
NONUNITAL_RATE_NAMES = ("gamma_plus", "gamma_minus", "gamma3")


class UnitalRates(NamedTuple):
    gamma1: float
    gamma2: float
    gamma3: float


class NonUnitalRates(NamedTuple):
    alpha: float
    beta: float
    gamma_plus: float
    gamma_minus: float
    gamma3: float


class BlochGenerator(NamedTuple):
    """Affine generator: d/dt r = matrix @ r + shift."""

    matrix: np.ndarray
    shift: np.ndarray
    one_sided: bool = False


def dephasing_rate(p: float, p_dot: float) -> float:
    """Decay rate p_dot / (1 - 2p) of a single dephasing map.

    Raises:
        SingularityError: if p >= 1/2.
    """
    if p < 0:
        raise ValidationError(f"decoherence function must be non-negative, got {p}")
    denominator = 1.0 - 2.0 * p
    if denominator <= 1e-14:
        raise SingularityError(f"dephasing rate singular at p = {p}", value=denominator)
    return p_dot / denominator


def weight_rate_term(weight: float, p: float, p_dot: float) -> float:
    """Per-axis rate contribution (1 - w) / (1 - 2 (1 - w) p) * p_dot / 2.

    Non-negative and strictly increasing in p (at fixed p_dot) for weights
    in [0, 1]; weights outside that range are accepted to support affine
    mixing, where the denominator can vanish at finite time.

    Raises:
        SingularityError: if the denominator magnitude is <= 1e-14.
    """
    if not 0.0 <= p < 0.5:
        raise ValidationError(f"decoherence function must lie in [0, 1/2), got {p}")
    denominator = 1.0 - 2.0 * (1.0 - weight) * p
    if abs(denominator) <= 1e-14:
        raise SingularityError(
            f"rate term singular for weight {weight} at p = {p}", value=denominator)
    return (1.0 - weight) / denominator * 0.5 * p_dot


def pauli_rates_from_weights(spec: MixtureSpec, profile: DecoherenceProfile,
                             t: float) -> UnitalRates:
    """Canonical rates of a Pauli mixture via the weight formula."""
    if t < 0:
        raise ValidationError(f"time must be non-negative, got {t}")
    # Same terms as weight_rate_term, with the denominator rewritten as
    # w + (1 - w) e^{-ct}: evaluating 1 - 2 (1 - w) p through p cancels
    # catastrophically once p saturates.  The term stays finite whenever the
    # numerator vanishes alongside the denominator (convex weights), so only
    # genuine poles (ratio blow-up, negative weights) are singular.
    decayed = profile.decay(t)
    terms = []
    for w in spec.weights:
        numerator = (1.0 - w) * decayed
        denominator = w + numerator
        if denominator == 0.0 or abs(numerator) >= 1e12 * abs(denominator):
            raise SingularityError(
                f"rate term singular for weight {w} at t = {t}", value=denominator)
        terms.append(0.25 * profile.c * numerator / denominator)
    g1, g2, g3 = terms
    return UnitalRates(-g1 + g2 + g3, g1 - g2 + g3, g1 + g2 - g3)


def pauli_rates_from_eigenvalues(trajectory: EigenvalueTrajectory, t: float) -> UnitalRates:
    """Canonical rates from eigenvalue log-derivatives.

    Raises:
        SingularityError: if any eigenvalue magnitude is <= 1e-12.
    """
    lams = trajectory.lams(t)
    for i, lam in enumerate(lams):
        if abs(lam) <= 1e-12:
            raise SingularityError(f"map eigenvalue {i + 1} vanishes at t = {t}", value=lam)
    d1, d2, d3 = (dot / lam for dot, lam in zip(trajectory.lams_dot(t), lams))
    return UnitalRates(0.25 * (d1 - d2 - d3),
                       0.25 * (d2 - d1 - d3),
                       0.25 * (d3 - d1 - d2))


def _difference_quotient(trajectory: Callable[[float], AffineRep], t: float,
                         h: float) -> tuple[np.ndarray, np.ndarray]:
    later = trajectory(t + h)
    earlier = trajectory(t - h)
    return ((later.matrix - earlier.matrix) / (2.0 * h),
            (later.shift - earlier.shift) / (2.0 * h))


def generator_from_trajectory(trajectory: Callable[[float], AffineRep], t: float,
                              h: float | None = None) -> BlochGenerator:
    """Finite-difference affine generator F_dot . F^{-1} at time t.

    Central differences with one Richardson step; falls back to a one-sided
    second-order difference (flagged in the result) when t - h < 0.

    Raises:
        SingularityError: if F(t) is not invertible.
    """
    if t < 0:
        raise ValidationError(f"time must be non-negative, got {t}")
    if h is None:
        h = max(1e-5, 1e-4 * t)
    if h <= 0:
        raise ValidationError(f"step must be > 0, got {h}")
    one_sided = t - h < 0.0
    if one_sided:
        here = trajectory(t)
        step1 = trajectory(t + h)
        step2 = trajectory(t + 2.0 * h)
        matrix_dot = (-3.0 * here.matrix + 4.0 * step1.matrix - step2.matrix) / (2.0 * h)
        shift_dot = (-3.0 * here.shift + 4.0 * step1.shift - step2.shift) / (2.0 * h)
    else:
        coarse_m, coarse_s = _difference_quotient(trajectory, t, h)
        fine_m, fine_s = _difference_quotient(trajectory, t, 0.5 * h)
        matrix_dot = (4.0 * fine_m - coarse_m) / 3.0
        shift_dot = (4.0 * fine_s - coarse_s) / 3.0
    snapshot = trajectory(t)
    inverse = invert_affine(snapshot)
    matrix = matrix_dot @ inverse.matrix
    shift = shift_dot - matrix @ snapshot.shift
    return BlochGenerator(matrix, shift, one_sided)


def unital_rates_from_generator(generator: BlochGenerator) -> UnitalRates:
    """Canonical rates read off a Pauli-diagonal generator.

    Raises:
        ValidationError: if the generator is not diagonal within 1e-8.
    """
    matrix = generator.matrix
    off = matrix - np.diag(np.diag(matrix))
    if np.max(np.abs(off)) > 1e-8:
        raise ValidationError("generator is not Pauli-diagonal")
    d1, d2, d3 = np.diag(matrix)
    return UnitalRates(0.25 * (d1 - d2 - d3),
                       0.25 * (d2 - d1 - d3),
                       0.25 * (d3 - d1 - d2))


def nonunital_rates_from_generator(generator: BlochGenerator) -> NonUnitalRates:
    """Phase-covariant rates read off an affine generator."""
    d1, d2, d3 = np.diag(generator.matrix)
    alpha = -0.5 * d3
    beta = 0.5 * float(generator.shift[2])
    gamma3 = 0.25 * (-d1 - d2 + d3)
    return NonUnitalRates(alpha, beta, alpha + beta, alpha - beta, gamma3)


def nonunital_rates(family: NonUnitalFamily, t: float) -> NonUnitalRates:
    """Analytic phase-covariant rates (alpha, beta, gamma_pm, gamma3).

    Raises:
        SingularityError: if lam(t) or lam3(t) vanishes.
    """
    if t < 0:
        raise ValidationError(f"time must be non-negative, got {t}")
    lam = family.lam(t)
    lam3 = family.lam3(t)
    for name, value in (("lam", lam), ("lam3", lam3)):
        if abs(value) <= 1e-12:
            raise SingularityError(f"{name} vanishes at t = {t}", value=value)
    d_perp = family.lam_dot(t) / lam
    d3 = family.lam3_dot(t) / lam3
    alpha = -0.5 * d3
    beta = 0.5 * family.tau3_dot(t) - 0.5 * family.tau3(t) * d3
    gamma3 = 0.25 * (-2.0 * d_perp + d3)
    return NonUnitalRates(alpha, beta, alpha + beta, alpha - beta, gamma3)


@dataclass(frozen=True)
class Asymptote:
    """t -> infinity limit of one rate: exact, estimated, or out of reach."""

    status: str  # "exact" | "estimate" | "unbounded" | "indeterminate"
    value: float | None = None
    uncertainty: float = 0.0


@dataclass(frozen=True)
class RateSource:
    """Named rate evaluators for one evolution, with asymptotic metadata."""

    names: tuple[str, ...]
    values: Callable[[float], tuple[float, ...]]
    time_scale: float
    convex: bool | None = None
    exact_asymptotes: tuple[float, ...] | None = None
    unbounded: bool = False


def _mixture_asymptotes(spec: MixtureSpec, c: float) -> tuple[float, float, float] | None:
    if not spec.convex:
        return None
    vanished = [1.0 if abs(w) <= 1e-15 else 0.0 for w in spec.weights]
    z1, z2, z3 = vanished
    return (0.25 * c * (-z1 + z2 + z3),
            0.25 * c * (z1 - z2 + z3),
            0.25 * c * (z1 + z2 - z3))


def rate_source(family) -> RateSource:
    """Rate source for a built-in family, with exact asymptotes when known."""
    if isinstance(family, PauliMixtureFamily):
        spec, profile = family.spec, family.profile
        return RateSource(
            names=UNITAL_RATE_NAMES,
            values=lambda t: tuple(pauli_rates_from_weights(spec, profile, t)),
            time_scale=profile.c,
            convex=spec.convex,
            exact_asymptotes=_mixture_asymptotes(spec, profile.c),
            unbounded=not spec.convex,
        )
    if isinstance(family, DepolarizingFamily):
        trajectory = eigenvalue_trajectory(family)
        return RateSource(
            names=UNITAL_RATE_NAMES,
            values=lambda t: tuple(pauli_rates_from_eigenvalues(trajectory, t)),
            time_scale=family.profile.c,
            convex=True,
            exact_asymptotes=(0.0, 0.0, 0.0),
        )
    if isinstance(family, NonUnitalFamily):
        exact = None
        if family.kind in ("ad", "gad"):
            half = 0.5 * family.gamma
            exact = (half * (1.0 + family.r_inf), half * (1.0 - family.r_inf), 0.0)

        def values(t: float) -> tuple[float, float, float]:
            rates = nonunital_rates(family, t)
            return (rates.gamma_plus, rates.gamma_minus, rates.gamma3)

        return RateSource(
            names=NONUNITAL_RATE_NAMES,
            values=values,
            time_scale=family.time_scale,
            convex=None,
            exact_asymptotes=exact,
        )
    raise ValidationError(f"no rate source for {type(family).__name__}")


def custom_rate_source(names, values, time_scale: float = 1.0,
                       convex: bool | None = None,
                       exact_asymptotes=None) -> RateSource:
    """Rate source from arbitrary evaluators, e.g. for synthetic studies."""
    return RateSource(tuple(names), values, float(time_scale), convex,
                      None if exact_asymptotes is None else tuple(exact_asymptotes))


def asymptotic_rate(source: RateSource, index: int,
                    horizon: float | None = None) -> Asymptote:
    """Large-time limit of one named rate.

    Uses the exact closed form when the source carries one; otherwise a tail
    estimate over the last decade of a 400-point log-spaced grid reaching
    ``horizon`` (default 50 / time_scale), with its spread as uncertainty.
    """
    if not 0 <= index < len(source.names):
        raise ValidationError(f"rate index {index} out of range")
    if source.unbounded:
        return Asymptote("unbounded")
    if source.exact_asymptotes is not None:
        return Asymptote("exact", float(source.exact_asymptotes[index]))
    if horizon is None:
        horizon = 50.0 / source.time_scale
    grid = np.geomspace(horizon * 1e-4, horizon, 400)
    tail = grid[grid >= horizon / 10.0]
    try:
        samples = np.array([source.values(t)[index] for t in tail])
    except SingularityError:
        return Asymptote("indeterminate")
    estimate = float(samples[-1])
    spread = float(np.max(np.abs(samples - estimate)))
    if spread > 0.1 * max(abs(estimate), 1e-4):
        return Asymptote("indeterminate", estimate, spread)
    return Asymptote("estimate", estimate, spread)
