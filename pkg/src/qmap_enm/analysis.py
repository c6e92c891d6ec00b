"""Markovianity classification of qubit evolutions.

A sampled rate timeline is scanned for sign structure and refined zero
crossings, then classified:

* ``NonCP``       - some canonical rate is negative already at t = 0+,
                    so the map itself fails complete positivity;
* ``ENM_strong``  - a rate is negative on all t > 0 (zero at t = 0) with a
                    strictly negative asymptote;
* ``ENM_weak``    - negative on all t > 0 but the asymptote is 0-;
* ``QENM_strong`` - a rate turns negative at finite t* and stays negative,
                    dipping below -delta_min;
* ``QENM_weak``   - turns and stays negative but never below -delta_min;
* ``Markovian``   - no rate is ever definitely negative;
* ``Indeterminate`` - conflicting evidence (for example a rate that
                    recovers, or two simultaneously negative rates in a
                    convex mixture).

Rates at t = 0 are evaluated as right-limits at t = 1e-12 / time_scale to
avoid 0/0 forms; values within ``zero_tol`` of zero are treated as zero
(Markovian side).  The strong/weak boundary for quasi-eternal verdicts uses
the depth of the post-crossing excursion; eternal verdicts use the
asymptote.  Both choices are recorded in the report notes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .algebra import (
    AffineRep,
    bloch_from_density,
    compose_affine,
    invert_affine,
    is_valid_state,
    min_choi_eigenvalue,
)
from .errors import QmapError, SingularityError, ValidationError
from .families import affine_trajectory
from .rates import Asymptote, RateSource, asymptotic_rate

DEFAULT_ZERO_TOL = 1e-9
DEFAULT_DELTA_MIN = 1e-4
DEFAULT_GRID_POINTS = 400
RIGHT_LIMIT_SCALE = 1e-12


class Verdict(enum.Enum):
    MARKOVIAN = "Markovian"
    ENM_STRONG = "ENM_strong"
    ENM_WEAK = "ENM_weak"
    QENM_STRONG = "QENM_strong"
    QENM_WEAK = "QENM_weak"
    NON_CP = "NonCP"
    INDETERMINATE = "Indeterminate"


class ZeroCrossing(NamedTuple):
    t_star: float
    direction: int  # -1: positive to negative, +1: negative to positive


@dataclass(frozen=True)
class RateTimeline:
    """Sampled canonical rates with refined crossings and asymptotics."""

    times: np.ndarray           # reported grid, starts at 0
    eval_times: np.ndarray      # actual evaluation times (t=0 as right-limit)
    values: np.ndarray          # shape (len(times), n_rates), NaN at gaps
    names: tuple[str, ...]
    crossings: tuple[tuple[ZeroCrossing, ...], ...]
    gaps: tuple[tuple[int, float, str], ...]
    asymptotes: tuple[Asymptote, ...]
    horizon: float
    zero_tol: float
    time_scale: float
    convex: bool | None
    source: RateSource = field(repr=False, compare=False, default=None)


def time_grid(horizon: float, time_scale: float, n: int) -> np.ndarray:
    """Deterministic grid: linear on [0, 10/scale], log-spaced out to the horizon."""
    breakpoint_t = 10.0 / time_scale
    if horizon <= breakpoint_t:
        return np.linspace(0.0, horizon, n)
    n_linear = n // 2
    linear = np.linspace(0.0, breakpoint_t, n_linear)
    logarithmic = np.geomspace(breakpoint_t, horizon, n - n_linear + 1)[1:]
    return np.concatenate([linear, logarithmic])


def _bisect_crossing(fn: Callable[[float], float], a: float, b: float,
                     fa: float, fb: float) -> float:
    while (b - a) > 1e-13 * max(1.0, abs(b)):
        midpoint = 0.5 * (a + b)
        if midpoint <= a or midpoint >= b:
            break
        try:
            fm = fn(midpoint)
        except QmapError:
            break
        if fm == 0.0:
            return midpoint
        if (fm > 0.0) == (fa > 0.0):
            a, fa = midpoint, fm
        else:
            b, fb = midpoint, fm
    return 0.5 * (a + b)


def build_timeline(source: RateSource, horizon: float | None = None,
                   n: int = DEFAULT_GRID_POINTS,
                   zero_tol: float = DEFAULT_ZERO_TOL) -> RateTimeline:
    """Sample a rate source on the deterministic grid and refine crossings.

    Evaluation singularities are recorded as gaps, not failures.
    """
    if n < 16:
        raise ValidationError(f"grid size must be at least 16, got {n}")
    if horizon is None:
        horizon = 50.0 / source.time_scale
    if horizon <= 0:
        raise ValidationError(f"horizon must be > 0, got {horizon}")

    times = time_grid(horizon, source.time_scale, n)
    eval_times = times.copy()
    eval_times[0] = RIGHT_LIMIT_SCALE / source.time_scale

    n_rates = len(source.names)
    values = np.full((len(times), n_rates), np.nan)
    gaps: list[tuple[int, float, str]] = []
    for i, t in enumerate(eval_times):
        try:
            values[i] = source.values(float(t))
        except SingularityError as err:
            gaps.append((i, float(times[i]), str(err)))

    crossings: list[tuple[ZeroCrossing, ...]] = []
    for j in range(n_rates):
        fn = lambda t, j=j: source.values(t)[j]
        found: list[ZeroCrossing] = []
        last_sign = 0
        last_index: int | None = None
        for i in range(len(times)):
            v = values[i, j]
            if math.isnan(v):
                last_sign, last_index = 0, None
                continue
            sign = 1 if v > zero_tol else (-1 if v < -zero_tol else 0)
            if sign == 0:
                continue
            if last_sign != 0 and sign != last_sign:
                t_star = _bisect_crossing(fn, float(eval_times[last_index]),
                                          float(eval_times[i]),
                                          float(values[last_index, j]), float(v))
                found.append(ZeroCrossing(t_star, sign))
            last_sign, last_index = sign, i
        crossings.append(tuple(found))

    asymptotes = tuple(asymptotic_rate(source, j, horizon=horizon)
                       for j in range(n_rates))
    return RateTimeline(
        times=times, eval_times=eval_times, values=values, names=source.names,
        crossings=tuple(crossings), gaps=tuple(gaps), asymptotes=asymptotes,
        horizon=float(horizon), zero_tol=zero_tol,
        time_scale=source.time_scale, convex=source.convex, source=source,
    )


@dataclass(frozen=True)
class ChoiWitness:
    min_eigenvalue: float
    at_time: float
    first_negative_time: float | None

    def to_dict(self) -> dict:
        return {
            "min_eigenvalue": float(self.min_eigenvalue),
            "at_time": float(self.at_time),
            "first_negative_time": None if self.first_negative_time is None
            else float(self.first_negative_time),
        }


@dataclass(frozen=True)
class ClassificationReport:
    verdict: Verdict
    offending_rate: str | None
    t_star: float | None
    asymptote: float | None
    asymptote_status: str | None
    asymptote_uncertainty: float | None
    delta: float | None
    delta_kind: str | None
    rate_at_zero: float | None
    zero_tol: float
    delta_min: float
    grid_points: int
    horizon: float
    right_limit_time: float
    rate_summaries: dict
    choi: ChoiWitness | None
    notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "verdict": self.verdict.value,
            "offending_rate": self.offending_rate,
            "t_star": None if self.t_star is None else float(self.t_star),
            "asymptote": None if self.asymptote is None else float(self.asymptote),
            "asymptote_status": self.asymptote_status,
            "asymptote_uncertainty": None if self.asymptote_uncertainty is None
            else float(self.asymptote_uncertainty),
            "delta": None if self.delta is None else float(self.delta),
            "delta_kind": self.delta_kind,
            "rate_at_zero": None if self.rate_at_zero is None else float(self.rate_at_zero),
            "tolerances": {"zero_tol": float(self.zero_tol),
                           "delta_min": float(self.delta_min)},
            "grid": {"points": int(self.grid_points), "horizon": float(self.horizon),
                     "right_limit_time": float(self.right_limit_time)},
            "rates": self.rate_summaries,
            "choi": None if self.choi is None else self.choi.to_dict(),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class _RateFinding:
    kind: str  # "ok" | "noncp" | "enm" | "qenm" | "recross" | "unresolved"
    t_star: float | None = None
    dip: float | None = None  # most negative sampled value past t_star


def _analyze_rate(values: np.ndarray, times: np.ndarray,
                  crossings: tuple[ZeroCrossing, ...], zero_tol: float) -> _RateFinding:
    finite = ~np.isnan(values)
    if not finite.any():
        return _RateFinding("unresolved")
    v0 = values[0] if finite[0] else np.nan
    downward = [c for c in crossings if c.direction < 0]
    upward = [c for c in crossings if c.direction > 0]

    if not math.isnan(v0) and v0 < -zero_tol:
        return _RateFinding("noncp", t_star=0.0, dip=float(np.nanmin(values)))

    negatives = finite & (values < -zero_tol)
    if not negatives.any():
        return _RateFinding("ok")
    if upward:
        return _RateFinding("recross")
    first_negative = int(np.argmax(negatives))
    later_positive = finite & (values > zero_tol)
    if later_positive[first_negative:].any():
        return _RateFinding("recross")

    if downward:
        t_star = downward[-1].t_star
        past = finite & (times > t_star)
        dip = float(np.min(values[past])) if past.any() else float(np.nanmin(values))
        return _RateFinding("qenm", t_star=t_star, dip=dip)
    if math.isnan(v0) or abs(v0) <= zero_tol:
        return _RateFinding("enm", t_star=0.0, dip=float(np.nanmin(values)))
    return _RateFinding("unresolved")


def _choi_witness(trajectory: Callable[[float], AffineRep], time_scale: float,
                  zero_tol: float) -> ChoiWitness:
    small = np.array([1e-4, 1e-3, 1e-2]) / time_scale
    times = np.concatenate([small, np.linspace(0.1, 10.0, 50) / time_scale])
    minima = np.array([min_choi_eigenvalue(trajectory(float(t))) for t in times])
    argmin = int(np.argmin(minima))
    negative = minima < -zero_tol
    first_negative = float(times[int(np.argmax(negative))]) if negative.any() else None
    return ChoiWitness(float(minima[argmin]), float(times[argmin]), first_negative)


_SEVERITY = {"enm": 0, "qenm": 1}


def classify(timeline: RateTimeline, delta_min: float = DEFAULT_DELTA_MIN,
             zero_tol: float | None = None,
             trajectory: Callable[[float], AffineRep] | None = None) -> ClassificationReport:
    """Classify a rate timeline, attaching a Choi witness when a trajectory
    is supplied (required evidence for NonCP verdicts)."""
    if zero_tol is None:
        zero_tol = timeline.zero_tol
    notes = [
        f"rates at t=0 evaluated as right-limits at t={timeline.eval_times[0]:.3e}",
        "quasi-eternal strong/weak split uses the post-crossing dip depth; "
        "eternal verdicts use the asymptote",
    ]
    if timeline.gaps:
        notes.append(f"{len(timeline.gaps)} grid point(s) skipped at rate singularities")

    findings = [_analyze_rate(timeline.values[:, j], timeline.times,
                              timeline.crossings[j], zero_tol)
                for j in range(len(timeline.names))]

    summaries = {}
    for j, name in enumerate(timeline.names):
        column = timeline.values[:, j]
        finite = ~np.isnan(column)
        asymptote = timeline.asymptotes[j]
        summaries[name] = {
            "value_at_zero": float(column[0]) if finite[0] else None,
            "min": float(np.nanmin(column)) if finite.any() else None,
            "min_at_time": float(timeline.times[int(np.nanargmin(column))])
            if finite.any() else None,
            "tail_value": float(column[finite][-1]) if finite.any() else None,
            "crossings": [{"t_star": float(c.t_star), "direction": int(c.direction)}
                          for c in timeline.crossings[j]],
            "asymptote": {"status": asymptote.status,
                          "value": None if asymptote.value is None else float(asymptote.value),
                          "uncertainty": float(asymptote.uncertainty)},
        }

    def report(verdict: Verdict, j: int | None, t_star=None, asymptote=None,
               delta=None, delta_kind=None) -> ClassificationReport:
        choi = None
        if trajectory is not None:
            choi = _choi_witness(trajectory, timeline.time_scale, zero_tol)
        name = None if j is None else timeline.names[j]
        rate_at_zero = None
        if j is not None and not math.isnan(timeline.values[0, j]):
            rate_at_zero = float(timeline.values[0, j])
        status, uncertainty = None, None
        if j is not None:
            status = timeline.asymptotes[j].status
            uncertainty = timeline.asymptotes[j].uncertainty
        return ClassificationReport(
            verdict=verdict, offending_rate=name, t_star=t_star,
            asymptote=asymptote, asymptote_status=status,
            asymptote_uncertainty=uncertainty, delta=delta, delta_kind=delta_kind,
            rate_at_zero=rate_at_zero, zero_tol=zero_tol, delta_min=delta_min,
            grid_points=len(timeline.times), horizon=timeline.horizon,
            right_limit_time=float(timeline.eval_times[0]),
            rate_summaries=summaries, choi=choi, notes=tuple(notes),
        )

    noncp = [j for j, f in enumerate(findings) if f.kind == "noncp"]
    if noncp:
        worst = min(noncp, key=lambda j: timeline.values[0, j])
        return report(Verdict.NON_CP, worst, t_star=0.0)

    if timeline.convex:
        negative = (~np.isnan(timeline.values)) & (timeline.values < -zero_tol)
        simultaneous = np.where(negative.sum(axis=1) >= 2)[0]
        if simultaneous.size:
            notes.append(
                "conflicting evidence: two simultaneously negative rates for a "
                f"convex mixture at t={timeline.times[int(simultaneous[0])]:.6g}")
            return report(Verdict.INDETERMINATE, None)

    problems = [j for j, f in enumerate(findings) if f.kind in ("recross", "unresolved")]
    if problems:
        j = problems[0]
        notes.append(f"rate {timeline.names[j]} has conflicting sign evidence "
                     f"({findings[j].kind})")
        return report(Verdict.INDETERMINATE, j)

    eternal = [j for j, f in enumerate(findings) if f.kind in _SEVERITY]
    if not eternal:
        return report(Verdict.MARKOVIAN, None)
    j = min(eternal, key=lambda j: (_SEVERITY[findings[j].kind], j))
    finding = findings[j]
    asymptote = timeline.asymptotes[j]

    if finding.kind == "enm":
        if asymptote.status in ("exact", "estimate"):
            value = asymptote.value
            if value <= -delta_min:
                return report(Verdict.ENM_STRONG, j, t_star=0.0, asymptote=value,
                              delta=-value, delta_kind="asymptotic")
            return report(Verdict.ENM_WEAK, j, t_star=0.0, asymptote=value,
                          delta=max(0.0, -value), delta_kind="asymptotic")
        notes.append(f"asymptote of {timeline.names[j]} is {asymptote.status}; "
                     "eternal strength cannot be resolved")
        return report(Verdict.INDETERMINATE, j, t_star=0.0)

    value = asymptote.value if asymptote.status in ("exact", "estimate") else None
    dip = finding.dip if finding.dip is not None else 0.0
    if dip <= -delta_min:
        return report(Verdict.QENM_STRONG, j, t_star=finding.t_star, asymptote=value,
                      delta=-dip, delta_kind="dip")
    return report(Verdict.QENM_WEAK, j, t_star=finding.t_star, asymptote=value,
                  delta=max(0.0, -dip), delta_kind="dip")


@dataclass(frozen=True)
class CPScreenResult:
    """Minimum Choi eigenvalue along a trajectory."""

    times: np.ndarray
    min_eigenvalues: np.ndarray
    first_violation_time: float | None
    tolerance: float


def cp_screen(trajectory: Callable[[float], AffineRep], times,
              tolerance: float = 1e-10) -> CPScreenResult:
    """Minimum Choi eigenvalue at each grid time, flagging the first dip
    below ``-tolerance``."""
    times = np.asarray(times, dtype=float)
    minima = np.array([min_choi_eigenvalue(trajectory(float(t))) for t in times])
    below = minima < -tolerance
    first = float(times[int(np.argmax(below))]) if below.any() else None
    return CPScreenResult(times, minima, first, tolerance)


@dataclass(frozen=True)
class DivisibilityReport:
    """Choi spectra of intermediate propagators over a grid of time pairs."""

    pairs: tuple[tuple[float, float], ...]
    min_eigenvalues: tuple[float, ...]
    skipped: tuple[tuple[float, float, str], ...]
    cp_divisible: bool
    tolerance: float


def divisibility_scan(trajectory: Callable[[float], AffineRep], times,
                      tolerance: float = 1e-10) -> DivisibilityReport:
    """Scan intermediate propagators K(t2, t1) = F(t2) . F(t1)^{-1} for
    complete positivity over all ordered pairs t2 >= t1 of the grid.

    Pairs whose F(t1) is singular are skipped and recorded.
    """
    times = np.asarray(times, dtype=float)
    pairs: list[tuple[float, float]] = []
    minima: list[float] = []
    skipped: list[tuple[float, float, str]] = []
    inverses: dict[int, AffineRep | str] = {}
    snapshots = [trajectory(float(t)) for t in times]
    for i, t1 in enumerate(times):
        for j in range(i, len(times)):
            t2 = float(times[j])
            if i not in inverses:
                try:
                    inverses[i] = invert_affine(snapshots[i])
                except SingularityError as err:
                    inverses[i] = str(err)
            inverse = inverses[i]
            if isinstance(inverse, str):
                skipped.append((float(t1), t2, inverse))
                continue
            propagator = compose_affine(snapshots[j], inverse)
            pairs.append((float(t1), t2))
            minima.append(min_choi_eigenvalue(propagator))
    cp_divisible = all(value >= -tolerance for value in minima)
    return DivisibilityReport(tuple(pairs), tuple(minima), tuple(skipped),
                              cp_divisible, tolerance)


@dataclass(frozen=True)
class BLPReport:
    """Trace-distance trajectory for one state pair under the evolution."""

    times: np.ndarray
    distances: np.ndarray
    increases: tuple[tuple[float, float, float], ...]
    monotone: bool


def blp_scan(trajectory: Callable[[float], AffineRep], rho1, rho2, times,
             increase_tol: float = 1e-10) -> BLPReport:
    """Sample the trace distance of an evolving state pair and detect
    information backflow (any increase above ``increase_tol``)."""
    for label, rho in (("first", rho1), ("second", rho2)):
        if not is_valid_state(rho):
            raise ValidationError(f"{label} argument is not a valid density matrix")
    r1 = bloch_from_density(rho1)
    r2 = bloch_from_density(rho2)
    times = np.asarray(times, dtype=float)
    distances = np.empty(len(times))
    for i, t in enumerate(times):
        rep = trajectory(float(t))
        delta = rep.matrix @ (r1 - r2)
        # trace distance of qubit states equals half the Bloch distance;
        # the translation cancels in the difference
        distances[i] = 0.5 * float(np.linalg.norm(delta))
    steps = np.diff(distances)
    increases = tuple((float(times[i]), float(times[i + 1]), float(steps[i]))
                      for i in np.where(steps > increase_tol)[0])
    return BLPReport(times, distances, increases, monotone=not increases)


def classify_family(family, horizon: float | None = None,
                    n: int = DEFAULT_GRID_POINTS,
                    delta_min: float = DEFAULT_DELTA_MIN,
                    zero_tol: float = DEFAULT_ZERO_TOL) -> ClassificationReport:
    """Build a timeline for a built-in family and classify it, with the
    family's affine trajectory attached as Choi-witness evidence."""
    from .rates import rate_source

    source = rate_source(family)
    timeline = build_timeline(source, horizon=horizon, n=n, zero_tol=zero_tol)
    return classify(timeline, delta_min=delta_min, zero_tol=zero_tol,
                    trajectory=affine_trajectory(family))
