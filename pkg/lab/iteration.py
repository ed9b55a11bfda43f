import logging
import math
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from .errors import InputError, PreconditionError
from .mappings import evaluate
from .models import (
    ARBound,
    AveragedRule,
    ConditionReport,
    MappingSpec,
    MonotonicityReport,
    OrbitTrace,
    ResidualProbe,
    SoundnessReport,
    Vector,
)
from .space import body_diameter, contains_rows, norms
from .utils import TAU

logger = logging.getLogger(__name__)

# Largest M for which the exact-rational constants are still computed.
MAX_EXACT_M = 100_000


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise InputError(f"gamma must lie in (0, 1), got {gamma}")


def _start(mapping: MappingSpec, x0: Vector) -> np.ndarray:
    if x0.space.dimension != mapping.body.space.dimension:
        raise InputError(f"{mapping.name}: starting point has the wrong dimension")
    x = x0.array.copy()
    if not contains_rows(mapping.body, x)[0]:
        raise InputError(f"{mapping.name}: starting point {x.tolist()} is outside the body")
    return x


def averaged_map(mapping: MappingSpec, gamma: float) -> MappingSpec:
    """T_gamma = (1 - gamma) I + gamma T on the same body.

    Raises:
        InputError: If gamma is not in (0, 1).
    """
    _check_gamma(gamma)
    return MappingSpec(
        name=f"{mapping.name}_averaged_{gamma:g}",
        body=mapping.body,
        rule=AveragedRule(base=mapping, gamma=gamma),
    )


def orbit(mapping: MappingSpec, gamma: float, x0: Vector, steps: int) -> OrbitTrace:
    """Compute x_i = T_gamma^i x0 for i = 0..steps with both residual lists.

    Raises:
        InputError: On an invalid gamma, step count or starting point.
        MappingError: If T leaves its body along the orbit.
    """
    _check_gamma(gamma)
    if steps < 1:
        raise InputError(f"Orbit needs at least one step, got {steps}")
    space = mapping.body.space
    x = _start(mapping, x0)

    iterates = np.empty((steps + 1, space.dimension))
    residuals = np.empty(steps)
    t_residuals = np.empty(steps + 1)
    for i in range(steps + 1):
        iterates[i] = x
        tx = evaluate(mapping, x[None, :])[0]
        t_residuals[i] = norms(space, tx - x)
        if i < steps:
            nxt = (1.0 - gamma) * x + gamma * tx
            residuals[i] = norms(space, nxt - x)
            x = nxt

    return OrbitTrace(
        map_name=mapping.name,
        space=space,
        gamma=gamma,
        x0=x0,
        iterates=iterates,
        residuals=residuals,
        t_residuals=t_residuals,
    )


def _attested_lambda(report: ConditionReport) -> float:
    if report.condition == "nonexpansive":
        # nonexpansive maps satisfy (C_lambda) for every lambda
        return 0.0
    if report.condition in ("C", "C_lambda") and report.lam is not None:
        return report.lam
    raise PreconditionError(f"A {report.condition} report does not attest (C_lambda)")


def verify_residual_monotonicity(trace: OrbitTrace, cond_report: ConditionReport) -> MonotonicityReport:
    """Check ||x_{i+2} - x_{i+1}|| <= ||x_{i+1} - x_i|| + 1e-12 along an orbit.

    The report must attest (C_lambda) for the same map with lambda <= gamma,
    and its grid must cover every iterate of the orbit.

    Raises:
        PreconditionError: If the attestation is missing, violated or insufficient.
    """
    lam = _attested_lambda(cond_report)
    if cond_report.verdict != "no_violation_found":
        raise PreconditionError(f"{cond_report.map_name}: condition report records violations")
    if cond_report.map_name != trace.map_name:
        raise PreconditionError(
            f"Report attests '{cond_report.map_name}' but the orbit belongs to '{trace.map_name}'"
        )
    if lam > trace.gamma:
        raise PreconditionError(f"Attested lambda {lam} exceeds gamma {trace.gamma}")
    if cond_report.region is not None:
        lower = np.array(cond_report.region.lower) - TAU
        upper = np.array(cond_report.region.upper) + TAU
        if not np.all((trace.iterates >= lower) & (trace.iterates <= upper)):
            raise PreconditionError(f"{trace.map_name}: the checked grid does not cover the orbit")

    increases = np.diff(trace.residuals)
    failing = np.nonzero(increases > 1e-12)[0]
    first_failure = int(failing[0]) + 1 if failing.size else None
    if first_failure is not None:
        logger.warning(f"{trace.map_name}: residual increases at step {first_failure}")
    return MonotonicityReport(
        map_name=trace.map_name,
        gamma=trace.gamma,
        attested_lambda=lam,
        checked=int(increases.size),
        monotone=first_failure is None,
        first_failure=first_failure,
        max_increase=float(max(0.0, increases.max())) if increases.size else 0.0,
    )


def verify_identity3(trace: OrbitTrace, mapping: MappingSpec) -> float:
    """Largest deviation from ||(x_{i+1}-x_i)/g - (1-g)/g (x_i-x_{i-1})|| = ||Tx_i - Tx_{i-1}||.

    The identity holds for every map by construction of T_gamma, so the
    deviation measures floating-point error only.

    Raises:
        InputError: If the trace was not produced by ``mapping``.
    """
    if mapping.name != trace.map_name or mapping.body.space.dimension != trace.space.dimension:
        raise InputError(f"Trace of '{trace.map_name}' does not belong to map '{mapping.name}'")
    gamma = trace.gamma
    space = trace.space
    xs = np.asarray(trace.iterates)
    images = evaluate(mapping, xs)

    expected_first = (1.0 - gamma) * xs[0] + gamma * images[0]
    if trace.steps >= 1 and norms(space, expected_first - xs[1]) > 1e-9 * (1.0 + norms(space, xs[0])):
        raise InputError(f"Trace of '{trace.map_name}' is not an orbit of this map")
    if trace.steps < 2:
        return 0.0

    steps_fwd = xs[2:] - xs[1:-1]
    steps_back = xs[1:-1] - xs[:-2]
    lhs = norms(space, steps_fwd / gamma - (1.0 - gamma) / gamma * steps_back)
    rhs = norms(space, images[1:-1] - images[:-2])
    return float(np.max(np.abs(lhs - rhs)))


def ar_bound(delta: float, gamma: float) -> ARBound:
    """Constants of the uniform asymptotic-regularity bound.

    M is the smallest integer strictly above 2/delta, L the smallest integer
    not below 1/(gamma (1-gamma)^M) and n0 = M L + 1. delta is relative to
    the diameter of the body. The arithmetic is exact, on the decimal values
    of delta and gamma. For delta > 1 residuals never reach delta * diam, so
    n0 = 0.

    Raises:
        InputError: If gamma is not in (0, 1), delta <= 0, or M is too large
            for exact evaluation.
    """
    _check_gamma(gamma)
    if not delta > 0 or not math.isfinite(delta):
        raise InputError(f"delta must be a positive real, got {delta}")
    d = Fraction(repr(float(delta)))
    g = Fraction(repr(float(gamma)))

    m = math.floor(2 / d) + 1
    if m > MAX_EXACT_M:
        raise InputError(f"delta={delta} gives M={m}, beyond the exact evaluation limit {MAX_EXACT_M}")
    l = math.ceil(1 / (g * (1 - g) ** m))
    n0 = 0 if d > 1 else m * l + 1
    return ARBound(delta=delta, gamma=gamma, M=m, L=l, n0=n0)


def afps_extract(trace: OrbitTrace, tol: float) -> List[Vector]:
    """Iterates whose displacement ||Tx_i - x_i|| is at most ``tol``."""
    return [trace.iterate(i) for i in np.nonzero(trace.t_residuals <= tol)[0]]


def residuals_at(
    mapping: MappingSpec, gamma: float, starts: Sequence[Vector], n: int, horizon: int
) -> List[ResidualProbe]:
    """Residual ||x_{n+1} - x_n|| of the T_gamma orbit of every start, advanced together.

    Evaluated directly when n <= horizon. An exact fixed point ends an orbit
    with all later residuals 0. Beyond the horizon the residual at the
    horizon bounds the target one, provided the computed residuals never
    increased; otherwise the probe is reported as uncertified. Every probe
    records whether its residuals stayed nonincreasing.
    """
    _check_gamma(gamma)
    if not starts:
        raise InputError("At least one starting point is required")
    space = mapping.body.space
    xs = np.vstack([_start(mapping, x0) for x0 in starts])
    target = min(n, horizon)

    last = np.full(len(starts), np.inf)
    monotone = np.ones(len(starts), dtype=bool)
    zero_at = np.full(len(starts), -1)
    for i in range(target + 1):
        nxt = (1.0 - gamma) * xs + gamma * evaluate(mapping, xs)
        residual = norms(space, nxt - xs)
        running = zero_at < 0
        monotone &= ~(running & (residual > last + 1e-12))
        zero_at[running & (residual == 0.0)] = i
        last = np.where(zero_at >= 0, 0.0, residual)
        xs = nxt
        if np.all(zero_at >= 0):
            break

    probes = []
    for k, x0 in enumerate(starts):
        if zero_at[k] >= 0:
            mode, reached, value = "fixed_point", int(zero_at[k]), 0.0
        else:
            reached, value = target, float(last[k])
            if n <= horizon:
                mode = "direct"
            else:
                mode = "monotone_bound" if monotone[k] else "uncertified"
        probes.append(
            ResidualProbe(
                x0=list(x0.coords),
                target_step=n,
                step_reached=reached,
                residual=value,
                mode=mode,
                monotone=bool(monotone[k]),
            )
        )
    return probes


def residual_at(mapping: MappingSpec, gamma: float, x0: Vector, n: int, horizon: int) -> ResidualProbe:
    """Single-start version of :func:`residuals_at`."""
    return residuals_at(mapping, gamma, [x0], n, horizon)[0]


def check_ar_soundness(
    mapping: MappingSpec,
    gamma: float,
    delta: float,
    starts: Sequence[Vector],
    horizon: int = 1024,
) -> SoundnessReport:
    """Check that the residual at step n0(delta, gamma) is below delta * diam(body) for every start."""
    bound = ar_bound(delta, gamma)
    diam = body_diameter(mapping.body)
    threshold = delta * diam
    probes = residuals_at(mapping, gamma, starts, bound.n0, horizon)

    # non-monotone residuals fail in every mode
    failures = [p for p in probes if p.mode == "uncertified" or not p.monotone or not p.residual < threshold]
    modes: dict = {}
    for probe in probes:
        modes[probe.mode] = modes.get(probe.mode, 0) + 1
    if failures:
        logger.warning(
            f"{mapping.name}: {len(failures)} of {len(probes)} starts miss delta*diam={threshold:g} at n0={bound.n0}"
        )
    return SoundnessReport(
        map_name=mapping.name,
        gamma=gamma,
        delta=delta,
        n0=bound.n0,
        diameter=diam,
        threshold=threshold,
        starts=len(probes),
        worst_residual=max(p.residual for p in probes),
        failures=failures,
        modes=dict(sorted(modes.items())),
        verdict="fail" if failures else "pass",
    )
