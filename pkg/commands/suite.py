import asyncio
import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from config import RunConfig
from lab.iteration import ar_bound, check_ar_soundness, orbit, verify_identity3, verify_residual_monotonicity
from lab.ledger import LEDGER, przs_chain_check, sweep
from lab.mappings import (
    ZOO,
    check_condition_C_lambda,
    check_nonexpansive,
    get_map,
    interval_threshold,
    rescale_map,
)
from lab.models import ConditionReport, MappingSpec, NormKind, SpaceDescriptor, Vector
from lab.moduli import (
    M_coefficient,
    R_modulus,
    RW_MW,
    eq43_cross_check,
    james_constant,
    lemma41_equivalence,
    modulus_b1,
)
from lab.space import grid_points, sample_body
from reports import EXIT_PASS, EXIT_VIOLATION, CommandResult, envelope, format_table, render_json

logger = logging.getLogger(__name__)

Row = Tuple[str, bool, str]

SOUNDNESS_GAMMAS = (0.5, 0.75, 0.9)
SOUNDNESS_DELTAS = (0.5, 0.25, 0.1)
LAMBDAS = (0.1, 0.25, 0.5, 0.75, 0.9)
SCALES = (0.5, 3.0)

# Attestation grid step by body dimension; pair counts grow as step^(-2 dim).
ATTEST_STEP = {1: 0.01, 2: 0.1, 3: 0.25}


def _attest(mapping: MappingSpec) -> ConditionReport:
    step = ATTEST_STEP.get(mapping.body.space.dimension, 0.5)
    return check_condition_C_lambda(mapping, 0.5, grid_points(mapping.body, step), step)


def check_ar_bound_constants(run_config: RunConfig) -> Row:
    got = [(b.M, b.L, b.n0) for b in (ar_bound(0.5, 0.5), ar_bound(0.25, 0.5))]
    passed = got == [(5, 64, 321), (9, 1024, 9217)]
    return "ar_bound_constants", passed, f"(M, L, n0) = {got}"


def check_soundness(run_config: RunConfig) -> Row:
    failures = 0
    checked = 0
    unattested = []
    for name in sorted(ZOO):
        mapping = get_map(name)
        if _attest(mapping).verdict != "no_violation_found":
            unattested.append(name)
            continue
        starts = sample_body(mapping.body, run_config.starts, run_config.seed)
        for gamma in SOUNDNESS_GAMMAS:
            for delta in SOUNDNESS_DELTAS:
                report = check_ar_soundness(mapping, gamma, delta, starts, run_config.horizon)
                checked += report.starts
                failures += len(report.failures)
    passed = failures == 0 and not unattested
    detail = f"{checked} probes, {failures} failures"
    if unattested:
        detail += f", not attested: {', '.join(unattested)}"
    return "ar_soundness", passed, detail


def check_orbit_identities(run_config: RunConfig) -> Row:
    """Residual monotonicity and the orbit identity on the soundness starts, up to the horizon."""
    steps = min(max(ar_bound(delta, gamma).n0 for delta in SOUNDNESS_DELTAS for gamma in SOUNDNESS_GAMMAS), run_config.horizon)
    worst_deviation = 0.0
    non_monotone = 0
    orbits = 0
    for name in sorted(ZOO):
        mapping = get_map(name)
        attestation = _attest(mapping)
        starts = sample_body(mapping.body, run_config.starts, run_config.seed)
        for gamma in SOUNDNESS_GAMMAS:
            for x0 in starts:
                trace = orbit(mapping, gamma, x0, steps)
                non_monotone += not verify_residual_monotonicity(trace, attestation).monotone
                worst_deviation = max(worst_deviation, verify_identity3(trace, mapping))
                orbits += 1
    passed = non_monotone == 0 and worst_deviation <= 1e-10
    return (
        "orbit_identities",
        passed,
        f"{orbits} orbits of {steps} steps, {non_monotone} non-monotone, max deviation {worst_deviation:.2e}",
    )


def _violation_pairs(report, scale: float = 1.0) -> set:
    """Violating pairs of a report, with both points divided by ``scale``."""
    return {(tuple(np.array(v.x) / scale), tuple(np.array(v.y) / scale)) for v in report.violations}


def check_condition_checkers(run_config: RunConfig) -> Row:
    mapping = interval_threshold()
    step = 0.005
    grid = grid_points(mapping.body, step)
    condition_c = check_condition_C_lambda(mapping, 0.5, grid, step)
    nonexpansive = check_nonexpansive(mapping, grid, step)
    problems = []
    if condition_c.verdict != "no_violation_found":
        problems.append(f"(C) violated {len(condition_c.violations)} times")
    if nonexpansive.verdict != "violated":
        problems.append("nonexpansiveness not refuted")

    by_lambda = {lam: check_condition_C_lambda(mapping, lam, grid, step) for lam in LAMBDAS}
    for smaller, larger in zip(LAMBDAS, LAMBDAS[1:]):
        if not _violation_pairs(by_lambda[larger]) <= _violation_pairs(by_lambda[smaller]):
            problems.append(f"violations at lambda={larger} not contained in lambda={smaller}")

    for r in SCALES:
        scaled = rescale_map(mapping, r)
        scaled_grid = [Vector.of(v.array / r, scaled.body.space) for v in grid]
        for lam in LAMBDAS:
            original = by_lambda[lam]
            rescaled = check_condition_C_lambda(scaled, lam, scaled_grid, step / r)
            if rescaled.verdict != original.verdict or _violation_pairs(rescaled) != _violation_pairs(original, r):
                problems.append(f"scale r={r:g} changes the violations at lambda={lam}")

    detail = "; ".join(problems) if problems else f"witness {nonexpansive.violations[0].x} -> {nonexpansive.violations[0].y}"
    return "condition_checkers", not problems, detail


def check_geometry(run_config: RunConfig) -> Row:
    l2, sup = NormKind.lp(2.0), NormKind.sup()
    a_grid = run_config.a_grid()
    problems = []

    def expect(label: str, value: float, target: float, tol: float) -> None:
        if not abs(value - target) <= tol:
            problems.append(f"{label}={value:.9f} (expected {target:.6f})")

    expect("J(l2^2)", james_constant(SpaceDescriptor.lp(2.0, 2), run_config.resolution, run_config.seed).value, math.sqrt(2.0), 1e-3)
    expect("J(l1^2)", james_constant(SpaceDescriptor.lp(1.0, 2), run_config.resolution, run_config.seed).value, 2.0, 0.0)
    expect("J(sup^2)", james_constant(SpaceDescriptor.sup(2), run_config.resolution, run_config.seed).value, 2.0, 0.0)
    expect("R(1,l2)", R_modulus(l2, 1.0).value, math.sqrt(1.5), 1e-6)
    expect("R(1,l2) optimizer", R_modulus(l2, 1.0, method="optimizer").value, R_modulus(l2, 1.0).value, 1e-6)
    expect("b1(1,l2) optimizer", modulus_b1(l2, 1.0, 1.0, method="optimizer").value, modulus_b1(l2, 1.0, 1.0).value, 1e-6)
    expect("M(l2)", M_coefficient(l2, a_grid).value, math.sqrt(3.0), 1e-3)
    expect("MW(l2)", RW_MW(l2, a_grid)[1].value, math.sqrt(2.0), 1e-3)
    for norm_kind in (l2, NormKind.lp(3.0), sup):
        for a in (0.0, 0.5, 1.0, 2.0):
            expect(f"eq43 deviation {norm_kind.label} a={a:g}", eq43_cross_check(norm_kind, a).deviation, 0.0, 1e-6)
        if not lemma41_equivalence(norm_kind, a_grid).agree:
            problems.append(f"coefficient equivalence fails for {norm_kind.label}")
    return "geometry_moduli", not problems, "; ".join(problems) or "all estimates within tolerance"


def check_ledger(run_config: RunConfig) -> Row:
    problems = []
    for name in sorted(LEDGER):
        report = sweep(name, run_config.samples, run_config.seed)
        if report.verdict != "holds_on_samples" or report.premise_hits < 1:
            problems.append(f"{name}: {report.verdict} ({report.premise_hits} hits)")
    for eps in (0.01, 0.05, 0.1):
        report = przs_chain_check(eps, 1.0)
        lower, upper = report.details["lower_chain"], report.details["upper_chain"]
        if abs(lower - (2.0 - 8.0 * eps)) > 1e-12 or abs(upper - (1.0 + 8.0 * eps)) > 1e-12:
            problems.append(f"przs chains off at eps={eps}")
    return "ledger_sweeps", not problems, "; ".join(problems) or f"{len(LEDGER)} sweeps of {run_config.samples} samples"


def create_determinism_check(handlers: Dict[str, Callable]) -> Callable[[RunConfig], Row]:
    """Determinism needs the other handlers, so it is built against them."""

    def check_determinism(run_config: RunConfig) -> Row:
        probes = [
            run_config.model_copy(update={"command": "ar-bound"}),
            run_config.model_copy(update={"command": "ledger", "name": "all", "samples": min(run_config.samples, 1000)}),
            run_config.model_copy(update={"command": "check-condition", "map": "interval_threshold", "step": 0.01}),
        ]
        differing = []
        for probe in probes:
            first, second = (render_json(envelope(probe, handlers[probe.command](probe).payload)) for _ in range(2))
            if first != second:
                differing.append(probe.command)
        return "determinism", not differing, f"differing: {', '.join(differing)}" if differing else f"{len(probes)} commands reproduced"

    return check_determinism


async def _run_checks(checks: List[Callable[[RunConfig], Row]], run_config: RunConfig, threads: int) -> List[Row]:
    semaphore = asyncio.Semaphore(threads)

    async def guarded(check):
        async with semaphore:
            return await asyncio.to_thread(check, run_config)

    results = await asyncio.gather(*(guarded(check) for check in checks), return_exceptions=True)
    rows = []
    for check, result in zip(checks, results):
        if isinstance(result, Exception):
            logger.error(
                "Suite check %s raised: %s",
                check.__name__,
                result,
                exc_info=(type(result), result, result.__traceback__),
            )
            rows.append((check.__name__, False, f"error: {result}"))
        else:
            rows.append(result)
    return sorted(rows, key=lambda row: row[0])


def create_suite_command(handlers: Dict[str, Callable], threads: int):
    """Create the suite handler.

    Args:
        handlers (dict): The other command handlers, used by the determinism check.
        threads (int): Upper bound on concurrently running checks.

    Returns:
        Callable: Handler taking a RunConfig and returning a CommandResult.
    """
    checks = [
        check_ar_bound_constants,
        check_soundness,
        check_orbit_identities,
        check_condition_checkers,
        check_geometry,
        check_ledger,
        create_determinism_check(handlers),
    ]

    def suite(run_config: RunConfig) -> CommandResult:
        logger.info(f"Running {len(checks)} acceptance checks on {threads} threads")
        rows = asyncio.run(_run_checks(checks, run_config, threads))
        passed = all(ok for _, ok, _ in rows)
        payload = {"checks": [{"name": name, "passed": ok, "detail": detail} for name, ok, detail in rows]}
        return CommandResult(
            exit_code=EXIT_PASS if passed else EXIT_VIOLATION,
            payload=payload,
            text=format_table(rows),
        )

    return suite
