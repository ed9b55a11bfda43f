"""Executable ledger of the arithmetic entailments behind the convergence proofs.

Each check evaluates one implication at one parameter point: if the
premises hold, every clause of the conclusion is tested and failures are
recorded with both sides of the failed inequality. ``sweep`` runs a check
over seeded random points of its premise region.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List

import numpy as np

from .errors import InputError
from .iteration import ar_bound
from .models import EntailmentReport, LedgerViolation
from .utils import TAU, stream

logger = logging.getLogger(__name__)

# At most this many violation witnesses are stored per sweep report.
MAX_WITNESSES = 100

# Fewer premise hits than one per this many draws marks a region as degenerate.
HITS_PER_DRAWS = 10_000


@dataclass
class Outcome:
    premise: bool
    violations: List[LedgerViolation] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)


class _Clauses:
    """Collects failed clauses for one sample point."""

    def __init__(self, point: Dict[str, Any]):
        self.point = point
        self.violations: List[LedgerViolation] = []

    def _fail(self, clause: str, lhs, rhs, **extra) -> None:
        self.violations.append(
            LedgerViolation(point={**self.point, **extra}, clause=clause, lhs=float(lhs), rhs=float(rhs))
        )

    def lt(self, clause: str, lhs, rhs, **extra) -> None:
        """Strict lhs < rhs, checked with slack."""
        if not lhs < rhs + TAU:
            self._fail(clause, lhs, rhs, **extra)

    def le(self, clause: str, lhs, rhs, **extra) -> None:
        if not lhs <= rhs + TAU:
            self._fail(clause, lhs, rhs, **extra)

    def exact_lt(self, clause: str, lhs, rhs, **extra) -> None:
        if not lhs < rhs:
            self._fail(clause, lhs, rhs, **extra)

    def exact_le(self, clause: str, lhs, rhs, **extra) -> None:
        if not lhs <= rhs:
            self._fail(clause, lhs, rhs, **extra)

    def close(self, clause: str, lhs, rhs, tol: float = 1e-12, **extra) -> None:
        if not abs(lhs - rhs) <= tol:
            self._fail(clause, lhs, rhs, **extra)


def _report(name: str, outcome: Outcome, region: Dict[str, Any]) -> EntailmentReport:
    if not outcome.premise:
        verdict = "premise_never_satisfied"
    elif outcome.violations:
        verdict = "violated"
    else:
        verdict = "holds_on_samples"
    return EntailmentReport(
        name=name,
        region=region,
        samples=1,
        premise_hits=int(outcome.premise),
        violations=outcome.violations,
        verdict=verdict,
        degenerate=not outcome.premise,
        details=outcome.details,
    )


def _sampled_residuals(clauses: _Clauses, m: int, l: int, n0: int) -> int:
    """Integer clauses tying n0 to the residuals ||x_{Mi+1} - x_{Mi}||, i = 0..L.

    Returns the number of such residuals that fit in the first n0 steps.
    """
    clauses.exact_le("last_sample_in_orbit", m * l, n0 - 1)
    clauses.exact_lt("orbit_longer_than_ML", m * l - 1, n0 - 1)
    samples = (n0 - 1) // m + 1 if n0 >= 1 else 0
    clauses.exact_lt("pigeonhole", l, samples)
    return samples


def _thm21(delta: float, gamma: float, exact: bool = False) -> Outcome:
    if not (0.0 < delta < 1.0 and 0.0 < gamma < 1.0):
        raise InputError(f"thm21 needs delta and gamma in (0, 1), got delta={delta}, gamma={gamma}")
    bound = ar_bound(delta, gamma)
    m, l = bound.M, bound.L
    clauses = _Clauses({"delta": delta, "gamma": gamma})

    if exact:
        d = Fraction(repr(float(delta)))
        g = Fraction(repr(float(gamma)))
        width = g * (1 - g) ** m
        # (a) the L intervals [b_i, b_i + width] with b_i = delta + (i-1) width cover [delta, 1]
        clauses.exact_le("covering", 1 - d, l * width)
        # (b) L + 1 sampled residuals in L intervals force a collision
        samples = _sampled_residuals(clauses, m, l, bound.n0)
        # (c) M delta > 2
        clauses.exact_lt("m_delta", 2, m * d)
        # (d) gamma ((1-g)^(M-1) + ... + (1-g)) <= 1
        geometric = g * sum((1 - g) ** k for k in range(1, m))
        clauses.exact_le("geometric_sum", geometric, 1)
        # (e) unrolled functional estimate stays below gamma (1-g)^(M-i)
        e = Fraction(0)
        for i in range(m + 1):
            clauses.exact_le("unrolled_estimate", e, g * (1 - g) ** (m - i), i=i)
            e = (e + g * g * (1 - g) ** m) / (1 - g)
        details = {"M": m, "L": l, "n0": bound.n0, "samples": samples, "geometric_sum": float(geometric), "exact": True}
        return Outcome(premise=True, violations=clauses.violations, details=details)

    log_width = math.log(gamma) + m * math.log1p(-gamma)
    clauses.le("covering", math.log1p(-delta), math.log(l) + log_width)
    samples = _sampled_residuals(clauses, m, l, bound.n0)
    clauses.lt("m_delta", 2.0, m * delta)
    geometric = float(gamma * np.sum((1.0 - gamma) ** np.arange(1, m)))
    clauses.le("geometric_sum", geometric, 1.0)
    # e_i scaled by (1-g)^(M-i): f_{i+1} = f_i + g^2 (1-g)^i must stay below g
    scaled = np.concatenate([[0.0], np.cumsum(gamma * gamma * (1.0 - gamma) ** np.arange(m))])
    over = np.nonzero(scaled > gamma + TAU)[0]
    for i in over[:MAX_WITNESSES]:
        clauses.le("unrolled_estimate", scaled[i], gamma, i=int(i))
    details = {"M": m, "L": l, "n0": bound.n0, "samples": samples, "geometric_sum": geometric, "exact": False}
    return Outcome(premise=True, violations=clauses.violations, details=details)


def thm21_constants_check(delta: float, gamma: float, exact: bool = False) -> EntailmentReport:
    """Check the constant chase behind the uniform asymptotic-regularity bound.

    Clauses: covering of [delta, 1] by the L intervals, room in the first n0
    steps for the L + 1 spaced residuals of the pigeonhole count, M delta > 2,
    the geometric sum bound and the unrolled functional estimate. ``exact``
    switches to rational arithmetic on the decimal values.

    Raises:
        InputError: If delta or gamma is outside (0, 1).
    """
    return _report("thm21", _thm21(delta, gamma, exact), {"delta": delta, "gamma": gamma})


def _lemma33(t: float, eps: float, N: int, gamma: float, lam: float) -> Outcome:
    premise = (
        N >= 1
        and 0.0 < eps < 1.0 / (10 * N)
        and 2.0 / 3.0 + 2 * N * eps < t < 1.0 - 2.0 * eps
        and 0.0 < lam <= gamma < 1.0
    )
    if not premise:
        return Outcome(premise=False)
    clauses = _Clauses({"t": t, "eps": eps, "N": N, "gamma": gamma, "lambda": lam})
    clauses.lt("afps_gap", eps, 1.0 - t - eps)
    clauses.lt("base_gap", 2.0 * (1.0 - t) + eps, t - eps)
    for k in range(1, N + 1):
        clauses.lt("con1_chain", 2.0 * (1.0 - t) + eps, t - (k + 2) * eps, k=k)
        clauses.lt("positive_margin", 0.0, t - (k + 3) * eps, k=k)
        clauses.lt("con2_window", 1.0 - t - eps, 1.0 - t + (k + 1) * eps, k=k)
    return Outcome(premise=True, violations=clauses.violations)


def lemma33_region_check(t: float, eps: float, N: int, gamma: float, lam: float) -> EntailmentReport:
    """Coherence of the inductive constant chains for the minimal-set lemma.

    Premises: eps < 1/(10N), 2/3 + 2N eps < t < 1 - 2 eps and lambda <= gamma < 1.
    """
    region = {"t": t, "eps": eps, "N": N, "gamma": gamma, "lambda": lam}
    return _report("lemma33", _lemma33(t, eps, N, gamma, lam), region)


def _lemma_zn(eps: float, t: float, N: int) -> Outcome:
    if not (eps > 0 and 2.0 / 3.0 < t < 1.0 and N >= 1):
        return Outcome(premise=False)
    bounds = {
        "third": 1.0 / (3 * (N + 2)),
        "eps_over_n": eps / N,
        "t_margin": (t - 2.0 / 3.0) / N,
        "top_margin": (1.0 - t) / 2.0,
    }
    upper = min(bounds.values())
    eta = upper / 2.0
    clauses = _Clauses({"eps": eps, "t": t, "N": N})
    clauses.exact_lt("window_nonempty", 0.0, upper)
    clauses.lt("eta_third", eta, bounds["third"])
    clauses.lt("eta_eps", eta, bounds["eps_over_n"])
    clauses.lt("eta_lower", 2.0 / 3.0 + N * eta, t)
    clauses.lt("eta_upper", t, 1.0 - 2.0 * eta)
    details = {"window": [0.0, upper], "eta": eta, "binding": min(bounds, key=bounds.get)}
    return Outcome(premise=True, violations=clauses.violations, details=details)


def lemma_zn_param_check(eps: float, t: float, N: int) -> EntailmentReport:
    """Feasibility window for eta in the rescaling lemma; eta = half the window is verified."""
    return _report("lemma_zn", _lemma_zn(eps, t, N), {"eps": eps, "t": t, "N": N})


def _przs(eps: float, r: float) -> Outcome:
    if not (0.0 < eps < 0.125 and r > 0):
        return Outcome(premise=False)
    clauses = _Clauses({"eps": eps, "r": r})
    lower_chain = (4.0 / r) * (r * (1.0 - eps) - (2.0 / 3.0) * (3.0 / 4.0) * r) - 4.0 * eps
    upper_chain = (4.0 / r) * r * (0.25 + eps) + 4.0 * eps
    clauses.close("lower_chain", lower_chain, 2.0 - 8.0 * eps)
    clauses.close("upper_chain", upper_chain, 1.0 + 8.0 * eps)
    clauses.le("sandwich", r * (0.25 - eps), r * (0.25 + eps))
    # ||z|| ranges over the sandwich, so | ||4z/r|| - 1 | <= 4 eps at both ends
    clauses.le("normalized_top", 4.0 * r * (0.25 + eps) / r - 1.0, 4.0 * eps)
    clauses.le("normalized_bottom", 1.0 - 4.0 * r * (0.25 - eps) / r, 4.0 * eps)
    details = {
        "lower_chain": lower_chain,
        "upper_chain": upper_chain,
        "b1_lower": 1.0 - 8.0 * eps,
        "d_upper": 8.0 * eps,
        "gap_factor": 8,
    }
    return Outcome(premise=True, violations=clauses.violations, details=details)


def przs_chain_check(eps: float, r: float) -> EntailmentReport:
    """The two normalization chains 2 - 8 eps and 1 + 8 eps with their sandwich.

    The chains contradict the hypothesis b1(1, x) < 1 - eps' or d(1, x) > eps'
    only for eps' = 8 eps, which ``details`` reports as the gap factor.
    """
    return _report("przs", _przs(eps, r), {"eps": eps, "r": r})


def _lemma41(a: float, b: float, eta: float, f_x: float, lim_f: float) -> Outcome:
    if not (a > 0 and b > 0 and 0.0 < eta < 1.0):
        return Outcome(premise=False)
    m = min(1.0, a)
    if not (lim_f > 1.0 - eta * m and f_x > a - eta * m):
        return Outcome(premise=False)
    clauses = _Clauses({"a": a, "b": b, "eta": eta, "f_x": f_x, "lim_f": lim_f})
    clauses.lt("lower_bound", (1.0 + b) * (1.0 - eta), lim_f + (b / a) * f_x)
    return Outcome(premise=True, violations=clauses.violations)


def lemma41_chain_check(a: float, b: float, eta: float, f_x: float, lim_f: float) -> EntailmentReport:
    """lim_f + (b/a) f_x > (1 + b)(1 - eta) under the two functional premises."""
    region = {"a": a, "b": b, "eta": eta, "f_x": f_x, "lim_f": lim_f}
    return _report("lemma41", _lemma41(a, b, eta, f_x, lim_f), region)


# Samplers draw candidate points shaped like the premise region; the checks
# still gate every point on the premises themselves.


def _sample_thm21(rng: np.random.Generator, n: int) -> List[Dict[str, Any]]:
    deltas = rng.uniform(0.01, 0.99, n)
    gammas = rng.uniform(0.01, 0.99, n)
    return [{"delta": float(d), "gamma": float(g)} for d, g in zip(deltas, gammas)]


def _sample_lemma33(rng: np.random.Generator, n: int) -> List[Dict[str, Any]]:
    points = []
    ns = rng.integers(1, 21, n)
    for big_n, u_eps, u_t, u_lam, u_gamma in zip(ns, *rng.uniform(0.0, 1.0, (4, n))):
        big_n = int(big_n)
        eps = u_eps * min(1.0 / (10 * big_n), 1.0 / (6 * (big_n + 1)))
        lo, hi = 2.0 / 3.0 + 2 * big_n * eps, 1.0 - 2.0 * eps
        lam = u_lam
        points.append(
            {
                "t": float(lo + u_t * (hi - lo)),
                "eps": float(eps),
                "N": big_n,
                "gamma": float(lam + u_gamma * (1.0 - lam)),
                "lam": float(lam),
            }
        )
    return points


def _sample_lemma_zn(rng: np.random.Generator, n: int) -> List[Dict[str, Any]]:
    eps = rng.uniform(0.0, 1.0, n)
    ts = rng.uniform(2.0 / 3.0, 1.0, n)
    ns = rng.integers(1, 101, n)
    return [{"eps": float(e), "t": float(t), "N": int(k)} for e, t, k in zip(eps, ts, ns)]


def _sample_przs(rng: np.random.Generator, n: int) -> List[Dict[str, Any]]:
    eps = rng.uniform(0.0, 0.125, n)
    rs = rng.uniform(0.0, 10.0, n)
    return [{"eps": float(e), "r": float(r)} for e, r in zip(eps, rs)]


def _sample_lemma41(rng: np.random.Generator, n: int) -> List[Dict[str, Any]]:
    a = rng.uniform(0.0, 4.0, n)
    b = rng.uniform(0.0, 4.0, n)
    eta = rng.uniform(0.0, 1.0, n)
    m = np.minimum(1.0, a)
    lim_f = 1.0 - eta * m + rng.uniform(0.0, 1.0, n)
    f_x = a - eta * m + rng.uniform(0.0, 1.0, n)
    return [
        {"a": float(ai), "b": float(bi), "eta": float(ei), "f_x": float(fi), "lim_f": float(li)}
        for ai, bi, ei, fi, li in zip(a, b, eta, f_x, lim_f)
    ]


@dataclass(frozen=True)
class LedgerEntry:
    evaluate: Callable[..., Outcome]
    sampler: Callable[[np.random.Generator, int], List[Dict[str, Any]]]
    region: Dict[str, Any]


LEDGER: Dict[str, LedgerEntry] = {
    "thm21": LedgerEntry(_thm21, _sample_thm21, {"delta": [0.01, 0.99], "gamma": [0.01, 0.99]}),
    "lemma33": LedgerEntry(
        _lemma33,
        _sample_lemma33,
        {"N": [1, 20], "eps": "(0, min(1/(10N), 1/(6(N+1))))", "t": "(2/3 + 2N eps, 1 - 2 eps)", "lambda": [0, 1]},
    ),
    "lemma_zn": LedgerEntry(_lemma_zn, _sample_lemma_zn, {"eps": [0, 1], "t": [2 / 3, 1], "N": [1, 100]}),
    "przs": LedgerEntry(_przs, _sample_przs, {"eps": [0, 0.125], "r": [0, 10]}),
    "lemma41": LedgerEntry(
        _lemma41,
        _sample_lemma41,
        {"a": [0, 4], "b": [0, 4], "eta": [0, 1], "lim_f": "1 - eta min(1, a) + [0, 1)", "f_x": "a - eta min(1, a) + [0, 1)"},
    ),
}


def sweep(name: str, samples: int, seed: int, **options) -> EntailmentReport:
    """Run a ledger check over ``samples`` seeded points of its premise region.

    ``options`` are passed to the check (``exact`` for thm21).

    Raises:
        InputError: For an unknown check name or a nonpositive sample count.
    """
    if name not in LEDGER:
        raise InputError(f"Unknown ledger check '{name}', expected one of {sorted(LEDGER)}")
    if samples < 1:
        raise InputError(f"samples must be positive, got {samples}")
    entry = LEDGER[name]
    points = entry.sampler(stream(seed, f"ledger:{name}"), samples)

    logger.info(f"Ledger sweep {name}: {samples} samples, seed {seed}")
    hits = 0
    violations: List[LedgerViolation] = []
    total_violations = 0
    for point in points:
        outcome = entry.evaluate(**point, **options)
        hits += int(outcome.premise)
        total_violations += len(outcome.violations)
        if len(violations) < MAX_WITNESSES:
            violations.extend(outcome.violations[: MAX_WITNESSES - len(violations)])

    if violations:
        verdict = "violated"
        logger.warning(f"Ledger sweep {name}: {total_violations} violated clauses")
    elif hits == 0:
        verdict = "premise_never_satisfied"
    else:
        verdict = "holds_on_samples"
    degenerate = hits * HITS_PER_DRAWS < samples or hits == 0
    logger.info(f"Ledger sweep {name} finished: {hits} premise hits, verdict {verdict}")
    return EntailmentReport(
        name=name,
        region=entry.region,
        samples=samples,
        premise_hits=hits,
        violations=violations,
        verdict=verdict,
        degenerate=degenerate,
        details={"seed": seed, "violations_total": total_violations, **options},
    )
