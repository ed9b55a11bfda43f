"""Geometric moduli of l_p and c0 estimated through disjoint block sequences.

A weakly null sequence (y_n) is modeled by disjointly supported blocks of
constant norm c, disjoint from the anchor x. In l_p the limit of
||alpha x + beta y_n|| is then (|alpha| ||x||)^p + (|beta| c)^p to the power
1/p, in the c0 surrogate it is the maximum of the two terms. Values are
exact for the model, never claimed for the space itself.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import InputError
from .models import (
    BlockSequenceModel,
    CoefficientEquivalence,
    CrossCheck,
    FixedPointProfile,
    ModulusEstimate,
    NormKind,
    NuncReport,
    SpaceDescriptor,
)
from .utils import (
    DEFAULT_A_MAX,
    DEFAULT_A_STEP,
    DEFAULT_C_STEP,
    TAU,
    argmax_lowest,
    maximize_on_box,
    maximize_on_interval,
    stream,
    uniform_grid,
)

logger = logging.getLogger(__name__)


def _is_schur(norm_kind: NormKind) -> bool:
    return norm_kind.kind == "p_norm" and norm_kind.p == 1


def _require_blocks(norm_kind: NormKind) -> None:
    if _is_schur(norm_kind):
        raise InputError(f"{norm_kind.label} has the Schur property; block-model coefficients are undefined")


def _schur(modulus: str, norm_kind: NormKind, **args) -> ModulusEstimate:
    return ModulusEstimate(
        modulus=modulus,
        args={"norm": norm_kind.label, **args},
        value=None,
        bound_direction="exact_for_model",
        witness={"reason": "Schur property: no weakly null sequences on the unit sphere"},
        verdict="schur_property",
    )


def _limit(norm_kind: NormKind, anchor, block):
    """Vectorized limit norm of a disjoint anchor/block pair with the given norms."""
    anchor = np.abs(anchor)
    block = np.abs(block)
    if norm_kind.kind == "sup_norm":
        return np.maximum(anchor, block)
    p = norm_kind.p
    return (anchor**p + block**p) ** (1.0 / p)


def _admissible_block_norm(norm_kind: NormKind) -> float:
    """Largest c with c <= 1 and D[(y_n)] <= 1, read off the unit block model.

    D is linear in c, so the unit model either is admissible or scales down by its separation.
    """
    unit = BlockSequenceModel(norm_kind=norm_kind, block_norm=1.0)
    if unit.admissible:
        return 1.0
    return 1.0 / unit.separation


def _check_eps(eps: float, allow_zero: bool) -> None:
    if eps < 0 or (eps == 0 and not allow_zero) or not math.isfinite(eps):
        raise InputError(f"eps must be {'nonnegative' if allow_zero else 'positive'}, got {eps}")


def limit_norm(model: BlockSequenceModel, coeff_anchor: float, coeff_block: float) -> float:
    """lim ||alpha x + beta y_n|| under the block model."""
    return float(_limit(model.norm_kind, coeff_anchor * model.anchor_norm, coeff_block * model.block_norm))


def _sup_over_blocks(
    norm_kind: NormKind, x_norm: float, eps: float, c_max: float, method: str, c_step: float
) -> Tuple[float, float]:
    """max over c in [0, c_max] of lim ||x + eps y_n|| - ||x||, with its argmax."""
    if method == "closed_form":
        return c_max, float(_limit(norm_kind, x_norm, eps * c_max)) - x_norm
    return maximize_on_interval(lambda c: _limit(norm_kind, x_norm, eps * c) - x_norm, 0.0, c_max, c_step)


def _direction(method: str, kind: str) -> str:
    if method == "closed_form":
        return "exact_for_model"
    return "lower_bound_of_sup" if kind == "sup" else "upper_bound_of_inf"


def modulus_d(
    norm_kind: NormKind, x_norm: float = 1.0, *, eps: float, method: str = "closed_form"
) -> ModulusEstimate:
    """d(eps, x): infimum of limsup ||x + eps y_n|| - ||x|| over weakly null sphere sequences.

    Every unit block sequence gives the same limit, so the block family is a
    single value: (1 + eps^p)^(1/p) - 1 in l_p, max(1, eps) - 1 in c0.

    Raises:
        InputError: If eps <= 0.
    """
    _check_eps(eps, allow_zero=False)
    if _is_schur(norm_kind):
        return _schur("d", norm_kind, eps=eps, x_norm=x_norm)
    if method == "closed_form":
        value = float(_limit(norm_kind, x_norm, eps)) - x_norm
    else:
        # infimum over the (degenerate) family of unit block norms
        cs = np.array([1.0])
        value = float(np.min(_limit(norm_kind, x_norm, eps * cs) - x_norm))
    return ModulusEstimate(
        modulus="d",
        args={"norm": norm_kind.label, "eps": eps, "x_norm": x_norm},
        value=value,
        bound_direction=_direction(method, "inf"),
        witness={"block_norm": 1.0},
        method=method,
    )


def modulus_b1(
    norm_kind: NormKind,
    x_norm: float,
    eps: float,
    method: str = "closed_form",
    c_step: float = DEFAULT_C_STEP,
) -> ModulusEstimate:
    """b1(eps, x): supremum of liminf ||x + eps y_n|| - ||x|| over (y_n) in M_X.

    Membership in M_X caps the block norm at 2^(-1/p) in l_p and at 1 in c0.

    Raises:
        InputError: If eps < 0.
    """
    _check_eps(eps, allow_zero=True)
    if _is_schur(norm_kind):
        return _schur("b1", norm_kind, eps=eps, x_norm=x_norm)
    c, value = _sup_over_blocks(norm_kind, x_norm, eps, _admissible_block_norm(norm_kind), method, c_step)
    return ModulusEstimate(
        modulus="b1",
        args={"norm": norm_kind.label, "eps": eps, "x_norm": x_norm},
        value=value,
        bound_direction=_direction(method, "sup"),
        witness={"block_norm": c},
        method=method,
    )


def modulus_b(
    norm_kind: NormKind,
    x_norm: float,
    eps: float,
    method: str = "closed_form",
    c_step: float = DEFAULT_C_STEP,
) -> ModulusEstimate:
    """b(eps, x): supremum of liminf ||x + eps y_n|| - ||x|| over weakly null sphere sequences.

    Raises:
        InputError: If eps < 0.
    """
    _check_eps(eps, allow_zero=True)
    if _is_schur(norm_kind):
        return _schur("b", norm_kind, eps=eps, x_norm=x_norm)
    if method == "closed_form":
        c, value = 1.0, float(_limit(norm_kind, x_norm, eps)) - x_norm
    else:
        # sphere sequences: the block norm is pinned to 1
        c, value = maximize_on_interval(lambda cs: _limit(norm_kind, x_norm, eps * cs) - x_norm, 1.0, 1.0, c_step)
    return ModulusEstimate(
        modulus="b",
        args={"norm": norm_kind.label, "eps": eps, "x_norm": x_norm},
        value=value,
        bound_direction=_direction(method, "sup"),
        witness={"block_norm": c},
        method=method,
    )


def R_modulus(
    norm_kind: NormKind, a: float, method: str = "closed_form", c_step: float = DEFAULT_C_STEP
) -> ModulusEstimate:
    """R(a, X): supremum of liminf ||y_n + x|| over ||x|| <= a and (y_n) in B_X with D[(y_n)] <= 1.

    Closed forms: (a^p + 1/2)^(1/p) in l_p, max(1, a) in c0.

    Raises:
        InputError: If a < 0.
    """
    if a < 0 or not math.isfinite(a):
        raise InputError(f"a must be a nonnegative real, got {a}")
    if _is_schur(norm_kind):
        return _schur("R", norm_kind, a=a)
    c_max = _admissible_block_norm(norm_kind)
    if method == "closed_form":
        (s, c), value = (a, c_max), float(_limit(norm_kind, a, c_max))
    else:
        s_step = max(a, 1.0) / 200.0
        (s, c), value = maximize_on_box(
            lambda ss, cs: _limit(norm_kind, ss, cs), ((0.0, a), (0.0, c_max)), (s_step, c_step)
        )
    return ModulusEstimate(
        modulus="R",
        args={"norm": norm_kind.label, "a": a},
        value=value,
        bound_direction=_direction(method, "sup"),
        witness={"anchor_norm": s, "block_norm": c},
        method=method,
    )


def default_a_grid(step: float = DEFAULT_A_STEP, a_max: float = DEFAULT_A_MAX) -> List[float]:
    return uniform_grid(0.0, a_max, step).tolist()


def M_coefficient(norm_kind: NormKind, a_grid: Sequence[float]) -> ModulusEstimate:
    """M(X) = sup (1 + a) / R(a, X), maximized over ``a_grid`` (lowest a on ties).

    Raises:
        InputError: If the grid is empty.
    """
    if not a_grid:
        raise InputError("a_grid must not be empty")
    if _is_schur(norm_kind):
        return _schur("M", norm_kind)
    grid = np.asarray(a_grid, dtype=float)
    ratios = (1.0 + grid) / _limit(norm_kind, grid, _admissible_block_norm(norm_kind))
    best = argmax_lowest(ratios)
    return ModulusEstimate(
        modulus="M",
        args={"norm": norm_kind.label, "grid_size": int(grid.size)},
        value=float(ratios[best]),
        bound_direction="lower_bound_of_sup",
        witness={"a": float(grid[best])},
    )


def RW_MW(norm_kind: NormKind, a_grid: Sequence[float]) -> Tuple[List[ModulusEstimate], ModulusEstimate]:
    """RW(a, X) on every grid point and MW(X) = sup (1 + a) / RW(a, X) over the grid.

    Disjoint blocks make ||y_n + x|| and ||y_n - x|| agree in the limit, so
    RW(a) = (1 + a^p)^(1/p) with unit blocks (max(1, a) in c0).

    Raises:
        InputError: If the grid is empty.
    """
    if not a_grid:
        raise InputError("a_grid must not be empty")
    if _is_schur(norm_kind):
        return [], _schur("MW", norm_kind)
    grid = np.asarray(a_grid, dtype=float)
    plus = _limit(norm_kind, grid, 1.0)
    minus = _limit(norm_kind, -grid, 1.0)
    rw = np.minimum(plus, minus)
    rw_estimates = [
        ModulusEstimate(
            modulus="RW",
            args={"norm": norm_kind.label, "a": float(a)},
            value=float(value),
            bound_direction="exact_for_model",
            witness={"anchor_norm": float(a), "block_norm": 1.0},
        )
        for a, value in zip(grid, rw)
    ]
    ratios = (1.0 + grid) / rw
    best = argmax_lowest(ratios)
    mw = ModulusEstimate(
        modulus="MW",
        args={"norm": norm_kind.label, "grid_size": int(grid.size)},
        value=float(ratios[best]),
        bound_direction="lower_bound_of_sup",
        witness={"a": float(grid[best])},
    )
    return rw_estimates, mw


def _sphere_witnesses(space: SpaceDescriptor) -> np.ndarray:
    dim = space.dimension
    rows = [np.eye(dim)[i] for i in range(dim)]
    if dim >= 2:
        for sign in (1.0, -1.0):
            v = np.zeros(dim)
            v[0], v[1] = 1.0, sign
            rows.append(v)
    rows.append(np.ones(dim))
    return np.array(rows)


def _min_sum_diff(space: SpaceDescriptor, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    plus = np.linalg.norm(us[:, None, :] + vs[None, :, :], ord=space.ord, axis=-1)
    minus = np.linalg.norm(us[:, None, :] - vs[None, :, :], ord=space.ord, axis=-1)
    return np.minimum(plus, minus)


def james_constant(space: SpaceDescriptor, resolution: int = 360, seed: int = 0) -> ModulusEstimate:
    """Lower estimate of J(X) = sup over sphere pairs of min(||x + y||, ||x - y||).

    Candidates are a few exact witnesses, an angular grid of ``resolution``
    directions in the first coordinate plane and, above dimension 2, as many
    random directions. The best pair is refined with Nelder-Mead.

    Raises:
        InputError: If resolution < 8.
    """
    if resolution < 8:
        raise InputError(f"resolution must be at least 8, got {resolution}")
    dim = space.dimension
    candidates = [_sphere_witnesses(space)]
    if dim >= 2:
        angles = 2.0 * np.pi * np.arange(resolution) / resolution
        plane = np.zeros((resolution, dim))
        plane[:, 0], plane[:, 1] = np.cos(angles), np.sin(angles)
        candidates.append(plane)
    if dim > 2:
        candidates.append(stream(seed, "james_constant").standard_normal((resolution, dim)))
    points = np.vstack(candidates)
    points = points / np.linalg.norm(points, ord=space.ord, axis=1, keepdims=True)

    values = np.vstack([_min_sum_diff(space, points[i : i + 128], points) for i in range(0, len(points), 128)])
    flat = argmax_lowest(values.ravel())
    i, j = np.unravel_index(flat, values.shape)
    best, x, y = float(values[i, j]), points[i], points[j]

    def objective(z: np.ndarray) -> float:
        u, v = z[:dim], z[dim:]
        nu = np.linalg.norm(u, ord=space.ord)
        nv = np.linalg.norm(v, ord=space.ord)
        if nu == 0 or nv == 0:
            return 0.0
        return -float(_min_sum_diff(space, (u / nu)[None, :], (v / nv)[None, :])[0, 0])

    refined = minimize(objective, np.concatenate([x, y]), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    if -refined.fun > best:
        best = -refined.fun
        x = refined.x[:dim] / np.linalg.norm(refined.x[:dim], ord=space.ord)
        y = refined.x[dim:] / np.linalg.norm(refined.x[dim:], ord=space.ord)

    # J(X) <= 2 by the triangle inequality; anything above is rounding
    value = min(best, 2.0)
    return ModulusEstimate(
        modulus="J",
        args={"norm": space.label, "dimension": dim, "resolution": resolution},
        value=value,
        bound_direction="lower_bound_of_sup",
        witness={"x": [float(c) for c in x], "y": [float(c) for c in y]},
        method="search",
    )


def nunc_witness(norm_kind: NormKind, eps: float, t_grid: Sequence[float], x_norm: float = 1.0) -> NuncReport:
    """Find t in ``t_grid`` with d(eps, x) >= t or b(t, x) <= eps t for the canonical anchor.

    The d branch is tried first. Both branches need the direction of bound the
    block model does not supply, so a success is model-scale evidence only.

    Raises:
        InputError: If eps <= 0.
    """
    _check_eps(eps, allow_zero=False)
    if _is_schur(norm_kind):
        return NuncReport(
            norm=norm_kind.label, eps=eps, satisfied=True, branch="schur", evidence="schur_property", tried=0
        )
    d_value = modulus_d(norm_kind, x_norm, eps=eps).value
    tried = 0
    for t in t_grid:
        if t <= 0:
            continue
        tried += 1
        if d_value >= t - TAU:
            return NuncReport(
                norm=norm_kind.label, eps=eps, satisfied=True, t=t, branch="d", evidence="model_scale_only", tried=tried
            )
        if modulus_b(norm_kind, x_norm, t).value <= eps * t + TAU:
            return NuncReport(
                norm=norm_kind.label, eps=eps, satisfied=True, t=t, branch="b", evidence="model_scale_only", tried=tried
            )
    return NuncReport(norm=norm_kind.label, eps=eps, satisfied=False, evidence="model_scale_only", tried=tried)


def eq43_cross_check(norm_kind: NormKind, a: float, samples: int = 401) -> CrossCheck:
    """Compare R(a) with the supremum of b1(1, x) + ||x|| over sampled ||x|| <= a."""
    _require_blocks(norm_kind)
    direct = R_modulus(norm_kind, a).value
    norms_grid = np.linspace(0.0, a, samples)
    indirect = max(modulus_b1(norm_kind, float(s), 1.0).value + float(s) for s in norms_grid)
    return CrossCheck(
        name="R_vs_b1",
        args={"norm": norm_kind.label, "a": a, "samples": samples},
        direct=direct,
        indirect=indirect,
        deviation=abs(direct - indirect),
    )


def lemma41_equivalence(norm_kind: NormKind, a_grid: Sequence[float], slack: float = 1e-9) -> CoefficientEquivalence:
    """Evaluate the three equivalent forms of M(X) > 1 on the block-model values.

    Only the positive grid points take part in the two R(a) < 1 + a forms.
    """
    _require_blocks(norm_kind)
    positive = [a for a in a_grid if a > 0]
    if not positive:
        raise InputError("a_grid needs at least one positive point")
    gaps = [R_modulus(norm_kind, a).value < 1.0 + a - slack for a in positive]
    m_value = M_coefficient(norm_kind, list(a_grid)).value
    exists_gap, all_gap, m_exceeds_one = any(gaps), all(gaps), m_value > 1.0 + slack
    return CoefficientEquivalence(
        norm=norm_kind.label,
        grid_size=len(positive),
        exists_gap=exists_gap,
        all_gap=all_gap,
        m_exceeds_one=m_exceeds_one,
        agree=exists_gap == all_gap == m_exceeds_one,
    )


def fixed_point_profile(
    space: SpaceDescriptor, a_grid: Optional[Sequence[float]] = None, resolution: int = 360, seed: int = 0
) -> FixedPointProfile:
    """Collect the fixed-point criteria of a modeled space.

    Uniform nonsquareness comes from the James constant search; M > 1 and
    MW > 1 from the block model; the corollary constant is eps = 2 - R(1)
    together with the bound b1(1, x) <= R(1) - 1 on the unit sphere.
    """
    a_grid = list(a_grid) if a_grid is not None else default_a_grid()
    norm_kind = space.norm_kind
    james = james_constant(space, resolution, seed)
    nonsquare = james.value < 2.0 - 1e-9
    if _is_schur(norm_kind):
        logger.info(f"{space.label}: Schur property, block moduli are not defined")
        return FixedPointProfile(
            norm=space.label,
            dimension=space.dimension,
            schur=True,
            james=james,
            uniformly_nonsquare=nonsquare,
            evidence="schur_property",
        )

    m = M_coefficient(norm_kind, a_grid)
    _, mw = RW_MW(norm_kind, a_grid)
    r_one = R_modulus(norm_kind, 1.0).value
    b1_one = modulus_b1(norm_kind, 1.0, 1.0).value
    return FixedPointProfile(
        norm=space.label,
        dimension=space.dimension,
        schur=False,
        james=james,
        uniformly_nonsquare=nonsquare,
        m_coefficient=m,
        mw_coefficient=mw,
        m_exceeds_one=m.value > 1.0 + 1e-9,
        mw_exceeds_one=mw.value > 1.0 + 1e-9,
        m_dominates_mw=m.value >= mw.value - 1e-9,
        corollary_epsilon=2.0 - r_one,
        b1_bound_holds=b1_one <= r_one - 1.0 + TAU,
        evidence="model_scale_only",
    )
