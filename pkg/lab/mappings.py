import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, MappingError
from .models import (
    AffineRule,
    AveragedRule,
    ClosureRule,
    ConditionReport,
    ConvexBody,
    GridRegion,
    MappingSpec,
    RescaledRule,
    ShiftRule,
    SpaceDescriptor,
    TableRule,
    ThresholdRule,
    Vector,
    Violation,
)
from .space import contains_rows, norms, scale_body, stack
from .utils import TAU

logger = logging.getLogger(__name__)

# rows of x per block when forming pairwise distance matrices
PAIR_BLOCK = 256


def _raw_images(mapping: MappingSpec, rows: np.ndarray) -> np.ndarray:
    rule = mapping.rule
    if isinstance(rule, AffineRule):
        return rows @ np.array(rule.matrix, dtype=float).T + np.array(rule.offset, dtype=float)
    if isinstance(rule, ThresholdRule):
        images = np.tile(np.array(rule.value, dtype=float), (rows.shape[0], 1))
        at_point = np.all(rows == np.array(rule.point, dtype=float), axis=1)
        images[at_point] = np.array(rule.jump, dtype=float)
        return images
    if isinstance(rule, ShiftRule):
        shifted = np.roll(rows, 1, axis=1)
        if rule.mode == "truncating":
            shifted[:, 0] = 0.0
        return shifted
    if isinstance(rule, TableRule):
        sources = np.array(rule.sources, dtype=float)
        dist = norms(mapping.body.space, rows[:, None, :] - sources[None, :, :])
        return np.array(rule.images, dtype=float)[np.argmin(dist, axis=1)]
    if isinstance(rule, ClosureRule):
        return np.asarray(rule.fn(rows.copy()), dtype=float).reshape(rows.shape)
    if isinstance(rule, AveragedRule):
        return (1.0 - rule.gamma) * rows + rule.gamma * _raw_images(rule.base, rows)
    if isinstance(rule, RescaledRule):
        return _raw_images(rule.base, rule.r * rows) / rule.r
    raise InputError(f"Unsupported rule kind: {rule.kind}")


def evaluate(mapping: MappingSpec, rows: np.ndarray) -> np.ndarray:
    """Images of a stack of points, one row per point.

    Raises:
        MappingError: If some image leaves the mapping's body.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    images = _raw_images(mapping, rows)
    if not np.all(np.isfinite(images)):
        raise MappingError(f"{mapping.name}: non-finite image")
    inside = contains_rows(mapping.body, images)
    if not np.all(inside):
        bad = int(np.argmin(inside))
        raise MappingError(
            f"{mapping.name}: image {images[bad].tolist()} of {rows[bad].tolist()} leaves the body"
        )
    return images


def apply(mapping: MappingSpec, v: Vector) -> Vector:
    """Image of a single point."""
    if v.space.dimension != mapping.body.space.dimension:
        raise InputError(f"{mapping.name}: point of dimension {v.space.dimension} outside the domain")
    return Vector.of(evaluate(mapping, v.array[None, :])[0], mapping.body.space)


def identity(body: Optional[ConvexBody] = None) -> MappingSpec:
    body = body or ConvexBody.interval(-1.0, 1.0)
    dim = body.space.dimension
    return MappingSpec(
        name="identity",
        body=body,
        rule=AffineRule(matrix=np.eye(dim).tolist(), offset=[0.0] * dim),
    )


def affine(name: str, matrix, offset, body: ConvexBody) -> MappingSpec:
    return MappingSpec(
        name=name,
        body=body,
        rule=AffineRule(
            matrix=np.atleast_2d(np.asarray(matrix, dtype=float)).tolist(),
            offset=[float(c) for c in offset],
        ),
    )


def half() -> MappingSpec:
    """x -> x/2 on [-1, 1]."""
    return affine("half", [[0.5]], [0.0], ConvexBody.interval(-1.0, 1.0))


def negation() -> MappingSpec:
    """x -> -x on [-1, 1]."""
    return affine("negation", [[-1.0]], [0.0], ConvexBody.interval(-1.0, 1.0))


def threshold_family(jump: float, length: float = 3.0, name: Optional[str] = None) -> MappingSpec:
    """T x = 0 for x != length, T(length) = jump, on [0, length].

    Satisfies (C_lambda) exactly when lambda >= jump / (length - jump), and is
    nonexpansive only for jump = 0.
    """
    if not 0.0 <= jump < length:
        raise InputError(f"Jump must lie in [0, {length}), got {jump}")
    return MappingSpec(
        name=name or f"threshold_family_{jump:g}",
        body=ConvexBody.interval(0.0, length),
        rule=ThresholdRule(value=[0.0], point=[length], jump=[jump]),
    )


def interval_threshold() -> MappingSpec:
    """The discontinuous map on [0, 3] satisfying (C) but not nonexpansiveness."""
    return threshold_family(1.0, 3.0, name="interval_threshold")


def coordinate_shift(mode: str = "cyclic", dimension: int = 3, p: float = 2.0) -> MappingSpec:
    space = SpaceDescriptor.lp(p, dimension)
    return MappingSpec(
        name=f"{mode}_shift",
        body=ConvexBody.box((0.0,) * dimension, (1.0,) * dimension, space),
        rule=ShiftRule(mode=mode),
    )


def rotation(angle: float = math.pi / 3) -> MappingSpec:
    """Planar rotation of the Euclidean unit ball."""
    c, s = math.cos(angle), math.sin(angle)
    space = SpaceDescriptor.lp(2.0, 2)
    return affine("rotation", [[c, -s], [s, c]], [0.0, 0.0], ConvexBody.ball((0.0, 0.0), 1.0, space))


def finite_table(name: str, pairs: Sequence[Tuple[Sequence[float], Sequence[float]]], body: ConvexBody) -> MappingSpec:
    return MappingSpec(
        name=name,
        body=body,
        rule=TableRule(sources=[list(s) for s, _ in pairs], images=[list(t) for _, t in pairs]),
    )


def closure(name: str, fn: Callable[[np.ndarray], np.ndarray], body: ConvexBody) -> MappingSpec:
    return MappingSpec(name=name, body=body, rule=ClosureRule(label=name, fn=fn))


ZOO: Dict[str, Callable[[], MappingSpec]] = {
    "identity": identity,
    "half": half,
    "negation": negation,
    "interval_threshold": interval_threshold,
    "cyclic_shift": lambda: coordinate_shift("cyclic"),
    "truncating_shift": lambda: coordinate_shift("truncating"),
    "rotation": rotation,
}


def get_map(name: str) -> MappingSpec:
    """Zoo entry by name; ``threshold_family:<jump>`` builds a family member."""
    if name.startswith("threshold_family:"):
        raw = name.split(":", 1)[1]
        try:
            jump = float(raw)
        except ValueError:
            raise InputError(f"threshold_family needs a numeric jump, got '{raw}'") from None
        return threshold_family(jump)
    if name not in ZOO:
        raise InputError(f"Unknown map '{name}'. Must be one of: {', '.join(sorted(ZOO))}")
    return ZOO[name]()


def rescale_map(mapping: MappingSpec, r: float) -> MappingSpec:
    """The map S y = (1/r) T(r y) on (1/r) * body.

    Affine, threshold, shift, table and averaged rules are rescaled in closed
    form so that designated points stay exactly representable; closures are
    wrapped.
    """
    if not r > 0 or not math.isfinite(r):
        raise InputError(f"Scale r must be a positive real, got {r}")
    if r == 1.0:
        return mapping
    body = scale_body(mapping.body, 1.0 / r)
    name = f"{mapping.name}_rescaled_{r:g}"
    rule = mapping.rule
    if isinstance(rule, AffineRule):
        new_rule = AffineRule(matrix=rule.matrix, offset=[c / r for c in rule.offset])
    elif isinstance(rule, ThresholdRule):
        new_rule = ThresholdRule(
            value=[c / r for c in rule.value],
            point=[c / r for c in rule.point],
            jump=[c / r for c in rule.jump],
        )
    elif isinstance(rule, ShiftRule):
        new_rule = rule
    elif isinstance(rule, TableRule):
        new_rule = TableRule(
            sources=[[c / r for c in s] for s in rule.sources],
            images=[[c / r for c in t] for t in rule.images],
        )
    elif isinstance(rule, AveragedRule):
        new_rule = AveragedRule(base=rescale_map(rule.base, r), gamma=rule.gamma)
    else:
        new_rule = RescaledRule(base=mapping, r=r)
    return MappingSpec(name=name, body=body, rule=new_rule)


def _region(rows: np.ndarray) -> GridRegion:
    return GridRegion(lower=rows.min(axis=0).tolist(), upper=rows.max(axis=0).tolist())


def _sorted_violations(rows: np.ndarray, found: List[Tuple[int, int, float, float]], ys=None) -> List[Violation]:
    ys = rows if ys is None else ys
    violations = [
        Violation(x=rows[i].tolist(), y=ys[j].tolist(), lhs=lhs, rhs=rhs) for i, j, lhs, rhs in found
    ]
    violations.sort(key=lambda v: (tuple(v.x), tuple(v.y)))
    return violations


def _pair_scan(
    mapping: MappingSpec, lam: Optional[float], grid: Sequence[Vector]
) -> Tuple[np.ndarray, List[Tuple[int, int, float, float]], int, float]:
    space = mapping.body.space
    rows = stack(grid)
    if rows.shape[1] != space.dimension:
        raise InputError(f"{mapping.name}: grid dimension {rows.shape[1]} does not match the body")
    if not np.all(contains_rows(mapping.body, rows)):
        raise InputError(f"{mapping.name}: grid points must belong to the body")
    images = evaluate(mapping, rows)
    displacement = norms(space, rows - images)

    found: List[Tuple[int, int, float, float]] = []
    spacing = 0.0
    n = rows.shape[0]
    for start in range(0, n, PAIR_BLOCK):
        stop = min(n, start + PAIR_BLOCK)
        dxy = norms(space, rows[start:stop, None, :] - rows[None, :, :])
        dtt = norms(space, images[start:stop, None, :] - images[None, :, :])
        if lam is None:
            premise = np.ones_like(dxy, dtype=bool)
        else:
            premise = lam * displacement[start:stop, None] <= dxy + TAU
        bad = premise & (dtt > dxy + TAU)
        for i, j in zip(*np.nonzero(bad)):
            found.append((start + int(i), int(j), float(dtt[i, j]), float(dxy[i, j])))

        if n > 1:
            off = dxy.copy()
            off[np.arange(stop - start), np.arange(start, stop)] = np.inf
            spacing = max(spacing, float(off.min(axis=1).max()))
    return rows, found, n * (n - 1), spacing


def check_nonexpansive(
    mapping: MappingSpec, grid: Sequence[Vector], resolution: Optional[float] = None
) -> ConditionReport:
    """Record every grid pair with ||Tx - Ty|| > ||x - y|| + tau.

    Raises:
        MappingError: If the map leaves its body on the grid.
    """
    rows, found, pairs, spacing = _pair_scan(mapping, None, grid)
    violations = _sorted_violations(rows, found)
    if violations:
        logger.warning(f"{mapping.name}: {len(violations)} nonexpansiveness violations")
    return ConditionReport(
        condition="nonexpansive",
        map_name=mapping.name,
        grid_resolution=resolution if resolution is not None else spacing,
        pairs_checked=pairs,
        violations=violations,
        verdict="violated" if violations else "no_violation_found",
        region=_region(rows),
    )


def check_condition_C_lambda(
    mapping: MappingSpec, lam: float, grid: Sequence[Vector], resolution: Optional[float] = None
) -> ConditionReport:
    """Grid check of (C_lambda): lambda ||x - Tx|| <= ||x - y|| implies ||Tx - Ty|| <= ||x - y||.

    Both orders of every pair are examined and tau is added to both sides of
    the premise and the conclusion. ``lam = 1/2`` is condition (C).

    Raises:
        InputError: If ``lam`` is not in (0, 1).
        MappingError: If the map leaves its body on the grid.
    """
    if not 0.0 < lam < 1.0:
        raise InputError(f"lambda must lie in (0, 1), got {lam}")
    rows, found, pairs, spacing = _pair_scan(mapping, lam, grid)
    violations = _sorted_violations(rows, found)
    if violations:
        logger.warning(f"{mapping.name}: {len(violations)} (C_lambda) violations at lambda={lam}")
    return ConditionReport(
        condition="C" if lam == 0.5 else "C_lambda",
        map_name=mapping.name,
        lam=lam,
        grid_resolution=resolution if resolution is not None else spacing,
        pairs_checked=pairs,
        violations=violations,
        verdict="violated" if violations else "no_violation_found",
        region=_region(rows),
    )


def check_condition_L_witness(
    mapping: MappingSpec,
    afps_tail: Sequence[Vector],
    points: Sequence[Vector],
    tail_window: int,
) -> ConditionReport:
    """Check limsup ||x_n - Tx|| <= limsup ||x_n - x|| against one afps witness.

    limsup is replaced by the maximum over the last ``tail_window`` terms.
    Violations store the checked point as ``x`` and its image as ``y``.

    Raises:
        InputError: If the window exceeds the tail, or a point has the wrong
            dimension or lies outside the body.
    """
    if tail_window < 1 or tail_window > len(afps_tail):
        raise InputError(f"Tail window {tail_window} exceeds tail length {len(afps_tail)}")
    space = mapping.body.space
    window = stack(afps_tail)[-tail_window:]
    rows = stack(points)
    if rows.shape[1] != space.dimension:
        raise InputError(f"{mapping.name}: point dimension {rows.shape[1]} does not match the body")
    if not np.all(contains_rows(mapping.body, rows)):
        raise InputError(f"{mapping.name}: checked points must belong to the body")
    images = evaluate(mapping, rows)

    lhs = norms(space, window[None, :, :] - images[:, None, :]).max(axis=1)
    rhs = norms(space, window[None, :, :] - rows[:, None, :]).max(axis=1)
    found = [(i, i, float(lhs[i]), float(rhs[i])) for i in np.nonzero(lhs > rhs + TAU)[0]]
    violations = _sorted_violations(rows, found, ys=images)

    spacing = 0.0
    if rows.shape[0] > 1:
        dist = norms(space, rows[:, None, :] - rows[None, :, :])
        np.fill_diagonal(dist, np.inf)
        spacing = float(dist.min(axis=1).max())
    return ConditionReport(
        condition="L_witness",
        map_name=mapping.name,
        grid_resolution=spacing,
        pairs_checked=rows.shape[0] * tail_window,
        violations=violations,
        verdict="violated" if violations else "no_violation_found",
        region=_region(rows),
    )
