import itertools
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import pdist

from .errors import InputError
from .models import ConvexBody, Functional, SpaceDescriptor, Vector
from .utils import TAU, argmin_lowest, stream, uniform_grid

logger = logging.getLogger(__name__)

# Largest bounding-box grid that grid_points builds; pair scans are quadratic in it.
MAX_GRID_POINTS = 10_000


def _check_member(space: SpaceDescriptor, v: Vector) -> np.ndarray:
    if v.space.dimension != space.dimension:
        raise InputError(
            f"Vector of dimension {v.space.dimension} does not belong to a space of dimension {space.dimension}"
        )
    return v.array


def stack(points: Sequence[Vector]) -> np.ndarray:
    """Stack vectors into a 2-D array, one row per point."""
    if not points:
        raise InputError("Expected at least one point")
    dims = {v.space.dimension for v in points}
    if len(dims) != 1:
        raise InputError(f"Points have mixed dimensions {sorted(dims)}")
    return np.array([v.coords for v in points], dtype=float)


def to_vectors(rows: np.ndarray, space: SpaceDescriptor) -> List[Vector]:
    return [Vector.of(row, space) for row in np.atleast_2d(rows)]


def norms(space: SpaceDescriptor, rows: np.ndarray) -> np.ndarray:
    """Row-wise norms of a stack of coordinate arrays."""
    return np.linalg.norm(rows, ord=space.ord, axis=-1)


def norm(space: SpaceDescriptor, v: Vector) -> float:
    """Norm of ``v``: (sum |v_i|^p)^(1/p) for p-norms, max |v_i| for the sup norm.

    Raises:
        InputError: If ``v`` has the wrong dimension.
    """
    return float(np.linalg.norm(_check_member(space, v), ord=space.ord))


def norming_functional(space: SpaceDescriptor, v: Vector) -> Functional:
    """Return a functional f with f(v) = ||v|| and dual norm 1.

    For 1 < p < oo this is the duality map f_i = sign(v_i) |v_i|^(p-1) / ||v||^(p-1).
    At the non-smooth points the choice is fixed: for p = 1 the sign vector with
    0 on zero coordinates, for the sup norm the signed unit vector at the lowest
    index of maximal modulus.

    Raises:
        InputError: If ``v`` is the zero vector or has the wrong dimension.
    """
    coords = _check_member(space, v)
    size = float(np.linalg.norm(coords, ord=space.ord))
    if size == 0.0:
        raise InputError("The zero vector has no norming functional")

    if space.kind == "sup_norm":
        k = int(np.argmax(np.abs(coords)))
        coeffs = np.zeros_like(coords)
        coeffs[k] = np.sign(coords[k])
    elif space.p == 1:
        coeffs = np.sign(coords)
    else:
        unit = coords / size
        coeffs = np.sign(unit) * np.abs(unit) ** (space.p - 1.0)
    return Functional(coeffs=tuple(float(c) for c in coeffs), space=space)


def contains_rows(body: ConvexBody, rows: np.ndarray, slack: float = TAU) -> np.ndarray:
    """Membership mask for a stack of points.

    Boxes and balls are tested exactly (up to ``slack``); hulls by solving the
    convex-combination feasibility program for each point.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != body.space.dimension:
        raise InputError(
            f"Points of dimension {rows.shape[1]} tested against a body of dimension {body.space.dimension}"
        )
    if body.kind == "box":
        lower, upper = np.array(body.lower), np.array(body.upper)
        return np.all((rows >= lower - slack) & (rows <= upper + slack), axis=1)
    if body.kind == "ball":
        dist = norms(body.space, rows - np.array(body.center))
        return dist <= body.radius * (1.0 + slack) + slack
    return np.array([_in_hull(np.array(body.points), row, slack) for row in rows], dtype=bool)


def _in_hull(vertices: np.ndarray, point: np.ndarray, slack: float) -> bool:
    count = vertices.shape[0]
    if count == 1:
        return bool(np.all(np.abs(vertices[0] - point) <= slack))
    a_eq = np.vstack([vertices.T, np.ones(count)])
    b_eq = np.concatenate([point, [1.0]])
    result = linprog(np.zeros(count), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return result.status == 0


def contains(body: ConvexBody, v: Vector) -> bool:
    return bool(contains_rows(body, _check_member(body.space, v))[0])


def bounding_box(body: ConvexBody) -> Tuple[np.ndarray, np.ndarray]:
    if body.kind == "box":
        return np.array(body.lower), np.array(body.upper)
    if body.kind == "ball":
        center = np.array(body.center)
        return center - body.radius, center + body.radius
    points = np.array(body.points)
    return points.min(axis=0), points.max(axis=0)


def extreme_point(body: ConvexBody) -> Vector:
    """Default orbit start: upper box corner, center + r e1 for balls, first vertex for hulls."""
    if body.kind == "box":
        return Vector.of(body.upper, body.space)
    if body.kind == "ball":
        point = np.array(body.center, dtype=float)
        point[0] += body.radius
        return Vector.of(point, body.space)
    return Vector.of(body.points[0], body.space)


def sample_body(body: ConvexBody, count: int, seed: int) -> List[Vector]:
    """Draw ``count`` members of ``body``, deterministically for a given seed.

    Boxes are sampled uniformly, p-norm balls uniformly through the
    generalized-Gaussian radial construction, hulls by Dirichlet weights over
    the vertices.
    """
    if count < 1:
        raise InputError(f"Sample count must be at least 1, got {count}")
    rng = stream(seed, f"sample_body:{body.kind}")
    dim = body.space.dimension

    if body.kind == "box":
        lower, upper = np.array(body.lower), np.array(body.upper)
        rows = lower + (upper - lower) * rng.random((count, dim))
    elif body.kind == "ball":
        if body.space.kind == "sup_norm":
            unit = rng.uniform(-1.0, 1.0, (count, dim))
        else:
            p = body.space.p
            magnitudes = rng.gamma(1.0 / p, 1.0, (count, dim)) ** (1.0 / p)
            signs = rng.choice([-1.0, 1.0], size=(count, dim))
            raw = signs * magnitudes
            tail = rng.exponential(1.0, (count, 1))
            unit = raw / (np.sum(np.abs(raw) ** p, axis=1, keepdims=True) + tail) ** (1.0 / p)
        rows = np.array(body.center) + body.radius * unit
    else:
        vertices = np.array(body.points)
        weights = rng.dirichlet(np.ones(vertices.shape[0]), size=count)
        rows = weights @ vertices

    # clip rounding noise so every sample passes the membership test
    if body.kind == "box":
        rows = np.clip(rows, np.array(body.lower), np.array(body.upper))
    return to_vectors(rows, body.space)


def grid_points(body: ConvexBody, step: float) -> List[Vector]:
    """Regular grid of the body with spacing at most ``step`` per coordinate.

    Box grids are product grids whose endpoints are exact; ball and hull grids
    are the box grid of the bounding box filtered by membership.

    Raises:
        InputError: If the bounding-box grid exceeds MAX_GRID_POINTS points or
            none of its points lies in the body.
    """
    lower, upper = bounding_box(body)
    axes = [uniform_grid(lo, hi, step) for lo, hi in zip(lower, upper)]
    size = math.prod(len(axis) for axis in axes)
    if size > MAX_GRID_POINTS:
        raise InputError(
            f"Grid step {step} gives {size} points in dimension {len(axes)}, above the limit of {MAX_GRID_POINTS}"
        )
    rows = np.array(list(itertools.product(*axes)), dtype=float)
    if body.kind != "box":
        rows = rows[contains_rows(body, rows)]
    if rows.shape[0] == 0:
        raise InputError(f"Grid step {step} produced no points inside the body")
    logger.debug(f"Built grid of {rows.shape[0]} points at step {step}")
    return to_vectors(rows, body.space)


def pairwise_max(space: SpaceDescriptor, rows: np.ndarray) -> float:
    if rows.shape[0] < 2:
        return 0.0
    if space.kind == "sup_norm":
        return float(pdist(rows, metric="chebyshev").max())
    return float(pdist(rows, metric="minkowski", p=space.p).max())


def diameter(points: Sequence[Vector]) -> float:
    """Largest pairwise distance of a finite point set (0 for a singleton).

    Raises:
        InputError: If ``points`` is empty.
    """
    if not points:
        raise InputError("Diameter of an empty point list is undefined")
    return pairwise_max(points[0].space, stack(points))


def body_diameter(body: ConvexBody) -> float:
    """Diameter of a convex body: exact for boxes and balls, vertex diameter for hulls."""
    if body.kind == "box":
        return float(np.linalg.norm(np.array(body.upper) - np.array(body.lower), ord=body.space.ord))
    if body.kind == "ball":
        return 2.0 * body.radius
    return pairwise_max(body.space, np.array(body.points))


def scale_body(body: ConvexBody, factor: float) -> ConvexBody:
    """The body ``factor * body``."""
    if factor <= 0:
        raise InputError(f"Scale factor must be positive, got {factor}")
    if body.kind == "box":
        return ConvexBody.box(
            tuple(factor * c for c in body.lower), tuple(factor * c for c in body.upper), body.space
        )
    if body.kind == "ball":
        return ConvexBody.ball(tuple(factor * c for c in body.center), factor * body.radius, body.space)
    return ConvexBody.hull([tuple(factor * c for c in point) for point in body.points], body.space)


def asymptotic_radius(
    tail: Sequence[Vector], candidates: Sequence[Vector], tail_window: int
) -> Tuple[float, Vector]:
    """Finite surrogate of the asymptotic radius of a sequence relative to a candidate set.

    For every candidate x the limsup of ||x_n - x|| is replaced by the maximum
    over the last ``tail_window`` terms; the smallest such value and its
    candidate (lowest index on ties) are returned.

    Raises:
        InputError: If the window is longer than the tail or an input is empty.
    """
    if tail_window < 1:
        raise InputError(f"Tail window must be positive, got {tail_window}")
    if len(tail) < tail_window:
        raise InputError(f"Tail window {tail_window} exceeds tail length {len(tail)}")
    if not candidates:
        raise InputError("Asymptotic radius needs at least one candidate")

    space = tail[0].space
    window = stack(tail)[-tail_window:]
    cands = stack(candidates)
    if cands.shape[1] != window.shape[1]:
        raise InputError("Candidates and tail live in spaces of different dimension")
    limsups = norms(space, window[None, :, :] - cands[:, None, :]).max(axis=1)
    best = argmin_lowest(limsups)
    return float(limsups[best]), candidates[best]
