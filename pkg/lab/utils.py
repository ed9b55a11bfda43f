import logging
import math
import zlib
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

logger = logging.getLogger(__name__)

# Slack applied to every floating-point comparison unless an operation says otherwise.
TAU = 1e-12

DEFAULT_TAIL_WINDOW = 16
DEFAULT_C_STEP = 1e-3
DEFAULT_A_STEP = 0.01
DEFAULT_A_MAX = 4.0


def stream(seed: int, name: str) -> np.random.Generator:
    """Return the named random stream derived from a run seed.

    Each sub-task draws from its own stream so that the order in which tasks
    run (or the number of threads running them) never changes the numbers a
    task sees.

    Args:
        seed (int): Run seed from the resolved configuration.
        name (str): Stable name of the sub-task.

    Returns:
        np.random.Generator: Generator seeded by ``(seed, crc32(name))``.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def uniform_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Evenly spaced grid on [lo, hi] whose spacing does not exceed ``step``.

    Both endpoints are always present exactly.
    """
    if step <= 0:
        raise ValueError(f"Grid step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"Empty grid interval [{lo}, {hi}]")
    if hi == lo:
        return np.array([lo], dtype=float)
    count = int(math.ceil((hi - lo) / step - 1e-9)) + 1
    return np.linspace(lo, hi, count)


def argmax_lowest(values: np.ndarray) -> int:
    """Index of the maximum; ties go to the lowest index."""
    return int(np.argmax(values))


def argmin_lowest(values: np.ndarray) -> int:
    """Index of the minimum; ties go to the lowest index."""
    return int(np.argmin(values))


def maximize_on_interval(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    step: float,
) -> Tuple[float, float]:
    """Grid search followed by bounded scalar refinement around the best cell.

    ``fn`` must accept an array of abscissae and return the matching values.
    The refinement never makes the answer worse than the grid maximum.

    Returns:
        tuple: ``(argmax, max_value)``.
    """
    xs = uniform_grid(lo, hi, step)
    values = np.asarray(fn(xs), dtype=float)
    best = argmax_lowest(values)
    x_best, f_best = float(xs[best]), float(values[best])

    left = max(lo, x_best - step)
    right = min(hi, x_best + step)
    if right > left:
        result = minimize_scalar(
            lambda s: -float(np.asarray(fn(np.array([s])))[0]),
            bounds=(left, right),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if result.success and -result.fun > f_best:
            x_best, f_best = float(result.x), float(-result.fun)
    return x_best, f_best


def maximize_on_box(
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    bounds: Tuple[Tuple[float, float], Tuple[float, float]],
    steps: Tuple[float, float],
) -> Tuple[Tuple[float, float], float]:
    """Two-variable version of :func:`maximize_on_interval`.

    ``fn`` is evaluated on the full product grid by broadcasting; the best
    cell is refined with bounded L-BFGS-B.
    """
    xs = uniform_grid(bounds[0][0], bounds[0][1], steps[0])
    ys = uniform_grid(bounds[1][0], bounds[1][1], steps[1])
    values = np.asarray(fn(xs[:, None], ys[None, :]), dtype=float)
    flat = argmax_lowest(values.ravel())
    i, j = np.unravel_index(flat, values.shape)
    best_point, best_value = (float(xs[i]), float(ys[j])), float(values[i, j])

    result = minimize(
        lambda z: -float(np.asarray(fn(np.array([z[0]]), np.array([z[1]]))).ravel()[0]),
        x0=np.array(best_point),
        method="L-BFGS-B",
        bounds=bounds,
    )
    if result.success and -result.fun > best_value:
        best_point, best_value = (float(result.x[0]), float(result.x[1])), float(-result.fun)
    return best_point, best_value
