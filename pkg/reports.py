import csv
import io
import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from config import RunConfig
from lab.models import ModulusEstimate, OrbitTrace
from version import LIBRARY_VERSION, SCHEMA_VERSION

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


class CommandResult(BaseModel):
    """What a command handler hands back to the front end."""

    exit_code: int = EXIT_PASS
    payload: Dict[str, Any] = Field(default_factory=dict)
    csv: Optional[str] = None
    text: Optional[str] = Field(None, description="Human-readable summary printed to stdout")


def to_jsonable(value: Any) -> Any:
    """Recursively turn models into plain JSON values (aliases applied)."""
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def envelope(run_config: RunConfig, payload: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "library_version": LIBRARY_VERSION,
        "command": run_config.command,
        "seed": run_config.seed,
        "config": run_config.dump(),
        "result": to_jsonable(payload),
    }


def render_json(document: Dict[str, Any]) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def orbit_csv(trace: OrbitTrace) -> str:
    """CSV dump of an orbit: step, coordinates, residual, t_residual.

    The last iterate has no outgoing step, so its residual cell is empty.
    """
    buffer = io.StringIO()
    buffer.write(f"# schema_version: {SCHEMA_VERSION}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    dim = trace.space.dimension
    writer.writerow(["step", *[f"x{j + 1}" for j in range(dim)], "residual", "t_residual"])
    for i in range(trace.steps + 1):
        residual = repr(float(trace.residuals[i])) if i < trace.steps else ""
        writer.writerow(
            [i, *[repr(float(c)) for c in trace.iterates[i]], residual, repr(float(trace.t_residuals[i]))]
        )
    return buffer.getvalue()


def format_table(rows: List[Tuple[str, bool, str]]) -> str:
    """Plain-text pass/fail table, one row per check."""
    width = max([len("check")] + [len(name) for name, _, _ in rows])
    lines = [f"{'check'.ljust(width)}  result  detail", f"{'-' * width}  ------  ------"]
    for name, passed, detail in rows:
        lines.append(f"{name.ljust(width)}  {'PASS' if passed else 'FAIL':<6}  {detail}")
    return "\n".join(lines) + "\n"


def format_estimates(estimates: List[ModulusEstimate]) -> str:
    """One row per (modulus, argument)."""
    rows = []
    for est in estimates:
        args = ", ".join(f"{k}={v}" for k, v in sorted(est.args.items()))
        value = "schur" if est.value is None else f"{est.value:.9f}"
        rows.append((est.modulus, args, value, est.bound_direction, est.method))
    headers = ("modulus", "args", "value", "bound", "method")
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows)
    return "\n".join(lines) + "\n"


def write_outputs(out_dir: str, run_config: RunConfig, result: CommandResult, duration: float) -> List[str]:
    """Write the report, optional CSV and timing sidecar under ``out_dir``.

    Returns:
        list: Paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, run_config.command)
    written = []

    with open(f"{stem}.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(render_json(envelope(run_config, result.payload)))
    written.append(f"{stem}.json")

    if result.csv is not None:
        with open(f"{stem}.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write(result.csv)
        written.append(f"{stem}.csv")

    # wall-clock time lives in a sidecar so the report stays reproducible
    timing = {"schema_version": SCHEMA_VERSION, "command": run_config.command, "duration_seconds": duration}
    with open(f"{stem}.timing.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(render_json(timing))
    written.append(f"{stem}.timing.json")

    logger.info(f"Wrote {', '.join(written)}")
    return written
