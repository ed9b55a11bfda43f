import logging
import math
import os
from typing import Any, Dict, List, Literal, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

from lab.mappings import get_map
from lab.models import MappingSpec, NormKind, SpaceDescriptor
from lab.utils import DEFAULT_A_MAX, DEFAULT_A_STEP, uniform_grid

try:
    import yaml
except ImportError:
    yaml = None

logger = logging.getLogger(__name__)

COMMANDS = ("check-condition", "iterate", "ar-bound", "moduli", "ledger", "suite")

# Default grid step by body dimension; pair counts grow as step^(-2 dim).
GRID_STEP_BY_DIMENSION = {1: 0.005, 2: 0.1, 3: 0.25}
COARSEST_GRID_STEP = 0.5


class RunConfig(BaseModel):
    """Resolved configuration of one command run. Embedded verbatim in every report."""

    command: Literal["check-condition", "iterate", "ar-bound", "moduli", "ledger", "suite"]
    map: str = Field("interval_threshold", description="Zoo map name or threshold_family:<jump>")
    map_spec: Optional[MappingSpec] = Field(None, description="Inline map definition, overrides map")
    condition: Literal["C_lambda", "nonexpansive", "L_witness"] = "C_lambda"
    lam: float = Field(0.5, alias="lambda", gt=0, lt=1)
    gamma: float = Field(0.5, gt=0, lt=1)
    delta: float = Field(0.5, gt=0)
    eps: float = Field(0.5, gt=0)
    p: Union[Literal["sup"], float] = Field(2.0, description="Norm exponent, or 'sup' for the sup norm")
    dim: int = Field(2, ge=1)
    step: Optional[float] = Field(
        None, gt=0, description="Grid resolution of condition checks; defaults by body dimension"
    )
    samples: int = Field(10_000, ge=1)
    seed: int = 0
    out: Optional[str] = Field(None, description="Output directory; nothing is written when unset")
    name: str = Field("thm21", description="Ledger check name or 'all'")
    steps: int = Field(50, ge=1)
    x0: Optional[List[float]] = None
    tol: float = Field(1e-6, ge=0)
    a_step: float = Field(DEFAULT_A_STEP, gt=0)
    t_grid: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.1, 0.05, 0.01, 0.001])
    resolution: int = Field(360, ge=8)
    exact: bool = False
    horizon: int = Field(1024, ge=1)
    starts: int = Field(100, ge=1)

    class Config:
        frozen = True
        populate_by_name = True
        extra = "forbid"
        json_schema_extra = {
            "example": {
                "command": "check-condition",
                "map": "interval_threshold",
                "lambda": 0.5,
                "step": 0.005,
                "seed": 0,
            }
        }

    @field_validator("p")
    @classmethod
    def _exponent(cls, value):
        if value != "sup" and (not math.isfinite(value) or value < 1):
            raise ValueError(f"p must be a finite exponent >= 1 or 'sup', got {value}")
        return value

    @property
    def norm_kind(self) -> NormKind:
        return NormKind.sup() if self.p == "sup" else NormKind.lp(float(self.p))

    @property
    def space(self) -> SpaceDescriptor:
        if self.p == "sup":
            return SpaceDescriptor.sup(self.dim)
        return SpaceDescriptor.lp(float(self.p), self.dim)

    def grid_step(self, dimension: int) -> float:
        """The configured step, or the default for bodies of this dimension."""
        if self.step is not None:
            return self.step
        return GRID_STEP_BY_DIMENSION.get(dimension, COARSEST_GRID_STEP)

    def a_grid(self) -> List[float]:
        return uniform_grid(0.0, DEFAULT_A_MAX, self.a_step).tolist()

    def mapping(self) -> MappingSpec:
        return self.map_spec if self.map_spec is not None else get_map(self.map)

    def dump(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def _snake(key: str) -> str:
    return key.replace("-", "_")


def _snake_keys(value: Any) -> Any:
    if isinstance(value, dict):
        return {_snake(str(k)): _snake_keys(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_snake_keys(v) for v in value]
    return value


def load_config(path: str) -> Dict[str, Any]:
    """Load run parameters from a YAML file.

    Keys may be written in kebab-case; they are converted to the snake_case
    field names of :class:`RunConfig`.

    Args:
        path (str): Path of the YAML file.

    Returns:
        dict: Parameter values found in the file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ImportError: If PyYAML is not installed.
        ValueError: If the file is empty or not a mapping.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"Configuration file not found at {path}. "
            "Copy config.example.yaml and customize it, or pass parameters as flags."
        )

    with open(path, "r", encoding="utf-8") as f:
        if yaml is None:
            raise ImportError("PyYAML is required to parse config files. Install it with: pip install pyyaml")
        config = yaml.safe_load(f)

    if not config:
        raise ValueError("Configuration file is empty")
    if not isinstance(config, dict):
        raise ValueError(f"Configuration file must contain a mapping, got {type(config).__name__}")

    values = _snake_keys(config)
    logger.info(f"Loaded {len(values)} parameters from {path}")
    return values


def resolve_run_config(
    command: str, file_values: Optional[Dict[str, Any]] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """Merge file values with command-line overrides (the command line wins) and validate.

    Raises:
        pydantic.ValidationError: If the merged parameters violate the schema.
    """
    merged: Dict[str, Any] = dict(file_values or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    merged["command"] = command
    if "lambda" in merged:
        merged["lam"] = merged.pop("lambda")
    return RunConfig.model_validate(merged)


def thread_limit() -> int:
    """Worker cap from FPT_LAB_THREADS (a .env file is honored), default the CPU count."""
    load_dotenv()
    default = os.cpu_count() or 1
    raw = os.getenv("FPT_LAB_THREADS")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Invalid FPT_LAB_THREADS '{raw}', using {default}")
        return default
    if value < 1:
        logger.warning(f"FPT_LAB_THREADS must be positive, got {value}; using 1")
        return 1
    return value
