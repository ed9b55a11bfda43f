import math
from typing import Annotated, Any, Callable, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator


class NormKind(BaseModel):
    """Norm family of a finite-dimensional space.

    ``p_norm`` carries an exponent ``p >= 1``; ``sup_norm`` has no exponent and
    doubles as the c0 surrogate in the block-sequence model.
    """

    kind: Literal["p_norm", "sup_norm"] = Field("p_norm", description="Norm family")
    p: Optional[float] = Field(2.0, description="Exponent of the p-norm (null for sup_norm)")

    class Config:
        frozen = True
        json_schema_extra = {"example": {"kind": "p_norm", "p": 2.0}}

    @model_validator(mode="before")
    @classmethod
    def _normalize_exponent(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("kind") == "sup_norm":
            data = {**data, "p": None}
        return data

    @model_validator(mode="after")
    def _check_exponent(self):
        if self.kind == "p_norm":
            if self.p is None or not math.isfinite(self.p) or self.p < 1:
                raise ValueError(f"p_norm requires a finite exponent p >= 1, got {self.p}")
        return self

    @property
    def ord(self) -> float:
        """Exponent understood by ``numpy.linalg.norm``."""
        return np.inf if self.kind == "sup_norm" else float(self.p)

    @property
    def conjugate(self) -> float:
        """Conjugate exponent q with 1/p + 1/q = 1 (q = 1 for the sup norm)."""
        if self.kind == "sup_norm":
            return 1.0
        if self.p == 1:
            return np.inf
        return self.p / (self.p - 1.0)

    @property
    def label(self) -> str:
        return "sup" if self.kind == "sup_norm" else f"l{self.p:g}"

    @classmethod
    def lp(cls, p: float) -> "NormKind":
        return cls(kind="p_norm", p=p)

    @classmethod
    def sup(cls) -> "NormKind":
        return cls(kind="sup_norm")


class SpaceDescriptor(NormKind):
    """The ambient space: a norm family together with a dimension."""

    dimension: int = Field(..., ge=1, description="Number of coordinates")

    class Config:
        frozen = True
        json_schema_extra = {"example": {"kind": "p_norm", "p": 2.0, "dimension": 2}}

    @property
    def norm_kind(self) -> NormKind:
        return NormKind(kind=self.kind, p=self.p)

    @classmethod
    def lp(cls, p: float, dimension: int = 1) -> "SpaceDescriptor":
        return cls(kind="p_norm", p=p, dimension=dimension)

    @classmethod
    def sup(cls, dimension: int = 1) -> "SpaceDescriptor":
        return cls(kind="sup_norm", dimension=dimension)


def _finite_coords(values, dimension: int, what: str) -> Tuple[float, ...]:
    coords = tuple(float(c) for c in values)
    if len(coords) != dimension:
        raise ValueError(f"{what} has {len(coords)} coordinates, space dimension is {dimension}")
    if not all(math.isfinite(c) for c in coords):
        raise ValueError(f"{what} has non-finite coordinates: {coords}")
    return coords


class Vector(BaseModel):
    """A point of the ambient space."""

    coords: Tuple[float, ...] = Field(..., description="Coordinates")
    space: SpaceDescriptor = Field(..., description="Space the point lives in")

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _check_coords(self):
        _finite_coords(self.coords, self.space.dimension, "Vector")
        return self

    @property
    def array(self) -> np.ndarray:
        arr = np.array(self.coords, dtype=float)
        arr.flags.writeable = False
        return arr

    @classmethod
    def of(cls, coords, space: SpaceDescriptor) -> "Vector":
        return cls(coords=tuple(float(c) for c in np.ravel(coords)), space=space)


class Functional(BaseModel):
    """A bounded linear functional, stored by its dual coefficient vector."""

    coeffs: Tuple[float, ...] = Field(..., description="Dual coefficients")
    space: SpaceDescriptor

    class Config:
        frozen = True

    def evaluate(self, v: Vector) -> float:
        return float(np.dot(np.array(self.coeffs), v.array))

    def dual_norm(self) -> float:
        return float(np.linalg.norm(np.array(self.coeffs), ord=self.space.conjugate))


class ConvexBody(BaseModel):
    """A bounded convex body: coordinate box, norm ball or convex hull of points."""

    kind: Literal["box", "ball", "hull"] = Field(..., description="Body family")
    space: SpaceDescriptor
    lower: Optional[Tuple[float, ...]] = Field(None, description="Box lower bounds")
    upper: Optional[Tuple[float, ...]] = Field(None, description="Box upper bounds")
    center: Optional[Tuple[float, ...]] = Field(None, description="Ball center")
    radius: Optional[float] = Field(None, description="Ball radius")
    points: Optional[List[Tuple[float, ...]]] = Field(None, description="Hull vertices")

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "kind": "box",
                "space": {"kind": "p_norm", "p": 2.0, "dimension": 1},
                "lower": [0.0],
                "upper": [3.0],
            }
        }

    @model_validator(mode="after")
    def _check_shape(self):
        dim = self.space.dimension
        if self.kind == "box":
            if self.lower is None or self.upper is None:
                raise ValueError("box requires lower and upper bounds")
            lower = _finite_coords(self.lower, dim, "box lower bound")
            upper = _finite_coords(self.upper, dim, "box upper bound")
            if any(lo > hi for lo, hi in zip(lower, upper)):
                raise ValueError(f"box is empty: lower {lower} exceeds upper {upper}")
        elif self.kind == "ball":
            if self.center is None or self.radius is None:
                raise ValueError("ball requires center and radius")
            _finite_coords(self.center, dim, "ball center")
            if not math.isfinite(self.radius) or self.radius < 0:
                raise ValueError(f"ball radius must be finite and nonnegative, got {self.radius}")
        else:
            if not self.points:
                raise ValueError("hull requires at least one point")
            for point in self.points:
                _finite_coords(point, dim, "hull vertex")
        return self

    @classmethod
    def box(cls, lower, upper, space: SpaceDescriptor) -> "ConvexBody":
        return cls(kind="box", space=space, lower=tuple(lower), upper=tuple(upper))

    @classmethod
    def interval(cls, lo: float, hi: float, p: float = 2.0) -> "ConvexBody":
        return cls.box((lo,), (hi,), SpaceDescriptor.lp(p, 1))

    @classmethod
    def ball(cls, center, radius: float, space: SpaceDescriptor) -> "ConvexBody":
        return cls(kind="ball", space=space, center=tuple(center), radius=radius)

    @classmethod
    def hull(cls, points, space: SpaceDescriptor) -> "ConvexBody":
        return cls(kind="hull", space=space, points=[tuple(p) for p in points])


class AffineRule(BaseModel):
    """x -> A x + b."""

    kind: Literal["affine"] = "affine"
    matrix: List[List[float]]
    offset: List[float]

    class Config:
        frozen = True


class ThresholdRule(BaseModel):
    """Constant ``value`` everywhere except at ``point``, where the image is ``jump``."""

    kind: Literal["interval_threshold"] = "interval_threshold"
    value: List[float]
    point: List[float]
    jump: List[float]

    class Config:
        frozen = True


class ShiftRule(BaseModel):
    """Coordinate shift (x1, ..., xn) -> (xn, x1, ..., x_{n-1}) or (0, x1, ..., x_{n-1})."""

    kind: Literal["coordinate_shift"] = "coordinate_shift"
    mode: Literal["cyclic", "truncating"] = "cyclic"

    class Config:
        frozen = True


class TableRule(BaseModel):
    """Finite point table evaluated at the nearest source point."""

    kind: Literal["finite_table"] = "finite_table"
    sources: List[List[float]]
    images: List[List[float]]

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _check_pairs(self):
        if not self.sources or len(self.sources) != len(self.images):
            raise ValueError("finite_table requires matching, nonempty source and image lists")
        return self


class ClosureRule(BaseModel):
    """User-supplied rule.

    ``fn`` receives a 2-D array whose rows are points and returns the images
    row by row. It is never serialized; only ``label`` appears in reports.
    """

    kind: Literal["closure"] = "closure"
    label: str = "user"
    fn: Callable[[np.ndarray], np.ndarray] = Field(..., exclude=True)

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class AveragedRule(BaseModel):
    """x -> (1 - gamma) x + gamma T x for the wrapped mapping T."""

    kind: Literal["averaged"] = "averaged"
    base: "MappingSpec"
    gamma: float

    class Config:
        frozen = True


class RescaledRule(BaseModel):
    """y -> (1/r) T(r y) for the wrapped mapping T."""

    kind: Literal["rescaled"] = "rescaled"
    base: "MappingSpec"
    r: float

    class Config:
        frozen = True


MappingRule = Annotated[
    Union[AffineRule, ThresholdRule, ShiftRule, TableRule, ClosureRule, AveragedRule, RescaledRule],
    Field(discriminator="kind"),
]


class MappingSpec(BaseModel):
    """A named self-map of a convex body."""

    name: str = Field(..., description="Mapping identifier")
    body: ConvexBody
    rule: MappingRule

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "name": "interval_threshold",
                "body": {
                    "kind": "box",
                    "space": {"kind": "p_norm", "p": 2.0, "dimension": 1},
                    "lower": [0.0],
                    "upper": [3.0],
                },
                "rule": {"kind": "interval_threshold", "value": [0.0], "point": [3.0], "jump": [1.0]},
            }
        }


AveragedRule.model_rebuild()
RescaledRule.model_rebuild()
MappingSpec.model_rebuild()


class Violation(BaseModel):
    """A pair whose implication failed, with the two sides of the failed inequality."""

    x: List[float]
    y: List[float]
    lhs: float
    rhs: float


class GridRegion(BaseModel):
    """Bounding box of a checked point grid."""

    lower: List[float]
    upper: List[float]


class ConditionReport(BaseModel):
    """Outcome of a grid check of nonexpansiveness, (C), (C_lambda) or an (L) witness.

    ``no_violation_found`` is evidence at ``grid_resolution``, never a proof.
    """

    condition: Literal["nonexpansive", "C", "C_lambda", "L_witness"]
    map_name: str
    lam: Optional[float] = Field(None, alias="lambda", description="lambda of (C_lambda)")
    grid_resolution: float = Field(..., description="Grid spacing the check ran at")
    pairs_checked: int
    violations: List[Violation] = Field(default_factory=list)
    verdict: Literal["no_violation_found", "violated"]
    region: Optional[GridRegion] = None

    class Config:
        frozen = True
        populate_by_name = True
        json_schema_extra = {
            "example": {
                "condition": "C",
                "map_name": "interval_threshold",
                "lambda": 0.5,
                "grid_resolution": 0.005,
                "pairs_checked": 361201,
                "violations": [],
                "verdict": "no_violation_found",
                "region": {"lower": [0.0], "upper": [3.0]},
            }
        }

    @model_validator(mode="after")
    def _verdict_matches(self):
        if (self.verdict == "violated") != bool(self.violations):
            raise ValueError("verdict must be 'violated' exactly when violations are recorded")
        return self


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


class OrbitTrace(BaseModel):
    """Iterates x_i = T_gamma^i x0 with their residuals. Immutable after construction.

    ``residuals[i] = ||x_{i+1} - x_i||`` (length ``steps``) and
    ``t_residuals[i] = ||T x_i - x_i||`` (length ``steps + 1``).
    """

    map_name: str
    space: SpaceDescriptor
    gamma: float
    x0: Vector
    iterates: np.ndarray
    residuals: np.ndarray
    t_residuals: np.ndarray

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    @field_validator("iterates", "residuals", "t_residuals", mode="before")
    @classmethod
    def _freeze_arrays(cls, value):
        return _readonly(value)

    @model_validator(mode="after")
    def _check_lengths(self):
        steps = self.iterates.shape[0] - 1
        if self.residuals.shape != (steps,) or self.t_residuals.shape != (steps + 1,):
            raise ValueError("residual lists are inconsistent with the number of iterates")
        return self

    @field_serializer("iterates", "residuals", "t_residuals")
    def _arrays_to_lists(self, value: np.ndarray):
        return value.tolist()

    @property
    def steps(self) -> int:
        return self.iterates.shape[0] - 1

    def iterate(self, i: int) -> Vector:
        return Vector.of(self.iterates[i], self.space)


class ARBound(BaseModel):
    """Constants of the uniform asymptotic-regularity bound."""

    delta: float
    gamma: float
    M: int = Field(..., ge=1)
    L: int = Field(..., ge=1)
    n0: int = Field(..., ge=0)

    class Config:
        frozen = True
        json_schema_extra = {"example": {"delta": 0.5, "gamma": 0.5, "M": 5, "L": 64, "n0": 321}}


class MonotonicityReport(BaseModel):
    """Result of checking that orbit residuals never increase."""

    map_name: str
    gamma: float
    attested_lambda: float
    checked: int
    monotone: bool
    first_failure: Optional[int] = None
    max_increase: float = 0.0


class ResidualProbe(BaseModel):
    """Residual of one orbit at a target step."""

    x0: List[float]
    target_step: int
    step_reached: int
    residual: float
    mode: Literal["direct", "fixed_point", "monotone_bound", "uncertified"]
    # residuals never increased up to step_reached
    monotone: bool = True


class SoundnessReport(BaseModel):
    """Empirical check that residuals at step n0 fall below delta * diam."""

    map_name: str
    gamma: float
    delta: float
    n0: int
    diameter: float
    threshold: float
    starts: int
    worst_residual: float
    failures: List[ResidualProbe] = Field(default_factory=list)
    modes: Dict[str, int] = Field(default_factory=dict)
    verdict: Literal["pass", "fail"]


class BlockSequenceModel(BaseModel):
    """Disjointly supported block sequence (y_n) of constant norm c plus a disjoint anchor x.

    Only the norms matter for limit computations, so the anchor is carried by
    its norm.
    """

    norm_kind: NormKind
    block_norm: float = Field(..., ge=0, description="c = ||y_n||")
    anchor_norm: float = Field(1.0, ge=0, description="||x||")

    class Config:
        frozen = True

    @model_validator(mode="after")
    def _no_schur_space(self):
        if self.norm_kind.kind == "p_norm" and self.norm_kind.p == 1:
            raise ValueError("l1 has the Schur property: it carries no weakly null sphere sequences")
        return self

    @property
    def separation(self) -> float:
        """D[(y_n)] = lim ||y_n - y_m|| for distinct disjoint blocks."""
        if self.norm_kind.kind == "sup_norm":
            return self.block_norm
        return 2.0 ** (1.0 / self.norm_kind.p) * self.block_norm

    @property
    def in_unit_ball(self) -> bool:
        return self.block_norm <= 1.0

    @property
    def admissible(self) -> bool:
        """Membership of (y_n) in the class M_X: inside B_X with D[(y_n)] <= 1."""
        return self.in_unit_ball and self.separation <= 1.0 + 1e-12


class ModulusEstimate(BaseModel):
    """Model-scale value of a geometric modulus."""

    modulus: Literal["d", "b", "b1", "R", "M", "RW", "MW", "J"]
    args: Dict[str, Any] = Field(default_factory=dict)
    value: Optional[float] = None
    bound_direction: Literal["lower_bound_of_sup", "upper_bound_of_inf", "exact_for_model"]
    witness: Dict[str, Any] = Field(default_factory=dict)
    verdict: Literal["estimated", "schur_property"] = "estimated"
    method: Literal["closed_form", "optimizer", "search"] = "closed_form"

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "modulus": "R",
                "args": {"norm": "l2", "a": 1.0},
                "value": 1.224744871391589,
                "bound_direction": "exact_for_model",
                "witness": {"anchor_norm": 1.0, "block_norm": 0.7071067811865476},
                "verdict": "estimated",
                "method": "closed_form",
            }
        }


class NuncReport(BaseModel):
    """Search for a t satisfying d(eps, x) >= t or b(t, x) <= eps t."""

    norm: str
    eps: float
    satisfied: bool
    t: Optional[float] = None
    branch: Optional[Literal["d", "b", "schur"]] = None
    evidence: Literal["exact_for_model", "model_scale_only", "schur_property"]
    tried: int


class FixedPointProfile(BaseModel):
    """Every fixed-point criterion of a modeled space at estimator scale."""

    norm: str
    dimension: int
    schur: bool
    james: ModulusEstimate
    uniformly_nonsquare: bool
    m_coefficient: Optional[ModulusEstimate] = None
    mw_coefficient: Optional[ModulusEstimate] = None
    m_exceeds_one: Optional[bool] = None
    mw_exceeds_one: Optional[bool] = None
    m_dominates_mw: Optional[bool] = None
    corollary_epsilon: Optional[float] = None
    b1_bound_holds: Optional[bool] = None
    evidence: str


class LedgerViolation(BaseModel):
    """A sample point at which a clause of an entailment failed."""

    point: Dict[str, Any]
    clause: str
    lhs: float
    rhs: float


class EntailmentReport(BaseModel):
    """Outcome of checking an arithmetic implication on one point or a sampled region."""

    name: str
    region: Dict[str, Any] = Field(default_factory=dict)
    samples: int = Field(..., ge=0)
    premise_hits: int = Field(..., ge=0)
    violations: List[LedgerViolation] = Field(default_factory=list)
    verdict: Literal["holds_on_samples", "violated", "premise_never_satisfied"]
    degenerate: bool = False
    details: Dict[str, Any] = Field(default_factory=dict)

    class Config:
        frozen = True
        json_schema_extra = {
            "example": {
                "name": "thm21",
                "region": {"delta": [0.01, 0.99], "gamma": [0.01, 0.99]},
                "samples": 10000,
                "premise_hits": 10000,
                "violations": [],
                "verdict": "holds_on_samples",
                "degenerate": False,
                "details": {},
            }
        }

    @model_validator(mode="after")
    def _consistent(self):
        if self.premise_hits > self.samples:
            raise ValueError("premise_hits cannot exceed samples")
        if (self.verdict == "violated") != bool(self.violations):
            raise ValueError("verdict must be 'violated' exactly when violations are recorded")
        return self


class CoefficientEquivalence(BaseModel):
    """Estimator-level agreement of: some a > 0 with R(a) < 1 + a, every a > 0, and M > 1."""

    norm: str
    grid_size: int
    exists_gap: bool
    all_gap: bool
    m_exceeds_one: bool
    agree: bool


class CrossCheck(BaseModel):
    """Two independent evaluations of one quantity and their distance."""

    name: str
    args: Dict[str, Any] = Field(default_factory=dict)
    direct: float
    indirect: float
    deviation: float
