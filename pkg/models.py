"""
Configuration and report models.
Run configurations are parsed from JSON into RunConfig; every report written
by the CLI is one of the report models below, serialized with sorted keys.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fibers.group import preset

GeneratorKind = Literal[
    "gaussian-rank-one",
    "indicator-rank-one",
    "random",
    "bandlimited-random",
    "file",
    "bspline",
]


# --- Configuration ---

class GeneratorSpec(BaseModel):
    """
    How to build one generator field.

    kind selects the preset; the remaining fields are the preset's parameters.
    support="diagonal" keeps only fiber slots with j_1 == j_2 (r=2 groups).
    """

    model_config = ConfigDict(extra="forbid")

    kind: GeneratorKind
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    center: Optional[List[float]] = None
    width: float = Field(default=0.25, gt=0)
    box_u: Optional[List[List[float]]] = None
    box_v: Optional[List[List[float]]] = None
    path: Optional[str] = None
    order: int = Field(default=2, ge=1)
    support: Literal["box", "diagonal"] = "box"

    @model_validator(mode="after")
    def check_parameters(self):
        if self.kind == "indicator-rank-one" and (self.box_u is None or self.box_v is None):
            raise ValueError("indicator-rank-one needs both box_u and box_v")
        if self.kind == "file" and not self.path:
            raise ValueError("file generator needs a path")
        for box in (self.box_u, self.box_v):
            for interval in box or []:
                if len(interval) != 2 or interval[0] >= interval[1]:
                    raise ValueError(f"Box interval {interval} must be [low, high] with low < high")
        return self


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pf_eps: float = Field(default=1e-9, gt=0)
    rank_rel_tol: float = Field(default=1e-9, gt=0)


class RunConfig(BaseModel):
    """A complete, reproducible run: layout, generators, tolerances and mode"""

    model_config = ConfigDict(extra="forbid")

    group: str
    S: int = Field(ge=2)
    c: int = Field(default=1, ge=1)
    j_half: int = Field(default=1, ge=1)
    gamma1_radius: int = Field(default=1, ge=0)
    generators: List[GeneratorSpec] = Field(min_length=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    mode: Literal["frame", "riesz", "bessel"] = "frame"
    output: Optional[str] = None
    orthonormalize: bool = False

    @field_validator("group")
    @classmethod
    def check_group(cls, value: str) -> str:
        return preset(value).name

    @property
    def q(self) -> int:
        return self.c * self.S


# --- Reports ---

class FiberBounds(BaseModel):
    """Gramian spectrum and fiber bounds at one torus point"""

    sigma: List[float]
    rank: int
    lower: Optional[float] = None
    upper: Optional[float] = None
    eigenvalues: List[float]


class GramianReport(BaseModel):
    group: str
    S: int
    q: int
    j_min: List[int]
    j_max: List[int]
    gamma1_radius: int
    mode: Literal["frame", "riesz", "bessel"]
    pf_eps: float
    rank_rel_tol: float
    lower: Optional[float] = None
    upper: float
    excluded_sigmas: int = 0
    fibers: List[FiberBounds]


class CheckResult(BaseModel):
    """One identity check; serialized with the key "pass" for the verdict"""

    model_config = ConfigDict(populate_by_name=True)

    check: str
    lhs: float
    rhs: float
    rel_err: float
    tolerance: float
    passed: bool = Field(serialization_alias="pass")


class VerifyReport(BaseModel):
    group: str
    S: int
    q: int
    seed: int
    mode: str
    checks: List[CheckResult]
    passed: bool = Field(serialization_alias="pass")

    @property
    def failures(self) -> List[str]:
        return [c.check for c in self.checks if not c.passed]


class DemoReport(BaseModel):
    demo: str
    group: str
    S: int
    q: int
    checks: List[CheckResult]
    passed: bool = Field(serialization_alias="pass")


class CoefficientEntry(BaseModel):
    """<phi_a, L_(k,m) phi_b>"""

    a: int
    b: int
    k: List[int]
    m: List[int]
    re: float
    im: float


class CoefficientReport(BaseModel):
    group: str
    S: int
    q: int
    gamma1_radius: int
    coefficients: List[CoefficientEntry]
