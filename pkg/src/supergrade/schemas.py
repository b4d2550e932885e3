"""Data models for run configurations and verification reports."""

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

SPEC_VERSION = "1.0"


# ========== Run Configuration ==========

class Command(str, Enum):
    """CLI subcommand a configuration drives."""
    GROUP = "group"
    GRADE = "grade"
    INVOLUTION = "involution"
    ENUMERATE = "enumerate"
    FALSIFY = "falsify"
    VERIFY = "verify"
    STRUCTURE = "structure"


class OutputFormat(str, Enum):
    """Report rendering."""
    TEXT = "text"
    JSON = "json"


class Bounds(BaseModel):
    """Search bounds for enumeration and falsification."""
    max_group_order: int = 16
    max_size: int = 8
    max_candidates: int = 250000

    @field_validator("max_group_order", "max_size", "max_candidates")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("bounds must be positive")
        return value


class RunConfig(BaseModel):
    """A parsed run configuration; every field is optional except the command."""
    command: Command
    group: Optional[str] = None
    sig: Optional[str] = None
    theta: Optional[str] = None
    inv: Optional[str] = None
    p: Optional[str] = None
    q: Optional[str] = None
    h: Optional[str] = None
    elements: Optional[str] = None
    k: Optional[int] = None
    perm: Optional[str] = None
    embedding: Optional[str] = None
    kind: Optional[str] = None
    claim: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    fine_k: Optional[int] = None
    format: OutputFormat = OutputFormat.JSON
    bounds: Bounds = Field(default_factory=Bounds)


# ========== Reports ==========

class Verdict(str, Enum):
    """Outcome of a claim check."""
    PASS = "pass"
    FAIL = "fail"


class EvidenceKind(str, Enum):
    """Whether a verdict is exact or certified only over a finite family."""
    EXACT = "exact"
    BOUNDED = "bounded"


class ClaimResult(BaseModel):
    """What an inner check returns before it is wrapped into a Report."""
    claim: str
    instance: str
    passed: bool
    evidence_kind: EvidenceKind = EvidenceKind.EXACT
    witnesses: list[Any] = Field(default_factory=list)
    details: dict[str, Any] = Field(default_factory=dict)
    family_size: Optional[int] = None

    @property
    def verdict(self) -> Verdict:
        return Verdict.PASS if self.passed else Verdict.FAIL


class Report(BaseModel):
    """A versioned verification report."""
    spec_version: str = SPEC_VERSION
    claim: str
    instance: str
    verdict: Verdict
    evidence_kind: EvidenceKind = EvidenceKind.EXACT
    witnesses: list[Any] = Field(default_factory=list)
    details: dict[str, Any] = Field(default_factory=dict)
    family_size: Optional[int] = None
    timing_ms: Optional[float] = None

    @classmethod
    def from_result(cls, result: ClaimResult, timing_ms: Optional[float] = None) -> "Report":
        return cls(
            claim=result.claim,
            instance=result.instance,
            verdict=result.verdict,
            evidence_kind=result.evidence_kind,
            witnesses=result.witnesses,
            details=result.details,
            family_size=result.family_size,
            timing_ms=timing_ms,
        )

    @model_validator(mode="after")
    def _bounded_needs_family(self) -> "Report":
        if self.evidence_kind == EvidenceKind.BOUNDED and self.family_size is None:
            raise ValueError("bounded-evidence reports must state the searched family size")
        return self
