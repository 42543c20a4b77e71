# report_schema.py
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from models.models import Arm, ForbiddenKind, Status
from schemas.registry_schema import RationalText


class _DocumentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ==========================
# ✅ Building blocks
# ==========================
class PointDoc(_DocumentModel):
    e: int
    h: int


class PointRecord(_DocumentModel):
    e: int
    h: int
    status: Status
    certificate: Optional[str] = None


class ApexDoc(_DocumentModel):
    e: int
    h: int
    certificate: str


class DeltaLineDoc(_DocumentModel):
    arm: Arm
    offset: int


class ForbiddenDoc(_DocumentModel):
    kind: ForbiddenKind
    h: int
    e: Optional[int] = None
    provenance: str


class RayDoc(_DocumentModel):
    start: PointDoc
    direction: Tuple[int, int]


# ==========================
# ✅ Sections
# ==========================
class InvariantsDoc(_DocumentModel):
    sigma: int
    upsilon1: RationalText
    arf: int = Field(..., ge=0, le=1)
    det: int
    delta: Optional[RationalText] = None
    g4_upper: int
    gamma4_upper: int
    extrapolated: bool = False


class Gamma4Doc(_DocumentModel):
    lower: int
    upper: int
    lower_certificate: str
    upper_certificate: str


class BoxDoc(_DocumentModel):
    e_min: int
    e_max: int
    h_max: int


class SummaryDoc(_DocumentModel):
    apexes: List[ApexDoc]
    r1_center: RationalText
    r2_center: RationalText
    delta_line: Optional[DeltaLineDoc] = None
    klein_points: List[PointRecord] = Field(default_factory=list)
    forbidden: List[ForbiddenDoc] = Field(default_factory=list)
    unknown_rays: List[RayDoc] = Field(default_factory=list)
    unknown_points: List[PointDoc] = Field(default_factory=list)
    unknown_finite_count: int = 0
    unknown_truncated: bool = False
    sweep_h_max: int = 0


class MetaDoc(_DocumentModel):
    engine_version: str
    registry_hash: str
    flags: Dict[str, bool]
    extrapolated: bool = False


class ReportDocument(_DocumentModel):
    """The JSON interchange document; `points` covers the box, `summary` the whole plane."""

    knot: str
    invariants: InvariantsDoc
    gamma4: Gamma4Doc
    box: BoxDoc
    points: List[PointRecord]
    unknown: List[PointDoc]
    summary: SummaryDoc
    meta: MetaDoc
