# models/models.py
from __future__ import annotations

from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Iterator, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import settings
from core.exceptions import InvalidKnotError


# ============================================================
# ENUMS
# ============================================================
class Status(str, Enum):
    REALIZABLE = "realizable"
    NOT_REALIZABLE = "not_realizable"
    UNKNOWN = "unknown"


class CertificateKind(str, Enum):
    # constructions
    MOEBIUS_CONSTRUCTION = "moebius_construction"
    GENUS_CONSTRUCTION = "genus_construction"
    CROSSCAP_SUM = "crosscap_sum"
    SUMMAND_COMBINATION = "summand_combination"
    REGISTRY_APEX = "registry_apex"
    # obstructions
    PARITY_VIOLATION = "parity_violation"
    SIGNATURE_WEDGE = "signature_wedge"
    UPSILON_WEDGE = "upsilon_wedge"
    KLEIN_ARF = "klein_arf"
    DELTA_LINE = "delta_line"
    DOWNWARD_PROPAGATION = "downward_propagation"
    REGISTRY_FORBIDDEN = "registry_forbidden"


# obstructions drawn as 'x' rather than '.'
SPECIAL_OBSTRUCTIONS = frozenset(
    {
        CertificateKind.KLEIN_ARF,
        CertificateKind.DELTA_LINE,
        CertificateKind.DOWNWARD_PROPAGATION,
        CertificateKind.REGISTRY_FORBIDDEN,
    }
)


class Definiteness(str, Enum):
    NEGATIVE_DEFINITE = "negative-definite"
    POSITIVE_DEFINITE = "positive-definite"
    INDEFINITE = "indefinite"

    def reflect(self) -> "Definiteness":
        if self is Definiteness.NEGATIVE_DEFINITE:
            return Definiteness.POSITIVE_DEFINITE
        if self is Definiteness.POSITIVE_DEFINITE:
            return Definiteness.NEGATIVE_DEFINITE
        return self


class Arm(str, Enum):
    RIGHT = "right"  # h = e/2 - offset
    LEFT = "left"  # h = -e/2 + offset

    def reflect(self) -> "Arm":
        return Arm.LEFT if self is Arm.RIGHT else Arm.RIGHT


class ForbiddenKind(str, Enum):
    H_LEVEL = "h_level"
    POINT = "point"


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ============================================================
# KNOT EXPRESSIONS
# ============================================================
class TorusKnot(FrozenModel):
    p: int
    q: int

    @model_validator(mode="after")
    def _check_indices(self) -> "TorusKnot":
        if self.p < 1 or self.q < 1:
            raise InvalidKnotError(f"T({self.p},{self.q}): torus indices must be >= 1")
        if self.p > settings.MAX_TORUS_INDEX or self.q > settings.MAX_TORUS_INDEX:
            raise InvalidKnotError(
                f"T({self.p},{self.q}): torus indices are limited to {settings.MAX_TORUS_INDEX}"
            )
        if gcd(self.p, self.q) != 1:
            raise InvalidKnotError(f"T({self.p},{self.q}): gcd({self.p},{self.q}) != 1")
        return self

    @property
    def is_unknot(self) -> bool:
        return min(self.p, self.q) == 1

    def normalized(self) -> "TorusKnot":
        if self.p <= self.q:
            return self
        return TorusKnot(p=self.q, q=self.p)

    def sort_key(self) -> tuple:
        return (0, self.p, self.q, "")

    def __str__(self) -> str:
        return f"T({self.p},{self.q})"


UNKNOT_NAME = "U"


class NamedKnot(FrozenModel):
    name: str = Field(..., min_length=1)

    @property
    def is_unknot(self) -> bool:
        return self.name == UNKNOT_NAME

    def sort_key(self) -> tuple:
        return (1, 0, 0, self.name)

    def __str__(self) -> str:
        return self.name


KnotBase = Union[TorusKnot, NamedKnot]


class Term(FrozenModel):
    coefficient: int
    base: KnotBase

    @model_validator(mode="after")
    def _check_coefficient(self) -> "Term":
        if abs(self.coefficient) > settings.MAX_COEFFICIENT:
            raise InvalidKnotError(
                f"coefficient {self.coefficient} exceeds the bound {settings.MAX_COEFFICIENT}"
            )
        return self


class KnotExpr(FrozenModel):
    """Formal connected sum; the empty sum is the unknot."""

    terms: Tuple[Term, ...] = ()

    @property
    def is_unknot(self) -> bool:
        return not self.terms

    @property
    def single_term(self) -> Optional[Term]:
        """The lone term of a one-term expression with coefficient +-1."""
        if len(self.terms) == 1 and abs(self.terms[0].coefficient) == 1:
            return self.terms[0]
        return None

    def total_copies(self) -> int:
        return sum(abs(term.coefficient) for term in self.terms)


# ============================================================
# (e,h)-PLANE PRIMITIVES
# ============================================================
class LatticePoint(FrozenModel):
    e: int
    h: int = Field(..., ge=1)

    @property
    def parity_valid(self) -> bool:
        return (self.e - 2 * self.h) % 4 == 0

    # u = h - e/2 and v = h + e/2 turn wedges into quadrants
    @property
    def u(self) -> Fraction:
        return Fraction(2 * self.h - self.e, 2)

    @property
    def v(self) -> Fraction:
        return Fraction(2 * self.h + self.e, 2)

    def reflect(self) -> "LatticePoint":
        return LatticePoint(e=-self.e, h=self.h)

    def sort_key(self) -> tuple:
        return (self.h, self.e)

    def __str__(self) -> str:
        return f"({self.e},{self.h})"


def point_from_uv(u: int, v: int) -> LatticePoint:
    return LatticePoint(e=v - u, h=(u + v) // 2)


class Wedge(FrozenModel):
    """The region {(e,h) : |center - e|/2 + base <= h}."""

    center: Fraction
    base: Fraction

    @classmethod
    def at(cls, point: LatticePoint) -> "Wedge":
        return cls(center=Fraction(point.e), base=Fraction(point.h))

    def contains(self, e: int, h: int) -> bool:
        return abs(self.center - e) / 2 + self.base <= h

    def contains_point(self, point: LatticePoint) -> bool:
        return self.contains(point.e, point.h)

    @property
    def u_min(self) -> Fraction:
        return self.base - self.center / 2

    @property
    def v_min(self) -> Fraction:
        return self.base + self.center / 2

    def reflect(self) -> "Wedge":
        return Wedge(center=-self.center, base=self.base)


class Certificate(FrozenModel):
    kind: CertificateKind
    e0: Optional[int] = None
    parents: Tuple[LatticePoint, ...] = ()
    provenance: Optional[str] = None
    definiteness: Optional[Definiteness] = None
    residue: Optional[int] = None
    root: Optional[CertificateKind] = None
    arm: Optional[Arm] = None

    def describe(self) -> str:
        """Compact, deterministic one-line rendering used by every emitter."""
        kind = self.kind.value
        if self.kind is CertificateKind.MOEBIUS_CONSTRUCTION:
            return f"{kind}(e0={self.e0})"
        if self.kind in (CertificateKind.CROSSCAP_SUM, CertificateKind.SUMMAND_COMBINATION):
            return f"{kind}({'+'.join(str(p) for p in self.parents)})"
        if self.kind in (CertificateKind.REGISTRY_APEX, CertificateKind.REGISTRY_FORBIDDEN):
            return f"{kind}({self.provenance})"
        if self.kind is CertificateKind.KLEIN_ARF:
            return f"{kind}({self.definiteness.value}; sigma+4arf={self.residue} mod 8)"
        if self.kind is CertificateKind.DELTA_LINE:
            return f"{kind}({self.arm.value} arm)"
        if self.kind is CertificateKind.DOWNWARD_PROPAGATION:
            return f"{kind}(from {self.parents[0]}: {self.root.value})"
        return kind

    def reflect(self) -> "Certificate":
        return self.model_copy(
            update={
                "e0": None if self.e0 is None else -self.e0,
                "parents": tuple(p.reflect() for p in self.parents),
                "definiteness": None if self.definiteness is None else self.definiteness.reflect(),
                "residue": None if self.residue is None else (-self.residue) % 8,
                "arm": None if self.arm is None else self.arm.reflect(),
            }
        )


class Apex(FrozenModel):
    point: LatticePoint
    certificate: Certificate

    @property
    def wedge(self) -> Wedge:
        return Wedge.at(self.point)

    def reflect(self) -> "Apex":
        return Apex(point=self.point.reflect(), certificate=self.certificate.reflect())


class Verdict(FrozenModel):
    point: LatticePoint
    status: Status
    certificate: Optional[Certificate] = None

    def reflect(self) -> "Verdict":
        return Verdict(
            point=self.point.reflect(),
            status=self.status,
            certificate=None if self.certificate is None else self.certificate.reflect(),
        )


class DefinitenessInfo(FrozenModel):
    cover_signature: int
    cover_b2: int
    # half-integers off the parity lattice
    b_plus: Fraction
    b_minus: Fraction
    definiteness: Definiteness


class ForbiddenFact(FrozenModel):
    kind: ForbiddenKind
    h: int = Field(..., ge=1)
    e: Optional[int] = None
    provenance: str

    def forbids(self, point: LatticePoint) -> bool:
        if self.kind is ForbiddenKind.H_LEVEL:
            return point.h == self.h
        return point.e == self.e and point.h == self.h

    def reflect(self) -> "ForbiddenFact":
        if self.e is None:
            return self
        return self.model_copy(update={"e": -self.e})


class NamedFacts(FrozenModel):
    """Registry record of a named knot."""

    name: str
    sigma: int
    upsilon1: Fraction
    arf: int
    det: int
    delta: Optional[Fraction] = None
    g4_upper: int
    gamma4_exact: Optional[int] = None
    apexes: Tuple[LatticePoint, ...] = ()
    forbidden: Tuple[ForbiddenFact, ...] = ()
    provenance: str = "registry"


class EngineFlags(FrozenModel):
    mirror_delta: bool = Field(default_factory=lambda: settings.MIRROR_DELTA)
    allow_extrapolated_upsilon: bool = Field(
        default_factory=lambda: settings.ALLOW_EXTRAPOLATED_UPSILON
    )


# ============================================================
# INVARIANTS
# ============================================================
class LaurentPolynomial(FrozenModel):
    """Integer Laurent polynomial stored as (exponent, coefficient) pairs, exponents ascending."""

    terms: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def from_mapping(cls, coefficients: dict) -> "LaurentPolynomial":
        return cls(terms=tuple(sorted((k, c) for k, c in coefficients.items() if c != 0)))

    def coefficient(self, exponent: int) -> int:
        return dict(self.terms).get(exponent, 0)

    def degree_span(self) -> Tuple[int, int]:
        if not self.terms:
            return (0, 0)
        return (self.terms[0][0], self.terms[-1][0])

    @property
    def is_symmetric(self) -> bool:
        mapping = dict(self.terms)
        return all(mapping.get(-k) == c for k, c in mapping.items())

    def evaluate(self, t: Union[int, Fraction]) -> Fraction:
        t = Fraction(t)
        return sum((c * t**k for k, c in self.terms), Fraction(0))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.terms:
            monomial = "1" if k == 0 else ("t" if k == 1 else f"t^{k}")
            magnitude = abs(c)
            body = monomial if magnitude == 1 and k != 0 else (
                str(magnitude) if k == 0 else f"{magnitude}*{monomial}"
            )
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {body}" if parts else (f"-{body}" if c < 0 else body))
        return " ".join(parts)


class InvariantBundle(FrozenModel):
    knot: KnotExpr
    sigma: int
    upsilon1: Fraction
    arf: int
    det: int
    delta: Optional[Fraction] = None
    g4_upper: int
    gamma4_upper: int
    gamma4_upper_certificate: str
    gamma4_exact: Optional[int] = None
    apexes: Tuple[Apex, ...] = ()
    forbidden_facts: Tuple[ForbiddenFact, ...] = ()
    extrapolated: bool = False


# ============================================================
# GEOGRAPHY REPORT
# ============================================================
class Box(FrozenModel):
    e_min: int
    e_max: int
    h_max: int

    @property
    def is_empty(self) -> bool:
        return self.e_min > self.e_max or self.h_max < 1

    @property
    def size(self) -> int:
        if self.is_empty:
            return 0
        return (self.e_max - self.e_min + 1) * self.h_max

    @property
    def parity_count(self) -> int:
        """Number of points with e = 2h mod 4, without enumerating them."""
        if self.is_empty:
            return 0
        total = 0
        for residue, rows in ((2, (self.h_max + 1) // 2), (0, self.h_max // 2)):
            columns = (self.e_max - residue) // 4 - (self.e_min - 1 - residue) // 4
            total += columns * rows
        return total

    def parity_points(self) -> Iterator[LatticePoint]:
        """Parity-valid points, ordered by h then e."""
        if self.is_empty:
            return
        for h in range(1, self.h_max + 1):
            start = self.e_min + (2 * h - self.e_min) % 4
            for e in range(start, self.e_max + 1, 4):
                yield LatticePoint(e=e, h=h)

    def contains(self, point: LatticePoint) -> bool:
        return self.e_min <= point.e <= self.e_max and point.h <= self.h_max

    def reflect(self) -> "Box":
        return Box(e_min=-self.e_max, e_max=-self.e_min, h_max=self.h_max)


class DeltaLine(FrozenModel):
    arm: Arm
    offset: int

    def contains(self, point: LatticePoint) -> bool:
        if self.arm is Arm.RIGHT:
            return 2 * point.h == point.e - 2 * self.offset
        return 2 * point.h == -point.e + 2 * self.offset

    def reflect(self) -> "DeltaLine":
        return DeltaLine(arm=self.arm.reflect(), offset=-self.offset)


class Ray(FrozenModel):
    start: LatticePoint
    direction: Tuple[int, int]

    def reflect(self) -> "Ray":
        return Ray(start=self.start.reflect(), direction=(-self.direction[0], self.direction[1]))

    def contains(self, point: LatticePoint) -> bool:
        steps = point.h - self.start.h
        return steps >= 0 and point.e == self.start.e + steps * self.direction[0]

    def sort_key(self) -> tuple:
        return (self.start.h, self.start.e, self.direction)


class UnknownSet(FrozenModel):
    """Global unknown set. `truncated` means `points` stops at h <= sweep_h_max while finite_count is exact."""

    points: Tuple[LatticePoint, ...] = ()
    rays: Tuple[Ray, ...] = ()
    finite_count: int = 0
    truncated: bool = False
    sweep_h_max: int = 0

    @property
    def is_empty(self) -> bool:
        return self.finite_count == 0 and not self.rays

    def contains(self, point: LatticePoint) -> bool:
        return point in self.points or any(ray.contains(point) for ray in self.rays)


class Gamma4Bounds(FrozenModel):
    lower: int
    upper: int
    lower_certificate: str
    upper_certificate: str


class GeographyReport(FrozenModel):
    knot: KnotExpr
    realizable: Tuple[Apex, ...]
    r1: Wedge
    r2: Wedge
    delta_line: Optional[DeltaLine] = None
    klein_points: Tuple[Verdict, ...] = ()
    forbidden: Tuple[ForbiddenFact, ...] = ()
    unknown: UnknownSet
    gamma4: Optional[Gamma4Bounds] = None
    parity_class: int = 0
    flags: EngineFlags
    extrapolated: bool = False


class PointDiff(FrozenModel):
    point: LatticePoint
    theorem: Status
    engine: Status


class VerificationRecord(FrozenModel):
    family: int
    n: int
    box: Box
    diff: Tuple[PointDiff, ...]
    literal_diff: Tuple[PointDiff, ...]
    # finite unknowns of the whole graph; box_unknown_count only those inside `box`
    unknown_count: int
    box_unknown_count: int = 0
    expected_unknown_count: Optional[int] = None
    rays: Tuple[Ray, ...] = ()
    expected_rays: Tuple[Ray, ...] = ()

    @property
    def verified(self) -> bool:
        count_ok = self.expected_unknown_count is None or self.unknown_count == self.expected_unknown_count
        return not self.diff and count_ok and self.rays == self.expected_rays
