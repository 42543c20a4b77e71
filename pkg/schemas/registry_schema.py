# registry_schema.py
from fractions import Fraction
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.models import ForbiddenKind

RationalText = Union[int, str]


def parse_rational(value: RationalText) -> Fraction:
    """Integers or "a/b" strings; anything else is rejected."""
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational: {value!r}") from e


def render_rational(value: Fraction) -> RationalText:
    """Integers stay bare, everything else becomes "a/b" in lowest terms."""
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


class _RegistryModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DeltaEntry(_RegistryModel):
    p: int = Field(..., ge=1)
    q: int = Field(..., ge=1)
    delta: RationalText
    provenance: str = Field(..., min_length=1)

    @field_validator("delta")
    @classmethod
    def _rational(cls, value: RationalText) -> RationalText:
        parse_rational(value)
        return value


class Gamma4Entry(_RegistryModel):
    p: int = Field(..., ge=1)
    q: int = Field(..., ge=1)
    gamma4_upper: int = Field(..., ge=1)
    provenance: str = Field(..., min_length=1)


class PointEntry(_RegistryModel):
    e: int
    h: int = Field(..., ge=1)


class ForbiddenEntry(_RegistryModel):
    kind: ForbiddenKind
    h: int = Field(..., ge=1)
    e: Optional[int] = None
    provenance: str = Field(..., min_length=1)

    @model_validator(mode="after")
    def _point_needs_e(self) -> "ForbiddenEntry":
        if self.kind is ForbiddenKind.POINT and self.e is None:
            raise ValueError("point facts need an 'e' coordinate")
        return self


class NamedEntry(_RegistryModel):
    name: str = Field(..., pattern=r"^[A-Za-z0-9_]*[A-Za-z_][A-Za-z0-9_]*$")
    sigma: int
    upsilon1: RationalText
    arf: int = Field(..., ge=0, le=1)
    det: int = Field(..., ge=1)
    delta: Optional[RationalText] = None
    g4_upper: int = Field(..., ge=0)
    gamma4_exact: Optional[int] = Field(default=None, ge=1)
    apexes: List[PointEntry] = Field(default_factory=list)
    forbidden: List[ForbiddenEntry] = Field(default_factory=list)
    provenance: str = "registry"

    @field_validator("upsilon1", "delta")
    @classmethod
    def _rational(cls, value: Optional[RationalText]) -> Optional[RationalText]:
        if value is not None:
            parse_rational(value)
        return value


class RegistryFile(_RegistryModel):
    delta: List[DeltaEntry] = Field(default_factory=list)
    gamma4: List[Gamma4Entry] = Field(default_factory=list)
    named: List[NamedEntry] = Field(default_factory=list)
