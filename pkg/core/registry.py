# ============================================================
# core/registry.py: delta / gamma4 / named-knot registry
# ============================================================
import hashlib
import json
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from loguru import logger
from pydantic import ValidationError

from core.config import settings
from core.exceptions import KnotGeoError, RegistryError, UnknownKnotError
from models.models import (
    ForbiddenFact,
    ForbiddenKind,
    FrozenModel,
    LatticePoint,
    NamedFacts,
    TorusKnot,
)
from schemas.registry_schema import NamedEntry, RegistryFile, parse_rational

TorusKey = Tuple[int, int]


class KnotRegistry(FrozenModel):
    """Immutable lookup tables built from one (possibly merged) registry file."""

    delta: Dict[TorusKey, Tuple[Fraction, str]] = {}
    gamma4: Dict[TorusKey, Tuple[int, str]] = {}
    named: Dict[str, NamedFacts] = {}
    digest: str = ""

    def has_named(self, name: str) -> bool:
        return name in self.named

    def named_facts(self, name: str) -> NamedFacts:
        try:
            return self.named[name]
        except KeyError:
            raise UnknownKnotError(f"unknown knot '{name}' (not in the registry)") from None

    def delta_for(self, knot: TorusKnot) -> Optional[Fraction]:
        found = self.delta.get(_key(knot))
        return None if found is None else found[0]

    def gamma4_for(self, knot: TorusKnot) -> Optional[int]:
        found = self.gamma4.get(_key(knot))
        return None if found is None else found[0]


def _key(knot: TorusKnot) -> TorusKey:
    knot = knot.normalized()
    return (knot.p, knot.q)


# ============================================================
# ✅ File loading
# ============================================================
def read_registry_file(path: Union[str, Path]) -> RegistryFile:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise RegistryError(f"registry file not found: {path}") from None
    except (OSError, json.JSONDecodeError) as e:
        raise RegistryError(f"cannot read registry {path}: {e}") from None
    try:
        return RegistryFile.model_validate(raw)
    except ValidationError as e:
        raise RegistryError(f"invalid registry {path}: {e.error_count()} error(s): {e.errors()[0]['msg']}") from None


def merge_registry_files(base: RegistryFile, user: RegistryFile) -> RegistryFile:
    """User entries replace base entries with the same key."""

    def torus_key(entry) -> TorusKey:
        return (min(entry.p, entry.q), max(entry.p, entry.q))

    def merge(section: str, base_entries, user_entries, key):
        merged = {key(entry): entry for entry in base_entries}
        for entry in user_entries:
            k = key(entry)
            if k in merged and merged[k] != entry:
                logger.warning(f"⚠️ Registry entry overrides the shipped {section} entry for {k}")
            merged[k] = entry
        return [merged[k] for k in sorted(merged, key=str)]

    return RegistryFile(
        delta=merge("delta", base.delta, user.delta, torus_key),
        gamma4=merge("gamma4", base.gamma4, user.gamma4, torus_key),
        named=merge("named", base.named, user.named, lambda entry: entry.name),
    )


def registry_digest(document: RegistryFile) -> str:
    canonical = json.dumps(document.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ============================================================
# ✅ Validation and construction
# ============================================================
def _torus(p: int, q: int, section: str) -> TorusKnot:
    try:
        knot = TorusKnot(p=p, q=q).normalized()
    except KnotGeoError as e:
        raise RegistryError(f"{section} entry T({p},{q}): {e.detail}") from None
    except ValidationError as e:
        raise RegistryError(f"{section} entry T({p},{q}): {e.errors()[0]['msg']}") from None
    if knot.is_unknot:
        raise RegistryError(f"{section} entry T({p},{q}) is the unknot")
    return knot


def _named_facts(entry: NamedEntry) -> NamedFacts:
    if entry.name == "U":
        raise RegistryError("'U' is reserved for the unknot")

    sigma, upsilon1 = entry.sigma, parse_rational(entry.upsilon1)
    problems = []
    if sigma % 2:
        problems.append(f"sigma={sigma} is odd")
    if entry.det % 2 == 0:
        problems.append(f"det={entry.det} is even")
    elif entry.arf != (0 if entry.det % 8 in (1, 7) else 1):
        problems.append(f"arf={entry.arf} disagrees with det={entry.det} mod 8")
    gamma4_cap = 2 * entry.g4_upper + 1
    if entry.gamma4_exact is not None and entry.gamma4_exact > gamma4_cap:
        problems.append(f"gamma4_exact={entry.gamma4_exact} exceeds 2*g4_upper+1={gamma4_cap}")
    if abs(upsilon1 - Fraction(sigma, 2)) > gamma4_cap:
        problems.append("|upsilon1 - sigma/2| exceeds 2*g4_upper+1")
    for apex in entry.apexes:
        e, h = apex.e, apex.h
        if (e - 2 * h) % 4:
            problems.append(f"apex ({e},{h}) violates e = 2h mod 4")
        elif abs(sigma - Fraction(e, 2)) > h or abs(-2 * upsilon1 + Fraction(e, 2)) > h:
            problems.append(f"apex ({e},{h}) lies outside the signature/upsilon wedges")
    for fact in entry.forbidden:
        if fact.kind is ForbiddenKind.POINT and (fact.e - 2 * fact.h) % 4:
            problems.append(f"forbidden point ({fact.e},{fact.h}) violates e = 2h mod 4")
    if problems:
        raise RegistryError(f"named knot '{entry.name}': " + "; ".join(problems))

    return NamedFacts(
        name=entry.name,
        sigma=sigma,
        upsilon1=upsilon1,
        arf=entry.arf,
        det=entry.det,
        delta=None if entry.delta is None else parse_rational(entry.delta),
        g4_upper=entry.g4_upper,
        gamma4_exact=entry.gamma4_exact,
        apexes=tuple(LatticePoint(e=a.e, h=a.h) for a in entry.apexes),
        forbidden=tuple(
            ForbiddenFact(kind=f.kind, h=f.h, e=f.e, provenance=f.provenance) for f in entry.forbidden
        ),
        provenance=entry.provenance,
    )


def build_registry(document: RegistryFile) -> KnotRegistry:
    delta = {}
    for entry in document.delta:
        delta[_key(_torus(entry.p, entry.q, "delta"))] = (parse_rational(entry.delta), entry.provenance)
    gamma4 = {}
    for entry in document.gamma4:
        gamma4[_key(_torus(entry.p, entry.q, "gamma4"))] = (entry.gamma4_upper, entry.provenance)
    named = {entry.name: _named_facts(entry) for entry in document.named}
    return KnotRegistry(delta=delta, gamma4=gamma4, named=named, digest=registry_digest(document))


# ============================================================
# ✅ Cached loader (shipped registry, optionally merged)
# ============================================================
@lru_cache(maxsize=8)
def _load(user_path: Optional[str]) -> KnotRegistry:
    document = read_registry_file(settings.DEFAULT_REGISTRY_PATH)
    if user_path:
        document = merge_registry_files(document, read_registry_file(user_path))
        logger.info(f"📚 Registry merged with {user_path}")
    registry = build_registry(document)
    logger.debug(
        f"📚 Registry loaded: {len(registry.delta)} delta, {len(registry.gamma4)} gamma4, "
        f"{len(registry.named)} named ({registry.digest[:15]})"
    )
    return registry


def get_registry(path: Optional[Union[str, Path]] = None) -> KnotRegistry:
    """Shipped registry merged with `path`, or with KNOTGEO_REGISTRY when no path is given."""
    user_path = path if path is not None else settings.REGISTRY
    return _load(str(user_path) if user_path else None)
