# ================================================================
# services/invariants.py: sigma, upsilon(1), Alexander, det, Arf, genus bounds, delta
# ================================================================
"""
Every invariant here is additive (sigma, upsilon1, delta), multiplicative
(det, Delta(-1)) or subadditive (g4, gamma4 upper bounds) under connected
sum, so expression-level values are folds over the normalized terms.
All arithmetic is exact: Python integers and fractions.Fraction.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Optional, Tuple

from loguru import logger
from sympy import Poly, symbols

from core.exceptions import ConsistencyError, ExtrapolationError, InvalidKnotError
from core.registry import KnotRegistry, get_registry
from models.models import (
    EngineFlags,
    InvariantBundle,
    KnotExpr,
    LaurentPolynomial,
    NamedKnot,
    TorusKnot,
)
from services.knot_expr import normalize, to_text

_t = symbols("t")

# sigma(T(3,d)) for d = n mod 6
_T3_SIGNATURE_BASE = {1: 0, 2: -2, 4: -6, 5: -8}

# largest a whose base value -floor(a^2/4) is pinned by known torus-knot data
UPSILON_ANCHORED_MAX = 5


def _coprime(p: int, q: int) -> Tuple[int, int]:
    if p < 1 or q < 1 or gcd(p, q) != 1:
        raise InvalidKnotError(f"T({p},{q}): indices must be positive and coprime")
    return (p, q) if p <= q else (q, p)


# ================================================================
#  Alexander polynomial / determinant / Arf
# ================================================================
@lru_cache(maxsize=256)
def alexander_torus(p: int, q: int) -> LaurentPolynomial:
    """(t^pq - 1)(t - 1) / ((t^p - 1)(t^q - 1)), symmetrized and normalized to Delta(1) = +1."""
    p, q = _coprime(p, q)
    numerator = Poly((_t ** (p * q) - 1) * (_t - 1), _t)
    denominator = Poly((_t**p - 1) * (_t**q - 1), _t)
    quotient, remainder = numerator.div(denominator)
    if not remainder.is_zero:
        raise ConsistencyError(f"T({p},{q}): cyclotomic division left a remainder")

    degree = quotient.degree()
    shift = degree // 2
    coefficients = {exponent - shift: int(c) for (exponent,), c in quotient.terms()}
    polynomial = LaurentPolynomial.from_mapping(coefficients)
    if polynomial.evaluate(1) < 0:
        polynomial = LaurentPolynomial.from_mapping({k: -c for k, c in coefficients.items()})
    genus = (p - 1) * (q - 1) // 2
    if not polynomial.is_symmetric or polynomial.degree_span() != (-genus, genus):
        raise ConsistencyError(f"T({p},{q}): Alexander polynomial is not symmetric of span {2 * genus}")
    return polynomial


def alexander_at_minus_one(p: int, q: int) -> int:
    """Signed symmetrized Delta_{T(p,q)}(-1) from the geometric-series factorisation.

    Delta = (1 + t^p + ... + t^{p(q-1)}) / (1 + t + ... + t^{q-1}); at t = -1 the
    unsigned value is q when p is even, p when q is even, and 1 otherwise.
    """
    p, q = _coprime(p, q)
    if p % 2 == 0:
        magnitude = q
    elif q % 2 == 0:
        magnitude = p
    else:
        magnitude = 1
    sign = -1 if ((p - 1) * (q - 1) // 2) % 2 else 1
    return sign * magnitude


def _torus_determinant(knot: TorusKnot) -> int:
    return abs(alexander_at_minus_one(knot.p, knot.q))


def determinant(knot: KnotExpr, registry: Optional[KnotRegistry] = None) -> int:
    registry = registry or get_registry()
    det = 1
    for term in normalize(knot).terms:
        if isinstance(term.base, TorusKnot):
            base_det = _torus_determinant(term.base)
        else:
            base_det = registry.named_facts(term.base.name).det
        det *= base_det ** abs(term.coefficient)
    return det


def arf_from_determinant(det: int) -> int:
    return 0 if det % 8 in (1, 7) else 1


def arf(knot: KnotExpr, registry: Optional[KnotRegistry] = None) -> int:
    """Arf = 0 iff Delta(-1) = +-1 mod 8; the residue class is sign-blind, so |Delta(-1)| suffices."""
    registry = registry or get_registry()
    residue = 1
    for term in normalize(knot).terms:
        if isinstance(term.base, TorusKnot):
            base_det = _torus_determinant(term.base)
        else:
            base_det = registry.named_facts(term.base.name).det
        residue = residue * pow(base_det, abs(term.coefficient), 8) % 8
    return arf_from_determinant(residue)


# ================================================================
#  Signature
# ================================================================
@lru_cache(maxsize=4096)
def signature_torus(p: int, q: int) -> int:
    """Lattice count: sigma = (p-1)(q-1) - 2 * #{(i,j) : 1/2 < i/p + j/q < 3/2}.

    For each i the admissible j form an integer interval, so the count is
    linear in min(p, q). Boundary values 1/2, 1, 3/2 cannot occur for
    coprime indices; hitting one is reported as an internal error.
    """
    p, q = _coprime(p, q)
    scale = 2 * p
    inside = 0
    for i in range(1, p):
        # 1/2 < i/p + j/q < 3/2  <=>  pq - 2iq < 2pj < 3pq - 2iq
        low = p * q - 2 * i * q
        high = 3 * p * q - 2 * i * q
        middle = 2 * p * q - 2 * i * q
        for bound in (low, high, middle):
            if bound % scale == 0 and 1 <= bound // scale <= q - 1:
                raise ConsistencyError(f"T({p},{q}): lattice point on a signature boundary at i={i}")
        j_min = max(1, low // scale + 1)
        j_max = min(q - 1, (high - 1) // scale)
        if j_max >= j_min:
            inside += j_max - j_min + 1
    sigma = (p - 1) * (q - 1) - 2 * inside
    if sigma % 2:
        raise ConsistencyError(f"T({p},{q}): odd signature {sigma}")
    return sigma


def signature_torus_oracle(p: int, q: int) -> int:
    """Closed forms for p in {2, 3}: sigma(T(2,n)) = -(n-1), sigma(T(3,6k+d)) = sigma(T(3,d)) - 8k."""
    p, q = _coprime(p, q)
    if p == 2:
        return -(q - 1)
    if p == 3:
        k, d = divmod(q, 6)
        return _T3_SIGNATURE_BASE[d] - 8 * k
    raise InvalidKnotError(f"T({p},{q}): the closed-form signature covers p in {{2, 3}} only")


def signature(knot: KnotExpr, registry: Optional[KnotRegistry] = None) -> int:
    registry = registry or get_registry()
    total = 0
    for term in normalize(knot).terms:
        if isinstance(term.base, TorusKnot):
            total += term.coefficient * signature_torus(term.base.p, term.base.q)
        else:
            total += term.coefficient * registry.named_facts(term.base.name).sigma
    return total


# ================================================================
#  Upsilon at t = 1
# ================================================================
def upsilon_base(a: int, allow_extrapolated: bool = False) -> Tuple[int, bool]:
    """Upsilon_{T(a,a+1)}(1) = -floor(a^2/4); returns (value, extrapolated)."""
    extrapolated = a > UPSILON_ANCHORED_MAX
    if extrapolated and not allow_extrapolated:
        raise ExtrapolationError(
            f"upsilon1 of T({a},{a + 1}) is not anchored by known values; "
            "pass --allow-extrapolated-upsilon-base to use -floor(a^2/4)"
        )
    return -(a * a // 4), extrapolated


def upsilon1_torus_checked(p: int, q: int, allow_extrapolated: bool = False) -> Tuple[Fraction, bool]:
    """Recursion Upsilon(T(a,b)) = Upsilon(T(a,b-a)) + Upsilon(T(a,a+1)), unrolled into a loop."""
    a, b = _coprime(p, q)
    total, extrapolated = 0, False
    while a > 1:
        base, flagged = upsilon_base(a, allow_extrapolated)
        total += base
        extrapolated = extrapolated or flagged
        if b == a + 1:
            break
        a, b = sorted((a, b - a))
    return Fraction(total), extrapolated


def upsilon1_torus(p: int, q: int, allow_extrapolated: bool = False) -> Fraction:
    return upsilon1_torus_checked(p, q, allow_extrapolated)[0]


def upsilon1(
    knot: KnotExpr,
    flags: Optional[EngineFlags] = None,
    registry: Optional[KnotRegistry] = None,
) -> Fraction:
    return _upsilon1_checked(knot, flags or EngineFlags(), registry or get_registry())[0]


def _upsilon1_checked(knot: KnotExpr, flags: EngineFlags, registry: KnotRegistry) -> Tuple[Fraction, bool]:
    total, extrapolated = Fraction(0), False
    for term in normalize(knot).terms:
        if isinstance(term.base, TorusKnot):
            value, flagged = upsilon1_torus_checked(
                term.base.p, term.base.q, flags.allow_extrapolated_upsilon
            )
            extrapolated = extrapolated or flagged
        else:
            value = registry.named_facts(term.base.name).upsilon1
        total += term.coefficient * value
    return total, extrapolated


# ================================================================
#  Genus bounds and delta
# ================================================================
def torus_genus4(knot: TorusKnot) -> int:
    return (knot.p - 1) * (knot.q - 1) // 2


def genus4_upper(knot: KnotExpr, registry: Optional[KnotRegistry] = None) -> int:
    registry = registry or get_registry()
    total = 0
    for term in normalize(knot).terms:
        if isinstance(term.base, TorusKnot):
            g4 = torus_genus4(term.base)
        else:
            g4 = registry.named_facts(term.base.name).g4_upper
        total += abs(term.coefficient) * g4
    return total


def base_gamma4_upper(base, registry: KnotRegistry) -> Tuple[int, str]:
    """Per-summand gamma4 upper bound and where it comes from."""
    if isinstance(base, NamedKnot):
        facts = registry.named_facts(base.name)
        if facts.gamma4_exact is not None:
            return facts.gamma4_exact, f"registry({facts.name})"
        return 2 * facts.g4_upper + 1, f"genus({facts.name})"
    knot = base.normalized()
    if knot.p in (2, 3):
        return 1, f"moebius({knot})"
    registered = registry.gamma4_for(knot)
    if registered is not None:
        return registered, f"registry({knot})"
    return 2 * torus_genus4(knot) + 1, f"genus({knot})"


def gamma4_upper_certified(
    knot: KnotExpr,
    registry: Optional[KnotRegistry] = None,
    apex_heights: Tuple[int, ...] = (),
) -> Tuple[int, str]:
    """min(2*g4 + 1, sum of per-summand bounds, lowest apex); the certificate names the winner."""
    registry = registry or get_registry()
    knot = normalize(knot)
    g4 = genus4_upper(knot, registry)
    candidates = [(2 * g4 + 1, f"genus: 2*g4+1 with g4<={g4}")]
    if knot.terms:
        pieces = [(abs(term.coefficient), *base_gamma4_upper(term.base, registry)) for term in knot.terms]
        subadditive = sum(copies * bound for copies, bound, _ in pieces)
        detail = " + ".join(f"{copies}*{source}" if copies > 1 else source for copies, _, source in pieces)
        candidates.append((subadditive, f"subadditive: {detail}"))
    if apex_heights:
        candidates.append((min(apex_heights), f"apex at h={min(apex_heights)}"))
    return min(candidates, key=lambda pair: pair[0])


def gamma4_upper(
    knot: KnotExpr,
    flags: Optional[EngineFlags] = None,
    registry: Optional[KnotRegistry] = None,
) -> int:
    return bundle(knot, flags, registry).gamma4_upper


def delta_lookup(knot: KnotExpr, registry: Optional[KnotRegistry] = None) -> Optional[Fraction]:
    """Coefficient-weighted sum of registry deltas; None as soon as one summand is missing."""
    registry = registry or get_registry()
    total = Fraction(0)
    for term in normalize(knot).terms:
        if isinstance(term.base, TorusKnot):
            value = registry.delta_for(term.base)
        else:
            value = registry.named_facts(term.base.name).delta
        if value is None:
            return None
        total += term.coefficient * value
    return total


# ================================================================
#  Bundle
# ================================================================
def bundle(
    knot: KnotExpr,
    flags: Optional[EngineFlags] = None,
    registry: Optional[KnotRegistry] = None,
) -> InvariantBundle:
    from services.geography import construction_apexes

    flags = flags or EngineFlags()
    registry = registry or get_registry()
    knot = normalize(knot)

    sigma = signature(knot, registry)
    upsilon, extrapolated = _upsilon1_checked(knot, flags, registry)
    det = determinant(knot, registry)
    g4 = genus4_upper(knot, registry)

    gamma4_exact, forbidden = None, ()
    single = knot.single_term
    if single is not None and isinstance(single.base, NamedKnot):
        facts = registry.named_facts(single.base.name)
        gamma4_exact = facts.gamma4_exact
        forbidden = facts.forbidden if single.coefficient > 0 else tuple(f.reflect() for f in facts.forbidden)

    draft = InvariantBundle(
        knot=knot,
        sigma=sigma,
        upsilon1=upsilon,
        arf=arf_from_determinant(det),
        det=det,
        delta=delta_lookup(knot, registry),
        g4_upper=g4,
        gamma4_upper=2 * g4 + 1,
        gamma4_upper_certificate="genus",
        gamma4_exact=gamma4_exact,
        forbidden_facts=forbidden,
        extrapolated=extrapolated,
    )
    apexes = construction_apexes(knot, draft, registry, flags)
    upper, certificate = gamma4_upper_certified(knot, registry, tuple(a.point.h for a in apexes))
    result = draft.model_copy(
        update={"apexes": apexes, "gamma4_upper": upper, "gamma4_upper_certificate": certificate}
    )
    _check_bundle(result)
    if extrapolated:
        logger.warning(f"⚠️ upsilon1 of {to_text(knot)} uses the extrapolated base -floor(a^2/4)")
    return result


def _check_bundle(b: InvariantBundle) -> None:
    if b.sigma % 2:
        raise ConsistencyError(f"odd signature {b.sigma}")
    if b.det % 2 == 0:
        raise ConsistencyError(f"even determinant {b.det}")
    if abs(b.upsilon1 - Fraction(b.sigma, 2)) > b.gamma4_upper:
        raise ConsistencyError(
            f"|upsilon1 - sigma/2| = {abs(b.upsilon1 - Fraction(b.sigma, 2))} exceeds gamma4 upper {b.gamma4_upper}"
        )
    for apex in b.apexes:
        e, h = apex.point.e, apex.point.h
        if not apex.point.parity_valid:
            raise ConsistencyError(f"apex {apex.point} violates e = 2h mod 4 ({apex.certificate.describe()})")
        if abs(b.sigma - Fraction(e, 2)) > h:
            raise ConsistencyError(f"apex {apex.point} lies outside the signature wedge ({apex.certificate.describe()})")
        if abs(-2 * b.upsilon1 + Fraction(e, 2)) > h:
            raise ConsistencyError(f"apex {apex.point} lies outside the upsilon wedge ({apex.certificate.describe()})")
