# ================================================================
# services/geography.py: (e,h) geography engine
# ================================================================
"""
Classification of (e,h) pairs for nonorientable surfaces in B^4 bounded by a knot.

The engine works in the coordinates u = h - e/2 and v = h + e/2. There a
wedge {|c - e|/2 + b <= h} is the quadrant u >= b - c/2, v >= b + c/2,
parity-valid points are exactly the points with u and v both even, and
"P lies in Wedge(Q)" is componentwise dominance. Consequently:

* R1 n R2 is a quadrant u >= u_lo, v >= v_lo;
* realizable points in a column u are those with v >= Vcov(u), the least
  v0 over apexes with u0 <= u;
* not-realizable points in a column are those with v <= obs_top(u),
  since every obstruction seed rules out its whole lower quadrant.

Every column therefore splits into obstructed / unknown / realizable
segments and the unknown set is computed exactly, column by column.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

from loguru import logger

from core.config import settings
from core.exceptions import BoxTooLargeError, ConsistencyError, UsageError
from core.registry import KnotRegistry, get_registry
from models.models import (
    Apex,
    Arm,
    Box,
    Certificate,
    CertificateKind,
    DefinitenessInfo,
    Definiteness,
    DeltaLine,
    EngineFlags,
    ForbiddenKind,
    Gamma4Bounds,
    GeographyReport,
    InvariantBundle,
    KnotBase,
    KnotExpr,
    LatticePoint,
    PointDiff,
    Ray,
    Status,
    TorusKnot,
    UnknownSet,
    VerificationRecord,
    Verdict,
    Wedge,
    point_from_uv,
)
from services import invariants
from services.knot_expr import mirror, normalize, to_text, torus

INF = math.inf

UP_RIGHT = (2, 1)
UP_LEFT = (-2, 1)

# sigma + 4*Arf residues mod 8 that a punctured Klein bottle tolerates
KLEIN_ALLOWED = {
    Definiteness.NEGATIVE_DEFINITE: frozenset({0, 4, 6}),
    Definiteness.POSITIVE_DEFINITE: frozenset({0, 2, 4}),
}


def _uv(point: LatticePoint) -> Tuple[int, int]:
    """Integer (u, v); exact for parity-valid points."""
    return (2 * point.h - point.e) // 2, (2 * point.h + point.e) // 2


def _ceil_even(x: Fraction) -> int:
    n = math.ceil(x)
    return n + n % 2


def _realizable(point: LatticePoint, certificate: Certificate) -> Verdict:
    return Verdict(point=point, status=Status.REALIZABLE, certificate=certificate)


def _ruled_out(point: LatticePoint, certificate: Certificate) -> Verdict:
    return Verdict(point=point, status=Status.NOT_REALIZABLE, certificate=certificate)


# ================================================================
# ✅ Constructions
# ================================================================
def moebius_apex(knot: TorusKnot) -> Optional[LatticePoint]:
    """Euler number of the band-move Moebius band for T(2,n) and T(3,n)."""
    knot = knot.normalized()
    if knot.p == 2:
        return LatticePoint(e=-2 * knot.q, h=1)
    if knot.p == 3 and knot.q % 3 == 1:
        return LatticePoint(e=(-8 * knot.q + 2) // 3, h=1)
    if knot.p == 3 and knot.q % 3 == 2:
        return LatticePoint(e=(-8 * knot.q - 2) // 3, h=1)
    return None


def genus_apexes(g4: int) -> List[Apex]:
    """A genus-g4 slice surface plus one crosscap: (+-2, 2*g4 + 1)."""
    certificate = Certificate(kind=CertificateKind.GENUS_CONSTRUCTION)
    h = 2 * g4 + 1
    return [
        Apex(point=LatticePoint(e=-2, h=h), certificate=certificate),
        Apex(point=LatticePoint(e=2, h=h), certificate=certificate),
    ]


def summand_apexes(base: KnotBase, registry: KnotRegistry) -> List[Apex]:
    """Apexes of one positive copy of `base`."""
    apexes: List[Apex] = []
    if isinstance(base, TorusKnot):
        knot = base.normalized()
        moebius = moebius_apex(knot)
        if moebius is not None:
            apexes.append(
                Apex(
                    point=moebius,
                    certificate=Certificate(kind=CertificateKind.MOEBIUS_CONSTRUCTION, e0=moebius.e),
                )
            )
        apexes += genus_apexes(invariants.torus_genus4(knot))
    else:
        facts = registry.named_facts(base.name)
        certificate = Certificate(kind=CertificateKind.REGISTRY_APEX, provenance=facts.provenance)
        apexes += [Apex(point=point, certificate=certificate) for point in facts.apexes]
        apexes += genus_apexes(facts.g4_upper)
    return _dedupe(apexes)


def _dedupe(apexes: List[Apex]) -> List[Apex]:
    seen, kept = set(), []
    for apex in apexes:
        if apex.point not in seen:
            seen.add(apex.point)
            kept.append(apex)
    return kept


def pareto_apexes(apexes) -> List[Apex]:
    """Drop apexes lying in another apex's wedge; result in canonical (h, e) order."""
    ordered = sorted(_dedupe(list(apexes)), key=lambda a: (*_uv(a.point), a.point.sort_key()))
    kept, best_v = [], INF
    for apex in ordered:
        _, v = _uv(apex.point)
        if v < best_v:
            kept.append(apex)
            best_v = v
    return sorted(kept, key=lambda a: a.point.sort_key())


def _pareto_keys(candidates: Dict[Tuple[int, int], tuple]) -> Dict[Tuple[int, int], tuple]:
    ordered = sorted(candidates, key=lambda eh: (2 * eh[1] - eh[0], 2 * eh[1] + eh[0]))
    front, best_v = {}, INF
    for e, h in ordered:
        if 2 * h + e < best_v:
            front[(e, h)] = candidates[(e, h)]
            best_v = 2 * h + e
    return front


def _combine_summands(knot: KnotExpr, registry: KnotRegistry) -> List[Apex]:
    """Boundary connected sums: one apex per copy, coordinates added, Pareto-pruned per step."""
    front: Dict[Tuple[int, int], tuple] = {(0, 0): ()}
    for term in knot.terms:
        choices = summand_apexes(term.base, registry)
        if term.coefficient < 0:
            choices = [apex.reflect() for apex in choices]
        for _ in range(abs(term.coefficient)):
            candidates: Dict[Tuple[int, int], tuple] = {}
            for (e, h), parents in front.items():
                for apex in choices:
                    key = (e + apex.point.e, h + apex.point.h)
                    if key not in candidates:
                        candidates[key] = parents + (apex.point,)
            front = _pareto_keys(candidates)
    return [
        Apex(
            point=LatticePoint(e=e, h=h),
            certificate=Certificate(kind=CertificateKind.SUMMAND_COMBINATION, parents=parents),
        )
        for (e, h), parents in front.items()
    ]


def construction_apexes(
    knot: KnotExpr,
    bundle: InvariantBundle,
    registry: Optional[KnotRegistry] = None,
    flags: Optional[EngineFlags] = None,
) -> Tuple[Apex, ...]:
    """Generator apexes (kept even when dominated) plus undominated summand combinations."""
    registry = registry or get_registry()
    knot = normalize(knot)
    copies = knot.total_copies()

    generators: List[Apex] = []
    if copies == 1:
        term = knot.terms[0]
        chosen = summand_apexes(term.base, registry)
        generators += chosen if term.coefficient > 0 else [apex.reflect() for apex in chosen]
    generators = _dedupe(generators + genus_apexes(bundle.g4_upper))

    combined: List[Apex] = []
    if 1 < copies <= settings.COMBINATION_COPY_LIMIT:
        sums = _combine_summands(knot, registry)
        survivors = {apex.point for apex in pareto_apexes(generators + sums)}
        taken = {apex.point for apex in generators}
        combined = [
            apex
            for apex in sums
            if apex.point in survivors and apex.point not in taken
        ]
    elif copies > settings.COMBINATION_COPY_LIMIT:
        logger.warning(
            f"⚠️ {to_text(knot)}: {copies} summand copies exceed the combination limit "
            f"{settings.COMBINATION_COPY_LIMIT}; only genus constructions are used"
        )

    return tuple(sorted(generators + combined, key=lambda a: a.point.sort_key()))


# ================================================================
# ✅ Obstructions
# ================================================================
def allowed_region(bundle: InvariantBundle) -> Tuple[Wedge, Wedge]:
    r1 = Wedge(center=Fraction(2 * bundle.sigma), base=Fraction(0))
    r2 = Wedge(center=4 * bundle.upsilon1, base=Fraction(0))
    return r1, r2


def definiteness_at(bundle: InvariantBundle, point: LatticePoint) -> DefinitenessInfo:
    """Signature and b2 of the branched double cover of a surface realizing `point`."""
    if point.e % 2:
        raise UsageError(f"{point}: odd Euler number has no branched-cover signature")
    cover_signature = bundle.sigma - point.e // 2
    b_plus = Fraction(point.h + cover_signature, 2)
    b_minus = Fraction(point.h - cover_signature, 2)
    if b_plus == 0:
        definiteness = Definiteness.NEGATIVE_DEFINITE
    elif b_minus == 0:
        definiteness = Definiteness.POSITIVE_DEFINITE
    else:
        definiteness = Definiteness.INDEFINITE
    return DefinitenessInfo(
        cover_signature=cover_signature,
        cover_b2=point.h,
        b_plus=b_plus,
        b_minus=b_minus,
        definiteness=definiteness,
    )


def klein_obstruction(bundle: InvariantBundle, point: LatticePoint) -> Optional[Certificate]:
    """Certificate when a definite h = 2 point breaks the Klein-bottle congruence, else None."""
    if point.h != 2 or not point.parity_valid:
        return None
    definiteness = definiteness_at(bundle, point).definiteness
    if definiteness is Definiteness.INDEFINITE:
        return None
    residue = (bundle.sigma + 4 * bundle.arf) % 8
    if residue in KLEIN_ALLOWED[definiteness]:
        return None
    return Certificate(kind=CertificateKind.KLEIN_ARF, definiteness=definiteness, residue=residue)


def delta_line_obstruction(
    bundle: InvariantBundle, flags: Optional[EngineFlags] = None
) -> Optional[DeltaLine]:
    flags = flags or EngineFlags()
    if bundle.delta is None or bundle.det != 1:
        return None
    twice_upsilon = 2 * bundle.upsilon1
    if bundle.sigma <= twice_upsilon and bundle.delta < 0:
        return DeltaLine(arm=Arm.RIGHT, offset=bundle.sigma)
    if flags.mirror_delta and bundle.sigma >= twice_upsilon and bundle.delta > 0:
        return DeltaLine(arm=Arm.LEFT, offset=bundle.sigma)
    return None


# ================================================================
# ✅ Landscape: per-bundle precomputation in (u, v) coordinates
# ================================================================
class _Landscape:
    def __init__(self, bundle: InvariantBundle, flags: EngineFlags):
        self.bundle = bundle
        self.flags = flags
        self.r1, self.r2 = allowed_region(bundle)
        sigma, twice_upsilon = bundle.sigma, 2 * bundle.upsilon1
        self.u_lo = _ceil_even(max(Fraction(-sigma), -twice_upsilon))
        self.v_lo = _ceil_even(max(Fraction(sigma), twice_upsilon))

        self.realizable = pareto_apexes(bundle.apexes)
        by_u = sorted(self.realizable, key=lambda a: _uv(a.point))
        self._apex_u = [_uv(a.point)[0] for a in by_u]
        self._apex_v = [_uv(a.point)[1] for a in by_u]
        self.u_star = min(self._apex_u)
        self.v_star = min(self._apex_v)
        self.u_stable = min(u for u, v in zip(self._apex_u, self._apex_v) if v == self.v_star)

        self.delta_line = delta_line_obstruction(bundle, flags)
        self.delta_column = self.delta_row = None
        if self.delta_line is not None and self.delta_line.arm is Arm.RIGHT:
            self.delta_column = -sigma
        elif self.delta_line is not None:
            self.delta_row = sigma

        self.h_levels = sorted({f.h for f in bundle.forbidden_facts if f.kind is ForbiddenKind.H_LEVEL})
        self.point_seeds = [
            (_uv(point), point)
            for point in (
                LatticePoint(e=f.e, h=f.h)
                for f in bundle.forbidden_facts
                if f.kind is ForbiddenKind.POINT
            )
            if point.parity_valid
        ]
        self.klein = self._klein_points()
        self.klein_seeds = [(_uv(v.point), v.point) for v in self.klein]

    def _klein_points(self) -> List[Verdict]:
        verdicts = []
        sigma = self.bundle.sigma
        for candidate in (LatticePoint(e=2 * sigma + 4, h=2), LatticePoint(e=2 * sigma - 4, h=2)):
            certificate = klein_obstruction(self.bundle, candidate)
            if certificate is None or not self.in_region(candidate):
                continue
            if self.covering_apex(candidate) is not None:
                logger.warning(
                    f"⚠️ {to_text(self.bundle.knot)}: Klein-bottle obstruction at {candidate} "
                    "contradicts a construction; ignored"
                )
                continue
            verdicts.append(_ruled_out(candidate, certificate))
        return sorted(verdicts, key=lambda v: v.point.sort_key())

    # -------------------------------------------------------------
    def in_region(self, point: LatticePoint) -> bool:
        return self.r1.contains_point(point) and self.r2.contains_point(point)

    def covering_apex(self, point: LatticePoint) -> Optional[Apex]:
        """The apex itself if `point` is one, otherwise the lowest, nearest apex whose wedge holds it."""
        for apex in self.bundle.apexes:
            if apex.point == point:
                return apex
        u, v = _uv(point)
        holders = [a for a in self.realizable if _uv(a.point)[0] <= u and _uv(a.point)[1] <= v]
        if not holders:
            return None
        return min(holders, key=lambda a: (a.point.h, abs(a.point.e - point.e), a.point.e))

    def vcov(self, u: int):
        index = bisect_right(self._apex_u, u)
        return INF if index == 0 else self._apex_v[index - 1]

    def obs_top(self, u: int):
        """Highest v ruled out in column u by delta/Klein/registry seeds (or their propagation)."""
        if self.delta_column is not None and u == self.delta_column:
            return INF
        top = -INF
        if self.delta_row is not None:
            top = self.delta_row
        for (su, sv), _ in self.klein_seeds + self.point_seeds:
            if u <= su:
                top = max(top, sv)
        for h0 in self.h_levels:
            top = max(top, 2 * h0 - u)
        return top

    def v_start(self, u: int) -> int:
        return max(self.v_lo, 2 - u)

    def first_open(self, u: int):
        """Lowest v in column u that is not ruled out."""
        top = self.obs_top(u)
        if top == INF:
            return INF
        return max(self.v_start(u), top + 2)

    def seed_above(self, point: LatticePoint) -> Optional[Tuple[LatticePoint, CertificateKind]]:
        u, v = _uv(point)
        for (su, sv), seed in self.klein_seeds:
            if u <= su and v <= sv:
                return seed, CertificateKind.KLEIN_ARF
        for (su, sv), seed in self.point_seeds:
            if u <= su and v <= sv:
                return seed, CertificateKind.REGISTRY_FORBIDDEN
        for h0 in self.h_levels:
            if u + v <= 2 * h0:
                return point_from_uv(u, 2 * h0 - u), CertificateKind.REGISTRY_FORBIDDEN
        return None

    @property
    def u_far(self) -> int:
        """Past this column every column looks the same."""
        bounds = [self.u_lo, self.u_stable, 2 - self.v_lo]
        bounds += [su for (su, _), _ in self.klein_seeds + self.point_seeds]
        bounds += [2 * h0 - self.v_lo for h0 in self.h_levels]
        if self.delta_column is not None:
            bounds.append(self.delta_column)
        return max(bounds)

    # -------------------------------------------------------------
    def row_starts(self) -> Dict[int, int]:
        """For rows below every apex: the column from which the row is unknown forever."""
        starts = {}
        for r in range(self.v_lo, self.v_star, 2):
            if self.delta_row is not None and r <= self.delta_row:
                continue
            bounds = [self.u_lo, 2 - r]
            if self.delta_column is not None:
                bounds.append(self.delta_column + 2)
            bounds += [su + 2 for (su, sv), _ in self.klein_seeds + self.point_seeds if sv >= r]
            bounds += [2 * h0 - r + 2 for h0 in self.h_levels]
            starts[r] = max(bounds)
        return starts

    def column_rays(self) -> List[Ray]:
        rays = []
        for u in range(self.u_lo, self.u_star, 2):
            start = self.first_open(u)
            if start != INF:
                rays.append(Ray(start=point_from_uv(u, start), direction=UP_RIGHT))
        return rays

    def finite_unknowns(self, row_starts: Dict[int, int]) -> Iterator[Tuple[int, int]]:
        for u in range(max(self.u_lo, self.u_star), self.u_far + 1, 2):
            start, stop = self.first_open(u), self.vcov(u)
            if start == INF:
                continue
            for v in range(start, stop, 2):
                if v in row_starts and u >= row_starts[v]:
                    continue
                yield u, v

    def unknown_set(self) -> UnknownSet:
        starts = self.row_starts()
        rays = self.column_rays() + [
            Ray(start=point_from_uv(u, r), direction=UP_LEFT) for r, u in starts.items()
        ]
        limit = settings.SUMMARY_POINT_LIMIT
        listed: List[Tuple[int, int]] = []
        per_level: Dict[int, int] = {}
        count = 0
        for u, v in self.finite_unknowns(starts):
            count += 1
            h = (u + v) // 2
            per_level[h] = per_level.get(h, 0) + 1
            if count <= limit:
                listed.append((u, v))

        truncated, sweep_h_max = False, 0
        if count > limit:
            truncated, running = True, 0
            for h in sorted(per_level):
                if running + per_level[h] > limit:
                    break
                running += per_level[h]
                sweep_h_max = h
            listed = [uv for uv in self.finite_unknowns(starts) if (uv[0] + uv[1]) // 2 <= sweep_h_max]
            logger.warning(
                f"⚠️ {to_text(self.bundle.knot)}: {count} finite unknown points; "
                f"listing those with h <= {sweep_h_max}"
            )

        points = sorted((point_from_uv(u, v) for u, v in listed), key=lambda p: p.sort_key())
        return UnknownSet(
            points=tuple(points),
            rays=tuple(sorted(rays, key=lambda r: r.sort_key())),
            finite_count=count,
            truncated=truncated,
            sweep_h_max=sweep_h_max,
        )

    def lowest_open_h(self) -> int:
        best = INF
        for u in range(self.u_lo, self.u_far + 3, 2):
            start = self.first_open(u)
            if start != INF:
                best = min(best, (u + start) // 2)
        return int(best)


@lru_cache(maxsize=64)
def _landscape(bundle: InvariantBundle, flags: EngineFlags) -> _Landscape:
    return _Landscape(bundle, flags)


# ================================================================
# ✅ Classification
# ================================================================
def _classify(land: _Landscape, point: LatticePoint) -> Verdict:
    bundle = land.bundle
    if not point.parity_valid:
        return _ruled_out(point, Certificate(kind=CertificateKind.PARITY_VIOLATION))

    apex = land.covering_apex(point)
    if apex is not None:
        if apex.point == point:
            return _realizable(point, apex.certificate)
        return _realizable(point, Certificate(kind=CertificateKind.CROSSCAP_SUM, parents=(apex.point,)))

    if not land.r1.contains_point(point):
        return _ruled_out(point, Certificate(kind=CertificateKind.SIGNATURE_WEDGE))
    if not land.r2.contains_point(point):
        return _ruled_out(point, Certificate(kind=CertificateKind.UPSILON_WEDGE))

    if land.delta_line is not None and land.delta_line.contains(point):
        return _ruled_out(point, Certificate(kind=CertificateKind.DELTA_LINE, arm=land.delta_line.arm))

    for fact in bundle.forbidden_facts:
        if fact.forbids(point):
            return _ruled_out(
                point, Certificate(kind=CertificateKind.REGISTRY_FORBIDDEN, provenance=fact.provenance)
            )

    klein = klein_obstruction(bundle, point)
    if klein is not None:
        return _ruled_out(point, klein)

    seed = land.seed_above(point)
    if seed is not None:
        parent, root = seed
        return _ruled_out(
            point,
            Certificate(kind=CertificateKind.DOWNWARD_PROPAGATION, parents=(parent,), root=root),
        )

    return Verdict(point=point, status=Status.UNKNOWN)


def classify_point(
    bundle: InvariantBundle, point: LatticePoint, flags: Optional[EngineFlags] = None
) -> Verdict:
    return _classify(_landscape(bundle, flags or EngineFlags()), point)


def classify_box(
    bundle: InvariantBundle,
    e_min: int,
    e_max: int,
    h_max: int,
    flags: Optional[EngineFlags] = None,
) -> Dict[LatticePoint, Verdict]:
    """Verdicts for every parity-valid point of the box, ordered by h then e."""
    box = Box(e_min=e_min, e_max=e_max, h_max=h_max)
    if box.is_empty:
        return {}
    if box.size > settings.BOX_POINT_LIMIT:
        raise BoxTooLargeError(f"box has {box.size} cells; the limit is {settings.BOX_POINT_LIMIT}")
    land = _landscape(bundle, flags or EngineFlags())
    return {point: _classify(land, point) for point in box.parity_points()}


def check_certificate(
    bundle: InvariantBundle, verdict: Verdict, flags: Optional[EngineFlags] = None
) -> bool:
    """Re-derive `verdict` from the bundle alone."""
    flags = flags or EngineFlags()
    point, certificate = verdict.point, verdict.certificate
    if certificate is None:
        return verdict.status is Status.UNKNOWN

    kind = certificate.kind
    apex_points = {apex.point: apex for apex in bundle.apexes}
    if verdict.status is Status.REALIZABLE:
        if kind is CertificateKind.CROSSCAP_SUM:
            parent = certificate.parents[0] if certificate.parents else None
            return (
                parent in apex_points
                and point.parity_valid
                and Wedge.at(parent).contains_point(point)
            )
        apex = apex_points.get(point)
        if apex is None or apex.certificate.kind is not kind:
            return False
        if kind is CertificateKind.MOEBIUS_CONSTRUCTION:
            return point.h == 1 and certificate.e0 == point.e
        if kind is CertificateKind.GENUS_CONSTRUCTION:
            return abs(point.e) == 2 and point.h == 2 * bundle.g4_upper + 1
        if kind is CertificateKind.SUMMAND_COMBINATION:
            return (
                sum(p.e for p in certificate.parents) == point.e
                and sum(p.h for p in certificate.parents) == point.h
            )
        return kind is CertificateKind.REGISTRY_APEX

    if verdict.status is not Status.NOT_REALIZABLE:
        return False
    r1, r2 = allowed_region(bundle)
    if kind is CertificateKind.PARITY_VIOLATION:
        return not point.parity_valid
    if kind is CertificateKind.SIGNATURE_WEDGE:
        return not r1.contains_point(point)
    if kind is CertificateKind.UPSILON_WEDGE:
        return not r2.contains_point(point)
    return _special_obstruction_holds(bundle, point, kind, flags)


def _special_obstruction_holds(
    bundle: InvariantBundle, point: LatticePoint, kind: CertificateKind, flags: EngineFlags
) -> bool:
    if kind is CertificateKind.DELTA_LINE:
        line = delta_line_obstruction(bundle, flags)
        return line is not None and line.contains(point)
    if kind is CertificateKind.REGISTRY_FORBIDDEN:
        return any(fact.forbids(point) for fact in bundle.forbidden_facts)
    if kind is CertificateKind.KLEIN_ARF:
        return klein_obstruction(bundle, point) is not None
    if kind is CertificateKind.DOWNWARD_PROPAGATION:
        seed = _landscape(bundle, flags).seed_above(point)
        if seed is None:
            return False
        parent, root = seed
        u, v = _uv(point)
        pu, pv = _uv(parent)
        return (
            parent.parity_valid
            and u <= pu
            and v <= pv
            and _special_obstruction_holds(bundle, parent, root, flags)
        )
    return False


# ================================================================
# ✅ Reports
# ================================================================
def gamma4_bounds(
    bundle: InvariantBundle, report: GeographyReport, flags: Optional[EngineFlags] = None
) -> Gamma4Bounds:
    flags = flags or report.flags
    gap = abs(bundle.upsilon1 - Fraction(bundle.sigma, 2))
    oss = math.ceil(gap)
    candidates = [
        (1, "nonorientable: h >= 1"),
        (oss, f"upsilon-signature gap: |upsilon1 - sigma/2| = {gap}"),
    ]
    if report.delta_line is not None:
        candidates.append((oss + 1, "delta_line: gap + 1"))
    if bundle.gamma4_exact is not None:
        candidates.append((bundle.gamma4_exact, f"registry: gamma4 = {bundle.gamma4_exact}"))
    lowest = _landscape(bundle, flags).lowest_open_h()
    candidates.append((lowest, f"geography: every point with h < {lowest} is ruled out"))

    lower, lower_certificate = max(candidates, key=lambda pair: pair[0])
    if lower > bundle.gamma4_upper:
        raise ConsistencyError(
            f"{to_text(bundle.knot)}: gamma4 lower bound {lower} ({lower_certificate}) "
            f"exceeds upper bound {bundle.gamma4_upper} ({bundle.gamma4_upper_certificate})"
        )
    return Gamma4Bounds(
        lower=lower,
        upper=bundle.gamma4_upper,
        lower_certificate=lower_certificate,
        upper_certificate=bundle.gamma4_upper_certificate,
    )


def symbolic_summary(bundle: InvariantBundle, flags: Optional[EngineFlags] = None) -> GeographyReport:
    flags = flags or EngineFlags()
    land = _landscape(bundle, flags)
    for apex in land.realizable:
        if not land.in_region(apex.point):
            raise ConsistencyError(f"construction {apex.point} lies outside R1 n R2")

    report = GeographyReport(
        knot=bundle.knot,
        realizable=tuple(land.realizable),
        r1=land.r1,
        r2=land.r2,
        delta_line=land.delta_line,
        klein_points=tuple(land.klein),
        forbidden=bundle.forbidden_facts,
        unknown=land.unknown_set(),
        flags=flags,
        extrapolated=bundle.extrapolated,
    )
    return report.model_copy(update={"gamma4": gamma4_bounds(bundle, report, flags)})


def build_report(
    knot: KnotExpr,
    flags: Optional[EngineFlags] = None,
    registry: Optional[KnotRegistry] = None,
) -> Tuple[InvariantBundle, GeographyReport]:
    flags = flags or EngineFlags()
    bundle = invariants.bundle(knot, flags, registry)
    return bundle, symbolic_summary(bundle, flags)


def mirror_report(report: GeographyReport) -> GeographyReport:
    by_point = lambda item: item.point.sort_key()  # noqa: E731
    unknown = report.unknown
    return report.model_copy(
        update={
            "knot": normalize(mirror(report.knot)),
            "realizable": tuple(sorted((a.reflect() for a in report.realizable), key=by_point)),
            "r1": report.r1.reflect(),
            "r2": report.r2.reflect(),
            "delta_line": None if report.delta_line is None else report.delta_line.reflect(),
            "klein_points": tuple(sorted((v.reflect() for v in report.klein_points), key=by_point)),
            "forbidden": tuple(f.reflect() for f in report.forbidden),
            "unknown": unknown.model_copy(
                update={
                    "points": tuple(sorted((p.reflect() for p in unknown.points), key=lambda p: p.sort_key())),
                    "rays": tuple(sorted((r.reflect() for r in unknown.rays), key=lambda r: r.sort_key())),
                }
            ),
        }
    )


def standard_box(bundle: InvariantBundle) -> Box:
    """Apex and region-corner e-span widened by 8 on each side; h up to max(8, 2*g4 + 3)."""
    sigma, twice_upsilon = Fraction(bundle.sigma), 2 * bundle.upsilon1
    u_lo = _ceil_even(max(-sigma, -twice_upsilon))
    v_lo = _ceil_even(max(sigma, twice_upsilon))
    es = [apex.point.e for apex in bundle.apexes] + [v_lo - u_lo]
    h_max = max(8, 2 * bundle.g4_upper + 3, (u_lo + v_lo) // 2)
    return Box(e_min=min(es) - 8, e_max=max(es) + 8, h_max=h_max)


# ================================================================
# ✅ Torus-family theorem reproduction
# ================================================================
def _t2_unknown(n: int, point: LatticePoint, literal: bool) -> bool:
    if n % 4 == 1:
        first_e, first_h, last_m = 4 - 2 * n, 1, n - 1
    else:
        first_e, first_h, last_m = 8 - 2 * n, 3, n - 3
    if not literal:
        last_m -= 1
    m = point.h - first_h
    return 0 <= m <= last_m and point.e == first_e + 2 * m


def _t2_status(n: int, point: LatticePoint, literal: bool) -> Status:
    if not point.parity_valid:
        return Status.NOT_REALIZABLE
    realizable = Wedge.at(LatticePoint(e=-2 * n, h=1)).contains_point(point) or (
        point.h >= n and point.e == 2 + 2 * (point.h - n)
    )
    unknown = _t2_unknown(n, point, literal)
    if literal and unknown:
        return Status.UNKNOWN
    if realizable:
        return Status.REALIZABLE
    return Status.UNKNOWN if unknown else Status.NOT_REALIZABLE


def _t3_rays(n: int) -> Tuple[Ray, ...]:
    if n % 6 == 1:
        return (Ray(start=LatticePoint(e=8 * (1 - n) // 3 + 2, h=1), direction=UP_RIGHT),)
    if n % 6 == 2:
        return (Ray(start=LatticePoint(e=8 * (2 - n) // 3 + 2, h=3), direction=UP_RIGHT),)
    return ()


def _t3_status(n: int, point: LatticePoint) -> Status:
    if not point.parity_valid:
        return Status.NOT_REALIZABLE
    if Wedge.at(moebius_apex(TorusKnot(p=3, q=n))).contains_point(point):
        return Status.REALIZABLE
    if any(ray.contains(point) for ray in _t3_rays(n)):
        return Status.UNKNOWN
    return Status.NOT_REALIZABLE


def verify_torus_theorem(
    family: int,
    n: int,
    box: Optional[Box] = None,
    flags: Optional[EngineFlags] = None,
    registry: Optional[KnotRegistry] = None,
) -> VerificationRecord:
    """Materialize the T(2,n) or T(3,n) classification over `box` and diff it against the engine."""
    if family == 2 and (n < 3 or n % 2 == 0):
        raise UsageError(f"T(2,{n}): n must be odd and at least 3")
    if family == 3 and (n < 4 or n % 3 == 0):
        raise UsageError(f"T(3,{n}): n must be coprime to 3 and at least 4")
    if family not in (2, 3):
        raise UsageError(f"unknown torus family {family}; expected 2 or 3")

    flags = flags or EngineFlags()
    bundle, report = build_report(torus(family, n), flags, registry)
    box = box or standard_box(bundle)
    verdicts = classify_box(bundle, box.e_min, box.e_max, box.h_max, flags)

    diff, literal_diff = [], []
    for point, verdict in verdicts.items():
        if family == 2:
            expected = _t2_status(n, point, literal=False)
            literal = _t2_status(n, point, literal=True)
        else:
            expected = literal = _t3_status(n, point)
        if expected is not verdict.status:
            diff.append(PointDiff(point=point, theorem=expected, engine=verdict.status))
        if literal is not verdict.status:
            literal_diff.append(PointDiff(point=point, theorem=literal, engine=verdict.status))

    box_unknown_count = sum(1 for v in verdicts.values() if v.status is Status.UNKNOWN)
    record = VerificationRecord(
        family=family,
        n=n,
        box=box,
        diff=tuple(diff),
        literal_diff=tuple(literal_diff),
        unknown_count=report.unknown.finite_count,
        box_unknown_count=box_unknown_count,
        expected_unknown_count=4 * ((n - 1) // 4) if family == 2 else None,
        rays=report.unknown.rays,
        expected_rays=() if family == 2 else _t3_rays(n),
    )
    log = logger.info if record.verified else logger.warning
    mark = "✅" if record.verified else "❌"
    log(f"{mark} T({family},{n}): {len(diff)} differences, {box_unknown_count} unknown in box")
    return record
