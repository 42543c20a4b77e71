# tests/test_geography.py
import random
from fractions import Fraction
from math import gcd

import pytest

from core.config import settings
from core.exceptions import BoxTooLargeError, UsageError
from models.models import (
    Arm,
    Box,
    CertificateKind,
    Definiteness,
    DeltaLine,
    EngineFlags,
    LatticePoint,
    Ray,
    Status,
    Wedge,
)
from services import geography, invariants
from services.knot_expr import family_expression, mirror, normalize, to_text, torus

P = LatticePoint


def statuses(verdicts):
    return {point: verdict.status for point, verdict in verdicts.items()}


def points_with(verdicts, status):
    return sorted((p for p, v in verdicts.items() if v.status is status), key=lambda p: p.sort_key())


# ==========================
# ✅ Constructions and regions
# ==========================
@pytest.mark.parametrize(
    "text, expected",
    [
        ("T(2,5)", {P(e=-10, h=1), P(e=2, h=5), P(e=-2, h=5)}),
        ("T(3,4)", {P(e=-10, h=1), P(e=2, h=7), P(e=-2, h=7)}),
        ("-T(2,3)", {P(e=6, h=1), P(e=2, h=3), P(e=-2, h=3)}),
    ],
)
def test_construction_apexes(engine, text, expected):
    assert {apex.point for apex in engine.bundle(text).apexes} == expected


def test_moebius_apex_certificates(engine):
    apexes = {apex.point: apex.certificate for apex in engine.bundle("T(3,5)").apexes}
    certificate = apexes[P(e=-14, h=1)]
    assert certificate.kind is CertificateKind.MOEBIUS_CONSTRUCTION
    assert certificate.e0 == -14


def test_connected_sums_get_combination_apexes(engine):
    bundle = engine.bundle("T(2,3) # T(2,5)")
    combined = [a for a in bundle.apexes if a.certificate.kind is CertificateKind.SUMMAND_COMBINATION]
    assert P(e=-16, h=2) in {a.point for a in combined}
    apex = next(a for a in combined if a.point == P(e=-16, h=2))
    assert set(apex.certificate.parents) == {P(e=-6, h=1), P(e=-10, h=1)}


@pytest.mark.parametrize(
    "text, r1, r2",
    [("T(2,3)", -4, -4), ("T(3,7)", -16, -16), ("T(3,5)", -16, -12)],
)
def test_allowed_region(engine, text, r1, r2):
    first, second = geography.allowed_region(engine.bundle(text))
    assert first == Wedge(center=Fraction(r1), base=Fraction(0))
    assert second == Wedge(center=Fraction(r2), base=Fraction(0))


# ==========================
# ✅ Obstructions
# ==========================
@pytest.mark.parametrize(
    "text, point, expected",
    [
        ("T(2,3)", P(e=0, h=2), (-2, 2, Definiteness.NEGATIVE_DEFINITE)),
        ("4_1", P(e=0, h=2), (0, 2, Definiteness.INDEFINITE)),
        ("T(2,5)", P(e=-16, h=3), (4, 3, Definiteness.INDEFINITE)),
    ],
)
def test_definiteness_at(engine, text, point, expected):
    info = geography.definiteness_at(engine.bundle(text), point)
    assert (info.cover_signature, info.cover_b2, info.definiteness) == expected


def test_definiteness_rejects_odd_euler_numbers(engine):
    with pytest.raises(UsageError):
        geography.definiteness_at(engine.bundle("T(2,3)"), P(e=1, h=2))


@pytest.mark.parametrize("text", ["T(2,3)", "-T(3,7)", "4_1", "T(3,4) # -T(2,5)", "2*T(5,9) # -3*T(5,13)"])
def test_definiteness_changes_exactly_on_the_signature_wedge(engine, registry, flags, text):
    bundle = engine.bundle(text)
    mirrored = invariants.bundle(mirror(engine.knot(text)), flags, registry)
    r1, _ = geography.allowed_region(bundle)
    right_arm = lambda h: 2 * bundle.sigma + 2 * h  # noqa: E731
    left_arm = lambda h: 2 * bundle.sigma - 2 * h  # noqa: E731
    positive = 0
    for h in range(1, 7):
        for e in range(left_arm(h) - 8, right_arm(h) + 9, 4):
            point = P(e=e, h=h)
            info = geography.definiteness_at(bundle, point)
            assert info.b_plus + info.b_minus == h
            assert info.b_plus - info.b_minus == info.cover_signature
            assert r1.contains_point(point) is (info.b_plus >= 0 and info.b_minus >= 0)
            if e == right_arm(h):
                assert (info.definiteness, info.b_plus, info.b_minus) == (Definiteness.NEGATIVE_DEFINITE, 0, h)
            elif e == left_arm(h):
                assert (info.definiteness, info.b_plus, info.b_minus) == (Definiteness.POSITIVE_DEFINITE, h, 0)
                positive += 1
            else:
                assert info.definiteness is Definiteness.INDEFINITE
                assert (min(info.b_plus, info.b_minus) >= 1) is r1.contains_point(point)

            reflected = geography.definiteness_at(mirrored, point.reflect())
            assert reflected.definiteness is info.definiteness.reflect()
            assert (reflected.b_plus, reflected.b_minus) == (info.b_minus, info.b_plus)
    assert positive == 6


@pytest.mark.parametrize(
    "text, point, obstructed",
    [
        ("T(2,7)", P(e=-8, h=2), True),
        ("T(2,5)", P(e=-4, h=2), False),
        ("T(3,8)", P(e=-16, h=2), True),
        ("T(2,3)", P(e=-8, h=2), False),
    ],
)
def test_klein_obstruction(engine, text, point, obstructed):
    certificate = geography.klein_obstruction(engine.bundle(text), point)
    assert (certificate is not None) is obstructed


@pytest.mark.parametrize("c", [1, 2])
def test_delta_line_for_the_family(registry, c):
    bundle = invariants.bundle(family_expression(c), registry=registry)
    line = geography.delta_line_obstruction(bundle)
    assert line == DeltaLine(arm=Arm.RIGHT, offset=8 * c + 32)


def test_no_delta_line_without_homology_sphere(engine):
    assert geography.delta_line_obstruction(engine.bundle("T(2,3)")) is None


def test_mirrored_delta_line_can_be_switched_off(registry):
    bundle = invariants.bundle(mirror(family_expression(1)), registry=registry)
    assert geography.delta_line_obstruction(bundle, EngineFlags(mirror_delta=True)) == DeltaLine(
        arm=Arm.LEFT, offset=-40
    )
    assert geography.delta_line_obstruction(bundle, EngineFlags(mirror_delta=False)) is None


# ==========================
# ✅ Point classification
# ==========================
def test_trefoil_worked_example(engine):
    verdicts = engine.box("T(2,3)", -14, 8, 6)
    assert points_with(verdicts, Status.UNKNOWN) == []
    assert verdicts[P(e=-6, h=1)].status is Status.REALIZABLE
    assert verdicts[P(e=-6, h=1)].certificate.kind is CertificateKind.MOEBIUS_CONSTRUCTION

    klein = verdicts[P(e=0, h=2)]
    assert klein.status is Status.NOT_REALIZABLE
    assert klein.certificate.kind is CertificateKind.KLEIN_ARF

    below = verdicts[P(e=-2, h=1)]
    assert below.status is Status.NOT_REALIZABLE
    assert below.certificate.kind is CertificateKind.DOWNWARD_PROPAGATION
    assert below.certificate.parents == (P(e=0, h=2),)
    assert below.certificate.root is CertificateKind.KLEIN_ARF


def test_parity_violations_are_ruled_out_first(engine):
    verdict = geography.classify_point(engine.bundle("T(2,3)"), P(e=-4, h=1))
    assert verdict.status is Status.NOT_REALIZABLE
    assert verdict.certificate.kind is CertificateKind.PARITY_VIOLATION


def test_two_five_has_an_unknown_moebius_point(engine):
    assert engine.status("T(2,5)", -6, 1) is Status.UNKNOWN


def test_figure_eight(engine):
    verdicts = engine.box("4_1", -10, 10, 5)
    assert points_with(verdicts, Status.UNKNOWN) == [P(e=0, h=2)]
    h1 = [v for p, v in verdicts.items() if p.h == 1]
    assert h1 and all(v.status is Status.NOT_REALIZABLE for v in h1)
    assert all(
        v.certificate.kind in (CertificateKind.REGISTRY_FORBIDDEN, CertificateKind.SIGNATURE_WEDGE)
        for v in h1
    )


def test_unknot_is_fully_determined(engine):
    verdicts = engine.box("U", -8, 8, 4)
    assert points_with(verdicts, Status.UNKNOWN) == []
    realizable = set(points_with(verdicts, Status.REALIZABLE))
    assert realizable == {p for p in verdicts if abs(p.e) <= 2 * p.h}


def test_classify_box_edges(engine):
    bundle = engine.bundle("T(2,3)")
    assert geography.classify_box(bundle, 5, 4, 3) == {}
    assert geography.classify_box(bundle, -4, 4, 0) == {}
    with pytest.raises(BoxTooLargeError):
        geography.classify_box(bundle, -10**6, 10**6, 10)


def test_box_extension_never_changes_a_status(engine):
    small = statuses(engine.box("T(3,8)", -30, 0, 6))
    large = statuses(engine.box("T(3,8)", -60, 20, 14))
    assert all(large[p] is s for p, s in small.items())


# ==========================
# ✅ Symbolic summary
# ==========================
def test_summary_t37_is_a_single_ray(engine):
    _, report = engine.report("T(3,7)")
    assert report.unknown.rays == (Ray(start=P(e=-14, h=1), direction=(2, 1)),)
    assert report.unknown.points == ()


def test_summary_t38_ray_starts_above_the_klein_point(engine):
    _, report = engine.report("T(3,8)")
    assert report.unknown.rays == (Ray(start=P(e=-14, h=3), direction=(2, 1)),)
    assert [v.point for v in report.klein_points] == [P(e=-16, h=2)]


@pytest.mark.parametrize("text", ["T(3,4)", "T(3,5)", "T(2,3)", "U"])
def test_summary_fully_determined(engine, text):
    _, report = engine.report(text)
    assert report.unknown.is_empty


def test_summary_figure_eight(engine):
    _, report = engine.report("4_1")
    assert report.unknown.points == (P(e=0, h=2),)
    assert report.unknown.rays == ()


@pytest.mark.parametrize("n", [5, 7, 9, 11, 13])
def test_summary_two_strand_unknown_count(engine, n):
    _, report = engine.report(f"T(2,{n})")
    assert report.unknown.rays == ()
    assert report.unknown.finite_count == 4 * ((n - 1) // 4)


@pytest.mark.parametrize(
    "text, box",
    [
        ("T(2,9)", (-30, 10, 12)),
        ("T(3,7)", (-30, 10, 12)),
        ("T(3,8)", (-40, 10, 12)),
        ("4_1", (-12, 12, 6)),
        ("T(2,3) # T(3,4)", (-40, 10, 12)),
        ("-T(2,5) # T(2,3)", (-20, 20, 10)),
    ],
)
def test_summary_agrees_with_pointwise_classification(engine, text, box):
    _, report = engine.report(text)
    assert not report.unknown.truncated
    for point, verdict in engine.box(text, *box).items():
        assert (verdict.status is Status.UNKNOWN) is report.unknown.contains(point), point


def test_apexes_lie_in_the_allowed_region(engine):
    for text in ["T(2,3)", "T(3,10)", "4_1", "-2*T(2,5) # T(3,4)", "T(5,9) # -T(5,13)"]:
        bundle, report = engine.report(text)
        for apex in report.realizable:
            assert report.r1.contains_point(apex.point) and report.r2.contains_point(apex.point)


# ==========================
# ✅ gamma4 bounds
# ==========================
@pytest.mark.parametrize("c", range(1, 21))
def test_family_gamma4_bounds(registry, c):
    _, report = geography.build_report(family_expression(c), registry=registry)
    assert (report.gamma4.lower, report.gamma4.upper) == (max(c, 1), 3 * c + 1)
    assert report.delta_line == DeltaLine(arm=Arm.RIGHT, offset=8 * c + 32)


@pytest.mark.parametrize("text, bounds", [("T(2,9)", (1, 1)), ("4_1", (2, 2)), ("U", (1, 1))])
def test_gamma4_bounds(engine, text, bounds):
    _, report = engine.report(text)
    assert (report.gamma4.lower, report.gamma4.upper) == bounds


def test_family_lower_bound_comes_from_the_delta_line(registry):
    _, report = geography.build_report(family_expression(3), registry=registry)
    assert report.gamma4.lower_certificate == "delta_line: gap + 1"


# ==========================
# ✅ Theorem reproduction
# ==========================
@pytest.mark.parametrize("n", range(3, 100, 2))
def test_two_strand_theorem(n):
    record = geography.verify_torus_theorem(2, n)
    assert record.diff == ()
    assert record.unknown_count == 4 * ((n - 1) // 4)
    assert record.verified


@pytest.mark.parametrize("n", [n for n in range(4, 51) if gcd(n, 3) == 1])
def test_three_strand_theorem(n):
    record = geography.verify_torus_theorem(3, n)
    assert record.verified
    if n % 6 in (4, 5):
        assert record.rays == ()
    else:
        assert len(record.rays) == 1


def test_two_strand_literal_reading_differs_at_the_endpoint():
    record = geography.verify_torus_theorem(2, 9)
    assert record.verified
    assert len(record.literal_diff) == 1
    assert record.literal_diff[0].theorem is Status.UNKNOWN
    assert record.literal_diff[0].engine is Status.REALIZABLE


def test_partial_box_keeps_the_global_unknown_count():
    record = geography.verify_torus_theorem(2, 9, box=Box(e_min=-10, e_max=0, h_max=3))
    assert record.verified
    assert (record.unknown_count, record.box_unknown_count) == (8, 1)
    assert record.literal_diff == ()


def test_long_unknown_listings_are_truncated_by_level(engine, monkeypatch):
    monkeypatch.setattr(settings, "SUMMARY_POINT_LIMIT", 3)
    _, report = engine.report("T(2,9)")
    unknown = report.unknown
    assert unknown.truncated and unknown.sweep_h_max == 3
    assert unknown.finite_count == 8
    assert unknown.points == (P(e=-14, h=1), P(e=-12, h=2), P(e=-10, h=3))


@pytest.mark.parametrize("family, n", [(2, 4), (2, 1), (3, 6), (3, 2), (5, 7)])
def test_theorem_verifier_rejects_bad_input(family, n):
    with pytest.raises(UsageError):
        geography.verify_torus_theorem(family, n)


# ==========================
# ✅ Properties
# ==========================
PROPERTY_CASES = [
    ("T(2,3)", (-14, 8, 6)),
    ("T(2,7)", (-22, 6, 9)),
    ("T(3,8)", (-36, 8, 10)),
    ("4_1", (-10, 10, 5)),
    ("-T(3,7) # T(2,5)", (-30, 30, 10)),
]


@pytest.mark.parametrize("text, box", PROPERTY_CASES)
def test_parity_upward_closure_and_soundness(engine, text, box):
    verdicts = engine.box(text, *box)
    realizable = points_with(verdicts, Status.REALIZABLE)
    ruled_out = points_with(verdicts, Status.NOT_REALIZABLE)
    assert all(p.parity_valid for p, v in verdicts.items() if v.status is not Status.NOT_REALIZABLE)
    for point in realizable:
        if point.h < box[2]:
            for step in (-2, 2):
                above = P(e=point.e + step, h=point.h + 1)
                if box[0] <= above.e <= box[1]:
                    assert verdicts[above].status is Status.REALIZABLE
    for point in ruled_out:
        assert not any(Wedge.at(r).contains_point(point) for r in realizable)


@pytest.mark.parametrize("text, box", PROPERTY_CASES + [("2*T(5,9) # -3*T(5,13)", (80, 120, 8))])
def test_every_certificate_rechecks(engine, text, box):
    bundle = engine.bundle(text)
    for verdict in engine.box(text, *box).values():
        assert geography.check_certificate(bundle, verdict), verdict


def test_forged_certificates_are_rejected(engine):
    bundle = engine.bundle("T(2,3)")
    genuine = geography.classify_point(bundle, P(e=-6, h=1))
    forged = genuine.model_copy(update={"point": P(e=-2, h=1)})
    assert not geography.check_certificate(bundle, forged)


def _random_expression(rng: random.Random) -> str:
    bases = ["T(2,3)", "T(2,5)", "T(2,7)", "T(3,4)", "T(3,5)", "T(3,7)", "T(4,5)", "T(5,9)", "4_1"]
    terms = []
    for _ in range(rng.randint(1, 3)):
        coefficient = rng.choice([-2, -1, 1, 2])
        terms.append(f"{coefficient}*{rng.choice(bases)}")
    return " # ".join(terms)


def test_mirror_equivariance_on_random_expressions(engine, registry, flags):
    rng = random.Random(4)
    for _ in range(200):
        knot = engine.knot(_random_expression(rng))
        e_min, e_max, h_max = -24, 24, 6
        bundle = invariants.bundle(knot, flags, registry)
        mirrored = invariants.bundle(mirror(knot), flags, registry)
        here = geography.classify_box(bundle, e_min, e_max, h_max, flags)
        there = geography.classify_box(mirrored, -e_max, -e_min, h_max, flags)
        for point, verdict in here.items():
            other = there[point.reflect()]
            assert other.status is verdict.status, (to_text(knot), point)
            kind = None if verdict.certificate is None else verdict.certificate.kind
            assert (None if other.certificate is None else other.certificate.kind) is kind


def test_mirror_report_matches_the_mirror_knot(engine):
    _, report = engine.report("T(2,3)")
    _, mirrored = engine.report("-T(2,3)")
    assert geography.mirror_report(report) == mirrored
    assert geography.mirror_report(geography.mirror_report(report)) == report


def test_figure_eight_report_is_amphicheiral(engine):
    _, report = engine.report("4_1")
    reflected = geography.mirror_report(report)
    assert reflected.knot == normalize(mirror(engine.knot("4_1")))
    assert reflected.model_copy(update={"knot": report.knot}) == report


def test_standard_box_covers_apexes_and_region_corner(engine):
    box = geography.standard_box(engine.bundle("T(2,3)"))
    assert (box.e_min, box.e_max, box.h_max) == (-14, 10, 8)
    family = geography.standard_box(invariants.bundle(family_expression(1)))
    assert family.e_min <= 80 - 8 and family.e_max >= 80 + 8


def test_large_multiplicities_skip_combinations(registry):
    bundle = invariants.bundle(torus(2, 3, coefficient=300), registry=registry)
    kinds = {apex.certificate.kind for apex in bundle.apexes}
    assert kinds == {CertificateKind.GENUS_CONSTRUCTION}
