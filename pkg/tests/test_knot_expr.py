# tests/test_knot_expr.py
import random
from math import gcd

import pytest

from core.exceptions import ExpressionSyntaxError, InvalidKnotError, UnknownKnotError
from models.models import KnotExpr, NamedKnot, Term, TorusKnot
from services.knot_expr import family_expression, mirror, normalize, parse, to_text, torus


def random_expression(rng: random.Random) -> KnotExpr:
    terms = []
    for _ in range(rng.randint(0, 4)):
        coefficient = rng.choice([-3, -2, -1, 1, 2, 3])
        if rng.random() < 0.2:
            base = NamedKnot(name="4_1")
        else:
            while True:
                p, q = rng.randint(1, 9), rng.randint(2, 17)
                if gcd(p, q) == 1:
                    break
            base = TorusKnot(p=p, q=q)
        terms.append(Term(coefficient=coefficient, base=base))
    return KnotExpr(terms=tuple(terms))


# ==========================
# ✅ parse
# ==========================
def test_parse_single_torus_knot(registry):
    knot = parse("T(2,3)", registry)
    assert knot.terms == (Term(coefficient=1, base=TorusKnot(p=2, q=3)),)


def test_parse_family_member(registry):
    knot = parse("2*T(5,9) # -3*T(5,13)", registry)
    assert [(t.coefficient, str(t.base)) for t in knot.terms] == [(2, "T(5,9)"), (-3, "T(5,13)")]


def test_parse_is_whitespace_insensitive(registry):
    assert parse("  -2 * T( 5 , 9 )#T(2,3) ", registry) == parse("-2*T(5,9) # T(2,3)", registry)


def test_parse_named_knot_starting_with_digit(registry):
    knot = parse("-4_1 # 3*T(2,5)", registry)
    assert knot.terms[0] == Term(coefficient=-1, base=NamedKnot(name="4_1"))
    assert knot.terms[1].coefficient == 3


def test_parse_rejects_non_coprime_indices(registry):
    with pytest.raises(InvalidKnotError, match="gcd"):
        parse("T(2,4)", registry)


def test_parse_rejects_zero_index(registry):
    with pytest.raises(InvalidKnotError):
        parse("T(0,3)", registry)


def test_parse_rejects_unknown_names(registry):
    with pytest.raises(UnknownKnotError):
        parse("T(2,3) # 5_2", registry)


def test_parse_rejects_zero_multiplicity(registry):
    with pytest.raises(InvalidKnotError):
        parse("0*T(2,3)", registry)


def test_parse_enforces_coefficient_bound(registry):
    with pytest.raises(InvalidKnotError):
        parse("1000001*T(2,3)", registry)


@pytest.mark.parametrize(
    "text, position",
    [
        ("", 0),
        ("T(2,3) #", 8),
        ("T(2,3", 5),
        ("2 T(2,3)", 2),
        ("T(2,3) T(2,5)", 7),
        ("7", 1),
    ],
)
def test_syntax_errors_report_position(registry, text, position):
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse(text, registry)
    assert excinfo.value.position == position
    assert f"at position {position}" in excinfo.value.detail


# ==========================
# ✅ normalize / mirror / to_text
# ==========================
def test_normalize_swaps_indices():
    assert normalize(torus(3, 2)) == torus(2, 3)


def test_normalize_drops_unknot_bases():
    assert normalize(torus(1, 7)).is_unknot


def test_normalize_merges_cancelling_terms(registry):
    assert normalize(parse("T(2,3) # -T(3,2)", registry)) == KnotExpr()


def test_normalize_orders_torus_knots_before_names(registry):
    knot = normalize(parse("4_1 # T(5,13) # T(2,3) # T(3,2)", registry))
    assert to_text(knot) == "2*T(2,3) # T(5,13) # 4_1"


def test_mirror_examples():
    assert to_text(mirror(torus(2, 3))) == "-T(2,3)"
    assert to_text(normalize(mirror(family_expression(2)))) == "-2*T(5,9) # 3*T(5,13)"
    assert mirror(KnotExpr()) == KnotExpr()


def test_to_text_examples():
    assert to_text(torus(2, 3)) == "T(2,3)"
    assert to_text(torus(2, 3, coefficient=-1)) == "-T(2,3)"
    assert to_text(family_expression(2)) == "2*T(5,9) # -3*T(5,13)"
    assert to_text(KnotExpr()) == "U"


def test_unknot_round_trips(registry):
    assert parse(to_text(KnotExpr()), registry) == KnotExpr()
    assert parse("-U # T(2,3) # 2*U", registry) == torus(2, 3)


def test_family_expression_requires_positive_c():
    with pytest.raises(InvalidKnotError):
        family_expression(0)


def test_expression_properties_on_random_expressions(registry):
    rng = random.Random(20240607)
    for _ in range(300):
        knot = random_expression(rng)
        canonical = normalize(knot)
        assert normalize(canonical) == canonical
        assert mirror(mirror(knot)) == knot
        assert normalize(mirror(knot)) == mirror(canonical)
        assert parse(to_text(canonical), registry) == canonical


@pytest.mark.parametrize("p, q", [(2, 3), (3, 7), (5, 9), (5, 13), (7, 30)])
def test_torus_index_symmetry(p, q):
    assert normalize(torus(p, q)) == normalize(torus(q, p))
