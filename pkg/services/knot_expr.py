# ================================================================
# services/knot_expr.py: knot expression grammar and normal form
# ================================================================
"""
Knot expressions are formal connected sums of signed torus knots and
registry-named knots:

    expr := term { "#" term }
    term := [ "+" | "-" ] [ integer "*" ] base
    base := "T(" integer "," integer ")" | name

Names may start with a digit as long as they are not purely numeric,
so "4_1" reads as a name while "4*T(2,3)" reads as a multiplicity.
"""
from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from core.exceptions import ExpressionSyntaxError, InvalidKnotError, UnknownKnotError
from core.registry import KnotRegistry, get_registry
from models.models import UNKNOT_NAME, KnotBase, KnotExpr, NamedKnot, Term, TorusKnot

_WORD = re.compile(r"[A-Za-z0-9_]+")
_INTEGER = re.compile(r"[0-9]+")
_SEPARATOR = " # "


# ================================================================
#  Parser
# ================================================================
class _Parser:
    def __init__(self, text: str, registry: KnotRegistry):
        self.text = text
        self.pos = 0
        self.registry = registry

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expect(self, char: str) -> None:
        if self._peek() != char:
            found = self._peek() or "end of input"
            raise ExpressionSyntaxError(f"expected '{char}', found '{found}'", self.pos)
        self.pos += 1

    def _match(self, pattern: re.Pattern, what: str) -> Tuple[str, int]:
        self._skip_ws()
        found = pattern.match(self.text, self.pos)
        if not found:
            raise ExpressionSyntaxError(f"expected {what}", self.pos)
        start = self.pos
        self.pos = found.end()
        return found.group(), start

    def parse(self) -> KnotExpr:
        if not self.text.strip():
            raise ExpressionSyntaxError("empty expression", 0)
        terms = [self._term()]
        while self._peek() == "#":
            self.pos += 1
            terms.append(self._term())
        if self._peek():
            raise ExpressionSyntaxError(f"unexpected '{self._peek()}'", self.pos)
        # "U" is the empty sum
        return KnotExpr(terms=tuple(term for term in terms if not _is_unknot_name(term.base)))

    def _term(self) -> Term:
        sign = 1
        if self._peek() in ("+", "-"):
            sign = -1 if self._peek() == "-" else 1
            self.pos += 1
        word, start = self._match(_WORD, "a knot or a multiplicity")
        coefficient = 1
        if word.isdigit():
            self._expect("*")
            coefficient = int(word)
            if coefficient == 0:
                raise InvalidKnotError(f"zero multiplicity at position {start}")
            word, start = self._match(_WORD, "a knot")
        return Term(coefficient=sign * coefficient, base=self._base(word, start))

    def _base(self, word: str, start: int) -> KnotBase:
        if word == "T" and self._peek() == "(":
            self.pos += 1
            p, _ = self._match(_INTEGER, "an integer")
            self._expect(",")
            q, _ = self._match(_INTEGER, "an integer")
            self._expect(")")
            return TorusKnot(p=int(p), q=int(q))
        if word.isdigit():
            raise ExpressionSyntaxError("expected a knot name", start)
        if word != UNKNOT_NAME and not self.registry.has_named(word):
            raise UnknownKnotError(f"unknown knot '{word}' (not in the registry)")
        return NamedKnot(name=word)


def _is_unknot_name(base: KnotBase) -> bool:
    return isinstance(base, NamedKnot) and base.is_unknot


def parse(text: str, registry: Optional[KnotRegistry] = None) -> KnotExpr:
    """Parse an expression string into an (unnormalized) KnotExpr."""
    return _Parser(text, registry or get_registry()).parse()


# ================================================================
#  Normal form
# ================================================================
def normalize(knot: KnotExpr) -> KnotExpr:
    merged: Dict[tuple, List] = {}
    for term in knot.terms:
        base = term.base
        if isinstance(base, TorusKnot):
            base = base.normalized()
        if base.is_unknot:
            continue
        key = base.sort_key()
        if key in merged:
            merged[key][1] += term.coefficient
        else:
            merged[key] = [base, term.coefficient]

    terms = tuple(
        Term(coefficient=coefficient, base=base)
        for _, (base, coefficient) in sorted(merged.items())
        if coefficient != 0
    )
    return KnotExpr(terms=terms)


def mirror(knot: KnotExpr) -> KnotExpr:
    return KnotExpr(
        terms=tuple(Term(coefficient=-term.coefficient, base=term.base) for term in knot.terms)
    )


def to_text(knot: KnotExpr) -> str:
    if knot.is_unknot:
        return UNKNOT_NAME

    def render(term: Term) -> str:
        if term.coefficient == 1:
            return str(term.base)
        if term.coefficient == -1:
            return f"-{term.base}"
        return f"{term.coefficient}*{term.base}"

    return _SEPARATOR.join(render(term) for term in knot.terms)


def torus(p: int, q: int, coefficient: int = 1) -> KnotExpr:
    """Shorthand for the one-term expression coefficient*T(p,q)."""
    return KnotExpr(terms=(Term(coefficient=coefficient, base=TorusKnot(p=p, q=q)),))


def family_expression(c: int) -> KnotExpr:
    """c*T(5,9) # -(c+1)*T(5,13), the family whose delta-line raises the gamma4 bound."""
    if c < 1:
        raise InvalidKnotError("the family is defined for c >= 1")
    return KnotExpr(
        terms=(
            Term(coefficient=c, base=TorusKnot(p=5, q=9)),
            Term(coefficient=-(c + 1), base=TorusKnot(p=5, q=13)),
        )
    )
