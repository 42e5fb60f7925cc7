"""Recursive-descent parser for ladder-operator expressions.

Grammar (juxtaposition is the operator product)::

    expr    := [sign] term { ("+" | "-") term }
    term    := [ coeff ] factor { factor } | coeff
    factor  := ladder | "(" expr ")"
    ladder  := "a" integer [ "^" ]
    coeff   := "(" float [ ("+"|"-") float "i" ] ")" | float

``a3`` is the annihilator of mode 3 and ``a3^`` its creator.  A leading sign
on the first term is accepted so that printed expressions with a negative
first coefficient parse back.  Parsing distributes products over sums but
performs no reordering; call :func:`carlock.expr.normal_order` for that.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from carlock.expr import LadderOp, Monomial, OperatorExpr

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"

_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<badladder>a(?:\d*\.\d+|\d+\.\d*))
  | (?P<ladder>a(?P<mode>\d+)(?P<dag>\^)?)
  | (?P<number>{_NUMBER})
  | (?P<punct>[()+\-])
  | (?P<imag>i)
  | (?P<other>.)
    """,
    re.VERBOSE,
)


class ExprSyntaxError(ValueError):
    """Raised for malformed expressions.

    Attributes:
        position: zero-based character offset of the offending token.
        expected: names of the tokens that would have been accepted.
    """

    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"column {position + 1}: {message}{detail}")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[_Token]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "badladder":
            raise ExprSyntaxError(f"mode index must be an integer, got {m.group()[1:]!r}", m.start())
        if kind == "other":
            if m.group() == "a":
                raise ExprSyntaxError("ladder operator needs a mode index", m.start(), frozenset({"integer"}))
            raise ExprSyntaxError(f"unexpected character {m.group()!r}", m.start())
        if kind == "ladder" and int(m.group("mode")) < 1:
            raise ExprSyntaxError("mode index must be >= 1", m.start())
        tokens.append(_Token(kind, m.group(), m.start()))
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def fail(self, expected) -> None:
        got = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
        raise ExprSyntaxError(f"unexpected {got}", self.tok.pos, frozenset(expected))

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            self.fail({repr(text)})
        self.i += 1

    def parse(self) -> list[Monomial]:
        terms = self.expr()
        if self.tok.kind != "end":
            self.fail({"'+'", "'-'", "end of input"})
        return terms

    def expr(self) -> list[Monomial]:
        sign = 1.0
        if self.tok.text in ("+", "-"):
            sign = -1.0 if self.tok.text == "-" else 1.0
            self.i += 1
        terms = [Monomial(sign * t.coeff, t.factors) for t in self.term()]
        while self.tok.text in ("+", "-") and self.tok.kind == "punct":
            sign = -1.0 if self.tok.text == "-" else 1.0
            self.i += 1
            terms.extend(Monomial(sign * t.coeff, t.factors) for t in self.term())
        return terms

    def term(self) -> list[Monomial]:
        coeff = self.try_coeff()
        if coeff is None:
            if self.tok.kind != "ladder" and self.tok.text != "(":
                self.fail({"ladder", "'('", "number"})
            acc = [Monomial(1.0)]
        else:
            acc = [Monomial(coeff)]
        while self.tok.kind == "ladder" or self.tok.text == "(":
            rhs = self.factor()
            acc = [Monomial(l.coeff * r.coeff, l.factors + r.factors) for l in acc for r in rhs]
        return acc

    def factor(self) -> list[Monomial]:
        if self.tok.kind == "ladder":
            text = self.tok.text
            self.i += 1
            dagger = text.endswith("^")
            mode = int(text[1:-1] if dagger else text[1:])
            return [Monomial(1.0, (LadderOp(mode, dagger),))]
        self.expect("(")
        inner = self.expr()
        self.expect(")")
        return inner

    def try_coeff(self) -> complex | None:
        """Consume a coefficient if one starts here, else leave the position alone."""
        if self.tok.kind == "number":
            value = float(self.tok.text)
            self.i += 1
            return complex(value)
        if self.tok.text != "(":
            return None
        start = self.i
        self.i += 1
        try:
            re_part = self._signed_number()
            im_part = 0.0
            if self.tok.text in ("+", "-"):
                sign = -1.0 if self.tok.text == "-" else 1.0
                self.i += 1
                if self.tok.kind != "number":
                    raise _Backtrack
                im_part = sign * float(self.tok.text)
                self.i += 1
                if self.tok.kind != "imag":
                    raise _Backtrack
                self.i += 1
            if self.tok.text != ")":
                raise _Backtrack
            self.i += 1
            return complex(re_part, im_part)
        except _Backtrack:
            self.i = start
            return None

    def _signed_number(self) -> float:
        sign = 1.0
        if self.tok.text in ("+", "-"):
            sign = -1.0 if self.tok.text == "-" else 1.0
            self.i += 1
        if self.tok.kind != "number":
            raise _Backtrack
        value = float(self.tok.text)
        self.i += 1
        return sign * value


class _Backtrack(Exception):
    pass


def parse_expr(text: str) -> OperatorExpr:
    """Parse ``text`` into an expression without normal ordering it.

    >>> str(parse_expr("a1 a2 a3^"))
    'a1 a2 a3^'

    Terms whose coefficient is exactly zero, such as a bare ``0``, are dropped.

    Raises:
        ExprSyntaxError: on any grammar violation, including mode index 0
            and non-integer mode indices.
    """
    return OperatorExpr(tuple(t for t in _Parser(text).parse() if t.coeff != 0))
