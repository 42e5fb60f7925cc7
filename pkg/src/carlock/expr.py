"""Symbolic algebra of fermionic ladder operators.

An :class:`OperatorExpr` is a formal sum of complex-weighted products of
creation (``a3^``) and annihilation (``a3``) operators.  The canonical form
puts every creation left of every annihilation, creations in ascending mode
order and annihilations in descending mode order, so that the adjoint of a
canonical monomial is again canonical up to sign.

Products are reduced with the canonical anti-commutation relations

    {a_i, a_j} = 0,   {a_i^, a_j^} = 0,   {a_i, a_j^} = delta_ij

applied as adjacent-transposition rewrites.
"""

from __future__ import annotations

import enum
import numbers
from dataclasses import dataclass
from typing import Iterable

PRUNE_TOL = 1e-12


@dataclass(frozen=True, order=True)
class LadderOp:
    """A single creation (``dagger=True``) or annihilation operator."""

    mode: int
    dagger: bool = False

    def __post_init__(self):
        if isinstance(self.mode, bool) or not isinstance(self.mode, numbers.Integral):
            raise TypeError(f"mode index must be an integer, got {self.mode!r}")
        if self.mode < 1:
            raise ValueError(f"mode index must be >= 1, got {self.mode}")

    def adjoint(self) -> LadderOp:
        return LadderOp(self.mode, not self.dagger)

    def __str__(self):
        return f"a{self.mode}^" if self.dagger else f"a{self.mode}"


@dataclass(frozen=True)
class Monomial:
    """``coeff`` times the ordered product of ``factors`` (empty = identity)."""

    coeff: complex
    factors: tuple[LadderOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def degree(self) -> int:
        return len(self.factors)

    def is_canonical(self) -> bool:
        keys = [_order_key(op) for op in self.factors]
        return all(k1 < k2 for k1, k2 in zip(keys, keys[1:]))


class ParityClass(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"
    ZERO = "zero"


@dataclass(frozen=True)
class OperatorExpr:
    """A formal sum of monomials.

    Instances are immutable.  Arithmetic operators return canonical
    (normal-ordered) results; the constructor itself stores terms verbatim,
    which is what the parser relies on.
    """

    terms: tuple[Monomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        return add(self, as_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, scale(-1, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), scale(-1, self))

    def __neg__(self):
        return scale(-1, self)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return scale(other, self)
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return scale(other, self)
        return multiply(as_expr(other), self)

    def __str__(self):
        return format_expr(self)


def _order_key(op: LadderOp) -> tuple[int, int]:
    # creations first and ascending; annihilations after and descending
    return (0, op.mode) if op.dagger else (1, -op.mode)


def canonical_sort_key(factors: tuple[LadderOp, ...]):
    return (len(factors), tuple(_order_key(op) for op in factors))


# ---------------------------------------------------------------- builders

def ladder(mode: int, dagger: bool = False) -> OperatorExpr:
    return OperatorExpr((Monomial(1.0, (LadderOp(mode, dagger),)),))


def cre(mode: int) -> OperatorExpr:
    """Creation operator on ``mode``."""
    return ladder(mode, True)


def ann(mode: int) -> OperatorExpr:
    """Annihilation operator on ``mode``."""
    return ladder(mode, False)


def identity(coeff: complex = 1.0) -> OperatorExpr:
    return OperatorExpr((Monomial(coeff),)) if abs(coeff) >= PRUNE_TOL else OperatorExpr()


def zero() -> OperatorExpr:
    return OperatorExpr()


def monomial_expr(factors: Iterable[LadderOp], coeff: complex = 1.0) -> OperatorExpr:
    """Wrap a single factor sequence as an (unordered) expression."""
    return OperatorExpr((Monomial(coeff, tuple(factors)),))


def as_expr(obj) -> OperatorExpr:
    if isinstance(obj, OperatorExpr):
        return obj
    if isinstance(obj, numbers.Number):
        return identity(complex(obj))
    raise TypeError(f"cannot interpret {type(obj).__name__} as an operator expression")


# ----------------------------------------------------------- normal order

def _reduce_monomial(coeff: complex, factors: tuple[LadderOp, ...], acc: dict) -> None:
    stack = [(coeff, factors)]
    while stack:
        c, fs = stack.pop()
        for k in range(len(fs) - 1):
            x, y = fs[k], fs[k + 1]
            kx, ky = _order_key(x), _order_key(y)
            if kx < ky:
                continue
            if kx == ky:
                break  # a_i a_i = a_i^ a_i^ = 0
            stack.append((-c, fs[:k] + (y, x) + fs[k + 2:]))
            if x.mode == y.mode and not x.dagger and y.dagger:
                stack.append((c, fs[:k] + fs[k + 2:]))
            break
        else:
            acc[fs] = acc.get(fs, 0j) + c


def _collect(acc: dict) -> OperatorExpr:
    terms = [
        Monomial(c, fs)
        for fs, c in sorted(acc.items(), key=lambda item: canonical_sort_key(item[0]))
        if abs(c) >= PRUNE_TOL
    ]
    return OperatorExpr(tuple(terms))


def normal_order(e: OperatorExpr) -> OperatorExpr:
    """Return the canonical form of ``e``.

    Like terms are merged and coefficients with magnitude below ``PRUNE_TOL``
    are dropped.  The result is a fixed point: applying ``normal_order`` again
    returns a structurally identical expression.
    """
    acc: dict = {}
    for term in e.terms:
        _reduce_monomial(term.coeff, term.factors, acc)
    return _collect(acc)


def add(e1: OperatorExpr, e2: OperatorExpr) -> OperatorExpr:
    return normal_order(OperatorExpr(e1.terms + e2.terms))


def scale(c: complex, e: OperatorExpr) -> OperatorExpr:
    c = complex(c)
    return normal_order(OperatorExpr(tuple(Monomial(c * t.coeff, t.factors) for t in e.terms)))


def _raw_product(e1: OperatorExpr, e2: OperatorExpr) -> OperatorExpr:
    return OperatorExpr(tuple(
        Monomial(t1.coeff * t2.coeff, t1.factors + t2.factors)
        for t1 in e1.terms
        for t2 in e2.terms
    ))


def _scale_raw(c: complex, e: OperatorExpr) -> OperatorExpr:
    return OperatorExpr(tuple(Monomial(c * t.coeff, t.factors) for t in e.terms))


def multiply(e1: OperatorExpr, e2: OperatorExpr) -> OperatorExpr:
    return normal_order(_raw_product(e1, e2))


def adjoint(e: OperatorExpr) -> OperatorExpr:
    return normal_order(OperatorExpr(tuple(
        Monomial(t.coeff.conjugate(), tuple(op.adjoint() for op in reversed(t.factors)))
        for t in e.terms
    )))


def commutator(e1: OperatorExpr, e2: OperatorExpr) -> OperatorExpr:
    """Canonical form of ``e1 e2 - e2 e1``."""
    return normal_order(OperatorExpr(
        _raw_product(e1, e2).terms + _scale_raw(-1, _raw_product(e2, e1)).terms
    ))


def anticommutator(e1: OperatorExpr, e2: OperatorExpr) -> OperatorExpr:
    """Canonical form of ``e1 e2 + e2 e1``."""
    return normal_order(OperatorExpr(_raw_product(e1, e2).terms + _raw_product(e2, e1).terms))


# --------------------------------------------------------------- grading

def parity_of(e: OperatorExpr) -> ParityClass:
    """Classify ``e`` by the parity of its monomial degrees.

    Expects canonical input; a non-canonical expression such as ``a1 a1``
    would be graded by its written degree, not by its value.
    """
    if not e.terms:
        return ParityClass.ZERO
    parities = {t.degree % 2 for t in e.terms}
    if parities == {0}:
        return ParityClass.EVEN
    if parities == {1}:
        return ParityClass.ODD
    return ParityClass.MIXED


def even_odd_split(e: OperatorExpr) -> tuple[OperatorExpr, OperatorExpr]:
    e = normal_order(e)
    even = OperatorExpr(tuple(t for t in e.terms if t.degree % 2 == 0))
    odd = OperatorExpr(tuple(t for t in e.terms if t.degree % 2 == 1))
    return even, odd


def support(e: OperatorExpr) -> frozenset[int]:
    return frozenset(op.mode for t in e.terms for op in t.factors)


def relabel(e: OperatorExpr, mapping: dict[int, int]) -> OperatorExpr:
    """Rename modes through ``mapping``; factor order is kept as written."""
    return OperatorExpr(tuple(
        Monomial(t.coeff, tuple(LadderOp(mapping[op.mode], op.dagger) for op in t.factors))
        for t in e.terms
    ))


# ---------------------------------------------------------- pretty-print

def _fmt_real(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_term(t: Monomial, first: bool) -> str:
    body = " ".join(str(op) for op in t.factors)
    c = t.coeff
    if c.imag == 0:
        sign = "-" if c.real < 0 else "+"
        mag = abs(c.real)
        ctext = "" if (mag == 1 and body) else _fmt_real(mag)
    else:
        sign = "+"
        im_sign = "-" if c.imag < 0 else "+"
        ctext = f"({_fmt_real(c.real)}{im_sign}{_fmt_real(abs(c.imag))}i)"
    text = " ".join(part for part in (ctext, body) if part)
    if first:
        return ("-" + text) if sign == "-" else text
    return f" {sign} {text}"


def format_expr(e: OperatorExpr) -> str:
    """Render ``e`` in the expression grammar accepted by :func:`parse_expr`.

    The zero expression prints as ``0``.
    """
    if not e.terms:
        return "0"
    return "".join(_fmt_term(t, i == 0) for i, t in enumerate(e.terms))
