"""Seeded random expressions, states and local unitaries for property checks.

Monomial lengths are uniform up to ``max_len``, modes are drawn uniformly
from the allowed set and coefficients uniformly from the complex unit disk.
"""

from __future__ import annotations

import numpy as np

from carlock.expr import (
    LadderOp,
    Monomial,
    OperatorExpr,
    ParityClass,
    adjoint,
    add,
    normal_order,
    parity_of,
)
from carlock.fock import StateVector
from carlock.locality import LocalUnitary


def unit_disk(rng: np.random.Generator) -> complex:
    r = np.sqrt(rng.uniform())
    phi = rng.uniform(0, 2 * np.pi)
    return complex(r * np.cos(phi), r * np.sin(phi))


def random_raw_expr(
    rng: np.random.Generator,
    modes,
    max_terms: int = 3,
    max_len: int = 4,
    parity: ParityClass | None = None,
) -> OperatorExpr:
    """A random expression as written, without normal ordering.

    With ``parity`` set to EVEN or ODD only lengths of that parity are drawn.
    """
    modes = sorted(modes)
    lengths = list(range(max_len + 1))
    if parity is ParityClass.EVEN:
        lengths = [n for n in lengths if n % 2 == 0]
    elif parity is ParityClass.ODD:
        lengths = [n for n in lengths if n % 2 == 1]
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        length = int(rng.choice(lengths))
        factors = tuple(
            LadderOp(int(rng.choice(modes)), bool(rng.integers(2))) for _ in range(length)
        )
        terms.append(Monomial(unit_disk(rng), factors))
    return OperatorExpr(tuple(terms))


def random_expr(rng, modes, max_terms=3, max_len=4, parity=None) -> OperatorExpr:
    """Like :func:`random_raw_expr` but canonical and guaranteed nonzero."""
    while True:
        e = normal_order(random_raw_expr(rng, modes, max_terms, max_len, parity))
        if not e.is_zero():
            return e


def random_hermitian(rng, modes, max_terms=3, max_len=4, parity=None) -> OperatorExpr:
    while True:
        e = random_expr(rng, modes, max_terms, max_len, parity)
        h = add(e, adjoint(e))
        if not h.is_zero() and (parity is None or parity_of(h) is parity):
            return h


def random_state(rng: np.random.Generator, n_modes: int) -> StateVector:
    dim = 1 << n_modes
    return StateVector.normalized(n_modes, rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_even_unitary(rng, modes, max_terms=3, max_len=4) -> LocalUnitary:
    """``exp(i theta H)`` for a random even Hermitian ``H`` on ``modes``."""
    h = random_hermitian(rng, modes, max_terms, max_len, ParityClass.EVEN)
    return LocalUnitary(h, float(rng.uniform(0, 2 * np.pi)))
