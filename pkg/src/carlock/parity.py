"""Fermion-parity sectors: the parity operator, compliance checks, dephasing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from carlock.expr import OperatorExpr, ParityClass, normal_order, parity_of
from carlock.fock import DensityMatrix, StateVector, as_density, check_n_modes

SSR_TOL = 1e-10


@dataclass(frozen=True)
class SsrStateReport:
    compliant: bool
    coherence_norm: float
    tolerance: float = SSR_TOL

    def to_dict(self) -> dict:
        return {"compliant": self.compliant, "coherence_norm": self.coherence_norm, "tolerance": self.tolerance}


def parity_diagonal(n_modes: int) -> np.ndarray:
    """``(-1)**N`` on each basis state, as a real vector."""
    n_modes = check_n_modes(n_modes)
    weights = np.bitwise_count(np.arange(1 << n_modes, dtype=np.uint32)).astype(np.int64)
    return (1 - 2 * (weights & 1)).astype(float)


def parity_operator(n_modes: int) -> np.ndarray:
    return np.diag(parity_diagonal(n_modes)).astype(complex)


def sector_projectors(n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the even and odd particle-number sectors."""
    d = parity_diagonal(n_modes)
    return np.diag((d > 0).astype(complex)), np.diag((d < 0).astype(complex))


def state_ssr_check(state: StateVector | DensityMatrix, tol: float = SSR_TOL) -> SsrStateReport:
    """Measure the coherence between the even and odd sectors of ``state``.

    The coherence norm is the largest entry magnitude of the even-odd block of
    the density matrix; a pure state is converted to its projector first.
    """
    rho = as_density(state)
    even = parity_diagonal(rho.n_modes) > 0
    block = rho.matrix[np.ix_(even, ~even)]
    norm = float(np.max(np.abs(block))) if block.size else 0.0
    return SsrStateReport(norm <= tol, norm, tol)


def ssr_dephase(state: StateVector | DensityMatrix) -> DensityMatrix:
    rho = as_density(state)
    even = parity_diagonal(rho.n_modes) > 0
    # zero the cross-sector blocks: P_e rho P_e + P_o rho P_o
    mask = np.equal.outer(even, even)
    return DensityMatrix(rho.n_modes, np.where(mask, rho.matrix, 0))


def operator_ssr_allowed(e: OperatorExpr) -> bool:
    """True when ``e`` is even (or zero), i.e. an operation the SSR permits."""
    return parity_of(normal_order(e)) in (ParityClass.EVEN, ParityClass.ZERO)
