"""Dense Fock-space representation of ladder-operator expressions.

Basis states of ``n`` modes are indexed by integers whose most significant bit
is the occupation of mode 1.  Ladder operators use the Jordan-Wigner form

    a_i = Z x ... x Z x s x I x ... x I,    s = |0><1|

with ``i - 1`` leading ``Z`` factors, so ``a_i`` picks up a sign
``(-1)**(occupied modes before i)``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from carlock.expr import LadderOp, OperatorExpr, monomial_expr, support

MAX_MODES = 12
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
CLUSTER_TOL = 1e-8


class AnnihilatedStateError(ValueError):
    """The operator maps the state to the zero vector."""


def check_n_modes(n_modes: int) -> int:
    if not isinstance(n_modes, (int, np.integer)) or not 1 <= n_modes <= MAX_MODES:
        raise ValueError(f"n_modes must be an integer in [1, {MAX_MODES}], got {n_modes!r}")
    return int(n_modes)


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return max_abs(m - m.conj().T) <= tol


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return max_abs(m.conj().T @ m - np.eye(m.shape[0])) <= tol


# ------------------------------------------------------------------ states

@dataclass(frozen=True)
class FockBasisState:
    occupations: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.occupations):
            raise ValueError(f"occupations must be 0/1, got {self.occupations}")

    @property
    def n_modes(self) -> int:
        return len(self.occupations)

    @property
    def index(self) -> int:
        return int("".join(map(str, self.occupations)) or "0", 2)

    @classmethod
    def from_index(cls, index: int, n_modes: int) -> FockBasisState:
        return cls(tuple(int(b) for b in format(index, f"0{n_modes}b")))

    @classmethod
    def from_string(cls, bits: str) -> FockBasisState:
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"basis label must be a non-empty 0/1 string, got {bits!r}")
        return cls(tuple(int(b) for b in bits))

    def __str__(self):
        return "".join(map(str, self.occupations))


@dataclass(frozen=True, eq=False)
class StateVector:
    n_modes: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_n_modes(self.n_modes)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (1 << self.n_modes,):
            raise ValueError(f"expected {1 << self.n_modes} amplitudes, got {amps.shape[0]}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, n_modes: int, amplitudes) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise AnnihilatedStateError("cannot normalize the zero vector")
        return cls(n_modes, amps / norm)

    @property
    def dim(self) -> int:
        return 1 << self.n_modes

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(self.n_modes, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_modes: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_n_modes(self.n_modes)
        m = np.array(self.matrix, dtype=complex)
        dim = 1 << self.n_modes
        if m.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {m.shape}")
        if not is_hermitian(m):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {np.trace(m).real!r}, not 1")
        if np.linalg.eigvalsh(m).min() < -1e-8:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 1 << self.n_modes


def as_density(state: StateVector | DensityMatrix) -> DensityMatrix:
    return state.density_matrix() if isinstance(state, StateVector) else state


def vacuum(n_modes: int) -> StateVector:
    n_modes = check_n_modes(n_modes)
    amps = np.zeros(1 << n_modes, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_modes, amps)


def basis_state(bits: str) -> StateVector:
    b = FockBasisState.from_string(bits)
    amps = np.zeros(1 << b.n_modes, dtype=complex)
    amps[b.index] = 1.0
    return StateVector(b.n_modes, amps)


def prepare(e: OperatorExpr, n_modes: int) -> StateVector:
    """Normalized image of the vacuum under ``e``.

    ``prepare(parse_expr("a1^ + 1"), 2)`` is ``(a1^|0> + |0>)/sqrt(2)``.
    """
    return apply_expr(vacuum(n_modes), e)


# -------------------------------------------------------- Jordan-Wigner map

_PARITY_SIGN = 1 - 2 * (np.bitwise_count(np.arange(1 << MAX_MODES, dtype=np.uint32)) & 1).astype(np.int64)


def _monomial_action(factors: tuple[LadderOp, ...], n_modes: int):
    """Columns map to ``rows`` with weight ``amp`` (0 where annihilated)."""
    idx = np.arange(1 << n_modes)
    amp = np.ones(1 << n_modes)
    for op in reversed(factors):
        shift = n_modes - op.mode
        bit = 1 << shift
        occupied = (idx & bit) != 0
        sign = _PARITY_SIGN[idx >> (shift + 1)]
        if op.dagger:
            amp = amp * ~occupied * sign
            idx = idx | bit
        else:
            amp = amp * occupied * sign
            idx = idx & ~bit
    return idx, amp


def jw_matrix(e: OperatorExpr, n_modes: int) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``e`` in the occupation-number basis.

    Raises:
        ValueError: if ``e`` acts on a mode outside ``1..n_modes``.
    """
    n_modes = check_n_modes(n_modes)
    modes = support(e)
    if modes and max(modes) > n_modes:
        raise ValueError(f"expression acts on mode {max(modes)} but n_modes={n_modes}")
    dim = 1 << n_modes
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for term in e.terms:
        rows, amp = _monomial_action(term.factors, n_modes)
        alive = amp != 0
        np.add.at(out, (rows[alive], cols[alive]), term.coeff * amp[alive])
    return out


@lru_cache(maxsize=None)
def ladder_matrices(n_modes: int) -> tuple[np.ndarray, ...]:
    """Annihilation matrices ``(A_1, ..., A_n)``; read-only, cached."""
    mats = []
    for mode in range(1, n_modes + 1):
        m = jw_matrix(monomial_expr((LadderOp(mode),)), n_modes)
        m.setflags(write=False)
        mats.append(m)
    return tuple(mats)


def _matrix_for(state: StateVector | DensityMatrix, e: OperatorExpr | np.ndarray) -> np.ndarray:
    if isinstance(e, OperatorExpr):
        return jw_matrix(e, state.n_modes)
    m = np.asarray(e)
    if m.shape != (state.dim, state.dim):
        raise ValueError(f"operator shape {m.shape} does not match state dimension {state.dim}")
    return m


def _check_support(e: OperatorExpr, n_modes: int) -> None:
    modes = support(e)
    if modes and max(modes) > n_modes:
        raise ValueError(f"expression acts on mode {max(modes)} but the state has {n_modes} modes")


def expectation(state: StateVector | DensityMatrix, e: OperatorExpr | np.ndarray) -> complex:
    """``<psi|M|psi>`` or ``tr(rho M)`` for an expression or a matrix ``M``."""
    if not isinstance(e, OperatorExpr):
        m = _matrix_for(state, e)
        if isinstance(state, StateVector):
            return complex(np.vdot(state.amplitudes, m @ state.amplitudes))
        return complex(np.trace(state.matrix @ m))
    _check_support(e, state.n_modes)
    cols = np.arange(state.dim)
    total = 0j
    for term in e.terms:
        rows, amp = _monomial_action(term.factors, state.n_modes)
        if isinstance(state, StateVector):
            psi = state.amplitudes
            total += term.coeff * np.sum(psi[rows].conj() * amp * psi)
        else:
            total += term.coeff * np.sum(amp * state.matrix[cols, rows])
    return complex(total)


def apply_expr(
    state: StateVector,
    e: OperatorExpr | np.ndarray,
    check_unitary: bool = False,
) -> StateVector:
    """Apply ``e`` to ``state`` and renormalize.

    Raises:
        ValueError: if ``check_unitary`` is set and the matrix is not unitary.
        AnnihilatedStateError: if the image is the zero vector.
    """
    if check_unitary or not isinstance(e, OperatorExpr):
        m = _matrix_for(state, e)
        if check_unitary and not is_unitary(m):
            raise ValueError("operator is not unitary")
        image = m @ state.amplitudes
    else:
        _check_support(e, state.n_modes)
        image = np.zeros(state.dim, dtype=complex)
        for term in e.terms:
            rows, amp = _monomial_action(term.factors, state.n_modes)
            np.add.at(image, rows, term.coeff * amp * state.amplitudes)
    if np.linalg.norm(image) < 1e-12:
        raise AnnihilatedStateError("operator annihilates the state")
    return StateVector.normalized(state.n_modes, image)


def evolve(state: StateVector | DensityMatrix, u: np.ndarray) -> StateVector | DensityMatrix:
    if isinstance(state, StateVector):
        return StateVector.normalized(state.n_modes, u @ state.amplitudes)
    m = u @ state.matrix @ u.conj().T
    return DensityMatrix(state.n_modes, (m + m.conj().T) / 2)


def exp_i_hermitian(m: np.ndarray, theta: float) -> np.ndarray:
    """``exp(i * theta * m)`` for Hermitian ``m``, via its eigenbasis."""
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    return (v * np.exp(1j * theta * w)) @ v.conj().T


def exponentiate_hermitian(e: OperatorExpr, theta: float, n_modes: int) -> np.ndarray:
    return exp_i_hermitian(jw_matrix(e, n_modes), theta)


# -------------------------------------------------------------- measurement

@dataclass(frozen=True, eq=False)
class Eigendecomposition:
    """Spectral projectors of a Hermitian matrix, one per eigenvalue cluster."""

    clusters: tuple[tuple[float, np.ndarray], ...]

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(value for value, _ in self.clusters)

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return tuple(p for _, p in self.clusters)


def eigendecompose(m: np.ndarray, cluster_tol: float = CLUSTER_TOL) -> Eigendecomposition:
    """Group the spectrum of ``m`` into clusters closer than ``cluster_tol``.

    Each cluster's eigenvalue is the mean of its members; its projector is
    built from the corresponding orthonormal eigenvectors.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    groups: list[list[int]] = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[k - 1] > cluster_tol:
            groups.append([k])
        else:
            groups[-1].append(k)
    clusters = []
    for g in groups:
        vecs = v[:, g]
        clusters.append((float(np.mean(w[g])), vecs @ vecs.conj().T))
    return Eigendecomposition(tuple(clusters))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the measurement outcomes, listed by eigenvalue."""

    outcomes: tuple[tuple[float, float], ...]

    def probability(self, value: float, tol: float = CLUSTER_TOL) -> float:
        return sum(p for v, p in self.outcomes if abs(v - value) <= tol)

    def total_variation(self, other: OutcomeDistribution, tol: float = CLUSTER_TOL) -> float:
        values: list[float] = []
        for v, _ in self.outcomes + other.outcomes:
            if all(abs(v - u) > tol for u in values):
                values.append(v)
        return 0.5 * sum(abs(self.probability(v, tol) - other.probability(v, tol)) for v in values)

    def nonzero(self, tol: float = 1e-12) -> tuple[tuple[float, float], ...]:
        return tuple((v, p) for v, p in self.outcomes if p > tol)


def outcome_distribution(
    state: StateVector | DensityMatrix, decomposition: Eigendecomposition
) -> OutcomeDistribution:
    rho = as_density(state).matrix
    return OutcomeDistribution(tuple(
        (value, float(np.real(np.trace(proj @ rho)))) for value, proj in decomposition.clusters
    ))


def measure(
    state: StateVector | DensityMatrix,
    m: np.ndarray | Eigendecomposition,
    cluster_tol: float = CLUSTER_TOL,
) -> tuple[OutcomeDistribution, DensityMatrix]:
    """Projective measurement of ``m`` with the outcome left unrecorded.

    Returns the outcome distribution and the post-measurement state
    ``sum_k P_k rho P_k`` over the eigenspace projectors ``P_k``.
    """
    rho = as_density(state)
    if isinstance(m, Eigendecomposition):
        decomposition = m
    else:
        m = np.asarray(m)
        if m.shape != (rho.dim, rho.dim):
            raise ValueError(f"operator shape {m.shape} does not match state dimension {rho.dim}")
        decomposition = eigendecompose(m, cluster_tol)
    dist = outcome_distribution(rho, decomposition)
    post = sum(p @ rho.matrix @ p for p in decomposition.projectors)
    return dist, DensityMatrix(rho.n_modes, (post + post.conj().T) / 2)


# --------------------------------------------------------------- state files

def load_state(source) -> StateVector:
    """Read a state from a JSON file path, JSON text, or an already-decoded dict.

    The format is ``{"n_modes": N, "amplitudes": [{"basis": "0110", "re": x,
    "im": y}, ...]}``.  Missing basis strings have amplitude 0 and the result
    is renormalized.
    """
    if isinstance(source, dict):
        data = source
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = json.loads(source)
    try:
        n_modes = check_n_modes(data["n_modes"])
        entries = data["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state description: {exc}") from exc
    amps = np.zeros(1 << n_modes, dtype=complex)
    seen = set()
    for entry in entries:
        basis = FockBasisState.from_string(str(entry["basis"]))
        if basis.n_modes != n_modes:
            raise ValueError(f"basis label {entry['basis']!r} does not have {n_modes} modes")
        if basis.index in seen:
            raise ValueError(f"duplicate basis label {entry['basis']!r}")
        seen.add(basis.index)
        amps[basis.index] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
    if np.linalg.norm(amps) < 1e-12:
        raise ValueError("state has (near-)zero norm")
    return StateVector.normalized(n_modes, amps)


def state_to_json(state: StateVector, tol: float = 0.0) -> dict:
    return {
        "n_modes": state.n_modes,
        "amplitudes": [
            {"basis": str(FockBasisState.from_index(k, state.n_modes)), "re": float(a.real), "im": float(a.imag)}
            for k, a in enumerate(state.amplitudes)
            if abs(a) > tol
        ],
    }
