"""Observers on disjoint mode sets: commutation structure, reduced states,
signalling detection and signalling witnesses.

Two observers hold the modes in ``partition.a`` and ``partition.b``.  Even
operators on one side commute with everything on the other, odd operators on
the two sides anti-commute.  So if either side may apply an odd operation,
its actions fail to commute with the other side's and its local operations
can change the other side's statistics.  The functions here make each step of
that argument computable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from carlock.expr import (
    LadderOp,
    OperatorExpr,
    ParityClass,
    adjoint,
    anticommutator,
    canonical_sort_key,
    commutator,
    even_odd_split,
    format_expr,
    monomial_expr,
    normal_order,
    parity_of,
    relabel,
    support,
)
from carlock.fock import (
    CLUSTER_TOL,
    DensityMatrix,
    OutcomeDistribution,
    StateVector,
    as_density,
    eigendecompose,
    evolve,
    expectation,
    exponentiate_hermitian,
    is_hermitian,
    is_unitary,
    jw_matrix,
    max_abs,
    measure,
    outcome_distribution,
    prepare,
)
from carlock.parsing import parse_expr

DEFAULT_TOL = 1e-10
WITNESS_TOL = 1e-8


class ReducedStateError(ValueError):
    """The expectation-matching system for a reduced state has no consistent solution."""


# ----------------------------------------------------------------- partitions

@dataclass(frozen=True)
class ModePartition:
    a: frozenset[int]
    b: frozenset[int]
    n_modes: int

    def __post_init__(self):
        object.__setattr__(self, "a", frozenset(self.a))
        object.__setattr__(self, "b", frozenset(self.b))
        if not self.a or not self.b:
            raise ValueError("both sides of a partition must be nonempty")
        if self.a & self.b:
            raise ValueError(f"partition sides overlap on modes {sorted(self.a & self.b)}")
        everything = self.a | self.b
        if min(everything) < 1 or max(everything) > self.n_modes:
            raise ValueError(f"partition modes must lie in 1..{self.n_modes}")

    @classmethod
    def parse(cls, text: str, n_modes: int | None = None) -> ModePartition:
        """Read ``"1,2|3,4"``; ``n_modes`` defaults to the largest mode named."""
        try:
            left, right = text.split("|")
            a = {int(tok) for tok in left.split(",") if tok.strip()}
            b = {int(tok) for tok in right.split(",") if tok.strip()}
        except ValueError as exc:
            raise ValueError(f"malformed partition {text!r}; expected e.g. '1,2|3,4'") from exc
        if n_modes is None:
            n_modes = max(a | b, default=1)
        return cls(frozenset(a), frozenset(b), n_modes)

    def __str__(self):
        return f"{','.join(map(str, sorted(self.a)))}|{','.join(map(str, sorted(self.b)))}"


# ------------------------------------------------------- disjoint commutation

@dataclass(frozen=True)
class CommutationReport:
    parity_a: ParityClass
    parity_b: ParityClass
    relation: str
    commutator: OperatorExpr
    anticommutator: OperatorExpr
    commutator_norm: float
    anticommutator_norm: float
    even_residual: float
    odd_residual: float
    symbolic_agrees: bool
    theorem_holds: bool

    def to_dict(self) -> dict:
        return {
            "parity_a": self.parity_a.value,
            "parity_b": self.parity_b.value,
            "relation": self.relation,
            "commutator": format_expr(self.commutator),
            "anticommutator": format_expr(self.anticommutator),
            "commutator_norm": self.commutator_norm,
            "anticommutator_norm": self.anticommutator_norm,
            "even_residual": self.even_residual,
            "odd_residual": self.odd_residual,
            "symbolic_agrees": self.symbolic_agrees,
            "theorem_holds": self.theorem_holds,
        }


def _relation(pa: ParityClass, pb: ParityClass) -> str:
    if ParityClass.ZERO in (pa, pb) or ParityClass.EVEN in (pa, pb):
        return "commute"
    if pa is ParityClass.ODD and pb is ParityClass.ODD:
        return "anticommute"
    return "graded"


def disjoint_commutation_check(
    e_a: OperatorExpr,
    e_b: OperatorExpr,
    n_modes: int | None = None,
    tol: float = DEFAULT_TOL,
) -> CommutationReport:
    """Check the graded commutation rule for operators on disjoint modes.

    Even parts must commute with the whole other operator and the two odd
    parts must anti-commute.  Both statements are checked symbolically and on
    the Jordan-Wigner matrices, and the commutator/anticommutator of the full
    operators are reported alongside.

    Raises:
        ValueError: if the supports of ``e_a`` and ``e_b`` overlap.
    """
    e_a, e_b = normal_order(e_a), normal_order(e_b)
    overlap = support(e_a) & support(e_b)
    if overlap:
        raise ValueError(f"operator supports overlap on modes {sorted(overlap)}")
    if n_modes is None:
        n_modes = max(support(e_a) | support(e_b), default=1)

    def mat(e):
        return jw_matrix(e, n_modes)

    ma, mb = mat(e_a), mat(e_b)
    comm_m = ma @ mb - mb @ ma
    anti_m = ma @ mb + mb @ ma
    comm_s = commutator(e_a, e_b)
    anti_s = anticommutator(e_a, e_b)

    (a_even, a_odd), (b_even, b_odd) = even_odd_split(e_a), even_odd_split(e_b)
    even_checks = [commutator(a_even, e_b), commutator(e_a, b_even)]
    odd_check = anticommutator(a_odd, b_odd)
    even_residual = max(
        max_abs(mat(a_even) @ mb - mb @ mat(a_even)),
        max_abs(ma @ mat(b_even) - mat(b_even) @ ma),
    )
    odd_residual = max_abs(mat(a_odd) @ mat(b_odd) + mat(b_odd) @ mat(a_odd))

    symbolic_agrees = (
        max_abs(mat(comm_s) - comm_m) <= tol
        and max_abs(mat(anti_s) - anti_m) <= tol
        and all(c.is_zero() == (max_abs(mat(c)) <= tol) for c in (*even_checks, odd_check))
    )
    theorem_holds = (
        all(c.is_zero() for c in even_checks)
        and odd_check.is_zero()
        and even_residual <= tol
        and odd_residual <= tol
    )
    return CommutationReport(
        parity_a=parity_of(e_a),
        parity_b=parity_of(e_b),
        relation=_relation(parity_of(e_a), parity_of(e_b)),
        commutator=comm_s,
        anticommutator=anti_s,
        commutator_norm=max_abs(comm_m),
        anticommutator_norm=max_abs(anti_m),
        even_residual=even_residual,
        odd_residual=odd_residual,
        symbolic_agrees=symbolic_agrees,
        theorem_holds=theorem_holds,
    )


# ----------------------------------------------------------- local algebras

@dataclass(frozen=True)
class SubalgebraBasis:
    modes: frozenset[int]
    parity_restricted: bool
    monomials: tuple[tuple[LadderOp, ...], ...]

    def exprs(self) -> list[OperatorExpr]:
        return [monomial_expr(fs) for fs in self.monomials]

    def labels(self) -> list[str]:
        return [format_expr(monomial_expr(fs)) for fs in self.monomials]


_SINGLE_MODE_WORDS = ((), (False,), (True,), (True, False))


def subalgebra_basis(modes, parity_restricted: bool = False) -> SubalgebraBasis:
    """All canonical monomials on ``modes`` (even-degree ones if restricted).

    Each mode contributes one of ``1, a, a^, a^ a``, giving ``4**len(modes)``
    monomials, or half of them when restricted to even degree.
    """
    modes = frozenset(modes)
    if not modes:
        raise ValueError("a subalgebra needs at least one mode")
    seqs = []
    for choice in itertools.product(_SINGLE_MODE_WORDS, repeat=len(modes)):
        factors = tuple(
            LadderOp(mode, dagger) for mode, word in zip(sorted(modes), choice) for dagger in word
        )
        if parity_restricted and len(factors) % 2:
            continue
        (term,) = normal_order(monomial_expr(factors)).terms
        seqs.append(term.factors)
    seqs.sort(key=canonical_sort_key)
    return SubalgebraBasis(modes, parity_restricted, tuple(seqs))


def local_observables(modes) -> list[tuple[str, OperatorExpr]]:
    """Hermitian operators spanning the observables on ``modes``.

    For each canonical monomial ``m`` this yields ``m + m^dag`` and
    ``i (m - m^dag)``, or a single Hermitian multiple of ``m`` when ``m`` is
    self-adjoint up to sign.  The identity is skipped.
    """
    out = []
    seen = set()
    for fs in subalgebra_basis(modes).monomials:
        if not fs or fs in seen:
            continue
        m = monomial_expr(fs)
        m_dag = adjoint(m)
        (dag_term,) = m_dag.terms
        seen.update({fs, dag_term.factors})
        if dag_term.factors == fs:
            obs = m if dag_term.coeff.real > 0 else normal_order(1j * m)
            out.append((format_expr(obs), obs))
        else:
            for obs in (m + m_dag, 1j * (m - m_dag)):
                out.append((format_expr(obs), obs))
    return out


# ------------------------------------------------------------ reduced states

@dataclass(frozen=True, eq=False)
class ReducedState:
    modes: frozenset[int]
    matrix: np.ndarray = field(repr=False)
    psd: bool
    min_eigenvalue: float
    parity_restricted: bool = False

    def to_dict(self) -> dict:
        return {
            "modes": sorted(self.modes),
            "parity_restricted": self.parity_restricted,
            "psd": self.psd,
            "min_eigenvalue": self.min_eigenvalue,
            "matrix": self.matrix,
        }


@lru_cache(maxsize=None)
def _local_system(k: int, parity_restricted: bool):
    """Local basis on modes ``1..k`` and rows mapping ``vec(sigma)`` to ``tr(sigma L)``."""
    basis = subalgebra_basis(range(1, k + 1), parity_restricted)
    rows = np.array([jw_matrix(monomial_expr(fs), k).T.ravel() for fs in basis.monomials])
    rows.setflags(write=False)
    return basis, rows


def reduced_state(
    state: StateVector | DensityMatrix,
    modes,
    parity_restricted: bool = False,
    tol: float = 1e-9,
) -> ReducedState:
    """Local state on ``modes`` defined by matching expectation values.

    The result is the matrix ``sigma`` on the ``2**len(modes)`` local Fock
    space (modes relabelled ``1..k`` in increasing order) such that
    ``tr(sigma L) = <M>`` for every canonical monomial ``M`` on ``modes`` and
    its local image ``L``.  Unrestricted, the monomials span all local
    matrices and the solution is unique.  Restricted to even monomials the
    system is underdetermined and the minimum-norm solution is returned;
    it is block-diagonal in the parity sectors.  Positivity is reported,
    not enforced.

    Raises:
        ReducedStateError: if the linear system leaves a residual above ``tol``.
    """
    rho = as_density(state)
    modes = frozenset(modes)
    if not modes or min(modes) < 1 or max(modes) > rho.n_modes:
        raise ValueError(f"modes {sorted(modes)} not within 1..{rho.n_modes}")
    k = len(modes)
    basis, rows = _local_system(k, parity_restricted)
    to_global = {i + 1: m for i, m in enumerate(sorted(modes))}
    targets = np.array([
        expectation(rho, relabel(monomial_expr(fs), to_global)) for fs in basis.monomials
    ])
    if parity_restricted:
        x = np.linalg.lstsq(rows, targets, rcond=None)[0]
    else:
        x = np.linalg.solve(rows, targets)
    residual = max_abs(rows @ x - targets)
    if residual > tol:
        raise ReducedStateError(f"expectation-matching residual {residual:.3g} exceeds {tol:.3g}")
    sigma = x.reshape(1 << k, 1 << k)
    if not is_hermitian(sigma):
        raise ReducedStateError("expectation-matching solution is not Hermitian")
    min_eig = float(np.linalg.eigvalsh(sigma).min())
    return ReducedState(modes, sigma, min_eig >= -1e-8, min_eig, parity_restricted)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


# -------------------------------------------------------------- signalling

@dataclass(frozen=True)
class LocalUnitary:
    """``exp(i * theta * generator)`` for a Hermitian ``generator``."""

    generator: OperatorExpr
    theta: float

    def matrix(self, n_modes: int) -> np.ndarray:
        return exponentiate_hermitian(self.generator, self.theta, n_modes)

    def __str__(self):
        return f"exp(i*{self.theta!r}*({format_expr(self.generator)}))"


@dataclass(frozen=True)
class SignallingReport:
    observable_deviations: tuple[tuple[str, float], ...]
    max_deviation: float
    reduced_state_trace_distance: float
    signalling_detected: bool
    tolerance: float = DEFAULT_TOL
    probe: str | None = None
    probe_before: complex | None = None
    probe_after: complex | None = None

    def to_dict(self) -> dict:
        out = {
            "observable_deviations": [
                {"observable": label, "deviation": dev} for label, dev in self.observable_deviations
            ],
            "max_deviation": self.max_deviation,
            "reduced_state_trace_distance": self.reduced_state_trace_distance,
            "signalling_detected": self.signalling_detected,
            "tolerance": self.tolerance,
        }
        if self.probe is not None:
            out.update(probe=self.probe, before=self.probe_before, after=self.probe_after)
        return out


def signalling_deviation(
    initial: StateVector | DensityMatrix,
    op_b: OperatorExpr | LocalUnitary,
    partition: ModePartition,
    tol: float = DEFAULT_TOL,
    probe: OperatorExpr | None = None,
) -> SignallingReport:
    """Apply a unitary on B and measure how much A's local statistics move.

    Every canonical monomial on A and every Hermitian observable built from
    them is compared before and after; the largest absolute change decides
    whether signalling is reported.  ``probe``, if given, is an extra A-side
    observable whose expectations are returned verbatim.

    Raises:
        ValueError: if ``op_b`` acts outside B or is not unitary.
    """
    generator = op_b.generator if isinstance(op_b, LocalUnitary) else op_b
    outside = support(generator) - partition.b
    if outside:
        raise ValueError(f"operation acts on modes {sorted(outside)} outside B={sorted(partition.b)}")
    n = partition.n_modes
    if initial.n_modes != n:
        raise ValueError(f"state has {initial.n_modes} modes, partition expects {n}")
    u = op_b.matrix(n) if isinstance(op_b, LocalUnitary) else jw_matrix(op_b, n)
    if not is_unitary(u):
        raise ValueError("operation on B is not unitary")
    after = evolve(initial, u)

    observables = [(format_expr(m), m) for m in subalgebra_basis(partition.a).exprs()]
    labels = {label for label, _ in observables}
    observables += [(label, obs) for label, obs in local_observables(partition.a) if label not in labels]
    deviations = tuple(
        (label, abs(expectation(after, obs) - expectation(initial, obs))) for label, obs in observables
    )
    max_dev = max(dev for _, dev in deviations)
    before_rs = reduced_state(initial, partition.a)
    after_rs = reduced_state(after, partition.a)
    report = SignallingReport(
        observable_deviations=deviations,
        max_deviation=max_dev,
        reduced_state_trace_distance=trace_distance(before_rs.matrix, after_rs.matrix),
        signalling_detected=max_dev > tol,
        tolerance=tol,
    )
    if probe is not None:
        outside = support(probe) - partition.a
        if outside:
            raise ValueError(f"probe acts on modes {sorted(outside)} outside A")
        report = replace(
            report,
            probe=format_expr(normal_order(probe)),
            probe_before=expectation(initial, probe),
            probe_after=expectation(after, probe),
        )
    return report


def paper_example() -> SignallingReport:
    """Two modes, state ``(a1^|0> + |0>)/sqrt(2)``, B applies ``a2 + a2^``.

    The expectation of ``a1 + a1^`` flips from +1 to -1.
    """
    state = prepare(parse_expr("a1^ + 1"), 2)
    report = signalling_deviation(
        state,
        parse_expr("a2 + a2^"),
        ModePartition({1}, {2}, 2),
        probe=parse_expr("a1 + a1^"),
    )
    if abs(report.probe_before - 1) > 1e-12 or abs(report.probe_after + 1) > 1e-12:
        raise AssertionError(
            f"expected <a1 + a1^> to go 1 -> -1, got {report.probe_before} -> {report.probe_after}"
        )
    return report


# ----------------------------------------------------------- SSR derivation

@dataclass(frozen=True)
class DerivationReport:
    partition: ModePartition
    odd_a: tuple[str, ...]
    odd_b: tuple[str, ...]
    even_a: tuple[str, ...]
    even_b: tuple[str, ...]
    flagged_pairs: tuple[tuple[str, str, str], ...]
    commuting_pairs: int
    noncommuting_even_pairs: tuple[tuple[str, str], ...]
    partners_for_b: dict
    partners_for_a: dict
    holds: bool
    conclusion: str

    def to_dict(self) -> dict:
        return {
            "partition": str(self.partition),
            "odd_a": list(self.odd_a),
            "odd_b": list(self.odd_b),
            "even_a": list(self.even_a),
            "even_b": list(self.even_b),
            "flagged_pairs": [
                {"first": x, "second": y, "commutator": c} for x, y, c in self.flagged_pairs
            ],
            "n_flagged_pairs": len(self.flagged_pairs),
            "commuting_pairs": self.commuting_pairs,
            "noncommuting_even_pairs": [list(p) for p in self.noncommuting_even_pairs],
            "partners_for_b": self.partners_for_b,
            "partners_for_a": self.partners_for_a,
            "holds": self.holds,
            "conclusion": self.conclusion,
        }


def ssr_derivation_report(partition: ModePartition) -> DerivationReport:
    """Enumerate generator pairs across the partition and classify them.

    Every ordered pair of odd monomials (one per side, either side first) is
    flagged with its nonzero commutator, so each side's odd operations are
    shown to disturb the other.  Pairs involving an even monomial are
    confirmed to commute.  Requiring operations on both sides to commute, and
    the two sides to obey the same rules, leaves only even operations.
    """
    gens = {}
    for side, modes in (("a", partition.a), ("b", partition.b)):
        exprs = [e for e in subalgebra_basis(modes).exprs() if e.terms[0].factors]
        gens[side] = exprs
    odd = {s: [e for e in gens[s] if parity_of(e) is ParityClass.ODD] for s in gens}
    even = {s: [e for e in gens[s] if parity_of(e) is ParityClass.EVEN] for s in gens}

    flagged = []
    partners_b: dict = {}
    partners_a: dict = {}
    for x in odd["a"]:
        for y in odd["b"]:
            for first, second in ((x, y), (y, x)):
                c = commutator(first, second)
                if not c.is_zero():
                    flagged.append((format_expr(first), format_expr(second), format_expr(c)))
                    partners_b.setdefault(format_expr(y), format_expr(x))
                    partners_a.setdefault(format_expr(x), format_expr(y))

    commuting = 0
    bad = []
    for x, y in itertools.product(gens["a"], gens["b"]):
        if parity_of(x) is ParityClass.ODD and parity_of(y) is ParityClass.ODD:
            continue
        if commutator(x, y).is_zero():
            commuting += 1
        else:
            bad.append((format_expr(x), format_expr(y)))

    n_odd_pairs = 2 * len(odd["a"]) * len(odd["b"])
    holds = (
        len(flagged) == n_odd_pairs
        and not bad
        and len(partners_b) == len(odd["b"])
        and len(partners_a) == len(odd["a"])
    )
    conclusion = (
        "every odd operation on either side fails to commute with some odd operation on the "
        "other side, while even operations commute with everything across the partition; "
        "commuting local operations under identical rules for both observers therefore "
        "restrict both observers to even operations"
        if holds
        else "enumeration did not reproduce the expected graded commutation pattern"
    )
    labels = {s: tuple(format_expr(e) for e in odd[s]) for s in odd}
    elabels = {s: tuple(format_expr(e) for e in even[s]) for s in even}
    return DerivationReport(
        partition=partition,
        odd_a=labels["a"],
        odd_b=labels["b"],
        even_a=elabels["a"],
        even_b=elabels["b"],
        flagged_pairs=tuple(flagged),
        commuting_pairs=commuting,
        noncommuting_even_pairs=tuple(bad),
        partners_for_b=partners_b,
        partners_for_a=partners_a,
        holds=holds,
        conclusion=conclusion,
    )


# ------------------------------------------------------------------ witness

@dataclass(frozen=True)
class WitnessReport:
    witness_found: bool
    commutator_norm: float
    eigenspace_value: float
    witness_state: StateVector
    leaked_eigenvector: StateVector | None
    leaked_eigenvalue: float | None
    dist_before: OutcomeDistribution
    dist_after: OutcomeDistribution
    tv_distance: float

    def to_dict(self) -> dict:
        return {
            "witness_found": self.witness_found,
            "commutator_norm": self.commutator_norm,
            "eigenspace_value": self.eigenspace_value,
            "witness_state": self.witness_state.amplitudes,
            "leaked_eigenvector": None if self.leaked_eigenvector is None else self.leaked_eigenvector.amplitudes,
            "leaked_eigenvalue": self.leaked_eigenvalue,
            "dist_before": [{"value": v, "probability": p} for v, p in self.dist_before.outcomes],
            "dist_after": [{"value": v, "probability": p} for v, p in self.dist_after.outcomes],
            "tv_distance": self.tv_distance,
        }


def _hermitian_matrix(e: OperatorExpr | np.ndarray, n_modes: int, name: str) -> np.ndarray:
    m = jw_matrix(e, n_modes) if isinstance(e, OperatorExpr) else np.asarray(e, dtype=complex)
    if not is_hermitian(m):
        raise ValueError(f"{name} is not Hermitian")
    return m


def build_witness(
    o_a: OperatorExpr | np.ndarray,
    o_b: OperatorExpr | np.ndarray,
    n_modes: int,
    cluster_tol: float = CLUSTER_TOL,
    tol: float = WITNESS_TOL,
) -> WitnessReport:
    """Construct a state on which measuring ``o_b`` changes ``o_a``'s statistics.

    Eigenspaces of ``o_a`` are scanned from the largest eigenvalue down; the
    first one, ``S``, that ``o_b`` does not leave invariant is used.  The
    witness is the top right singular vector of ``(1 - P_S) o_b P_S``: it lies
    in ``S``, so measuring ``o_a`` on it gives the ``S`` outcome with
    certainty, and it overlaps an ``o_b`` eigenvector outside ``S``.  After an
    unrecorded ``o_b`` measurement that certainty is lost.

    If the commutator's largest entry is at most ``tol`` the operators share
    an eigenbasis; a state from the top eigenspace is returned with identical
    before/after distributions and ``witness_found=False``.
    """
    ma = _hermitian_matrix(o_a, n_modes, "O_A")
    mb = _hermitian_matrix(o_b, n_modes, "O_B")
    comm_norm = max_abs(ma @ mb - mb @ ma)
    dec_a = eigendecompose(ma, cluster_tol)
    eye = np.eye(ma.shape[0])

    if comm_norm <= tol:
        value, proj = dec_a.clusters[-1]
        col = int(np.argmax(np.linalg.norm(proj, axis=0)))
        psi = StateVector.normalized(n_modes, proj[:, col])
        dist = outcome_distribution(psi, dec_a)
        return WitnessReport(False, comm_norm, value, psi, None, None, dist, dist, 0.0)

    leaks = []
    for value, proj in reversed(dec_a.clusters):
        leaks.append((np.linalg.norm((eye - proj) @ mb @ proj, 2), value, proj))
    chosen = next((item for item in leaks if item[0] > tol), max(leaks, key=lambda item: item[0]))
    _, value, proj = chosen
    k = (eye - proj) @ mb @ proj
    _, _, vh = np.linalg.svd(k)
    psi = StateVector.normalized(n_modes, proj @ vh[0].conj())

    dec_b = eigendecompose(mb, cluster_tol)
    outside = [
        (np.linalg.norm((eye - proj) @ q @ psi.amplitudes), mu, q @ psi.amplitudes)
        for mu, q in dec_b.clusters
    ]
    _, leaked_value, leaked_vec = max(outside, key=lambda item: item[0])

    dist_before = outcome_distribution(psi, dec_a)
    _, post = measure(psi, dec_b)
    dist_after = outcome_distribution(post, dec_a)
    return WitnessReport(
        witness_found=True,
        commutator_norm=comm_norm,
        eigenspace_value=value,
        witness_state=psi,
        leaked_eigenvector=StateVector.normalized(n_modes, leaked_vec),
        leaked_eigenvalue=leaked_value,
        dist_before=dist_before,
        dist_after=dist_after,
        tv_distance=dist_before.total_variation(dist_after, cluster_tol),
    )
