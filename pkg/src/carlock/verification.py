"""Self-check suite run by ``carlock verify``.

Each check draws its random cases from a generator seeded by ``seed`` and the
check index, so results are reproducible and independent of check order.
Wall-clock time is compared against a budget but only the verdict is kept in
the structured result, which keeps reports byte-identical across runs.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from carlock.expr import ParityClass, normal_order
from carlock.fock import (
    DensityMatrix,
    jw_matrix,
    ladder_matrices,
    max_abs,
)
from carlock.locality import (
    ModePartition,
    build_witness,
    disjoint_commutation_check,
    paper_example,
    signalling_deviation,
)
from carlock.parity import parity_operator, ssr_dephase
from carlock.parsing import parse_expr
from carlock.sampling import (
    random_even_unitary,
    random_expr,
    random_hermitian,
    random_raw_expr,
    random_state,
)

log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    within_budget: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "pass": self.passed and self.within_budget,
            "within_time_budget": self.within_budget,
            "details": self.details,
        }


def _rng(seed: int, criterion: int) -> np.random.Generator:
    return np.random.default_rng([seed, criterion])


def _random_split(rng, n_modes: int):
    """Two disjoint nonempty mode sets inside ``1..n_modes`` (n_modes >= 2)."""
    modes = rng.permutation(np.arange(1, n_modes + 1))
    cut = int(rng.integers(1, n_modes))
    rest = modes[cut:]
    keep = int(rng.integers(1, len(rest) + 1))
    return frozenset(int(m) for m in modes[:cut]), frozenset(int(m) for m in rest[:keep])


def check_paper_example(seed: int, n_modes: int) -> dict:
    report = paper_example()
    before, after = report.probe_before, report.probe_after
    return {
        "passed": abs(before - 1) <= 1e-12 and abs(after + 1) <= 1e-12,
        "before": before.real,
        "after": after.real,
        "deviation": report.max_deviation,
    }


def check_car_relations(seed: int, n_modes: int) -> dict:
    worst = 0.0
    for n in range(1, n_modes + 1):
        ops = ladder_matrices(n)
        eye = np.eye(1 << n)
        for i, ai in enumerate(ops):
            for j, aj in enumerate(ops):
                ai_d, aj_d = ai.conj().T, aj.conj().T
                worst = max(
                    worst,
                    max_abs(ai @ aj + aj @ ai),
                    max_abs(ai_d @ aj_d + aj_d @ ai_d),
                    max_abs(ai @ aj_d + aj_d @ ai - (eye if i == j else 0)),
                )
    return {"passed": worst <= 1e-12, "max_residual": worst, "max_modes": n_modes}


def check_disjoint_grading(seed: int, n_modes: int, cases: int = 200) -> dict:
    rng = _rng(seed, 3)
    failures = 0
    worst_comm = worst_anti = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, max(n_modes, 2) + 1))
        a, b = _random_split(rng, n)
        pa, pb = (ParityClass.EVEN if rng.integers(2) else ParityClass.ODD for _ in range(2))
        e_a = random_expr(rng, a, parity=pa)
        e_b = random_expr(rng, b, parity=pb)
        rep = disjoint_commutation_check(e_a, e_b, n)
        if pa is ParityClass.ODD and pb is ParityClass.ODD:
            worst_anti = max(worst_anti, rep.anticommutator_norm)
            ok = rep.anticommutator_norm <= 1e-10 and rep.anticommutator.is_zero()
        else:
            worst_comm = max(worst_comm, rep.commutator_norm)
            ok = rep.commutator_norm <= 1e-10 and rep.commutator.is_zero()
        if not (ok and rep.theorem_holds and rep.symbolic_agrees):
            failures += 1
    return {
        "passed": failures == 0,
        "cases": cases,
        "failures": failures,
        "max_even_commutator": worst_comm,
        "max_odd_anticommutator": worst_anti,
    }


def check_no_signalling(seed: int, n_modes: int, cases: int = 100) -> dict:
    rng = _rng(seed, 4)
    n_cap = min(max(n_modes, 2), 5)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, n_cap + 1))
        a, b = _random_split(rng, n)
        state = random_state(rng, n)
        u = random_even_unitary(rng, b)
        rep = signalling_deviation(state, u, ModePartition(a, b, n))
        worst = max(worst, rep.reduced_state_trace_distance, rep.max_deviation)
    paper = paper_example()
    return {
        "passed": worst <= 1e-10 and abs(paper.max_deviation - 2.0) <= 1e-10,
        "cases": cases,
        "max_even_change": worst,
        "odd_deviation": paper.max_deviation,
    }


def check_witness(seed: int, n_modes: int, cases: int = 50) -> dict:
    rng = _rng(seed, 5)
    paper = build_witness(parse_expr("a1 + a1^"), parse_expr("a2 + a2^"), 2)
    mismatches = 0
    certainty_worst = 0.0
    found = 0
    for k in range(cases):
        n = int(rng.integers(1, min(max(n_modes, 1), 3) + 1))
        kind = k % 3
        o_a = random_hermitian(rng, range(1, n + 1))
        if kind == 0 or n == 1:
            o_b = random_hermitian(rng, range(1, n + 1))
        elif kind == 1:
            a, b = _random_split(rng, n)
            o_a = random_hermitian(rng, a, parity=ParityClass.EVEN)
            o_b = random_hermitian(rng, b)
        else:
            o_b = normal_order(o_a * o_a)
        rep = build_witness(o_a, o_b, n)
        noncommuting = rep.commutator_norm > 1e-8
        found += noncommuting
        if (rep.tv_distance > 0) != noncommuting or (not noncommuting and rep.tv_distance > 1e-10):
            mismatches += 1
        certainty_worst = max(
            certainty_worst, abs(rep.dist_before.probability(rep.eigenspace_value) - 1)
        )
    return {
        "passed": abs(paper.tv_distance - 0.5) <= 1e-10 and mismatches == 0 and certainty_worst <= 1e-10,
        "paper_tv_distance": paper.tv_distance,
        "cases": cases,
        "noncommuting_cases": found,
        "mismatches": mismatches,
        "max_certainty_error": certainty_worst,
    }


def check_normal_order_oracle(seed: int, n_modes: int, cases: int = 200) -> dict:
    rng = _rng(seed, 6)
    worst = 0.0
    not_idempotent = 0
    for _ in range(cases):
        n = int(rng.integers(1, min(max(n_modes, 1), 6) + 1))
        e = random_raw_expr(rng, range(1, n + 1), max_terms=4, max_len=6)
        canon = normal_order(e)
        worst = max(worst, max_abs(jw_matrix(canon, n) - jw_matrix(e, n)))
        not_idempotent += normal_order(canon) != canon
    return {
        "passed": worst <= 1e-10 and not_idempotent == 0,
        "cases": cases,
        "max_matrix_error": worst,
        "non_idempotent": not_idempotent,
    }


def check_parity_machinery(seed: int, n_modes: int, cases: int = 100) -> dict:
    rng = _rng(seed, 7)
    worst = 0.0
    for k in range(cases):
        n = int(rng.integers(1, min(max(n_modes, 1), 6) + 1))
        parity = ParityClass.EVEN if k % 2 == 0 else ParityClass.ODD
        m = jw_matrix(random_expr(rng, range(1, n + 1), parity=parity), n)
        p = parity_operator(n)
        residual = p @ m - m @ p if parity is ParityClass.EVEN else p @ m + m @ p
        worst = max(worst, max_abs(residual))
    dephase_worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, min(max(n_modes, 1), 4) + 1))
        g = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
        rho = g @ g.conj().T
        rho = DensityMatrix(n, rho / np.trace(rho))
        once = ssr_dephase(rho)
        twice = ssr_dephase(once)
        dephase_worst = max(
            dephase_worst,
            max_abs(twice.matrix - once.matrix),
            abs(np.trace(once.matrix) - np.trace(rho.matrix)),
        )
    return {
        "passed": worst <= 1e-10 and dephase_worst <= 1e-12,
        "cases": cases,
        "max_parity_residual": worst,
        "max_dephase_error": dephase_worst,
    }


CHECKS = (
    (1, "paper example reproduction", check_paper_example, 1.0),
    (2, "anti-commutation relations", check_car_relations, 10.0),
    (3, "disjoint-support grading", check_disjoint_grading, 30.0),
    (4, "even operations do not signal", check_no_signalling, 120.0),
    (5, "witness soundness", check_witness, 120.0),
    (6, "normal order vs matrix oracle", check_normal_order_oracle, 60.0),
    (7, "parity machinery", check_parity_machinery, 60.0),
)


def run_all(n_modes: int = 6, seed: int = 42) -> list[CheckResult]:
    results = []
    for criterion, name, fn, budget in CHECKS:
        start = time.perf_counter()
        details = fn(seed, n_modes)
        elapsed = time.perf_counter() - start
        passed = bool(details.pop("passed"))
        log.info("criterion %d (%s): %s in %.2fs", criterion, name, "pass" if passed else "FAIL", elapsed)
        results.append(CheckResult(criterion, name, passed, elapsed <= budget, details))
    return results
