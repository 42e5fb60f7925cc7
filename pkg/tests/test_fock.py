import json
from functools import reduce

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings

from carlock.expr import LadderOp, monomial_expr, normal_order
from carlock.fock import (
    AnnihilatedStateError,
    DensityMatrix,
    FockBasisState,
    StateVector,
    apply_expr,
    basis_state,
    eigendecompose,
    expectation,
    exponentiate_hermitian,
    jw_matrix,
    ladder_matrices,
    load_state,
    measure,
    prepare,
    state_to_json,
    vacuum,
)
from carlock.parsing import parse_expr

from strategies import raw_exprs

Z = np.diag([1.0, -1.0])
SIGMA = np.array([[0.0, 1.0], [0.0, 0.0]])


def kron_annihilator(i, n):
    """Independent Jordan-Wigner construction: Z^(i-1) x sigma x I^(n-i)."""
    factors = [Z] * (i - 1) + [SIGMA] + [np.eye(2)] * (n - i)
    return reduce(np.kron, factors)


def P(text):
    return parse_expr(text)


def test_vacuum():
    np.testing.assert_array_equal(vacuum(1).amplitudes, [1, 0])
    np.testing.assert_array_equal(vacuum(2).amplitudes, [1, 0, 0, 0])
    assert expectation(vacuum(2), P("a1^ a1")) == 0
    with pytest.raises(ValueError):
        vacuum(0)
    with pytest.raises(ValueError):
        vacuum(13)


def test_basis_state_indexing():
    b = FockBasisState.from_string("0110")
    assert b.index == 6
    assert str(FockBasisState.from_index(6, 4)) == "0110"
    assert basis_state("10").amplitudes[2] == 1


def test_jw_single_mode():
    np.testing.assert_array_equal(jw_matrix(P("a1"), 1), SIGMA)
    np.testing.assert_array_equal(jw_matrix(P("a1 a1^ + a1^ a1"), 1), np.eye(2))


def test_jw_sign_from_preceding_mode():
    out = jw_matrix(P("a2"), 2) @ basis_state("11").amplitudes
    np.testing.assert_array_equal(out, -basis_state("10").amplitudes)


@pytest.mark.parametrize("n", range(1, 7))
def test_ladder_matrices_match_kron_oracle(n):
    for i, a in enumerate(ladder_matrices(n), start=1):
        np.testing.assert_array_equal(a, kron_annihilator(i, n))


@pytest.mark.parametrize("n", range(1, 7))
def test_car_relations(n):
    ops = ladder_matrices(n)
    eye = np.eye(1 << n)
    for i, ai in enumerate(ops):
        assert np.max(np.abs(ai @ ai)) == 0
        number = ai.conj().T @ ai
        assert set(np.round(np.linalg.eigvalsh(number), 12)) <= {0.0, 1.0}
        for j, aj in enumerate(ops):
            assert np.max(np.abs(ai @ aj + aj @ ai)) <= 1e-12
            assert np.max(np.abs(ai.conj().T @ aj.conj().T + aj.conj().T @ ai.conj().T)) <= 1e-12
            delta = eye if i == j else 0
            assert np.max(np.abs(ai @ aj.conj().T + aj.conj().T @ ai - delta)) <= 1e-12


def test_jw_rejects_modes_beyond_n():
    with pytest.raises(ValueError):
        jw_matrix(P("a3"), 2)


@settings(max_examples=100)
@given(raw_exprs(max_len=4))
def test_jw_matches_kron_products(e):
    n = 6
    expected = np.zeros((1 << n, 1 << n), dtype=complex)
    for t in e.terms:
        m = np.eye(1 << n, dtype=complex)
        for op in t.factors:
            a = kron_annihilator(op.mode, n)
            m = m @ (a.T if op.dagger else a)
        expected += t.coeff * m
    assert np.max(np.abs(jw_matrix(e, n) - expected)) <= 1e-12


@settings(max_examples=100)
@given(raw_exprs(max_mode=4, max_len=4))
def test_expectation_paths_agree(e):
    rng = np.random.default_rng(7)
    amps = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi = StateVector.normalized(4, amps)
    direct = np.vdot(psi.amplitudes, jw_matrix(e, 4) @ psi.amplitudes)
    assert abs(expectation(psi, e) - direct) <= 1e-12
    assert abs(expectation(psi.density_matrix(), e) - direct) <= 1e-12


# ---------------------------------------------------- superposition states

def test_superposition_expectations_flip():
    before = prepare(P("a1^ + 1"), 2)
    assert abs(expectation(before, P("a1 + a1^")) - 1) <= 1e-12
    after = apply_expr(before, P("a2 + a2^"), check_unitary=True)
    expected = prepare(P("a2^ a1^ + a2^"), 2)
    assert abs(abs(np.vdot(expected.amplitudes, after.amplitudes)) - 1) <= 1e-12
    np.testing.assert_allclose(after.amplitudes, expected.amplitudes, atol=1e-12)
    assert abs(expectation(after, P("a1 + a1^")) + 1) <= 1e-12


def test_apply_expr_errors_and_identity():
    with pytest.raises(AnnihilatedStateError):
        apply_expr(vacuum(1), P("a1^ a1"))
    np.testing.assert_array_equal(apply_expr(vacuum(2), P("1")).amplitudes, vacuum(2).amplitudes)
    with pytest.raises(ValueError, match="unitary"):
        apply_expr(vacuum(2), P("a1^"), check_unitary=True)


# ------------------------------------------------------------ exponentials

def taylor_exp(m, theta, order=60):
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, order):
        term = term @ (1j * theta * m) / k
        out = out + term
    return out


def test_exponentiate_examples():
    np.testing.assert_allclose(exponentiate_hermitian(P("a1^ a1"), np.pi, 1), np.diag([1, -1]), atol=1e-12)
    np.testing.assert_allclose(exponentiate_hermitian(P("a1 + a1^ + a2^ a2"), 0, 2), np.eye(4), atol=1e-12)


def test_hopping_unitary_matches_oracles():
    hop = normal_order(P("a1^ a2 + a2^ a1"))
    u = exponentiate_hermitian(hop, np.pi / 2, 2)
    m = jw_matrix(hop, 2)
    np.testing.assert_allclose(u, scipy.linalg.expm(1j * np.pi / 2 * m), atol=1e-12)
    np.testing.assert_allclose(u, taylor_exp(m, np.pi / 2), atol=1e-12)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) <= 1e-9
    # the fermion hops between modes, picking up a phase i
    assert abs(u[1, 2]) == pytest.approx(1) and abs(u[2, 1]) == pytest.approx(1)


def test_exponentiate_rejects_non_hermitian():
    with pytest.raises(ValueError):
        exponentiate_hermitian(P("a1"), 1.0, 1)


# ------------------------------------------------------------ measurement

def test_eigendecompose_examples():
    dec = eigendecompose(np.diag([1.0, -1.0]))
    assert dec.eigenvalues == (-1.0, 1.0)
    assert all(np.trace(p).real == pytest.approx(1) for p in dec.projectors)
    single = eigendecompose(np.eye(4))
    assert single.eigenvalues == (1.0,)
    np.testing.assert_allclose(single.projectors[0], np.eye(4), atol=1e-12)


def test_eigendecompose_majorana_pair():
    m = jw_matrix(P("a1 + a1^"), 2)
    dec = eigendecompose(m)
    w = np.linalg.eigvalsh(m)
    np.testing.assert_allclose(w, [-1, -1, 1, 1], atol=1e-12)
    assert dec.eigenvalues == pytest.approx((-1.0, 1.0))
    assert [round(np.trace(p).real) for p in dec.projectors] == [2, 2]


def test_eigendecompose_clusters_near_degenerate():
    dec = eigendecompose(np.diag([0.0, 1e-10, 1.0]), cluster_tol=1e-8)
    assert len(dec.clusters) == 2
    dec = eigendecompose(np.diag([0.0, 1e-6, 1.0]), cluster_tol=1e-8)
    assert len(dec.clusters) == 3


def test_eigendecomposition_resolution_of_identity(rng):
    for _ in range(20):
        g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        h = g + g.conj().T
        dec = eigendecompose(h)
        projs = dec.projectors
        assert np.max(np.abs(sum(projs) - np.eye(8))) <= 1e-8
        for i, p in enumerate(projs):
            assert np.max(np.abs(p @ p - p)) <= 1e-8
            for q in projs[i + 1:]:
                assert np.max(np.abs(p @ q)) <= 1e-8
        assert all(b - a > 1e-8 for a, b in zip(dec.eigenvalues, dec.eigenvalues[1:]))


def test_measure_examples():
    number = jw_matrix(P("a1^ a1"), 1)
    dist, post = measure(vacuum(1), number)
    assert dist.nonzero() == ((0.0, 1.0),)
    np.testing.assert_allclose(post.matrix, vacuum(1).density_matrix().matrix)

    plus = prepare(P("a1^ + 1"), 1)
    dist, _ = measure(plus, jw_matrix(P("a1 + a1^"), 1))
    assert dist.probability(1.0) == pytest.approx(1, abs=1e-10)
    assert dist.probability(-1.0) == pytest.approx(0, abs=1e-10)

    dist, _ = measure(plus, number)
    assert dist.probability(0) == pytest.approx(0.5) and dist.probability(1) == pytest.approx(0.5)


def test_measure_is_idempotent_and_conserves_probability(rng):
    for _ in range(20):
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi = StateVector.normalized(3, amps)
        g = rng.normal(size=(8, 8))
        m = g + g.T
        dist1, post1 = measure(psi, m)
        dist2, post2 = measure(post1, m)
        assert sum(p for _, p in dist1.outcomes) == pytest.approx(1, abs=1e-10)
        assert all(p >= -1e-12 for _, p in dist1.outcomes)
        assert dist1.total_variation(dist2) <= 1e-10
        assert np.max(np.abs(post1.matrix - post2.matrix)) <= 1e-10


def test_measure_dimension_mismatch():
    with pytest.raises(ValueError):
        measure(vacuum(2), np.eye(2))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(1, np.diag([2.0, -1.0]))
    with pytest.raises(ValueError):
        DensityMatrix(1, np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(ValueError):
        StateVector(1, [1, 1])


# ------------------------------------------------------------- state files

def test_state_file_round_trip(tmp_path):
    state = prepare(P("a1^ + 1"), 2)
    path = tmp_path / "state.json"
    path.write_text(json.dumps(state_to_json(state, tol=1e-15)))
    loaded = load_state(str(path))
    np.testing.assert_allclose(loaded.amplitudes, state.amplitudes)


def test_state_file_normalizes_and_fills_zeros():
    state = load_state({"n_modes": 2, "amplitudes": [{"basis": "00", "re": 3}, {"basis": "11", "im": 4}]})
    np.testing.assert_allclose(state.amplitudes, [0.6, 0, 0, 0.8j])


@pytest.mark.parametrize(
    "data",
    [
        {"n_modes": 2, "amplitudes": []},
        {"n_modes": 2, "amplitudes": [{"basis": "0", "re": 1}]},
        {"n_modes": 2, "amplitudes": [{"basis": "02", "re": 1}]},
        {"n_modes": 2, "amplitudes": [{"basis": "01", "re": 1}, {"basis": "01", "re": 1}]},
        {"n_modes": 1, "amplitudes": [{"basis": "1", "re": 1e-13}]},
        {"amplitudes": []},
    ],
)
def test_state_file_errors(data):
    with pytest.raises(ValueError):
        load_state(data)


def test_number_operator_counts(rng):
    for bits in ("000", "101", "111"):
        state = basis_state(bits)
        for i, b in enumerate(bits, start=1):
            n_i = monomial_expr((LadderOp(i, True), LadderOp(i)))
            assert expectation(state, n_i) == int(b)
