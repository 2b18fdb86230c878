import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lancom.compression import (
    CompressionPlan,
    NoCompressionPossible,
    _candidates,
    apply_compression,
    plan_compression,
    rational_krylov_basis,
)
from lancom.lanczos import expand_step, init_state
from lancom.linalg import sym_eig
from lancom.sparse import gen_random_symmetric

from conftest import random_symmetric


def _in_range(V, x):
    return np.linalg.norm(x - V @ (V.T @ x)) / np.linalg.norm(x)


def _lanczos_state(A, steps, seed=0, capacity=None):
    st_ = init_state(A, seed, capacity=capacity or steps)
    for _ in range(steps):
        expand_step(st_, A)
    return st_


def test_polynomial_poles():
    T = random_symmetric(8, 0)
    em = np.eye(8)[:, -1]
    B, truncated = rational_krylov_basis(T, [np.inf, np.inf], em)
    assert B.shape == (8, 2) and truncated == 0
    np.testing.assert_allclose(B.T @ B, np.eye(2), atol=1e-15)
    assert _in_range(B, em) < 1e-14
    assert _in_range(B, T @ em) < 1e-14


def test_pair_fills_small_space():
    T = np.diag([1.0, 2.0, 3.0])
    e3 = np.eye(3)[:, -1]
    xi = 2 + 1j
    poles = [np.inf, np.inf, xi, xi.conjugate()]
    # e3 is an eigenvector of T, so every rational function of T keeps it in span{e3}
    B, truncated = rational_krylov_basis(T, poles, e3)
    assert B.shape == (3, 1) and truncated == 3
    y = np.linalg.solve(T @ T - 4 * T + 5 * np.eye(3), e3)
    assert _in_range(B, y) < 1e-12
    # a generic start fills the three-dimensional space and the fourth direction is dropped
    v = np.ones(3)
    B, truncated = rational_krylov_basis(T, poles, v)
    assert B.shape == (3, 3) and truncated == 1
    assert _in_range(B, np.linalg.solve(T @ T - 4 * T + 5 * np.eye(3), v)) < 1e-12


def test_pair_directions_on_larger_matrix():
    T = random_symmetric(12, 3)
    em = np.eye(12)[:, -1]
    xi = 0.3 + 0.7j
    B, truncated = rational_krylov_basis(T, [xi, xi.conjugate(), np.inf, np.inf], em)
    assert B.shape == (12, 4) and truncated == 0
    x = np.linalg.solve(T - xi * np.eye(12), em)
    assert _in_range(B, x.real) < 1e-12
    assert _in_range(B, x.imag) < 1e-12


def test_identity_collapses():
    B, truncated = rational_krylov_basis(np.eye(5), [np.inf, np.inf, 1 + 1j, 1 - 1j], np.eye(5)[:, -1])
    assert B.shape == (5, 1)
    assert truncated == 3


def test_pole_validation():
    T = np.diag([1.0, 2.0])
    with pytest.raises(ValueError):
        rational_krylov_basis(T, [1 + 1j], np.ones(2))
    with pytest.raises(ValueError):
        rational_krylov_basis(T, [1 + 1j, 2 - 1j], np.ones(2))
    with pytest.raises(ValueError):
        rational_krylov_basis(T, [np.inf], np.zeros(2))


def test_plan_on_diagonal():
    T = np.diag(np.arange(1.0, 61.0))
    plan = plan_compression(T, 1, 1e-6)
    assert isinstance(plan, CompressionPlan)
    assert plan.ell < 60
    V = plan.V
    np.testing.assert_allclose(V.T @ V, np.eye(plan.ell), atol=1e-13)
    _, S = sym_eig(T)
    assert _in_range(V, S[:, 0]) <= 1e-10
    assert _in_range(V, np.eye(60)[:, -1]) <= 1e-10
    assert plan.em_residual <= 1e-10
    assert plan.retained_eigvec_count == plan.k_star >= 1
    assert plan.filter.p >= 1


def test_gap_floor_skips_degenerate_candidate():
    theta = np.concatenate([[1.0, 1.0], np.arange(2.0, 40.0)])
    cands = _candidates(theta, 1, 1e-6)
    assert 1 not in [c[1] for c in cands]
    assert 2 in [c[1] for c in cands]
    plan = plan_compression(np.diag(theta), 1, 1e-6)
    assert plan.k_star >= 2


def test_candidates_sorted_by_objective():
    theta = np.sort(np.random.default_rng(2).standard_normal(30))
    cands = _candidates(theta, 2, 1e-6)
    keys = [(c[0], c[1]) for c in cands]
    assert keys == sorted(keys)
    for obj, k_hat, d, *_ in cands:
        assert obj == k_hat + d


def test_no_compression_when_everything_degenerate():
    with pytest.raises(NoCompressionPossible):
        plan_compression(np.eye(6), 1, 1e-6)


def test_plan_preconditions():
    with pytest.raises(ValueError):
        plan_compression(np.eye(3), 3, 1e-6)


@settings(max_examples=25, deadline=None)
@given(m=st.integers(12, 50), k=st.integers(1, 4), seed=st.integers(0, 10_000),
       tol=st.sampled_from([1e-3, 1e-6, 1e-8]))
def test_plan_properties(m, k, seed, tol):
    rng = np.random.default_rng(seed)
    T = np.diag(rng.standard_normal(m)) + np.diag(rng.standard_normal(m - 1), 1)
    T = T + np.triu(T, 1).T
    try:
        plan = plan_compression(T, k, tol)
    except NoCompressionPossible:
        assume(False)
    V = plan.V
    assert V.shape[1] < m
    assert np.linalg.norm(V.T @ V - np.eye(V.shape[1])) <= 1e-12
    _, S = sym_eig(T)
    for i in range(plan.k_star):
        assert _in_range(V, S[:, i]) <= 1e-10
    # filter is accurate on the Ritz values it separates
    f = plan.filter
    theta = np.linalg.eigvalsh(T)
    assert np.all(np.abs(f(theta[:k]) - 1) < tol)
    assert np.all(np.abs(f(theta[plan.k_star:])) < tol)


# apply_compression

def test_identity_compression_is_noop(sparse200):
    state = _lanczos_state(sparse200, 20)
    Q0, T0, q0 = state.Q.copy(), state.T.copy(), state.q_next.copy()
    apply_compression(state, np.eye(20))
    assert np.abs(state.Q - Q0).max() <= 1e-15
    assert np.abs(state.T - T0).max() <= 1e-15 * np.abs(T0).max()
    np.testing.assert_array_equal(state.q_next, q0)


def test_eigvec_compression_gives_diagonal(sparse200):
    state = _lanczos_state(sparse200, 20)
    _, S = sym_eig(state.T)
    apply_compression(state, S[:, :8])
    T = state.T
    assert T.shape == (8, 8)
    assert np.abs(T - np.diag(np.diag(T))).max() <= 1e-12 * np.abs(T).max()


def test_one_step_after_compression_matches_lanczos(sparse200):
    A = sparse200
    ref = _lanczos_state(A, 31, seed=3)
    state = _lanczos_state(A, 30, seed=3)
    plan = plan_compression(state.T, 2, 1e-6)
    assert plan.ell < 30
    apply_compression(state, plan)
    expand_step(state, A)
    q_ref, q = ref.q_next, state.q_next
    assert min(np.linalg.norm(q - q_ref), np.linalg.norm(q + q_ref)) <= 1e-8
    assert state.alpha_hist[-1] == pytest.approx(ref.alpha_hist[-1], abs=1e-8 * A.norm_inf())


def test_rayleigh_identity_after_compressions():
    A = gen_random_symmetric(400, 8, seed=9)
    norm = np.linalg.norm(A.toarray(), 2)
    state = _lanczos_state(A, 40, seed=1, capacity=40)
    for _ in range(3):
        plan = plan_compression(state.T, 3, 1e-6)
        apply_compression(state, plan)
        assert state.rayleigh_defect(A) <= 1e-12 * norm
        assert state.orthogonality_defect() <= 1e-12
        while state.j < 40:
            expand_step(state, A)
        # fill-in column is dense after compression yet the identity holds
        assert state.rayleigh_defect(A) <= 1e-12 * norm
