import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncruelle import potential as pot
from ncruelle.algebra import (Algebra, LinearMap, PIVerdict, apply_map, is_positivity_improving,
                              operator_norm, trace_type_map)
from ncruelle.errors import DomainError

M2 = Algebra.matrix(2)
V2 = Algebra.vector(2)


def grid_operator_norm(L, n=4001):
    """max over O(2) of ||L(U)||: rotations and reflections on an angle grid."""
    best = 0.0
    for t in np.linspace(0.0, 2 * np.pi, n):
        c, s = np.cos(t), np.sin(t)
        for U in (np.array([[c, -s], [s, c]]), np.array([[c, s], [s, -c]])):
            best = max(best, np.linalg.norm(L(U), 2))
    return best


def test_identity_elements():
    assert np.array_equal(M2.identity(), np.eye(2))
    assert np.array_equal(V2.identity(), [1.0, 1.0])
    assert np.array_equal(Algebra.vector(3).identity(), [1.0, 1.0, 1.0])


def test_is_positive_examples():
    assert M2.is_positive(np.eye(2))
    assert not M2.is_positive(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not M2.is_positive(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_is_strictly_positive_examples():
    assert M2.is_strictly_positive(np.diag([0.5, 0.5]), 0.1)
    for eps in (1e-3, 1e-10, 1e-15):
        assert not M2.is_strictly_positive(np.diag([1.0, 0.0]), eps)
    assert V2.is_strictly_positive(np.array([0.3, 0.7]), 0.2)


def test_psd_sweep(rng):
    for _ in range(1000):
        d = rng.integers(1, 5)
        alg = Algebra.matrix(int(d))
        b = rng.standard_normal((d, d))
        a = b @ b.T
        assert alg.is_positive(a, 1e-9)
        if np.linalg.eigvalsh(a).max() > 1e-6:
            assert not alg.is_positive(-a, 1e-9)


def test_normalized_trace_examples():
    assert M2.normalized_trace(np.eye(2)) == 1.0
    assert M2.normalized_trace(np.diag([1.0, -1.0])) == 0.0
    assert M2.normalized_trace(np.diag([0.5, 0.5])) == 0.5
    assert Algebra.vector(4).normalized_trace([1.0, 2.0, 3.0, 6.0]) == 3.0


def test_log_positive_examples():
    log_half = M2.log_positive(np.diag([0.5, 0.5]))
    assert np.allclose(log_half, np.diag([np.log(0.5)] * 2), atol=1e-15)
    assert np.allclose(M2.log_positive(np.eye(2)), 0.0, atol=1e-15)
    assert np.allclose(M2.log_positive(np.diag([0.25, 0.75])),
                       np.diag([np.log(0.25), np.log(0.75)]), atol=1e-15)


def test_log_positive_rejects_singular():
    with pytest.raises(DomainError, match="eigenvalue"):
        M2.log_positive(np.diag([1.0, 0.0]))


def test_log_exp_roundtrip(rng):
    for _ in range(100):
        b = rng.standard_normal((3, 3))
        a = b @ b.T + 0.1 * np.eye(3)
        alg = Algebra.matrix(3)
        back = alg.exp_symmetric(alg.log_positive(a))
        assert np.abs(back - a).max() <= 1e-10 * np.abs(a).max()


def test_apply_map_examples():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(LinearMap.zero(M2)(a), np.zeros((2, 2)))
    assert np.array_equal(LinearMap.identity(M2)(a), a)
    dep1 = LinearMap(M2, pot.depolarizing_channel(1.0))
    assert np.allclose(dep1(np.diag([2.0, 0.0])), np.eye(2), atol=1e-15)


def test_apply_map_shape_mismatch():
    with pytest.raises(DomainError):
        apply_map(LinearMap.identity(M2), np.ones(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_apply_map_linear(seed):
    r = np.random.default_rng(seed)
    L = LinearMap(M2, r.standard_normal((4, 4)))
    a, b = r.standard_normal((2, 2, 2))
    c = r.standard_normal()
    assert np.allclose(L(a + c * b), L(a) + c * L(b), atol=1e-12)


def test_from_function_roundtrip(rng):
    X = rng.standard_normal((2, 2))
    L = LinearMap.from_function(M2, lambda a: X @ a @ X.T)
    a = rng.standard_normal((2, 2))
    assert np.allclose(L(a), X @ a @ X.T, atol=1e-12)


def test_positivity_improving_examples():
    table = LinearMap(V2, np.full((2, 2), 0.25))
    assert is_positivity_improving(table) is PIVerdict.CERTIFIED_TRUE
    assert is_positivity_improving(LinearMap(V2, np.eye(2))) is PIVerdict.CERTIFIED_FALSE
    assert is_positivity_improving(LinearMap.identity(M2)) is PIVerdict.CERTIFIED_FALSE
    tt = trace_type_map(M2, np.diag([0.5, 0.5]))
    assert is_positivity_improving(tt) is PIVerdict.PROBABLY_TRUE


def test_positivity_improving_depolarizing():
    for p in (0.1, 0.5, 1.0):
        L = LinearMap(M2, pot.depolarizing_channel(p))
        assert is_positivity_improving(L, seed=3) is PIVerdict.PROBABLY_TRUE


def test_operator_norm_examples():
    assert operator_norm(LinearMap.identity(M2)) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm(LinearMap.zero(M2)) == 0.0
    assert operator_norm(0.5 * LinearMap.identity(M2)) == pytest.approx(0.5, abs=1e-12)
    assert operator_norm(LinearMap(V2, [[1.0, -2.0], [0.5, 0.5]])) == 3.0


def test_operator_norm_matches_grid_oracle(rng):
    for _ in range(15):
        L = LinearMap(M2, rng.standard_normal((4, 4)))
        exact = operator_norm(L)
        oracle = grid_operator_norm(L)
        # the grid underestimates by O(step^2); the ascent must not undershoot it
        assert exact >= oracle - 1e-9
        assert exact <= oracle * (1 + 1e-5)


def test_operator_norm_unital_positive_maps_are_contractions():
    # positive unital maps have norm ||phi(Id)|| (Russo-Dye)
    for p in (0.2, 0.7):
        assert operator_norm(LinearMap(M2, pot.depolarizing_channel(p))) == pytest.approx(1, abs=1e-9)
    K = LinearMap(M2, pot.kraus_channel_table([[0.9, 0.1], [0.2, 0.8]]))
    assert operator_norm(K) == pytest.approx(1.0, abs=1e-9)


def test_operator_norm_submultiplicative(rng):
    for _ in range(20):
        A = LinearMap(M2, rng.standard_normal((4, 4)))
        B = LinearMap(M2, rng.standard_normal((4, 4)))
        assert operator_norm(A @ B) <= operator_norm(A) * operator_norm(B) + 1e-9


def test_algebra_norms():
    assert M2.norm(np.array([[3.0, 0.0], [0.0, -4.0]])) == 4.0
    assert V2.norm(np.array([-3.0, 2.0])) == 3.0
    stack = np.array([[3.0, 0.0, 0.0, -4.0], [1.0, 0.0, 0.0, 1.0]])
    assert np.allclose(M2.norms(stack), [4.0, 1.0])


def test_pairing_is_trace_of_product(rng):
    rho, a = rng.standard_normal((2, 3, 3))
    alg = Algebra.matrix(3)
    assert alg.pairing(rho, a) == pytest.approx(np.trace(rho.T @ a), abs=1e-12)


def test_bad_descriptor():
    with pytest.raises(DomainError):
        Algebra("tensor", 2)
    with pytest.raises(DomainError):
        Algebra.matrix(0)
    with pytest.raises(DomainError):
        M2.element(np.ones(3))
