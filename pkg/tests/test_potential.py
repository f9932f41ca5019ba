import numpy as np
import pytest

from ncruelle import potential as pot
from ncruelle.algebra import Algebra, LinearMap, PIVerdict, operator_norm
from ncruelle.errors import DomainError
from ncruelle.sft import TransitionMatrix

from conftest import builtin_families

M2 = Algebra.matrix(2)
FULL2 = TransitionMatrix.full(2)
GOLDEN = TransitionMatrix.golden_mean()
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def literal_pauli(a, p):
    """(1 - p) a + (p/3)(XaX + YaY + ZaZ) with complex Pauli matrices."""
    s = X @ a @ X + Y @ a @ Y + Z @ a @ Z
    out = (1 - p) * a + p / 3 * s
    assert np.abs(out.imag).max() < 1e-15
    return out.real


def trace_form(a, p):
    return (1 - p) * a + p * np.trace(a) / 2 * np.eye(2)


def seeded_symmetric(rng, n=20):
    b = rng.standard_normal((n, 2, 2))
    return 0.5 * (b + b.transpose(0, 2, 1))


@pytest.mark.parametrize("name, phi", builtin_families(), ids=[n for n, _ in builtin_families()])
def test_builtin_families_normalized(name, phi):
    assert pot.check_normalized(phi) <= 1e-12


@pytest.mark.parametrize("name, phi", builtin_families(), ids=[n for n, _ in builtin_families()])
def test_certified_families_have_positive_jacobian(name, phi):
    if phi.certificate != "analytic_pi":
        pytest.skip("no certificate")
    J = pot.jacobian(phi)
    assert all(phi.algebra.is_strictly_positive(J.element(j), 1e-10) for j in range(J.n_words))


def test_trace_type_first_coordinate():
    phi = pot.make_first_coordinate(0.3)
    assert phi.depth == 1 and phi.certificate == "analytic_pi"
    a = np.array([[2.0, 1.0], [1.0, 4.0]])
    assert np.allclose(phi.map_at((1, 2))(a), 3.0 * np.diag([0.3, 0.7]))
    assert np.allclose(phi.map_at((2,))(a), 3.0 * np.diag([0.7, 0.3]))


def test_trace_type_half_identity_is_degenerate_depolarizing():
    phi = pot.make_trace_type({(1,): 0.5 * np.eye(2), (2,): 0.5 * np.eye(2)})
    dep = pot.make_depolarizing(1.0)
    assert np.allclose(phi.maps, dep.maps, atol=1e-15)


def test_trace_type_rejects_singular_factor():
    with pytest.raises(DomainError, match=r"word \(2,\)"):
        pot.make_trace_type({(1,): np.eye(2), (2,): np.diag([1.0, 0.0])})


def test_trace_type_rejects_incomplete_table():
    with pytest.raises(DomainError, match="missing"):
        pot.make_trace_type({(1, 1): np.eye(2) / 2, (1, 2): np.eye(2) / 2})


def test_depolarizing_p1_action():
    phi = pot.make_depolarizing(1.0)
    a = np.array([[3.0, 1.0], [1.0, -1.0]])
    assert np.allclose(phi.map_at((1,))(a), 0.5 * np.trace(a) / 2 * np.eye(2), atol=1e-15)


def test_depolarizing_half_identity():
    phi = pot.make_depolarizing(0.5)
    assert np.allclose(phi.map_at((2,))(np.eye(2)), 0.5 * np.eye(2))
    assert pot.check_normalized(phi) <= 1e-14


def test_depolarizing_domain():
    for p in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            pot.make_depolarizing(p)


def test_depolarizing_trace_form_matches_oracle(rng):
    for p in (0.1, 0.5, 1.0):
        L = LinearMap(M2, pot.depolarizing_channel(p))
        for a in seeded_symmetric(rng):
            assert np.allclose(L(a), trace_form(a, p), atol=1e-14)


def test_pauli_form_holds_with_rescaled_weight(rng):
    # XaX + YaY + ZaZ = 2 tr(a) Id - a, so the trace form needs Pauli weight 3p/4
    for p in (0.2, 0.6, 1.0):
        for a in seeded_symmetric(rng):
            assert np.allclose(literal_pauli(a, 0.75 * p), trace_form(a, p), atol=1e-12)
        L = LinearMap(M2, pot.pauli_channel(0.75 * p))
        for a in seeded_symmetric(rng):
            assert np.allclose(L(a), trace_form(a, p), atol=1e-12)


def test_pauli_form_with_literal_weight_differs(rng):
    """Documented discrepancy: weight p/3 per Pauli term does not give the trace form."""
    p = 0.4
    worst = max(np.abs(literal_pauli(a, p) - trace_form(a, p)).max() for a in seeded_symmetric(rng))
    assert worst > 1e-2


def test_kraus_split_uniform():
    phi = pot.make_kraus_split([[0.5, 0.5], [0.5, 0.5]])
    a = np.array([[2.0, 7.0], [7.0, 3.0]])
    assert np.allclose(phi.map_at((1,))(a), 2.0 * np.diag([0.5, 0.5]))
    assert np.allclose(phi.map_at((2,))(a), 3.0 * np.diag([0.5, 0.5]))
    assert np.array_equal(phi.map_at((1,))(np.diag([0.0, 1.0])), np.zeros((2, 2)))
    assert phi.certificate == "none"


def test_kraus_split_normalized_for_seeded_P(rng):
    for _ in range(20):
        P = rng.uniform(0.05, 1.0, (2, 2))
        P /= P.sum(axis=1, keepdims=True)
        phi = pot.make_kraus_split(P)
        total = phi.map_at((1,))(np.eye(2)) + phi.map_at((2,))(np.eye(2))
        assert np.abs(total - np.eye(2)).max() <= 1e-12


def test_kraus_split_rejects_bad_P():
    with pytest.raises(DomainError):
        pot.make_kraus_split([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(DomainError):
        pot.make_kraus_split([[1.0, 0.0], [0.5, 0.5]])


def test_vector_tables_normalized():
    for N in (2, 3):
        assert pot.check_normalized(pot.make_vector_table(pot.uniform_vector_table(N))) <= 1e-14
        for p in (0.3, 0.7):
            phi = pot.make_vector_table(pot.uniform_vector_table(N, p))
            assert pot.check_normalized(phi) <= 1e-14
    er2 = pot.make_vector_table(np.full((2, 2), 0.25))
    assert pot.check_normalized(er2) <= 1e-14
    assert er2.verdict is PIVerdict.CERTIFIED_TRUE


def test_vector_table_rejects_zero_entry():
    with pytest.raises(DomainError, match="non-positive"):
        pot.make_vector_table(np.array([[0.5, 0.0], [0.0, 0.5]]))


def test_custom_reproduces_depolarizing(rng):
    dep = pot.make_depolarizing(1.0)
    custom = pot.make_custom({(1,): dep.maps[0], (2,): dep.maps[1]}, M2, FULL2)
    for a in rng.standard_normal((20, 2, 2)):
        for w in ((1,), (2,)):
            assert np.abs(custom.map_at(w)(a) - dep.map_at(w)(a)).max() <= 1e-14
    assert custom.certificate == "sampled"
    assert custom.verdict is PIVerdict.PROBABLY_TRUE


def test_custom_incomplete_table():
    with pytest.raises(DomainError, match=r"missing words \[\(2,\)\]"):
        pot.make_custom({(1,): np.eye(4)}, M2, FULL2)


def test_custom_records_certified_false():
    flip = LinearMap.from_function(M2, lambda a: -a).matrix
    phi = pot.make_custom({(1,): flip, (2,): np.eye(4)}, M2, FULL2)
    assert phi.verdict is PIVerdict.CERTIFIED_FALSE


def test_broken_trace_type_deviation_half():
    phi = pot.make_trace_type({(1,): np.diag([0.75, 0.75]), (2,): np.diag([0.75, 0.75])})
    assert pot.check_normalized(phi) == pytest.approx(0.5, abs=1e-15)


def test_jacobian_examples():
    phi = pot.make_first_coordinate(0.2)
    J = pot.jacobian(phi)
    assert np.allclose(J.eval((1,)), np.diag([0.2, 0.8]))
    dep = pot.jacobian(pot.make_depolarizing(0.3))
    assert np.allclose(dep.values, np.tile(M2.vec(0.5 * np.eye(2)), (2, 1)))
    P = np.array([[0.9, 0.1], [0.2, 0.8]])
    ks = pot.jacobian(pot.make_kraus_split(P))
    assert np.allclose(ks.eval((1,)), np.diag([0.9, 0.2]))


def test_lipschitz_seminorm_examples():
    assert pot.lipschitz_seminorm(pot.make_depolarizing(0.5), 0.5) == 0.0
    phi = pot.make_first_coordinate(0.3)
    delta = operator_norm(LinearMap(M2, phi.maps[0] - phi.maps[1]))
    assert pot.lipschitz_seminorm(phi, 0.4) == pytest.approx(delta, rel=1e-12)
    # depth-2 table differing only in the second symbol
    base = pot.make_trace_type({(1, 1): np.diag([0.3, 0.6]), (1, 2): np.diag([0.4, 0.6]),
                                (2, 1): np.diag([0.7, 0.4]), (2, 2): np.diag([0.6, 0.4])})
    d11_12 = operator_norm(LinearMap(M2, base.maps[0] - base.maps[1]))
    d21_22 = operator_norm(LinearMap(M2, base.maps[2] - base.maps[3]))
    cross = max(operator_norm(LinearMap(M2, base.maps[i] - base.maps[j]))
                for i in (0, 1) for j in (2, 3))
    theta = 0.5
    assert pot.lipschitz_seminorm(base, theta) == pytest.approx(
        max(d11_12 / theta, d21_22 / theta, cross), rel=1e-12)


def test_preimage_weights():
    depth, w = pot.preimage_weights(FULL2)
    assert depth == 1 and np.allclose(w, 0.5)
    depth, w = pot.preimage_weights(GOLDEN)
    # words 11, 12, 21: in-degree of 1 is 2, of 2 is 1
    assert depth == 2 and np.allclose(w, [0.5, 1.0, 0.5])


def test_lift_depth_preserves_action(rng):
    phi = pot.make_first_coordinate(0.3)
    lifted = phi.lift_depth(3)
    for w in map(tuple, FULL2.words(3) + 1):
        assert np.array_equal(lifted.map_at(w).matrix, phi.map_at(w).matrix)
    assert pot.check_normalized(lifted) <= 1e-14


def test_w_transform_unnormalized():
    assert pot.check_normalized(pot.make_scaled_trace()) == pytest.approx(1.0, abs=1e-15)


def test_summary_is_jsonable():
    import json
    for _, phi in builtin_families():
        json.dumps(phi.summary())
