import numpy as np
import pytest

from ncruelle import classical as cl
from ncruelle import eigenstate as es
from ncruelle import potential as pot
from ncruelle import transfer as tr
from ncruelle.algebra import Algebra
from ncruelle.cylfun import CylinderFunction
from ncruelle.errors import DegenerateEigenvalueError, DomainError
from ncruelle.potential import Potential
from ncruelle.sft import TransitionMatrix

from conftest import builtin_families

M2 = Algebra.matrix(2)
FULL2 = TransitionMatrix.full(2)
GOLDEN = TransitionMatrix.golden_mean()
FAMILIES = builtin_families()
IDS = [n for n, _ in FAMILIES]


def iterated_value(phi, g):
    """eta(g) as the limit of L^n g, without any dense eigensolve."""
    res = tr.power_iterate(phi, g, 1e-13, 2000)
    assert res.converged
    return res.eta_estimate


def uniform_trace_state(shift, n):
    return es._from_measure(cl.maximal_entropy(shift), M2, n, np.eye(2) / 2, "uniform")


@pytest.mark.parametrize("name, phi", FAMILIES, ids=IDS)
def test_extract_is_fixed_and_unital(name, phi):
    eta = es.extract(phi, 4)
    assert es.check_fixed(eta, phi) <= 1e-9
    assert eta.unit_value() == pytest.approx(1.0, abs=1e-12)
    assert eta.is_faithful()


@pytest.mark.parametrize("name, phi", FAMILIES, ids=IDS)
def test_closed_form_matches_extract(name, phi):
    eta = es.extract(phi, 4)
    closed = es.closed_form(phi, 4)
    assert es.max_difference(eta, closed, 4) <= 1e-9
    assert es.check_fixed(closed, phi) <= 1e-12


@pytest.mark.parametrize("name, phi", FAMILIES, ids=IDS)
def test_closed_form_matches_power_iteration(name, phi, rng):
    closed = es.closed_form(phi, 3)
    for _ in range(3):
        g = CylinderFunction.random(phi.algebra, phi.shift, 3, rng, symmetric=True)
        assert closed(g) == pytest.approx(iterated_value(phi, g), abs=1e-9)


@pytest.mark.parametrize("name, phi", FAMILIES, ids=IDS)
def test_uniqueness_across_depths(name, phi):
    a = es.extract(phi, 3)
    b = es.extract(phi, 4)
    assert es.max_difference(a, b, 3) <= 1e-9
    if name != "kraus_split":
        assert es.check_shift_invariant(a, b) <= 1e-9


def test_kraus_split_state_not_shift_invariant():
    # eta(g o sigma) = eta(Phi(g)) with Phi = phi_1 + phi_2 = eps, and eta o eps != eta here
    P = [[0.9, 0.1], [0.2, 0.8]]
    phi = pot.make_kraus_split(P)
    a, b = es.extract(phi, 3), es.extract(phi, 4)
    assert es.check_shift_invariant(a, b) > 0.01
    # g = diag(1, 0) on [1]: eta(g) = mu([1]) = pi_1 = 2/3, eta(g o sigma) = mu([11]) = 0.9 pi_1
    g = CylinderFunction.indicator(M2, FULL2, (1,), np.diag([1.0, 0.0]))
    closed = es.closed_form_kraus_split(P, 2)
    assert closed(g) == pytest.approx(2 / 3, abs=1e-15)
    assert closed(g.compose_shift()) == pytest.approx(0.6, abs=1e-15)


def test_depolarizing_p1_uniform_weights():
    eta = es.extract(pot.make_depolarizing(1.0), 2)
    assert np.allclose(eta.weights, np.tile(M2.vec(np.eye(2) / 2) / 4, (4, 1)), atol=1e-12)


def test_trace_type_first_coordinate_is_bernoulli_half(rng):
    for p in (0.1, 0.3, 0.8):
        phi = pot.make_first_coordinate(p)
        eta = es.extract(phi, 3)
        for _ in range(50):
            g = CylinderFunction.random(M2, FULL2, 3, rng)
            tr_vals = g.values @ M2.trace_functional()
            assert eta(g) == pytest.approx(tr_vals.mean(), abs=1e-10)


def test_generic_trace_type_closed_form(rng):
    for _ in range(5):
        b = rng.standard_normal((2, 2, 2))
        A = b @ b.transpose(0, 2, 1) + 0.1 * np.eye(2)
        # normalize so that P(1) + P(2) = Id
        w, v = np.linalg.eigh(A.sum(axis=0))
        S = (v / np.sqrt(w)) @ v.T
        P = {(1,): S @ A[0] @ S, (2,): S @ A[1] @ S}
        phi = pot.make_trace_type(P)
        assert es.max_difference(es.extract(phi, 4), es.closed_form_trace_type(phi, 4), 4) <= 1e-10


def test_vector_uniform_state(rng):
    for N in (2, 3):
        phi = pot.make_vector_table(pot.uniform_vector_table(N))
        eta = es.extract(phi, 2)
        for _ in range(10):
            g = CylinderFunction.random(phi.algebra, FULL2, 2, rng)
            assert eta(g) == pytest.approx(g.values.mean(), abs=1e-12)


def test_kraus_closed_form_uniform_P():
    closed = es.closed_form_kraus([[0.5, 0.5], [0.5, 0.5]], 2)
    assert np.allclose(closed.weights, np.tile(M2.vec(np.diag([0.5, 0.5])) / 4, (4, 1)))


def test_evaluate_examples(rng):
    eta = es.extract(pot.make_first_coordinate(0.3), 2)
    ident = CylinderFunction.identity(M2, FULL2)
    assert eta(ident) == pytest.approx(1.0, abs=1e-12)
    assert eta(0.0 * ident) == 0.0
    assert eta(-4.5 * ident) == pytest.approx(-4.5, abs=1e-12)
    with pytest.raises(DomainError):
        eta(CylinderFunction.random(M2, FULL2, 3, rng))


def test_check_shift_invariant_constant():
    a = es.extract(pot.make_depolarizing(0.5), 2)
    b = es.extract(pot.make_depolarizing(0.5), 3)
    c = CylinderFunction.constant(np.diag([2.0, -1.0]), M2, FULL2)
    assert es.evaluate(b, c.compose_shift()) == es.evaluate(b, c)


def test_wrong_state_detected():
    # tr^ P(1 v) = 0.3, so the equilibrium measure is Bernoulli(0.3, 0.7), not uniform
    phi = pot.make_trace_type({(1,): np.diag([0.2, 0.4]), (2,): np.diag([0.8, 0.6])})
    assert es.check_fixed(uniform_trace_state(FULL2, 2), phi) > 0.01
    # hand computation on the indicator of [1]: eta(L 1_[1]) = 0.3, eta(1_[1]) = 0.5
    ind = CylinderFunction.indicator(M2, FULL2, (1,))
    eta = uniform_trace_state(FULL2, 2)
    assert abs(eta(tr.apply(phi, ind)) - eta(ind)) == pytest.approx(0.2, abs=1e-12)


def test_uniform_trace_not_fixed_by_kraus_split():
    """Documented discrepancy: the uniform-trace state is not fixed by the branch operator."""
    phi = pot.make_kraus_split([[0.5, 0.5], [0.5, 0.5]])
    assert es.check_fixed(uniform_trace_state(FULL2, 2), phi) > 0.1
    closed = es.closed_form_kraus_split([[0.5, 0.5], [0.5, 0.5]], 2)
    assert es.check_fixed(closed, phi) <= 1e-15


def test_kraus_channel_fixes_integrated_xi():
    P = [[0.9, 0.1], [0.2, 0.8]]
    phi = pot.make_kraus_channel(P)
    assert es.check_fixed(es.closed_form_kraus(P, 3), phi) <= 1e-14


def test_degenerate_eigenvalue_detected():
    # identity maps on R^2: each coordinate is conserved separately
    phi = Potential(Algebra.vector(2), FULL2, 1, np.stack([0.5 * np.eye(2)] * 2))
    with pytest.raises(DegenerateEigenvalueError):
        es.extract(phi, 2)


def test_marginal_and_json():
    eta = es.extract(pot.make_depolarizing(0.5, GOLDEN), 3)
    m1 = eta.marginal(1)
    assert m1.shape == (2, 4)
    assert np.allclose(m1.sum(axis=0), eta.weights.sum(axis=0))
    data = eta.to_json()
    assert data["depth"] == 3 and data["source"] == "spectral"
