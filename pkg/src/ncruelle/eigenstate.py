"""Gibbs eigenstates: fixed functionals of the dual transfer operator.

A state on depth-n cylinder functions is stored as one dual weight per word,
``eta(g) = sum_w <rho_w, g(w)>`` with the trace pairing on matrices and the
dot product on vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classical
from .algebra import Algebra
from .cylfun import CylinderFunction
from .errors import DegenerateEigenvalueError, DomainError, EigensolverError
from .potential import Potential, kraus_branches, preimage_weights
from .sft import TransitionMatrix
from .transfer import apply, assemble_matrix, default_section_depth, spectrum

DEGENERACY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Eigenstate:
    """Per-word dual weights of a state on depth-n cylinder functions."""

    algebra: Algebra
    shift: TransitionMatrix
    depth: int
    weights: np.ndarray = field(repr=False)
    residual: float = 0.0
    source: str = ""

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        expected = (self.shift.n_words(self.depth), self.algebra.dim)
        if w.shape != expected:
            raise DomainError(f"weights must have shape {expected}, got {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def evaluate(self, g: CylinderFunction) -> float:
        return evaluate(self, g)

    def __call__(self, g: CylinderFunction) -> float:
        return evaluate(self, g)

    def unit_value(self) -> float:
        """eta of the constant identity function."""
        return float(self.weights.sum(axis=0) @ self.algebra.vec(self.algebra.identity()))

    def marginal(self, depth: int) -> np.ndarray:
        """Values on the depth-q basis functions, shape (W_q, dim)."""
        if depth > self.depth:
            raise DomainError(f"state of depth {self.depth} cannot be evaluated at depth {depth}")
        idx = self.shift.index_of(self.shift.words(self.depth)[:, :depth])
        out = np.zeros((self.shift.n_words(depth), self.algebra.dim))
        np.add.at(out, idx, self.weights)
        return out

    def min_weight_eigenvalue(self) -> float:
        """Smallest eigenvalue over the symmetric parts of the weights."""
        alg = self.algebra
        return min(alg.min_eigenvalue(alg.unvec(w)) for w in self.weights)

    def is_faithful(self, tol: float = 1e-9) -> bool:
        return self.min_weight_eigenvalue() >= -tol

    def to_json(self) -> dict:
        words = self.shift.words(self.depth)
        return {
            "depth": self.depth,
            "source": self.source,
            "weights": {
                ",".join(str(int(s) + 1) for s in w): self.algebra.unvec(self.weights[j]).tolist()
                for j, w in enumerate(words)
            },
            "residuals": {"fixed_point": self.residual, "unit": abs(self.unit_value() - 1.0)},
        }


def evaluate(eta: Eigenstate, g: CylinderFunction) -> float:
    if g.algebra != eta.algebra or g.shift != eta.shift:
        raise DomainError("state and function live on different algebras or shift spaces")
    if g.depth > eta.depth:
        raise DomainError(f"function of depth {g.depth} exceeds the state depth {eta.depth}")
    g = g.lift_depth(eta.depth)
    return float(np.sum(eta.weights * g.values))


def max_difference(a: Eigenstate, b: Eigenstate, depth: int) -> float:
    """Largest disagreement of two states over all depth-q basis functions."""
    return float(np.abs(a.marginal(depth) - b.marginal(depth)).max())


# ---------------------------------------------------------------------------
# spectral extraction
# ---------------------------------------------------------------------------

def extract(phi: Potential, n: int | None = None, tol: float = 1e-9) -> Eigenstate:
    """Left fixed vector of the depth-n section, scaled so that eta(Id) = 1.

    The vector solves the stacked least-squares system
    [(T - I)^T ; vec(1)^T] eta = [0 ; 1].
    """
    n = default_section_depth(phi) if n is None else n
    T = assemble_matrix(phi, n)
    spec = spectrum(T, DEGENERACY_TOL)
    mult = spec.multiplicity_of_one
    if mult != 1:
        raise DegenerateEigenvalueError(
            f"eigenvalue 1 has multiplicity {mult} in the depth-{n} section; "
            "a normalized positivity-improving potential should make it simple"
        )
    side = T.side
    alg = phi.algebra
    unit = np.tile(alg.vec(alg.identity()), phi.shift.n_words(n))
    system = np.vstack([T.data.T - np.eye(side), unit[None, :]])
    rhs = np.zeros(side + 1)
    rhs[-1] = 1.0
    eta, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    residual = float(np.abs(T.data.T @ eta - eta).max())
    if residual > tol:
        raise EigensolverError(f"left fixed vector residual {residual:.3e} exceeds {tol:.1e}")
    return Eigenstate(alg, phi.shift, n, eta.reshape(-1, alg.dim), residual, "spectral")


def check_fixed(eta: Eigenstate, phi: Potential) -> float:
    """max over depth-n basis functions g of |eta(L g) - eta(g)|."""
    worst = 0.0
    size = eta.weights.size
    for j in range(size):
        g = CylinderFunction.basis_function(eta.algebra, eta.shift, eta.depth, j)
        worst = max(worst, abs(evaluate(eta, apply(phi, g)) - eta.weights.reshape(-1)[j]))
    return worst


def check_shift_invariant(eta_n: Eigenstate, eta_n1: Eigenstate) -> float:
    """max over depth-n basis g of |eta_{n+1}(g o sigma) - eta_n(g)|."""
    if eta_n1.depth < eta_n.depth + 1:
        raise DomainError("the second state must have depth at least n + 1")
    worst = 0.0
    for j in range(eta_n.weights.size):
        g = CylinderFunction.basis_function(eta_n.algebra, eta_n.shift, eta_n.depth, j)
        worst = max(worst, abs(evaluate(eta_n1, g.compose_shift()) - eta_n.weights.reshape(-1)[j]))
    return worst


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _from_measure(mu: classical.MarkovMeasure, algebra: Algebra, n: int, xi: np.ndarray,
                  source: str) -> Eigenstate:
    """weights_w = mu([w]) xi, i.e. eta(g) = integral of <xi, g> against mu."""
    w = classical.cylinder_weights(mu, n)
    return Eigenstate(algebra, mu.shift, n, w[:, None] * algebra.vec(xi)[None, :], 0.0, source)


def trace_scalar_potential(phi: Potential) -> classical.ScalarPotential:
    """The classical potential tr^ P(w) of a trace-type potential."""
    P = phi.trace_factors()
    d = P.shape[-1]
    vals = np.trace(P, axis1=1, axis2=2) / d
    depth = phi.depth
    if depth > 2:
        # a lifted table is constant on the tail; fold it back to depth 2
        words = phi.shift.words(depth)
        short = phi.shift.index_of(words[:, :2])
        folded = np.empty(phi.shift.n_words(2))
        folded[short] = vals
        if np.abs(folded[short] - vals).max() > 1e-14:
            raise DomainError(f"trace-type potential of depth {depth} depends on more than two "
                              "symbols; its equilibrium measure is not Markov")
        vals, depth = folded, 2
    return classical.ScalarPotential(phi.shift, depth, vals)


def closed_form_trace_type(phi: Potential, n: int) -> Eigenstate:
    """eta(g) = integral of tr^ g against the equilibrium measure of tr^ P."""
    mu = classical.equilibrium(trace_scalar_potential(phi))
    d = phi.algebra.size
    return _from_measure(mu, phi.algebra, n, np.eye(d) / d, "closed_form_trace_type")


def preimage_measure(shift: TransitionMatrix) -> classical.MarkovMeasure:
    """Equilibrium measure of the preimage weights (maximal entropy on the full shift)."""
    depth, w = preimage_weights(shift)
    return classical.equilibrium(classical.ScalarPotential(shift, depth, w))


def closed_form_depolarizing(phi: Potential, n: int) -> Eigenstate:
    """eta(g) = integral of tr^ g against the measure of the preimage weights."""
    d = phi.algebra.size
    return _from_measure(preimage_measure(phi.shift), phi.algebra, n, np.eye(d) / d,
                         "closed_form_depolarizing")


def closed_form_kraus(P, n: int, shift: TransitionMatrix | None = None) -> Eigenstate:
    """eta(g) = integral of g11 pi_1 + g22 pi_2 against the maximal entropy measure."""
    from .channel import stationary_vector

    shift = TransitionMatrix.full(2) if shift is None else shift
    pi = stationary_vector(P)
    return _from_measure(preimage_measure(shift), Algebra.matrix(2), n, np.diag(pi),
                         "closed_form_kraus")


def closed_form_kraus_split(P, n: int) -> Eigenstate:
    """Fixed state of the branch operator g -> g11(1x) P_1^2 + g22(2x) P_2^2.

    eta(g) = sum_w mu_P([w]) g_{w_1 w_1}(w), with mu_P the stationary Markov
    measure of P.  Fixedness uses pi_a p_ab = pi_b p_ba, which every stationary
    two-state chain satisfies.
    """
    from .channel import stationary_vector

    P = np.asarray(P, dtype=np.float64)
    kraus_branches(P)
    shift = TransitionMatrix.full(2)
    mu = classical.MarkovMeasure(shift, stationary_vector(P), P)
    words = shift.words(n)
    w = classical.cylinder_weights(mu, n)
    weights = np.zeros((words.shape[0], 4))
    weights[words[:, 0] == 0, 0] = w[words[:, 0] == 0]
    weights[words[:, 0] == 1, 3] = w[words[:, 0] == 1]
    return Eigenstate(Algebra.matrix(2), shift, n, weights, 0.0, "closed_form_kraus_split")


def closed_form_vector_uniform(N: int, n: int, shift: TransitionMatrix | None = None) -> Eigenstate:
    """eta(g) = (1/N) sum_l integral of g_l against the maximal entropy measure."""
    shift = TransitionMatrix.full(2) if shift is None else shift
    alg = Algebra.vector(N)
    return _from_measure(preimage_measure(shift), alg, n, np.full(N, 1.0 / N),
                         "closed_form_vector")


def invariant_state(table: np.ndarray, algebra: Algebra) -> np.ndarray:
    """Dual element xi with xi o Gamma = xi and xi(Id) = 1, for a map table Gamma."""
    dim = algebra.dim
    system = np.vstack([table.T - np.eye(dim), algebra.vec(algebra.identity())[None, :]])
    rhs = np.zeros(dim + 1)
    rhs[-1] = 1.0
    xi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return algebra.unvec(xi)


def closed_form_constant(gamma: np.ndarray, algebra: Algebra, shift: TransitionMatrix,
                         n: int) -> Eigenstate:
    """State for phi_w = J(w) Gamma with J the preimage weights: integrate xi against mu_J."""
    xi = invariant_state(gamma, algebra)
    return _from_measure(preimage_measure(shift), algebra, n, xi, "closed_form_constant")


def closed_form(phi: Potential, n: int) -> Eigenstate:
    """Dispatch to the closed form matching the potential's family."""
    fam = phi.family
    if fam == "trace_type":
        return closed_form_trace_type(phi, n)
    if fam == "depolarizing":
        return closed_form_depolarizing(phi, n)
    if fam == "kraus_channel":
        return closed_form_kraus(phi.params["P"], n, phi.shift)
    if fam == "kraus_split":
        return closed_form_kraus_split(phi.params["P"], n)
    if fam == "vector_table":
        depth, w = preimage_weights(phi.shift)
        gamma = phi.maps[0] / w[0]
        if not np.allclose(phi.maps, w[:, None, None] * gamma[None], atol=1e-14):
            raise DomainError("vector potential is not a weighted constant; no closed form")
        return closed_form_constant(gamma, phi.algebra, phi.shift, n)
    raise DomainError(f"no closed form for family {fam!r}")
