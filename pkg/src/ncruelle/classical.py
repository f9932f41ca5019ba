"""Scalar thermodynamic formalism for potentials of depth at most two.

A normalized scalar potential J of depth <= 2 has a Markov equilibrium measure
in closed form.  With the lifted table J(a, b) (zero on forbidden pairs),
normalization means sum_a J(a, b) = 1, the stationary vector pi is the
positive right eigenvector of J at eigenvalue 1, and the transition table is
M(a, b) = J(a, b) pi(b) / pi(a).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Algebra
from .cylfun import CylinderFunction
from .errors import DisallowedWordError, DomainError, NormalizationError
from .sft import TransitionMatrix

SCALAR = Algebra.scalar()


@dataclass(frozen=True, eq=False)
class ScalarPotential:
    """Positive scalar weights on the allowed words of length m (1 or 2)."""

    shift: TransitionMatrix
    depth: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.depth not in (1, 2):
            raise DomainError(f"scalar potentials must have depth 1 or 2, got {self.depth}")
        if vals.shape != (self.shift.n_words(self.depth),):
            raise DomainError(f"expected {self.shift.n_words(self.depth)} values, got {vals.shape[0]}")
        if not (vals > 0).all():
            raise DomainError("scalar potential values must be strictly positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, shift: TransitionMatrix, value: float | None = None) -> "ScalarPotential":
        value = 1.0 / shift.k if value is None else value
        return cls(shift, 1, np.full(shift.k, float(value)))

    @classmethod
    def from_mapping(cls, shift: TransitionMatrix, table: dict) -> "ScalarPotential":
        depth = len(next(iter(table)))
        f = CylinderFunction.from_mapping(SCALAR, shift, {w: [v] for w, v in table.items()})
        return cls(shift, depth, f.values[:, 0])

    def table(self) -> np.ndarray:
        """k x k table J(a, b), zero on forbidden pairs; depth 1 is lifted by J(a, b) = J(a) A(a, b)."""
        A = self.shift.entries.astype(np.float64)
        if self.depth == 1:
            return self.values[:, None] * A
        out = np.zeros_like(A)
        words = self.shift.words(2)
        out[words[:, 0], words[:, 1]] = self.values
        return out

    def normalization_deviation(self) -> float:
        sums = self.table().sum(axis=0)
        return float(np.abs(sums - 1.0).max())

    def as_function(self) -> CylinderFunction:
        return CylinderFunction(SCALAR, self.shift, self.depth, self.values[:, None])


def scalar_apply(J: ScalarPotential, f: CylinderFunction) -> CylinderFunction:
    """(L_J f)(x) = sum over preimages y of x of J(y) f(y)."""
    if f.algebra != SCALAR:
        raise DomainError(f"scalar transfer operator acts on real functions, got {f.algebra}")
    if f.shift != J.shift:
        raise DomainError("potential and function live on different shift spaces")
    shift = J.shift
    depth = max(J.depth - 1, f.depth)
    if depth == 0 and not shift.is_full:
        depth = 1
    out_words = shift.words(depth)
    fv = f.values[:, 0]
    out = np.zeros(out_words.shape[0])
    for i in range(shift.k):
        if depth == 0:
            ok = np.ones(1, dtype=bool)
        else:
            ok = shift.entries[i, out_words[:, 0]].astype(bool)
        ext = np.column_stack([np.full(ok.sum(), i), out_words[ok]])
        weight = J.values[shift.index_of(ext[:, : J.depth])]
        out[ok] += weight * fv[shift.index_of(ext[:, : f.depth])]
    return CylinderFunction(SCALAR, shift, depth, out[:, None])


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Stationary Markov measure: initial law pi and row-stochastic M."""

    shift: TransitionMatrix
    pi: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        M = np.asarray(self.M, dtype=np.float64)
        k = self.shift.k
        if pi.shape != (k,) or M.shape != (k, k):
            raise DomainError("pi and M must match the symbol count")
        if (pi < 0).any() or (M < 0).any():
            raise DomainError("Markov measure has negative entries")
        if abs(pi.sum() - 1.0) > 1e-12 or np.abs(M.sum(axis=1) - 1.0).max() > 1e-12:
            raise DomainError("pi must sum to 1 and M must be row-stochastic")
        if (M[self.shift.entries == 0] != 0).any():
            raise DomainError("M charges transitions forbidden by the shift")
        for arr in (pi, M):
            arr.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "M", M)

    def stationarity_residual(self) -> float:
        return float(np.abs(self.pi @ self.M - self.pi).max())

    def to_json(self) -> dict:
        return {"pi": self.pi.tolist(), "M": self.M.tolist()}


def equilibrium(J: ScalarPotential, tol: float = 1e-10) -> MarkovMeasure:
    """The Markov equilibrium measure of a normalized scalar potential of depth <= 2."""
    dev = J.normalization_deviation()
    if dev > tol:
        raise NormalizationError(f"scalar potential is not normalized: deviation {dev:.3e}")
    T = J.table()
    w, v = np.linalg.eig(T)
    j = int(np.argmin(np.abs(w - 1.0)))
    if abs(w[j] - 1.0) > 1e-8:
        raise DomainError(f"no eigenvalue 1 in the potential table (closest {w[j]:.6g})")
    pi = np.real(v[:, j])
    pi = pi / pi.sum()
    if not (pi > 0).all():
        raise DomainError(f"eigenvector at eigenvalue 1 is not strictly positive: {pi.tolist()}")
    M = T * pi[None, :] / pi[:, None]
    M = M / M.sum(axis=1, keepdims=True)
    return MarkovMeasure(J.shift, pi, M)


def bernoulli(shift: TransitionMatrix, probs) -> MarkovMeasure:
    probs = np.asarray(probs, dtype=np.float64)
    if not shift.is_full:
        raise DomainError("Bernoulli measures need the full shift")
    return MarkovMeasure(shift, probs, np.tile(probs, (shift.k, 1)))


def maximal_entropy(shift: TransitionMatrix) -> MarkovMeasure:
    """Parry measure: the measure of maximal entropy of an aperiodic shift."""
    A = shift.entries.astype(np.float64)
    w, vr = np.linalg.eig(A)
    j = int(np.argmax(w.real))
    lam = w[j].real
    r = np.abs(np.real(vr[:, j]))
    wl, vl = np.linalg.eig(A.T)
    l = np.abs(np.real(vl[:, int(np.argmax(wl.real))]))
    pi = l * r / (l @ r)
    M = A * r[None, :] / (lam * r[:, None])
    return MarkovMeasure(shift, pi, M / M.sum(axis=1, keepdims=True))


def jacobian_of(mu: MarkovMeasure) -> ScalarPotential:
    """Depth-2 Jacobian J(a, b) = pi(a) M(a, b) / pi(b) of a Markov measure."""
    words = mu.shift.words(2)
    a, b = words[:, 0], words[:, 1]
    return ScalarPotential(mu.shift, 2, mu.pi[a] * mu.M[a, b] / mu.pi[b])


def cylinder_weights(mu: MarkovMeasure, n: int) -> np.ndarray:
    """mu([w]) for every allowed word of length n, in word order."""
    words = mu.shift.words(n)
    if n == 0:
        return np.ones(1)
    out = mu.pi[words[:, 0]].copy()
    for t in range(1, n):
        out *= mu.M[words[:, t - 1], words[:, t]]
    return out


def cylinder_weight(mu: MarkovMeasure, w) -> float:
    if not mu.shift.is_allowed(w):
        raise DisallowedWordError(f"word {tuple(w)} is not allowed by {mu.shift!r}")
    if len(w) == 0:
        return 1.0
    s = [a - 1 for a in w]
    out = mu.pi[s[0]]
    for a, b in zip(s, s[1:]):
        out *= mu.M[a, b]
    return float(out)


def integrate(mu: MarkovMeasure, f: CylinderFunction) -> float:
    """Integral of a real (or R^1-valued) cylinder function."""
    if f.algebra.dim != 1:
        raise DomainError("integrate expects a scalar function; use integrate_trace for matrices")
    return float(cylinder_weights(mu, f.depth) @ f.values[:, 0])


def integrate_trace(mu: MarkovMeasure, g: CylinderFunction) -> float:
    """Integral of the normalized trace of an algebra-valued cylinder function."""
    tr = g.values @ g.algebra.trace_functional()
    return float(cylinder_weights(mu, g.depth) @ tr)


def ks_entropy(mu: MarkovMeasure) -> float:
    """-sum_a pi(a) sum_b M(a, b) log M(a, b), with 0 log 0 = 0."""
    M = mu.M
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(M > 0, M * np.log(np.where(M > 0, M, 1.0)), 0.0)
    return float(-(mu.pi @ terms.sum(axis=1)))


def integral_log(J: ScalarPotential, mu: MarkovMeasure) -> float:
    """Integral of log J against mu."""
    f = CylinderFunction(SCALAR, J.shift, J.depth, np.log(J.values)[:, None])
    return integrate(mu, f)


def equilibrium_residual(J: ScalarPotential, mu: MarkovMeasure, max_depth: int = 4) -> float:
    """Max over cylinders [w], |w| <= max_depth, of |(L_J^* mu)([w]) - mu([w])|."""
    worst = 0.0
    for n in range(1, max_depth + 1):
        weights = cylinder_weights(mu, n)
        for j in range(weights.shape[0]):
            ind = CylinderFunction.basis_function(SCALAR, J.shift, n, j)
            worst = max(worst, abs(integrate(mu, scalar_apply(J, ind)) - weights[j]))
    return worst
