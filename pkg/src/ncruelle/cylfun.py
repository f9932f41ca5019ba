"""Locally constant algebra-valued functions on a shift space."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .algebra import Algebra
from .errors import DomainError
from .sft import TransitionMatrix


class CylinderFunction:
    """A function constant on the depth-n cylinders of the shift space.

    ``values`` has shape ``(W_n, dim)``: row ``j`` is the vectorized algebra
    element taken on the cylinder of the ``j``-th allowed word of length n.
    Depth 0 means a constant function.
    """

    __slots__ = ("algebra", "shift", "depth", "values")

    def __init__(self, algebra: Algebra, shift: TransitionMatrix, depth: int, values):
        values = np.asarray(values, dtype=np.float64)
        n_words = shift.n_words(depth)
        expected = (n_words, algebra.dim)
        if values.shape != expected:
            values = values.reshape(expected) if values.size == n_words * algebra.dim else values
        if values.shape != expected:
            raise DomainError(f"values must have shape {expected}, got {values.shape}")
        if not np.isfinite(values).all():
            raise DomainError("cylinder function has non-finite values")
        shift.check_capacity(values.size, "cylinder function table")
        values.setflags(write=False)
        self.algebra = algebra
        self.shift = shift
        self.depth = int(depth)
        self.values = values

    # -- construction ---------------------------------------------------------

    @classmethod
    def constant(cls, a, algebra: Algebra, shift: TransitionMatrix) -> "CylinderFunction":
        return cls(algebra, shift, 0, algebra.vec(algebra.element(a)).reshape(1, -1))

    @classmethod
    def identity(cls, algebra: Algebra, shift: TransitionMatrix) -> "CylinderFunction":
        return cls.constant(algebra.identity(), algebra, shift)

    @classmethod
    def from_mapping(cls, algebra: Algebra, shift: TransitionMatrix,
                     table: Mapping[tuple, object]) -> "CylinderFunction":
        """Build from ``{word: element}`` covering every allowed word of one length."""
        lengths = {len(w) for w in table}
        if len(lengths) != 1:
            raise DomainError(f"words of mixed lengths {sorted(lengths)}")
        depth = lengths.pop()
        words = shift.words(depth)
        values = np.empty((words.shape[0], algebra.dim))
        seen = np.zeros(words.shape[0], dtype=bool)
        for w, a in table.items():
            j = shift.index(w)
            values[j] = algebra.vec(algebra.element(a))
            seen[j] = True
        if not seen.all():
            missing = [tuple(int(s) + 1 for s in words[j]) for j in np.flatnonzero(~seen)]
            raise DomainError(f"missing words: {missing}")
        return cls(algebra, shift, depth, values)

    @classmethod
    def random(cls, algebra: Algebra, shift: TransitionMatrix, depth: int,
               rng: np.random.Generator, positive: bool = False,
               symmetric: bool = False) -> "CylinderFunction":
        n_words = shift.n_words(depth)
        if not algebra.is_matrix:
            vals = rng.standard_normal((n_words, algebra.dim))
            if positive:
                vals = np.abs(vals)
            return cls(algebra, shift, depth, vals)
        d = algebra.size
        b = rng.standard_normal((n_words, d, d))
        if positive:
            vals = b @ b.transpose(0, 2, 1)
        elif symmetric:
            vals = 0.5 * (b + b.transpose(0, 2, 1))
        else:
            vals = b
        return cls(algebra, shift, depth, vals.reshape(n_words, -1))

    @classmethod
    def basis_function(cls, algebra: Algebra, shift: TransitionMatrix, depth: int,
                       index: int) -> "CylinderFunction":
        """The index-th standard basis vector of the depth-n function space."""
        vals = np.zeros(shift.n_words(depth) * algebra.dim)
        vals[index] = 1.0
        return cls(algebra, shift, depth, vals)

    @classmethod
    def indicator(cls, algebra: Algebra, shift: TransitionMatrix, word: Sequence[int],
                  a=None) -> "CylinderFunction":
        """a (default identity) on the cylinder [word], zero elsewhere."""
        a = algebra.identity() if a is None else a
        depth = len(word)
        vals = np.zeros((shift.n_words(depth), algebra.dim))
        vals[shift.index(word)] = algebra.vec(a)
        return cls(algebra, shift, depth, vals)

    # -- evaluation --------------------------------------------------------

    @property
    def n_words(self) -> int:
        return self.values.shape[0]

    def element(self, j: int) -> np.ndarray:
        return self.algebra.unvec(self.values[j])

    def __call__(self, word: Sequence[int]) -> np.ndarray:
        return self.eval(word)

    def eval(self, word: Sequence[int]) -> np.ndarray:
        """Value at any point whose prefix is ``word`` (length >= depth)."""
        if len(word) < self.depth:
            raise DomainError(f"word of length {len(word)} is shorter than depth {self.depth}")
        if not self.shift.is_allowed(word):
            from .errors import DisallowedWordError
            raise DisallowedWordError(f"word {tuple(word)} is not allowed by {self.shift!r}")
        return self.element(self.shift.index(tuple(word[: self.depth])))

    def as_dict(self) -> dict:
        words = self.shift.words(self.depth)
        return {tuple(int(s) + 1 for s in w): self.element(j) for j, w in enumerate(words)}

    def lift_depth(self, depth: int) -> "CylinderFunction":
        if depth < self.depth:
            raise DomainError(f"cannot lift depth {self.depth} down to {depth}")
        if depth == self.depth:
            return self
        words = self.shift.words(depth)
        idx = self.shift.index_of(words[:, : self.depth])
        return CylinderFunction(self.algebra, self.shift, depth, self.values[idx])

    def compose_shift(self) -> "CylinderFunction":
        """g o sigma, tabulated at depth n + 1."""
        words = self.shift.words(self.depth + 1)
        idx = self.shift.index_of(words[:, 1:])
        return CylinderFunction(self.algebra, self.shift, self.depth + 1, self.values[idx])

    def map_values(self, fn) -> "CylinderFunction":
        """Apply an element-wise function ``fn(element) -> element`` on every cylinder."""
        out = np.stack([self.algebra.vec(fn(self.element(j))) for j in range(self.n_words)])
        return CylinderFunction(self.algebra, self.shift, self.depth, out)

    # -- norms ---------------------------------------------------------------

    def sup_norm(self) -> float:
        return float(self.algebra.norms(self.values).max())

    def theta_seminorm(self, theta: float) -> float:
        """Exact Lipschitz seminorm for the metric theta**(first disagreement index)."""
        if not 0.0 < theta < 1.0:
            raise DomainError(f"theta must lie in (0, 1), got {theta}")
        alg = self.algebra
        kind = _kernels.MATRIX_KIND if alg.is_matrix else _kernels.VECTOR_KIND
        return _kernels.pairwise_max(self.values, self.shift.words(self.depth), theta,
                                     kind, alg.size)

    def lipschitz_norm(self, theta: float) -> float:
        return self.sup_norm() + self.theta_seminorm(theta)

    def spread(self) -> float:
        alg = self.algebra
        kind = _kernels.MATRIX_KIND if alg.is_matrix else _kernels.VECTOR_KIND
        return _kernels.pairwise_max(self.values, self.shift.words(self.depth), 1.0,
                                     kind, alg.size)

    def mean_value(self) -> np.ndarray:
        return self.algebra.unvec(self.values.mean(axis=0))

    def off_identity(self) -> float:
        """Distance of the mean value from the line spanned by the identity."""
        alg = self.algebra
        mean = self.mean_value()
        c = alg.normalized_trace(mean)
        return alg.norm(mean - c * alg.identity())

    def diameter(self) -> tuple[float, float]:
        return self.spread(), self.off_identity()

    # -- arithmetic ----------------------------------------------------------

    def _aligned(self, other: "CylinderFunction"):
        if self.algebra != other.algebra or self.shift != other.shift:
            raise DomainError("functions live on different algebras or shift spaces")
        depth = max(self.depth, other.depth)
        return self.lift_depth(depth), other.lift_depth(depth)

    def __add__(self, other):
        a, b = self._aligned(other)
        return CylinderFunction(a.algebra, a.shift, a.depth, a.values + b.values)

    def __sub__(self, other):
        a, b = self._aligned(other)
        return CylinderFunction(a.algebra, a.shift, a.depth, a.values - b.values)

    def __mul__(self, c: float):
        return CylinderFunction(self.algebra, self.shift, self.depth, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def allclose(self, other: "CylinderFunction", atol: float = 1e-12) -> bool:
        a, b = self._aligned(other)
        return bool(np.abs(a.values - b.values).max() <= atol)

    def to_json(self) -> dict:
        words = self.shift.words(self.depth)
        return {
            "depth": self.depth,
            "values": {
                ",".join(str(int(s) + 1) for s in w): self.element(j).tolist()
                for j, w in enumerate(words)
            },
        }

    def __repr__(self):
        return (f"CylinderFunction({self.algebra}, depth={self.depth}, "
                f"words={self.n_words})")


def constant(a, algebra: Algebra, shift: TransitionMatrix) -> CylinderFunction:
    return CylinderFunction.constant(a, algebra, shift)
