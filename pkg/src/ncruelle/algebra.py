"""Finite-dimensional real C*-algebras M_d(R) and R^N, and linear maps on them.

Elements are plain numpy arrays: ``(d, d)`` for the matrix kind, ``(N,)`` for
the vector kind.  A linear map is stored as a ``dim x dim`` table acting on
row-major vectorized elements.

Norms follow the C*-structure: the operator (largest singular value) norm on
M_d(R), the max-abs norm on R^N.  The involution on M_d(R) is the transpose.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DEFAULT_EPS = 1e-10
NORM_TOL = 1e-10
NORM_MAX_STEPS = 10_000


class PIVerdict(str, enum.Enum):
    """Outcome of a positivity-improving check."""

    CERTIFIED_TRUE = "certified_true"
    CERTIFIED_FALSE = "certified_false"
    PROBABLY_TRUE = "probably_true"


@dataclass(frozen=True)
class Algebra:
    """Descriptor for M_d(R) (``kind="matrix"``) or R^N (``kind="vector"``)."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in ("matrix", "vector"):
            raise DomainError(f"unknown algebra kind {self.kind!r}")
        if int(self.size) < 1:
            raise DomainError("algebra size must be at least 1")

    @classmethod
    def matrix(cls, d: int) -> "Algebra":
        return cls("matrix", d)

    @classmethod
    def vector(cls, n: int) -> "Algebra":
        return cls("vector", n)

    @classmethod
    def scalar(cls) -> "Algebra":
        return cls("vector", 1)

    @property
    def is_matrix(self) -> bool:
        return self.kind == "matrix"

    @property
    def dim(self) -> int:
        return self.size ** 2 if self.is_matrix else self.size

    @property
    def shape(self) -> tuple:
        return (self.size, self.size) if self.is_matrix else (self.size,)

    def __str__(self):
        return f"M_{self.size}(R)" if self.is_matrix else f"R^{self.size}"

    # -- element plumbing ---------------------------------------------------

    def element(self, data) -> np.ndarray:
        a = np.asarray(data, dtype=np.float64)
        if a.shape != self.shape:
            raise DomainError(f"element of shape {a.shape} does not belong to {self}")
        if not np.isfinite(a).all():
            raise DomainError("element has non-finite entries")
        return a

    def vec(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.float64).reshape(-1)

    def unvec(self, v) -> np.ndarray:
        return np.asarray(v, dtype=np.float64).reshape(self.shape)

    def identity(self) -> np.ndarray:
        return np.eye(self.size) if self.is_matrix else np.ones(self.size)

    def zero(self) -> np.ndarray:
        return np.zeros(self.shape)

    def basis(self) -> np.ndarray:
        """The standard basis of the algebra as a (dim, *shape) stack."""
        return np.eye(self.dim).reshape((self.dim,) + self.shape)

    def trace_functional(self) -> np.ndarray:
        """Row vector t with t @ vec(a) equal to the normalized trace of a."""
        if self.is_matrix:
            return np.eye(self.size).reshape(-1) / self.size
        return np.full(self.size, 1.0 / self.size)

    def normalized_trace(self, a) -> float:
        return float(self.trace_functional() @ self.vec(a))

    def pairing(self, rho, a) -> float:
        """Dual pairing <rho, a> = tr(rho^T a) (matrix) or rho . a (vector)."""
        return float(self.vec(rho) @ self.vec(a))

    def norm(self, a) -> float:
        a = np.asarray(a, dtype=np.float64)
        if not self.is_matrix:
            return float(np.abs(a).max())
        if self.size == 1:
            return float(abs(a[0, 0]))
        return float(np.linalg.norm(a, ord=2))

    def norms(self, stack) -> np.ndarray:
        """Norms of a stack of vectorized elements, shape (n, dim)."""
        stack = np.asarray(stack, dtype=np.float64)
        if not self.is_matrix:
            return np.abs(stack).max(axis=1)
        return np.linalg.norm(stack.reshape((-1,) + self.shape), ord=2, axis=(1, 2))

    # -- positivity ---------------------------------------------------------

    def is_symmetric(self, a, tol: float = 0.0) -> bool:
        if not self.is_matrix:
            return True
        a = np.asarray(a)
        return bool(np.abs(a - a.T).max() <= tol)

    def min_eigenvalue(self, a) -> float:
        """Smallest eigenvalue of the symmetric part (matrix) or smallest coordinate (vector)."""
        a = np.asarray(a, dtype=np.float64)
        if not self.is_matrix:
            return float(a.min())
        return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])

    def is_positive(self, a, tol: float = 1e-9) -> bool:
        if tol < 0:
            raise DomainError("tolerance must be non-negative")
        return self.is_symmetric(a, tol) and self.min_eigenvalue(a) >= -tol

    def is_strictly_positive(self, a, eps: float = DEFAULT_EPS) -> bool:
        if eps <= 0:
            raise DomainError("eps must be positive")
        scale = max(1.0, self.norm(a))
        return self.is_symmetric(a, 1e-12 * scale) and self.min_eigenvalue(a) >= eps

    def log_positive(self, a, eps: float = DEFAULT_EPS) -> np.ndarray:
        """Logarithm of a strictly positive element by spectral calculus."""
        a = np.asarray(a, dtype=np.float64)
        if not self.is_matrix:
            if a.min() < eps:
                raise DomainError(f"logarithm needs coordinates >= {eps}; found {a.min():.3e}")
            return np.log(a)
        scale = max(1.0, self.norm(a))
        if not self.is_symmetric(a, 1e-12 * scale):
            raise DomainError("logarithm needs a symmetric element")
        w, v = np.linalg.eigh(0.5 * (a + a.T))
        if w[0] < eps:
            raise DomainError(f"logarithm needs eigenvalues >= {eps}; found eigenvalue {w[0]:.3e}")
        return (v * np.log(w)) @ v.T

    def exp_symmetric(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64)
        if not self.is_matrix:
            return np.exp(a)
        w, v = np.linalg.eigh(0.5 * (a + a.T))
        return (v * np.exp(w)) @ v.T


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear self-map of an algebra, stored as a (dim, dim) table on vec(a)."""

    algebra: Algebra
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        dim = self.algebra.dim
        if m.shape != (dim, dim):
            raise DomainError(f"map table must be {dim}x{dim} for {self.algebra}, got {m.shape}")
        if not np.isfinite(m).all():
            raise DomainError("map table has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, algebra: Algebra) -> "LinearMap":
        return cls(algebra, np.eye(algebra.dim))

    @classmethod
    def zero(cls, algebra: Algebra) -> "LinearMap":
        return cls(algebra, np.zeros((algebra.dim, algebra.dim)))

    @classmethod
    def from_function(cls, algebra: Algebra, fn) -> "LinearMap":
        """Tabulate a linear function by evaluating it on the standard basis."""
        cols = [algebra.vec(fn(e)) for e in algebra.basis()]
        return cls(algebra, np.column_stack(cols))

    def __call__(self, a) -> np.ndarray:
        return apply_map(self, a)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        _check_same(self, other)
        return LinearMap(self.algebra, self.matrix @ other.matrix)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        _check_same(self, other)
        return LinearMap(self.algebra, self.matrix + other.matrix)

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        _check_same(self, other)
        return LinearMap(self.algebra, self.matrix - other.matrix)

    def __mul__(self, c: float) -> "LinearMap":
        return LinearMap(self.algebra, float(c) * self.matrix)

    __rmul__ = __mul__

    def norm(self) -> float:
        return operator_norm(self)


def _check_same(a: LinearMap, b: LinearMap):
    if a.algebra != b.algebra:
        raise DomainError(f"maps act on different algebras: {a.algebra} vs {b.algebra}")


def apply_map(L: LinearMap, a) -> np.ndarray:
    alg = L.algebra
    a = np.asarray(a, dtype=np.float64)
    if a.shape != alg.shape:
        raise DomainError(f"element of shape {a.shape} does not belong to {alg}")
    return alg.unvec(L.matrix @ alg.vec(a))


def trace_type_map(algebra: Algebra, factor) -> LinearMap:
    """a -> tr^(a) * factor."""
    return LinearMap(algebra, np.outer(algebra.vec(factor), algebra.trace_functional()))


def is_positivity_improving(L: LinearMap, trials: int = 200, eps: float = DEFAULT_EPS,
                            seed: int = 0) -> PIVerdict:
    """Three-valued positivity-improving check.

    On R^N the criterion is exact (all table entries strictly positive).  On
    M_d(R) rank-one projectors are sampled: any image that is not strictly
    positive refutes the property, otherwise the verdict stays ``probably_true``.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    alg = L.algebra
    if not alg.is_matrix:
        return PIVerdict.CERTIFIED_TRUE if (L.matrix > 0).all() else PIVerdict.CERTIFIED_FALSE
    d = alg.size
    rng = np.random.default_rng(seed)
    directions = list(np.eye(d))
    directions += list(rng.standard_normal((trials, d)))
    for x in directions:
        x = x / np.linalg.norm(x)
        image = L(np.outer(x, x))
        scale = max(1.0, alg.norm(image))
        if not alg.is_symmetric(image, 1e-12 * scale) or alg.min_eigenvalue(image) < eps:
            return PIVerdict.CERTIFIED_FALSE
    return PIVerdict.PROBABLY_TRUE


def operator_norm(L: LinearMap) -> float:
    """Norm of L induced by the algebra norm.

    Exact on R^N (max absolute row sum).  On M_d(R) the unit ball of the
    operator norm is the convex hull of the orthogonal group, so the norm is
    max over orthogonal U of ||L(U)||; it is found by alternating ascent
    (top singular pair of L(U), then the polar factor of the pulled-back
    rank-one functional) from several deterministic starts.
    """
    alg = L.algebra
    m = L.matrix
    if not alg.is_matrix:
        return float(np.abs(m).sum(axis=1).max())
    d = alg.size
    if d == 1:
        return float(abs(m[0, 0]))
    if not np.any(m):
        return 0.0
    starts = [np.eye(d)]
    flip = np.eye(d)
    flip[-1, -1] = -1.0
    starts.append(flip)
    u, _, vt = np.linalg.svd(m)
    top_in = vt[0].reshape(d, d)
    pu, _, pvt = np.linalg.svd(top_in)
    starts.append(pu @ pvt)
    rng = np.random.default_rng(12345)
    for _ in range(4):
        q, r = np.linalg.qr(rng.standard_normal((d, d)))
        starts.append(q * np.sign(np.diag(r)))
    return max(_norm_ascent(m, d, U) for U in starts)


def _norm_ascent(m: np.ndarray, d: int, U: np.ndarray) -> float:
    best = -1.0
    for _ in range(NORM_MAX_STEPS):
        image = (m @ U.reshape(-1)).reshape(d, d)
        y, s, xt = np.linalg.svd(image)
        val = s[0]
        if val - best <= NORM_TOL * max(1.0, val):
            best = max(best, val)
            break
        best = val
        grad = (m.T @ np.outer(y[:, 0], xt[0]).reshape(-1)).reshape(d, d)
        gu, _, gvt = np.linalg.svd(grad)
        U = gu @ gvt
    return float(best)
