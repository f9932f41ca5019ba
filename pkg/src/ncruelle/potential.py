"""Operator-valued potentials: depth-m tables of linear maps on the algebra.

A potential assigns to each allowed word ``w`` of length ``m`` a linear map
``phi_w`` acting on the algebra; the map used at a point ``x`` is the one of
its length-m prefix.  Maps are stored as a ``(W_m, dim, dim)`` stack in the
same vectorized convention as :class:`~ncruelle.algebra.LinearMap`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping

import numpy as np

from .algebra import (Algebra, LinearMap, PIVerdict, is_positivity_improving,
                      operator_norm, trace_type_map)
from .cylfun import CylinderFunction
from .errors import DomainError
from .sft import TransitionMatrix

CERTIFICATES = ("analytic_pi", "sampled", "none")

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
# Y = [[0, -i], [i, 0]] is purely imaginary; Y a Y = -(iY) a (iY) with iY real.
PAULI_IY = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class Potential:
    """A locally constant potential.

    Attributes
    ----------
    algebra, shift
        The algebra the maps act on and the shift space.
    depth : int
        Word length m the table is indexed by (m >= 1).
    maps : ndarray, shape (W_m, dim, dim)
        ``maps[j]`` is the table of the map attached to the j-th allowed word.
    family : str
        Name of the constructor that built the potential.
    certificate : str
        ``analytic_pi`` when every map is positivity-improving by construction,
        ``sampled`` when the sampled check was run, ``none`` otherwise.
    verdict : PIVerdict or None
        Outcome of the positivity-improving check, where known.
    params : dict
        Constructor parameters, echoed into reports.
    """

    algebra: Algebra
    shift: TransitionMatrix
    depth: int
    maps: np.ndarray = field(repr=False)
    family: str = "custom"
    certificate: str = "none"
    verdict: PIVerdict | None = None
    params: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError("potential depth must be at least 1")
        if self.certificate not in CERTIFICATES:
            raise DomainError(f"unknown certificate {self.certificate!r}")
        maps = np.asarray(self.maps, dtype=np.float64)
        dim = self.algebra.dim
        expected = (self.shift.n_words(self.depth), dim, dim)
        if maps.shape != expected:
            raise DomainError(f"map table must have shape {expected}, got {maps.shape}")
        if not np.isfinite(maps).all():
            raise DomainError("map table has non-finite entries")
        self.shift.check_capacity(maps.size, "potential table")
        maps.setflags(write=False)
        object.__setattr__(self, "maps", maps)

    @property
    def k(self) -> int:
        return self.shift.k

    def map_at(self, word) -> LinearMap:
        """The map attached to the cylinder of a 1-based word (length >= m)."""
        return LinearMap(self.algebra, self.maps[self.shift.index(tuple(word[: self.depth]))])

    def as_dict(self) -> dict:
        words = self.shift.words(self.depth)
        return {tuple(int(s) + 1 for s in w): LinearMap(self.algebra, self.maps[j])
                for j, w in enumerate(words)}

    def lift_depth(self, depth: int) -> "Potential":
        """The same potential tabulated on longer words."""
        if depth < self.depth:
            raise DomainError(f"cannot lift depth {self.depth} down to {depth}")
        if depth == self.depth:
            return self
        idx = self.shift.index_of(self.shift.words(depth)[:, : self.depth])
        params = dict(self.params)
        if "factors" in params:
            params["factors"] = np.asarray(params["factors"])[idx]
        return Potential(self.algebra, self.shift, depth, self.maps[idx], self.family,
                         self.certificate, self.verdict, params)

    @cached_property
    def normalization_deviation(self) -> float:
        return check_normalized(self)

    @property
    def is_trace_type(self) -> bool:
        return "factors" in self.params and self.family == "trace_type"

    def trace_factors(self) -> np.ndarray:
        """The (W_m, d, d) stack of factors P(w) of a trace-type potential."""
        if not self.is_trace_type:
            raise DomainError(f"potential of family {self.family!r} is not trace-type")
        return np.asarray(self.params["factors"])

    def summary(self) -> dict:
        return {
            "family": self.family,
            "algebra": {"kind": self.algebra.kind, "size": self.algebra.size},
            "depth": self.depth,
            "certificate": self.certificate,
            "verdict": None if self.verdict is None else self.verdict.value,
            "params": {key: _jsonable(v) for key, v in self.params.items()},
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _table_from_mapping(shift: TransitionMatrix, table, shape, what: str) -> tuple[int, np.ndarray]:
    """Stack a {word: array} mapping (or an already stacked array) in word order."""
    if isinstance(table, Mapping):
        lengths = {len(w) for w in table}
        if len(lengths) != 1:
            raise DomainError(f"{what} words have mixed lengths {sorted(lengths)}")
        depth = lengths.pop()
        words = shift.words(depth)
        out = np.empty((words.shape[0],) + shape)
        seen = np.zeros(words.shape[0], dtype=bool)
        for w, val in table.items():
            if not shift.is_allowed(w):
                raise DomainError(f"{what} word {tuple(w)} is not allowed")
            j = shift.index(w)
            arr = np.asarray(val, dtype=np.float64)
            if arr.shape != shape:
                raise DomainError(f"{what} at word {tuple(w)} has shape {arr.shape}, expected {shape}")
            out[j] = arr
            seen[j] = True
        if not seen.all():
            missing = [tuple(int(s) + 1 for s in words[j]) for j in np.flatnonzero(~seen)]
            raise DomainError(f"{what} is missing words {missing}")
        return depth, out
    arr = np.asarray(table, dtype=np.float64)
    if arr.shape == shape:
        return 1, np.broadcast_to(arr, (shift.k,) + shape).copy()
    if arr.ndim != len(shape) + 1 or arr.shape[1:] != shape:
        raise DomainError(f"{what} has shape {arr.shape}; expected (W_m,) + {shape}")
    depth = 1
    while shift.n_words(depth) < arr.shape[0]:
        depth += 1
    if shift.n_words(depth) != arr.shape[0]:
        raise DomainError(f"{what} has {arr.shape[0]} entries, which matches no word count")
    return depth, arr


def preimage_weights(shift: TransitionMatrix) -> tuple[int, np.ndarray]:
    """Scalar weights J with sum over preimages equal to 1.

    On the full shift this is the constant 1/k at depth 1; otherwise the
    depth-2 weights J(i, a) = 1 / indeg(a).
    """
    if shift.is_full:
        return 1, np.full(shift.k, 1.0 / shift.k)
    words = shift.words(2)
    return 2, 1.0 / shift.in_degree()[words[:, 1]]


def _weighted_constant(algebra: Algebra, shift: TransitionMatrix, gamma: np.ndarray,
                       family: str, certificate: str, params: dict) -> Potential:
    depth, weights = preimage_weights(shift)
    maps = weights[:, None, None] * gamma[None]
    params = dict(params, weight_depth=depth)
    return Potential(algebra, shift, depth, maps, family, certificate,
                     PIVerdict.CERTIFIED_TRUE if certificate == "analytic_pi" else None, params)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def make_trace_type(factors, shift: TransitionMatrix | None = None,
                    eps: float = 1e-10) -> Potential:
    """phi_w(a) = tr^(a) P(w).

    Parameters
    ----------
    factors : mapping or ndarray
        ``{word: P(w)}`` over all allowed words of one length, a
        ``(W_m, d, d)`` stack in word order, or a single ``(d, d)`` matrix
        used for every symbol.
    shift : TransitionMatrix, optional
        Defaults to the full 2-shift.
    """
    shift = TransitionMatrix.full(2) if shift is None else shift
    if isinstance(factors, Mapping):
        d = np.asarray(next(iter(factors.values()))).shape[0]
    else:
        d = np.asarray(factors).shape[-1]
    alg = Algebra.matrix(d)
    depth, P = _table_from_mapping(shift, factors, (d, d), "trace-type factor")
    words = shift.words(depth)
    for j in range(P.shape[0]):
        if not alg.is_strictly_positive(P[j], eps):
            w = tuple(int(s) + 1 for s in words[j])
            raise DomainError(
                f"factor at word {w} is not strictly positive "
                f"(min eigenvalue {alg.min_eigenvalue(P[j]):.3e} < {eps})"
            )
    t = alg.trace_functional()
    maps = P.reshape(P.shape[0], -1)[:, :, None] * t[None, None, :]
    P.setflags(write=False)
    return Potential(alg, shift, depth, maps, "trace_type", "analytic_pi",
                     PIVerdict.CERTIFIED_TRUE, {"factors": P})


def first_coordinate_factors(p: float) -> dict:
    """P(1y) = diag(p, 1-p), P(2y) = diag(1-p, p) on the full 2-shift."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    return {(1,): np.diag([p, 1.0 - p]), (2,): np.diag([1.0 - p, p])}


def make_first_coordinate(p: float) -> Potential:
    pot = make_trace_type(first_coordinate_factors(p))
    return replace(pot, params=dict(pot.params, preset="first_coordinate", p=float(p)))


def make_maximal_entropy(shift: TransitionMatrix | None = None, d: int = 2) -> Potential:
    """Trace-type potential with P(w) = J(w) Id, J the preimage weights."""
    shift = TransitionMatrix.full(2) if shift is None else shift
    depth, weights = preimage_weights(shift)
    P = weights[:, None, None] * np.eye(d)[None]
    pot = make_trace_type(P, shift)
    return replace(pot, params=dict(pot.params, preset="maximal_entropy"))


def depolarizing_channel(p: float, d: int = 2) -> np.ndarray:
    """Table of a -> (1 - p) a + p tr^(a) Id on M_d(R)."""
    alg = Algebra.matrix(d)
    return (1.0 - p) * np.eye(alg.dim) + p * np.outer(alg.vec(np.eye(d)), alg.trace_functional())


def pauli_channel(weight: float) -> np.ndarray:
    """Table of a -> (1 - w) a + (w/3)(XaX + YaY + ZaZ) on M_2(R), Y taken complex."""
    alg = Algebra.matrix(2)

    def act(a):
        ya = -PAULI_IY @ a @ PAULI_IY
        return (1.0 - weight) * a + weight / 3.0 * (PAULI_X @ a @ PAULI_X + ya + PAULI_Z @ a @ PAULI_Z)

    return LinearMap.from_function(alg, act).matrix


def make_depolarizing(p: float, k: int | TransitionMatrix = 2, d: int = 2) -> Potential:
    """Constant depolarizing potential (1/k)((1 - p) a + p tr^(a) Id).

    ``k`` may be a symbol count (full shift) or a transition matrix; on a
    non-full shift the weight 1/k is replaced by 1/indeg of the image symbol.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"depolarizing parameter must lie in (0, 1], got {p}")
    shift = k if isinstance(k, TransitionMatrix) else TransitionMatrix.full(int(k))
    return _weighted_constant(Algebra.matrix(d), shift, depolarizing_channel(p, d),
                              "depolarizing", "analytic_pi", {"p": float(p), "d": int(d)})


def _check_stochastic(P) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.shape != (2, 2):
        raise DomainError(f"P must be 2x2, got shape {P.shape}")
    if (P <= 0).any():
        raise DomainError("P must have strictly positive entries")
    if np.abs(P.sum(axis=1) - 1.0).max() > 1e-12:
        raise DomainError(f"rows of P must sum to 1, got {P.sum(axis=1).tolist()}")
    return P


def kraus_branches(P) -> tuple[np.ndarray, np.ndarray]:
    """P_1^2 = diag(p11, p21) and P_2^2 = diag(p12, p22)."""
    P = _check_stochastic(P)
    return np.diag(P[:, 0]), np.diag(P[:, 1])


def make_kraus_split(P) -> Potential:
    """Branch potential phi_1(a) = a11 P_1^2, phi_2(a) = a22 P_2^2 on the full 2-shift.

    Each branch is positive but not positivity-improving, so no certificate
    is attached.
    """
    P = _check_stochastic(P)
    alg = Algebra.matrix(2)
    sq1, sq2 = kraus_branches(P)
    e11 = np.zeros(4)
    e11[0] = 1.0
    e22 = np.zeros(4)
    e22[3] = 1.0
    maps = np.stack([np.outer(alg.vec(sq1), e11), np.outer(alg.vec(sq2), e22)])
    return Potential(alg, TransitionMatrix.full(2), 1, maps, "kraus_split", "none", None,
                     {"P": P})


def kraus_channel_table(P) -> np.ndarray:
    """Table of the unital channel a -> a11 P_1^2 + a22 P_2^2."""
    sq1, sq2 = kraus_branches(P)
    return LinearMap.from_function(Algebra.matrix(2),
                                   lambda a: a[0, 0] * sq1 + a[1, 1] * sq2).matrix


def make_kraus_channel(P, shift: TransitionMatrix | None = None) -> Potential:
    """Constant potential (1/k) eps with eps(a) = a11 P_1^2 + a22 P_2^2."""
    P = _check_stochastic(P)
    shift = TransitionMatrix.full(2) if shift is None else shift
    return _weighted_constant(Algebra.matrix(2), shift, kraus_channel_table(P),
                              "kraus_channel", "analytic_pi", {"P": P})


def make_vector_table(tables, shift: TransitionMatrix | None = None) -> Potential:
    """Potential on R^N given by entrywise positive N x N tables."""
    shift = TransitionMatrix.full(2) if shift is None else shift
    if isinstance(tables, Mapping):
        N = np.asarray(next(iter(tables.values()))).shape[0]
    else:
        N = np.asarray(tables).shape[-1]
    depth, T = _table_from_mapping(shift, tables, (N, N), "vector table")
    if (T <= 0).any():
        j = int(np.flatnonzero((T <= 0).any(axis=(1, 2)))[0])
        w = tuple(int(s) + 1 for s in shift.words(depth)[j])
        raise DomainError(f"vector table at word {w} has a non-positive entry")
    return Potential(Algebra.vector(N), shift, depth, T, "vector_table", "analytic_pi",
                     PIVerdict.CERTIFIED_TRUE, {"N": int(N)})


def uniform_vector_table(N: int, p: float = 1.0, k: int = 2) -> np.ndarray:
    """(1/k)(p/N J + (1 - p) Id); p = 1 gives (1/(kN)) J."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    return (p / N * np.ones((N, N)) + (1.0 - p) * np.eye(N)) / k


def make_custom(table, algebra: Algebra, shift: TransitionMatrix, trials: int = 200,
                seed: int = 0) -> Potential:
    """Potential from raw map tables, with a sampled positivity-improving verdict."""
    dim = algebra.dim
    depth, maps = _table_from_mapping(shift, table, (dim, dim), "custom map")
    verdicts = [is_positivity_improving(LinearMap(algebra, m), trials=trials, seed=seed)
                for m in maps]
    if PIVerdict.CERTIFIED_FALSE in verdicts:
        verdict = PIVerdict.CERTIFIED_FALSE
    elif all(v is PIVerdict.CERTIFIED_TRUE for v in verdicts):
        verdict = PIVerdict.CERTIFIED_TRUE
    else:
        verdict = PIVerdict.PROBABLY_TRUE
    return Potential(algebra, shift, depth, maps, "custom", "sampled", verdict,
                     {"trials": int(trials), "seed": int(seed)})


def make_scaled_trace(shift: TransitionMatrix | None = None, d: int = 2) -> Potential:
    """phi(a) = tr^(a) Id: the (unnormalized) W-transform channel, constant in x."""
    shift = TransitionMatrix.full(2) if shift is None else shift
    alg = Algebra.matrix(d)
    table = trace_type_map(alg, np.eye(d)).matrix
    maps = np.broadcast_to(table, (shift.k, alg.dim, alg.dim))
    return Potential(alg, shift, 1, maps, "w_transform", "analytic_pi",
                     PIVerdict.CERTIFIED_TRUE, {"d": int(d)})


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def jacobian(phi: Potential) -> CylinderFunction:
    """J(w) = phi_w(Id) as a depth-m cylinder function."""
    ident = phi.algebra.vec(phi.algebra.identity())
    return CylinderFunction(phi.algebra, phi.shift, phi.depth, phi.maps @ ident)


def preimage_sums(phi: Potential) -> np.ndarray:
    """Rows sum_{i: A(i, v_1) = 1} phi_{iv}(Id) for every suffix word v of length m - 1."""
    J = jacobian(phi).values
    shift = phi.shift
    words = shift.words(phi.depth)
    suffix = shift.index_of(words[:, 1:])
    out = np.zeros((shift.n_words(phi.depth - 1), phi.algebra.dim))
    np.add.at(out, suffix, J)
    return out


def check_normalized(phi: Potential) -> float:
    """Max over suffix words of || sum of preimage Jacobians - Id ||."""
    alg = phi.algebra
    sums = preimage_sums(phi)
    return float(alg.norms(sums - alg.vec(alg.identity())[None]).max())


def lipschitz_seminorm(phi: Potential, theta: float) -> float:
    """Exact |phi|_theta of a locally constant potential."""
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    words = phi.shift.words(phi.depth)
    maps = phi.maps
    best = 0.0
    for a in range(len(words) - 1):
        for b in range(a + 1, len(words)):
            diff = maps[a] - maps[b]
            if not np.any(diff):
                continue
            mismatch = np.flatnonzero(words[a] != words[b])
            lcp = int(mismatch[0]) if mismatch.size else phi.depth
            best = max(best, operator_norm(LinearMap(phi.algebra, diff)) / theta ** lcp)
    return best
