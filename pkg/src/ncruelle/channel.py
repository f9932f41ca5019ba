"""Kraus operator and partial trace machinery for two-qubit-like 2 (x) 2 systems.

Tensor products are ordered first-factor-major: the basis vector
``e_i (x) e_j`` sits at index ``2 i + j``, which is ``numpy.kron``'s layout.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .potential import _check_stochastic, kraus_branches

E11 = np.diag([1.0, 0.0])
E22 = np.diag([0.0, 1.0])


def check_stochastic(P) -> np.ndarray:
    """Validate a strictly positive row-stochastic 2 x 2 matrix."""
    return _check_stochastic(P)


def branch_roots(P) -> tuple[np.ndarray, np.ndarray]:
    """P_1 = diag(sqrt p11, sqrt p21), P_2 = diag(sqrt p12, sqrt p22)."""
    P = check_stochastic(P)
    return np.diag(np.sqrt(P[:, 0])), np.diag(np.sqrt(P[:, 1]))


def build_K(P) -> np.ndarray:
    """K = E11 (x) P_1 + E22 (x) P_2, a symmetric 4 x 4 block-diagonal matrix."""
    P1, P2 = branch_roots(P)
    return np.kron(E11, P1) + np.kron(E22, P2)


def partial_trace_first(T) -> np.ndarray:
    """Trace out the first factor: (Tr_1 T)_ij = T_ij + T_(i+2)(j+2)."""
    T = np.asarray(T, dtype=np.float64)
    if T.shape != (4, 4):
        raise DomainError(f"partial trace expects a 4 x 4 matrix, got {T.shape}")
    return np.einsum("aiaj->ij", T.reshape(2, 2, 2, 2))


def epsilon_partial_trace(a, P) -> np.ndarray:
    """eps(a (x) Id) = Tr_1(K* (a (x) Id) K)."""
    K = build_K(P)
    a = np.asarray(a, dtype=np.float64)
    return partial_trace_first(K.T @ np.kron(a, np.eye(2)) @ K)


def epsilon_closed_form(a, P) -> np.ndarray:
    """eps(a (x) Id) = a11 P_1^2 + a22 P_2^2."""
    sq1, sq2 = kraus_branches(P)
    a = np.asarray(a, dtype=np.float64)
    return a[0, 0] * sq1 + a[1, 1] * sq2


def epsilon(a, P, tol: float = 1e-12) -> np.ndarray:
    """eps(a (x) Id), computed both ways; raises if the two routes disagree."""
    via_trace = epsilon_partial_trace(a, P)
    closed = epsilon_closed_form(a, P)
    gap = float(np.abs(via_trace - closed).max())
    scale = max(1.0, float(np.abs(a).max()))
    if gap > tol * scale:
        raise ArithmeticError(f"partial-trace and closed-form routes disagree by {gap:.3e}")
    return closed


def stationary_vector(P) -> np.ndarray:
    """The probability vector pi with pi P = pi."""
    P = check_stochastic(P)
    # pi_1 p12 = pi_2 p21 for a two-state chain
    pi = np.array([P[1, 0], P[0, 1]])
    return pi / pi.sum()


def xi(a, pi) -> float:
    """xi(a) = a11 pi_1 + a22 pi_2."""
    a = np.asarray(a, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (2,) or (pi < 0).any() or abs(pi.sum() - 1.0) > 1e-12:
        raise DomainError(f"pi must be a probability pair, got {pi.tolist()}")
    return float(a[0, 0] * pi[0] + a[1, 1] * pi[1])


def w_transform(a) -> np.ndarray:
    """W(a) = (a11 + a22) Id."""
    a = np.asarray(a, dtype=np.float64)
    return (a[0, 0] + a[1, 1]) * np.eye(2)


def build_K_weighted(P, pi) -> np.ndarray:
    """K = diag(sqrt pi_1, 0) (x) P_1 + diag(0, sqrt pi_2) (x) P_2."""
    P1, P2 = branch_roots(P)
    pi = np.asarray(pi, dtype=np.float64)
    return np.kron(np.diag([np.sqrt(pi[0]), 0.0]), P1) + np.kron(np.diag([0.0, np.sqrt(pi[1])]), P2)


def w_channel_partial_trace(a, P) -> np.ndarray:
    """Tr_1(K (W(a) (x) Id) K) with the stationary-weighted K."""
    K = build_K_weighted(P, stationary_vector(P))
    return partial_trace_first(K.T @ np.kron(w_transform(a), np.eye(2)) @ K)


def w_channel_closed_form(a, P) -> np.ndarray:
    """(a11 + a22)(pi_1 P_1^2 + pi_2 P_2^2)."""
    sq1, sq2 = kraus_branches(P)
    pi = stationary_vector(P)
    a = np.asarray(a, dtype=np.float64)
    return (a[0, 0] + a[1, 1]) * (pi[0] * sq1 + pi[1] * sq2)
