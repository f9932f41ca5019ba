"""The noncommutative Ruelle transfer operator on cylinder functions.

For a potential of depth m and a function g of depth n_g the operator acts by

    (L g)(v) = sum_{i : A(i, v_1) = 1} phi_{(iv)[:m]}( g((iv)[:n_g]) ),

and the result is tabulated at depth max(m - 1, n_g).  On a shift that is not
full the preimage set depends on v_1, so the result depth is at least 1 there.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .cylfun import CylinderFunction
from .errors import DomainError, EigensolverError, NormalizationError
from .potential import Potential, check_normalized, lipschitz_seminorm
from .sft import TransitionMatrix

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
NORMALIZATION_TOL = 1e-10
DENSE_FACTOR = 4  # dense tables may hold DENSE_FACTOR * capacity_cap entries
CSV_HEADER = ("step", "spread", "off_identity", "eta_estimate", "seminorm_bound")


def result_depth(shift: TransitionMatrix, m: int, n_g: int) -> int:
    depth = max(m - 1, n_g)
    if depth == 0 and not shift.is_full:
        depth = 1
    return depth


def default_section_depth(phi: Potential) -> int:
    return max(phi.depth - 1, 1) + 4


@lru_cache(maxsize=128)
def _index_tables(shift: TransitionMatrix, m: int, n_g: int):
    """Gather tables for one application: (out_depth, phi_idx, g_idx, mask).

    Row r of each (W_out, k) table lists, for each symbol i, the index of the
    potential word (iv)[:m] and of the argument word (iv)[:n_g], where v is
    the r-th output word; ``mask[r, i]`` is A(i, v_1).
    """
    depth = result_depth(shift, m, n_g)
    out_words = shift.words(depth)
    n_out, k = out_words.shape[0], shift.k
    if depth == 0:
        mask = np.ones((1, k), dtype=np.bool_)
    else:
        mask = shift.entries[:, out_words[:, 0]].T.astype(np.bool_)
    rows, syms = np.nonzero(mask)
    ext = np.column_stack([syms, out_words[rows]])
    phi_idx = np.zeros((n_out, k), dtype=np.int64)
    g_idx = np.zeros((n_out, k), dtype=np.int64)
    phi_idx[rows, syms] = shift.index_of(ext[:, :m])
    g_idx[rows, syms] = shift.index_of(ext[:, :n_g])
    for arr in (phi_idx, g_idx, mask):
        arr.setflags(write=False)
    return depth, phi_idx, g_idx, mask


def _check_pair(phi: Potential, g: CylinderFunction):
    if phi.algebra != g.algebra:
        raise DomainError(f"potential acts on {phi.algebra}, function takes values in {g.algebra}")
    if phi.shift != g.shift:
        raise DomainError("potential and function live on different shift spaces")


def apply(phi: Potential, g: CylinderFunction) -> CylinderFunction:
    """One application of the transfer operator."""
    _check_pair(phi, g)
    depth, phi_idx, g_idx, mask = _index_tables(phi.shift, phi.depth, g.depth)
    phi.shift.check_capacity(phi_idx.shape[0] * phi.algebra.dim, "transfer output table")
    out = _kernels.transfer_apply(phi.maps, g.values, phi_idx, g_idx, mask)
    return CylinderFunction(g.algebra, g.shift, depth, out)


def apply_n(phi: Potential, g: CylinderFunction, n: int) -> CylinderFunction:
    for _ in range(n):
        g = apply(phi, g)
    return g


# ---------------------------------------------------------------------------
# power iteration
# ---------------------------------------------------------------------------

@dataclass
class IterationLog:
    """Per-step trace of a power iteration."""

    records: list = field(default_factory=list)
    converged: bool = False
    theta: float = 0.5

    def append(self, step, spread, off_identity, eta, bound):
        self.records.append((int(step), float(spread), float(off_identity), float(eta), float(bound)))

    @property
    def steps(self) -> int:
        return self.records[-1][0] if self.records else 0

    def column(self, name: str) -> np.ndarray:
        return np.array([r[CSV_HEADER.index(name)] for r in self.records])

    def decay_rate(self, skip: int = 0, floor: float = 1e-13) -> float:
        """Geometric-mean ratio of consecutive spread + off_identity values above ``floor``."""
        total = self.column("spread") + self.column("off_identity")
        total = total[skip:]
        total = total[total > floor]
        if total.size < 2:
            return 0.0
        return float(np.exp(np.mean(np.diff(np.log(total)))))

    def spread_monotone(self, after: int, slack: float = 1e-9) -> bool:
        spread = self.column("spread")[after:]
        return bool(np.all(np.diff(spread) <= slack))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.records:
            writer.writerow([rec[0]] + [repr(x) for x in rec[1:]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


@dataclass
class IterationResult:
    eta_estimate: float
    log: IterationLog
    final: CylinderFunction

    @property
    def converged(self) -> bool:
        return self.log.converged


def _require_normalized(phi: Potential, tol: float = NORMALIZATION_TOL):
    dev = check_normalized(phi)
    if dev > tol:
        raise NormalizationError(f"potential is not normalized: deviation {dev:.3e} > {tol:.1e}")


def power_iterate(phi: Potential, g: CylinderFunction, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, theta: float = 0.5) -> IterationResult:
    """Iterate L until spread + off_identity <= tol.

    The running estimate of eta(g) is the normalized trace of the mean value
    over words.  ``seminorm_bound`` records the right-hand side
    C |g|_inf + theta**n |g|_theta of the basic inequality.
    """
    _require_normalized(phi)
    _check_pair(phi, g)
    _, C = itm_constants(phi, theta)
    sup0, semi0 = g.sup_norm(), g.theta_seminorm(theta)
    log = IterationLog(theta=theta)
    alg = phi.algebra
    cur = g
    for step in range(max_iter + 1):
        spread, off = cur.diameter()
        eta = alg.normalized_trace(cur.mean_value())
        log.append(step, spread, off, eta, C * sup0 + theta ** step * semi0)
        if spread + off <= tol:
            log.converged = True
            break
        if step == max_iter:
            break
        cur = apply(phi, cur)
    return IterationResult(log.records[-1][3], log, cur)


# ---------------------------------------------------------------------------
# finite sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Dense table of L restricted to depth-n cylinder functions.

    The basis is ordered word-major: index ``j * dim + b`` is the b-th
    algebra basis element on the j-th allowed word.
    """

    potential: Potential
    depth: int
    data: np.ndarray = field(repr=False)

    @property
    def side(self) -> int:
        return self.data.shape[0]

    @property
    def basis(self) -> list:
        dim = self.potential.algebra.dim
        words = self.potential.shift.words(self.depth)
        return [(tuple(int(s) + 1 for s in w), b) for w in words for b in range(dim)]

    def matvec(self, g: CylinderFunction) -> CylinderFunction:
        g = g.lift_depth(self.depth)
        out = self.data @ g.values.reshape(-1)
        return CylinderFunction(g.algebra, g.shift, self.depth, out)


def assemble_matrix(phi: Potential, n: int | None = None) -> TransferMatrix:
    """Scatter the potential's maps into the dense finite section at depth n."""
    n = default_section_depth(phi) if n is None else int(n)
    if n < max(phi.depth - 1, 1):
        raise DomainError(f"section depth {n} is below max(m - 1, 1) = {max(phi.depth - 1, 1)}")
    shift = phi.shift
    dim = phi.algebra.dim
    side = shift.n_words(n) * dim
    shift.check_capacity(side, "cylinder basis")
    if side * side > DENSE_FACTOR * shift.capacity_cap:
        from .errors import CapacityError
        raise CapacityError(f"dense transfer matrix of side {side} exceeds the capacity cap")
    depth, phi_idx, g_idx, mask = _index_tables(shift, phi.depth, n)
    assert depth == n
    rows, syms = np.nonzero(mask)
    W = phi_idx.shape[0]
    blocks = np.zeros((W, W, dim, dim))
    np.add.at(blocks, (rows, g_idx[rows, syms]), phi.maps[phi_idx[rows, syms]])
    data = blocks.transpose(0, 2, 1, 3).reshape(side, side)
    data.setflags(write=False)
    return TransferMatrix(phi, n, data)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a finite section, sorted by decreasing modulus."""

    eigenvalues: np.ndarray
    residual: float
    tol: float = 1e-8

    @property
    def leading(self) -> complex:
        return complex(self.eigenvalues[0])

    @property
    def multiplicity_of_one(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues - 1.0) <= self.tol))

    @property
    def second_modulus(self) -> float:
        """Largest modulus among eigenvalues not within tol of 1."""
        rest = self.eigenvalues[np.abs(self.eigenvalues - 1.0) > self.tol]
        return float(np.abs(rest).max()) if rest.size else 0.0

    @property
    def gap(self) -> float:
        return 1.0 - self.second_modulus

    def to_json(self) -> list:
        return [{"re": float(z.real), "im": float(z.imag), "modulus": float(abs(z))}
                for z in self.eigenvalues]

    def summary(self) -> dict:
        lead = self.leading
        return {
            "lambda1": {"re": lead.real, "im": lead.imag},
            "multiplicity_of_one": self.multiplicity_of_one,
            "lambda2_modulus": self.second_modulus,
            "gap": self.gap,
            "residual": self.residual,
        }


def spectrum(T: TransferMatrix, tol: float = 1e-8) -> Spectrum:
    """All eigenvalues of the dense section by a nonsymmetric dense solve."""
    try:
        w, v = np.linalg.eig(T.data)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigensolver failed: {exc}") from exc
    scale = max(1.0, float(np.abs(T.data).max()))
    residual = float(np.abs(T.data @ v - v * w).max()) / scale
    if not np.isfinite(w).all() or residual > 1e-6:
        raise EigensolverError(f"eigendecomposition residual {residual:.3e} too large")
    order = np.lexsort((-w.real, -np.round(np.abs(w), 12)))
    return Spectrum(w[order], residual, tol)


def spectral_gap(phi: Potential, n: int | None = None) -> float:
    return spectrum(assemble_matrix(phi, n)).gap


# ---------------------------------------------------------------------------
# constants and inequalities
# ---------------------------------------------------------------------------

def itm_constants(phi: Potential, theta: float, seminorm: float | None = None) -> tuple[float, float]:
    """C1 = max{k theta |phi|_theta, 2 / theta} and C = C1 / (1 - theta)."""
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    semi = lipschitz_seminorm(phi, theta) if seminorm is None else float(seminorm)
    C1 = max(phi.k * theta * semi, 2.0 / theta)
    return C1, C1 / (1.0 - theta)


@dataclass
class InequalityReport:
    holds: bool
    margins: np.ndarray
    C1: float
    C: float


def verify_basic_inequality(phi: Potential, g: CylinderFunction, theta: float,
                            n_max: int = 8, slack: float = 1e-9) -> InequalityReport:
    """Check |L^n g|_theta <= C |g|_inf + theta^n |g|_theta for 1 <= n <= n_max."""
    _require_normalized(phi)
    C1, C = itm_constants(phi, theta)
    sup0, semi0 = g.sup_norm(), g.theta_seminorm(theta)
    margins = np.empty(n_max)
    cur = g
    for n in range(1, n_max + 1):
        cur = apply(phi, cur)
        margins[n - 1] = C * sup0 + theta ** n * semi0 - cur.theta_seminorm(theta)
    return InequalityReport(bool(margins.min() >= -slack), margins, C1, C)


def verify_iterated_inequality(phi: Potential, g: CylinderFunction, theta: float,
                               n_max: int = 8, slack: float = 1e-9) -> InequalityReport:
    """Check ||L^n g||_theta <= (C + 1)|g|_inf + theta^n ||g||_theta for 1 <= n <= n_max."""
    _require_normalized(phi)
    C1, C = itm_constants(phi, theta)
    sup0, norm0 = g.sup_norm(), g.lipschitz_norm(theta)
    margins = np.empty(n_max)
    cur = g
    for n in range(1, n_max + 1):
        cur = apply(phi, cur)
        margins[n - 1] = (C + 1.0) * sup0 + theta ** n * norm0 - cur.lipschitz_norm(theta)
    return InequalityReport(bool(margins.min() >= -slack), margins, C1, C)


def first_strictly_positive_iterate(phi: Potential, g: CylinderFunction, max_steps: int,
                                    eps: float = 1e-12) -> int | None:
    """Smallest n <= max_steps with every value of L^n g at least eps * Id, else None."""
    alg = phi.algebra
    cur = g
    for n in range(max_steps + 1):
        if all(alg.is_strictly_positive(cur.element(j), eps) for j in range(cur.n_words)):
            return n
        cur = apply(phi, cur)
    return None
