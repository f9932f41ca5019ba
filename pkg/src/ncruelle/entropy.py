"""Noncommutative entropy h(phi, eta, sigma) = -eta(log J) and related inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classical
from .errors import DomainError, NormalizationError
from .eigenstate import Eigenstate, evaluate, extract, trace_scalar_potential
from .potential import Potential, check_normalized, jacobian, make_trace_type

JENSEN_SLACK = 1e-10


@dataclass
class EntropyReport:
    """Entropy of a (potential, state) pair.

    ``classical_lower_bound`` is the Kolmogorov-Sinai entropy of the
    equilibrium measure of tr^ P and is only set for trace-type potentials.
    """

    h: float
    eta_log_J: float
    family: str
    classical_lower_bound: float | None = None
    inequality_margins: list = field(default_factory=list)

    @property
    def jensen_holds(self) -> bool:
        return all(m >= -JENSEN_SLACK for m in self.inequality_margins)

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "eta_log_J": self.eta_log_J,
            "family": self.family,
            "classical_lower_bound": self.classical_lower_bound,
            "inequality_margins": list(self.inequality_margins),
        }


def log_jacobian(phi: Potential, eps: float = 1e-10):
    """log J as a depth-m cylinder function; J must be strictly positive."""
    J = jacobian(phi)
    alg = phi.algebra
    words = phi.shift.words(phi.depth)
    out = np.empty_like(J.values)
    for j in range(J.n_words):
        try:
            out[j] = alg.vec(alg.log_positive(J.element(j), eps))
        except DomainError as exc:
            w = tuple(int(s) + 1 for s in words[j])
            raise DomainError(f"Jacobian at word {w} is not strictly positive: {exc}") from exc
    return type(J)(alg, phi.shift, phi.depth, out)


def default_state(phi: Potential) -> Eigenstate:
    return extract(phi, max(phi.depth, 1))


def nc_entropy(phi: Potential, eta: Eigenstate | None = None, eps: float = 1e-10) -> EntropyReport:
    """h = -eta(log J), with the Jensen lower bound for trace-type potentials."""
    eta = default_state(phi) if eta is None else eta
    if eta.depth < phi.depth:
        raise DomainError(f"state depth {eta.depth} is below the potential depth {phi.depth}")
    eta_log = evaluate(eta, log_jacobian(phi, eps))
    report = EntropyReport(-eta_log, eta_log, phi.family)
    if phi.is_trace_type:
        J = trace_scalar_potential(phi)
        h_mu = classical.ks_entropy(classical.equilibrium(J))
        report.classical_lower_bound = h_mu
        report.inequality_margins = [report.h - h_mu]
    return report


def _require_trace_type(*pots: Potential):
    for p in pots:
        if not p.is_trace_type:
            raise DomainError(f"expected a trace-type potential, got family {p.family!r}")
        dev = check_normalized(p)
        if dev > 1e-10:
            raise NormalizationError(f"potential is not normalized: deviation {dev:.3e}")


@dataclass
class GibbsTerms:
    h_psi: float
    eta_log_J_phi: float

    @property
    def value(self) -> float:
        return self.h_psi + self.eta_log_J_phi


def gibbs_terms(phi: Potential, psi: Potential) -> GibbsTerms:
    """The two terms of h(psi, eta_psi, sigma) + eta_psi(log J_phi)."""
    _require_trace_type(phi, psi)
    if phi.shift != psi.shift or phi.algebra != psi.algebra:
        raise DomainError("potentials live on different shifts or algebras")
    depth = max(phi.depth, psi.depth, 1)
    eta = extract(psi, depth)
    h_psi = nc_entropy(psi, eta).h
    return GibbsTerms(h_psi, evaluate(eta, log_jacobian(phi)))


def gibbs_inequality(phi: Potential, psi: Potential) -> float:
    """h(psi, eta_psi, sigma) + eta_psi(log J_phi) for trace-type phi and psi.

    The value is 0 when psi = phi.  It is not sign-definite in general: a
    state of psi can put more weight on small eigenvalues of J_phi than the
    entropy of psi compensates (see the test corpus for an explicit pair).
    """
    return gibbs_terms(phi, psi).value


def scalar_wrapper(J: classical.ScalarPotential) -> Potential:
    """d = 1 trace-type potential whose 1 x 1 factors are the scalar weights."""
    return make_trace_type(J.values[:, None, None], J.shift)


def classical_reduction_check(J: classical.ScalarPotential) -> float:
    """|nc_entropy of the d = 1 wrapper - KS entropy of the equilibrium measure|."""
    phi = scalar_wrapper(J)
    h_nc = nc_entropy(phi).h
    h_ks = classical.ks_entropy(classical.equilibrium(J))
    return abs(h_nc - h_ks)
