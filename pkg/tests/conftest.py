import numpy as np
import pytest

from ncruelle import potential as pot
from ncruelle.sft import TransitionMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def builtin_families():
    """(name, potential) for every built-in normalized family on both test shifts."""
    golden = TransitionMatrix.golden_mean()
    return [
        ("first_coordinate", pot.make_first_coordinate(0.3)),
        ("max_entropy_full", pot.make_maximal_entropy()),
        ("max_entropy_golden", pot.make_maximal_entropy(golden)),
        ("depolarizing_full", pot.make_depolarizing(0.5)),
        ("depolarizing_golden", pot.make_depolarizing(0.5, golden)),
        ("kraus_split", pot.make_kraus_split([[0.9, 0.1], [0.2, 0.8]])),
        ("kraus_channel_full", pot.make_kraus_channel([[0.9, 0.1], [0.2, 0.8]])),
        ("kraus_channel_golden", pot.make_kraus_channel([[0.9, 0.1], [0.2, 0.8]], golden)),
        ("vector_uniform", pot.make_vector_table(pot.uniform_vector_table(3))),
        ("vector_p", pot.make_vector_table(pot.uniform_vector_table(2, 0.3))),
    ]


@pytest.fixture(params=builtin_families(), ids=lambda x: x[0])
def family(request):
    return request.param[1]


def random_trace_type(rng, d=2, k=2):
    """Seeded normalized depth-1 trace-type potential on the full k-shift.

    Draw positive definite A_i and conjugate by S = (sum A_i)^{-1/2}, so that
    the factors S A_i S are positive definite and sum to the identity.
    """
    b = rng.standard_normal((k, d, d))
    A = b @ b.transpose(0, 2, 1) + 0.05 * np.eye(d)
    w, v = np.linalg.eigh(A.sum(axis=0))
    S = (v / np.sqrt(w)) @ v.T
    factors = np.stack([S @ a @ S for a in A])
    return pot.make_trace_type(0.5 * (factors + factors.transpose(0, 2, 1)),
                               TransitionMatrix.full(k))


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
