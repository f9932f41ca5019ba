"""Monte Carlo estimates of eigenstate values and entropies for trace-type potentials.

Words are drawn ancestrally from the equilibrium Markov measure of tr^ P.
Samples are split into fixed-size chunks; chunk ``c`` draws its uniforms from
``SeedSequence(seed, spawn_key=(c,))``, so the output depends on the seed and
the sample count but not on the number of worker threads.  Chunk statistics
are merged in chunk order with the pairwise (Chan) update.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels, classical
from .cylfun import CylinderFunction
from .eigenstate import trace_scalar_potential
from .entropy import log_jacobian
from .errors import DomainError
from .potential import Potential

DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    samples: int = 1_000_000
    burn_in: int = 0
    workers: int = 1
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if self.samples < 1:
            raise DomainError("samples must be at least 1")
        if self.burn_in < 0 or self.workers < 1 or self.chunk_size < 1:
            raise DomainError("burn_in must be >= 0, workers and chunk_size >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def chunks(self) -> list[tuple[int, int]]:
        """(chunk index, chunk length) pairs covering all samples."""
        full, rest = divmod(self.samples, self.chunk_size)
        out = [(c, self.chunk_size) for c in range(full)]
        if rest:
            out.append((full, rest))
        return out


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error,
                "samples": self.samples, "seed": self.seed}


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chunk),)))


def _cumulative(mu: classical.MarkovMeasure):
    cum_pi = np.cumsum(mu.pi)
    cum_m = np.cumsum(mu.M, axis=1)
    return cum_pi, cum_m


def _draw(mu: classical.MarkovMeasure, length: int, n: int, chunk: int, cfg: SamplerConfig):
    """0-based words for one chunk."""
    total = length + cfg.burn_in
    u = chunk_rng(cfg.seed, chunk).random((n, total))
    cum_pi, cum_m = _cumulative(mu)
    return _kernels.markov_sample(u, cum_pi, cum_m)[:, cfg.burn_in:]


def sample_words(mu: classical.MarkovMeasure, length: int, cfg: SamplerConfig) -> np.ndarray:
    """All draws as a (samples, length) array of 1-based symbols."""
    if length < 0:
        raise DomainError("word length must be non-negative")
    parts = [_draw(mu, length, n, c, cfg) for c, n in cfg.chunks()]
    return np.concatenate(parts, axis=0) + 1


def _chunk_stats(values: np.ndarray) -> tuple[int, float, float]:
    n = values.shape[0]
    if values.min() == values.max():
        return n, float(values[0]), 0.0
    mean = float(values.mean())
    return n, mean, float(((values - mean) ** 2).sum())


def _merge(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def estimate_table(mu: classical.MarkovMeasure, table: np.ndarray, depth: int,
                   cfg: SamplerConfig) -> MCEstimate:
    """Mean of a depth-n lookup table over words drawn from mu."""
    shift = mu.shift
    length = max(depth, 1)
    table = np.asarray(table, dtype=np.float64)
    if depth < length:
        table = np.repeat(table, shift.n_words(length) // table.shape[0])

    def run(chunk):
        c, n = chunk
        words = _draw(mu, length, n, c, cfg)
        return _chunk_stats(table[shift.index_of(words)])

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        stats = list(pool.map(run, cfg.chunks()))
    total = stats[0]
    for s in stats[1:]:
        total = _merge(total, s)
    n, mean, m2 = total
    se = float(np.sqrt(m2 / (n - 1) / n)) if n > 1 else 0.0
    return MCEstimate(mean, se, n, int(cfg.seed))


def _trace_measure(phi: Potential) -> classical.MarkovMeasure:
    if not phi.is_trace_type:
        raise DomainError(f"Monte Carlo estimators need a trace-type potential, got {phi.family!r}")
    return classical.equilibrium(trace_scalar_potential(phi))


def estimate_eta(phi: Potential, g: CylinderFunction, cfg: SamplerConfig) -> MCEstimate:
    """Estimate eta(g) = integral of tr^ g against the equilibrium measure of tr^ P."""
    mu = _trace_measure(phi)
    table = g.values @ g.algebra.trace_functional()
    return estimate_table(mu, table, g.depth, cfg)


def estimate_entropy(phi: Potential, cfg: SamplerConfig) -> MCEstimate:
    """Estimate -eta(log J) = -integral of tr^ log P."""
    mu = _trace_measure(phi)
    logj = log_jacobian(phi)
    table = -(logj.values @ phi.algebra.trace_functional())
    return estimate_table(mu, table, phi.depth, cfg)
