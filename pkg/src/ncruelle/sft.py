"""Subshifts of finite type: transition matrices, allowed words and the metric.

Symbols are 1-based in the public API (words are tuples of ints in ``1..k``).
Internally words are stored as 0-based int arrays, and the index of a word is
its rank in the lexicographic enumeration of allowed words of that length.
"""

from __future__ import annotations

from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .errors import CapacityError, DisallowedWordError, DomainError

DEFAULT_CAPACITY = 2 ** 22

Word = tuple


class TransitionMatrix:
    """A k x k 0/1 transition matrix defining the one-sided shift space.

    Parameters
    ----------
    rows : array_like
        Square table of zeros and ones.  Every row and every column must
        contain at least one 1.
    capacity_cap : int
        Upper bound on table entries (number of words times the algebra
        dimension) that downstream tables may allocate.
    """

    def __init__(self, rows, capacity_cap: int = DEFAULT_CAPACITY):
        a = np.asarray(rows)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"transition matrix must be square and non-empty, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise DomainError("transition matrix entries must be 0 or 1")
        a = a.astype(np.int64)
        dead_rows = np.flatnonzero(a.sum(axis=1) == 0)
        dead_cols = np.flatnonzero(a.sum(axis=0) == 0)
        if dead_rows.size or dead_cols.size:
            raise DomainError(
                "dead symbols: rows %s / columns %s have no allowed transition"
                % ((dead_rows + 1).tolist(), (dead_cols + 1).tolist())
            )
        a.setflags(write=False)
        self.entries = a
        self.capacity_cap = int(capacity_cap)

    @classmethod
    def full(cls, k: int, **kw) -> "TransitionMatrix":
        return cls(np.ones((k, k), dtype=np.int64), **kw)

    @classmethod
    def golden_mean(cls, **kw) -> "TransitionMatrix":
        return cls([[1, 1], [1, 0]], **kw)

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def is_full(self) -> bool:
        return bool(self.entries.all())

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"TransitionMatrix({self.entries.tolist()})"

    # -- aperiodicity ------------------------------------------------------

    @cached_property
    def primitivity_exponent(self) -> int | None:
        """Smallest n with A**n entrywise positive, or None if A is not aperiodic."""
        k = self.k
        bound = (k - 1) ** 2 + 1
        power = self.entries.astype(bool)
        adj = self.entries.astype(bool)
        for n in range(1, bound + 1):
            if power.all():
                return n
            power = (power.astype(np.int64) @ adj.astype(np.int64)) > 0
        return None

    def is_aperiodic(self) -> bool:
        return self.primitivity_exponent is not None

    # -- words ---------------------------------------------------------------

    def preimage_symbols(self, a: int) -> list[int]:
        """Symbols i (1-based) with A(i, a) = 1, ascending."""
        if not 1 <= a <= self.k:
            raise DomainError(f"symbol {a} outside 1..{self.k}")
        return (np.flatnonzero(self.entries[:, a - 1]) + 1).tolist()

    def in_degree(self) -> np.ndarray:
        """Column sums of A: the number of preimage symbols of each symbol."""
        return self.entries.sum(axis=0)

    def count_words(self, n: int) -> int:
        if n == 0:
            return 1
        ones = np.ones(self.k, dtype=object)
        a = self.entries.astype(object)
        vec = ones
        for _ in range(n - 1):
            vec = a @ vec
        return int(sum(vec))

    def check_capacity(self, entries: int, what: str = "table") -> None:
        if entries > self.capacity_cap:
            raise CapacityError(
                f"{what} needs {entries} entries, above the capacity cap {self.capacity_cap}"
            )

    def words(self, n: int) -> np.ndarray:
        """All allowed words of length n as a read-only (W_n, n) array of 0-based symbols."""
        if n < 0:
            raise DomainError("word length must be non-negative")
        self.check_capacity(self.count_words(n), f"enumeration of length-{n} words")
        return _enumerate_words(self, n)

    def n_words(self, n: int) -> int:
        return self.words(n).shape[0]

    def codes(self, n: int) -> np.ndarray:
        return _word_codes(self, n)

    def index_of(self, words: np.ndarray) -> np.ndarray:
        """Ranks of 0-based words (rows of a 2-d array) among allowed words of that length."""
        words = np.asarray(words, dtype=np.int64)
        n = words.shape[1]
        if n == 0:
            return np.zeros(words.shape[0], dtype=np.int64)
        codes = self.codes(n)
        c = _encode(words, self.k)
        idx = np.searchsorted(codes, c)
        idx_clip = np.minimum(idx, codes.shape[0] - 1)
        bad = codes[idx_clip] != c
        if bad.any():
            w = tuple(int(s) + 1 for s in words[np.flatnonzero(bad)[0]])
            raise DisallowedWordError(f"word {w} is not allowed by {self!r}")
        return idx_clip

    def index(self, word: Sequence[int]) -> int:
        """Rank of a 1-based word among allowed words of its length."""
        w = np.asarray(word, dtype=np.int64).reshape(1, -1) - 1
        if w.size and (w.min() < 0 or w.max() >= self.k):
            raise DisallowedWordError(f"word {tuple(word)} uses symbols outside 1..{self.k}")
        return int(self.index_of(w)[0])

    def word(self, n: int, index: int) -> Word:
        return tuple(int(s) + 1 for s in self.words(n)[index])

    def is_allowed(self, word: Sequence[int]) -> bool:
        w = [s - 1 for s in word]
        if any(s < 0 or s >= self.k for s in w):
            return False
        return all(self.entries[a, b] for a, b in zip(w, w[1:]))


def _encode(words: np.ndarray, k: int) -> np.ndarray:
    n = words.shape[1]
    weights = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return words @ weights


@lru_cache(maxsize=256)
def _enumerate_words(shift: TransitionMatrix, n: int) -> np.ndarray:
    if n * np.log2(max(shift.k, 2)) > 62:
        raise CapacityError(f"length-{n} words over {shift.k} symbols overflow the word encoding")
    words = np.zeros((1, 0), dtype=np.int64)
    if n > 0:
        words = np.arange(shift.k, dtype=np.int64).reshape(-1, 1)
    for _ in range(1, n):
        last = words[:, -1]
        rows, nxt = np.nonzero(shift.entries[last])
        words = np.column_stack([words[rows], nxt])
    words.setflags(write=False)
    return words


@lru_cache(maxsize=256)
def _word_codes(shift: TransitionMatrix, n: int) -> np.ndarray:
    codes = _encode(_enumerate_words(shift, n), shift.k)
    codes.setflags(write=False)
    return codes


def is_aperiodic(A: TransitionMatrix) -> bool:
    return A.is_aperiodic()


def allowed_words(A: TransitionMatrix, n: int) -> list[Word]:
    """All allowed length-n words (1-based tuples) in lexicographic order."""
    return [tuple(int(s) + 1 for s in row) for row in A.words(n)]


def preimage_symbols(A: TransitionMatrix, a: int) -> list[int]:
    return A.preimage_symbols(a)


def d_theta(x: Sequence[int], y: Sequence[int], theta: float) -> float:
    """Distance between point prefixes: theta**N, N the first index where they differ.

    Equal prefixes are treated as the same point and get distance 0.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if len(x) != len(y):
        raise DomainError("words must have equal length")
    # repeated multiplication keeps d(ix, iy) = theta * d(x, y) exact in floating point
    dist = 1.0
    for a, b in zip(x, y):
        if a != b:
            return dist
        dist *= theta
    return 0.0
