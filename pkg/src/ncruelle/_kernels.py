"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature.  Setting the
environment variable ``NCRUELLE_DISABLE_NUMBA=1`` (before import) selects the
numpy path; so does a missing numba install.  Both paths consume identical
inputs, so random streams and results agree up to floating-point rounding.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("NCRUELLE_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and not _DISABLED

VECTOR_KIND = 0
MATRIX_KIND = 1


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _np_transfer_apply(maps, values, phi_idx, g_idx, mask):
    """out[r] = sum_i mask[r, i] * maps[phi_idx[r, i]] @ values[g_idx[r, i]]."""
    gathered = maps[phi_idx] * mask[:, :, None, None]
    return np.einsum("rkij,rkj->ri", gathered, values[g_idx])


def _np_element_norms(diffs, kind, d):
    if kind == VECTOR_KIND:
        return np.abs(diffs).max(axis=1)
    if d == 1:
        return np.abs(diffs[:, 0])
    return np.linalg.norm(diffs.reshape(-1, d, d), ord=2, axis=(1, 2))


def _np_pairwise_max(values, words, theta, kind, d):
    """max over pairs w < w' of ||v_w - v_w'|| / theta**lcp(w, w')."""
    n_words = values.shape[0]
    best = 0.0
    for w in range(n_words - 1):
        diffs = values[w + 1:] - values[w]
        norms = _np_element_norms(diffs, kind, d)
        if words.shape[1] == 0:
            lcp = np.zeros(norms.shape[0], dtype=np.int64)
        else:
            lcp = np.argmax(words[w + 1:] != words[w], axis=1)
        ratios = norms / theta ** lcp
        best = max(best, float(ratios.max()))
    return best


def _np_markov_sample(u, cum_pi, cum_m):
    n_samples, length = u.shape
    words = np.empty((n_samples, length), dtype=np.int64)
    if length == 0:
        return words
    words[:, 0] = np.searchsorted(cum_pi, u[:, 0], side="right")
    np.minimum(words[:, 0], cum_pi.shape[0] - 1, out=words[:, 0])
    k = cum_pi.shape[0]
    for t in range(1, length):
        rows = cum_m[words[:, t - 1]]
        nxt = (u[:, t][:, None] >= rows).sum(axis=1)
        words[:, t] = np.minimum(nxt, k - 1)
    return words


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True)
    def _nb_transfer_apply(maps, values, phi_idx, g_idx, mask):
        n_out, k = phi_idx.shape
        dim = values.shape[1]
        out = np.zeros((n_out, dim))
        for r in range(n_out):
            for i in range(k):
                if not mask[r, i]:
                    continue
                m = maps[phi_idx[r, i]]
                v = values[g_idx[r, i]]
                for a in range(dim):
                    acc = 0.0
                    for b in range(dim):
                        acc += m[a, b] * v[b]
                    out[r, a] += acc
        return out

    @numba.njit(cache=True)
    def _nb_element_norm(diff, kind, d):
        if kind == 0:
            return np.max(np.abs(diff))
        if d == 1:
            return abs(diff[0])
        if d == 2:
            # sigma_max^2 = (F + sqrt(F^2 - 4 det^2)) / 2 with F the squared Frobenius norm
            f = diff[0] ** 2 + diff[1] ** 2 + diff[2] ** 2 + diff[3] ** 2
            det = diff[0] * diff[3] - diff[1] * diff[2]
            return np.sqrt(0.5 * (f + np.sqrt(max(f * f - 4.0 * det * det, 0.0))))
        mat = np.ascontiguousarray(diff).reshape((d, d))
        return np.linalg.svd(mat)[1][0]

    @numba.njit(cache=True)
    def _nb_pairwise_max(values, words, theta, kind, d):
        n_words, dim = values.shape
        length = words.shape[1]
        best = 0.0
        diff = np.empty(dim)
        for w in range(n_words - 1):
            for v in range(w + 1, n_words):
                lcp = 0
                while lcp < length and words[w, lcp] == words[v, lcp]:
                    lcp += 1
                for a in range(dim):
                    diff[a] = values[v, a] - values[w, a]
                ratio = _nb_element_norm(diff, kind, d) / theta ** lcp
                if ratio > best:
                    best = ratio
        return best

    @numba.njit(cache=True)
    def _nb_markov_sample(u, cum_pi, cum_m):
        n_samples, length = u.shape
        k = cum_pi.shape[0]
        words = np.empty((n_samples, length), dtype=np.int64)
        for s in range(n_samples):
            if length == 0:
                continue
            x = u[s, 0]
            a = 0
            while a < k - 1 and x >= cum_pi[a]:
                a += 1
            words[s, 0] = a
            for t in range(1, length):
                x = u[s, t]
                b = 0
                while b < k - 1 and x >= cum_m[a, b]:
                    b += 1
                words[s, t] = b
                a = b
        return words


NUMPY_KERNELS = {
    "transfer_apply": _np_transfer_apply,
    "pairwise_max": _np_pairwise_max,
    "markov_sample": _np_markov_sample,
}

NUMBA_KERNELS = (
    {
        "transfer_apply": _nb_transfer_apply,
        "pairwise_max": _nb_pairwise_max,
        "markov_sample": _nb_markov_sample,
    }
    if HAS_NUMBA
    else {}
)

_ACTIVE = NUMBA_KERNELS if USING_NUMBA else NUMPY_KERNELS


def transfer_apply(maps, values, phi_idx, g_idx, mask):
    return _ACTIVE["transfer_apply"](
        np.ascontiguousarray(maps, dtype=np.float64),
        np.ascontiguousarray(values, dtype=np.float64),
        phi_idx, g_idx, mask,
    )


def pairwise_max(values, words, theta, kind, d):
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.shape[0] < 2:
        return 0.0
    return float(_ACTIVE["pairwise_max"](values, np.ascontiguousarray(words, dtype=np.int64),
                                         float(theta), int(kind), int(d)))


def markov_sample(u, cum_pi, cum_m):
    return _ACTIVE["markov_sample"](
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(cum_pi, dtype=np.float64),
        np.ascontiguousarray(cum_m, dtype=np.float64),
    )
