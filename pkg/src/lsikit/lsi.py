"""Similarity-driven matrix completion for latent semantic indexing.

A word-pair cosine similarity matrix is built once from the initial
term-document matrix.  Each completion step then raises every entry to
the best similarity-weighted entry in its column, reading only the
previous iteration's matrix (snapshot semantics).  Entries are monotone
non-decreasing and bounded by their column maxima, so iteration reaches
a unique fixpoint; convergence is declared only after the matrix stays
bitwise unchanged for a configurable window of consecutive iterations,
because norm-based stopping can be fooled by updates too small to move
the Frobenius norm in floating point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse as sp

from .matrix import SparseMatrix, as_dense, frobenius_norm

PERFECT_SIMILARITY = 1.0 - 1e-12


@dataclass(frozen=True)
class SimilarityMatrix:
    """Sparse symmetric word-pair cosines in [0, 1], zero diagonal.

    Rows with no nonzero entries have zero similarity to everything and
    are listed in ``zero_rows``.
    """

    dim: int
    matrix: sp.csr_matrix
    zero_rows: tuple = ()

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.dim, self.dim):
            raise ValueError("similarity matrix shape mismatch")
        if (m != m.T).nnz != 0:
            raise ValueError("similarity matrix must be exactly symmetric")
        if m.nnz:
            if m.data.min() < 0 or m.data.max() > 1.0 + 1e-12:
                raise ValueError("similarities must lie in [0, 1]")
        if np.any(m.diagonal() != 0):
            raise ValueError("diagonal must not be stored")

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)


@dataclass(frozen=True)
class CompletionTrace:
    """Per-iteration Frobenius norms plus convergence bookkeeping.

    ``norms[n]`` is the norm after n update steps (index 0 = input).
    ``conviter`` is the first iteration of the final stable run: the
    smallest n with A(n) == A(n-1) and no later change.  When the
    iteration cap is hit before stability, ``converged`` is False and
    ``conviter`` reports the cap.  ``ps_percent`` is the percentage of
    word pairs with perfect similarity.
    """

    norms: tuple
    conviter: int
    converged: bool
    ps_percent: float

    def __post_init__(self):
        if np.any(np.diff(self.norms) < 0):
            raise ValueError("completion norms must be non-decreasing")


def word_similarity(a) -> SimilarityMatrix:
    """Cosine similarity of every row pair of a nonnegative matrix.

    Pairs with no shared support are exact zeros and are not stored.
    Zero rows are flagged (with a warning) rather than rejected; their
    similarities are defined as zero.
    """
    if isinstance(a, SparseMatrix):
        csr = a.tocsr()
    else:
        csr = sp.csr_matrix(as_dense(a))
    if csr.nnz and csr.data.min() < 0:
        raise ValueError("input must be nonnegative")
    norms = np.sqrt(np.asarray(csr.multiply(csr).sum(axis=1)).ravel())
    zero_rows = tuple(int(i) for i in np.flatnonzero(norms == 0))
    if zero_rows:
        warnings.warn(
            f"{len(zero_rows)} zero rows have zero similarity to all rows",
            stacklevel=2,
        )
    inv = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    unit = sp.diags(inv) @ csr
    gram = (unit @ unit.T).tocsr()
    upper = sp.triu(gram, k=1).tocsr()
    upper.data = np.clip(upper.data, 0.0, 1.0)
    upper.eliminate_zeros()
    full = (upper + upper.T).tocsr()
    full.sort_indices()
    return SimilarityMatrix(csr.shape[0], full, zero_rows)


def completion_step(current, s: SimilarityMatrix) -> np.ndarray:
    """One snapshot update: out[i, j] = max(cur[i, j], max_k s[i, k] * cur[k, j]).

    Every update reads the input matrix only, so the result is
    independent of evaluation order; the output dominates the input
    entrywise.  Work is done only where similarities are stored.
    """
    cur = as_dense(current)
    if cur.shape[0] != s.dim:
        raise ValueError(
            f"matrix has {cur.shape[0]} rows but similarity is over {s.dim} words"
        )
    out = cur.copy()
    indptr, indices, data = s.matrix.indptr, s.matrix.indices, s.matrix.data
    for i in range(s.dim):
        lo, hi = indptr[i], indptr[i + 1]
        if lo == hi:
            continue
        candidates = data[lo:hi, None] * cur[indices[lo:hi], :]
        np.maximum(out[i], candidates.max(axis=0), out=out[i])
    return out


def complete(initial, maxiter: int = 100, stable_window: int = 3):
    """Iterate :func:`completion_step` to the fixpoint.

    Stops once the matrix is bitwise unchanged for ``stable_window``
    consecutive iterations, or at ``maxiter``.  Returns the completed
    dense matrix and a :class:`CompletionTrace`.
    """
    if maxiter < 1:
        raise ValueError("maxiter must be at least 1")
    if stable_window < 1:
        raise ValueError("stable_window must be at least 1")
    a = as_dense(initial).copy()
    if a.size and a.min() < 0:
        raise ValueError("input must be nonnegative")
    sim = word_similarity(initial)
    ps = perfect_pair_percentage(sim)
    norms = [frobenius_norm(a)]
    stable = 0
    first_stable = None
    converged = False
    for n in range(1, maxiter + 1):
        nxt = completion_step(a, sim)
        norms.append(frobenius_norm(nxt))
        if np.array_equal(nxt, a):
            if stable == 0:
                first_stable = n
            stable += 1
            if stable >= stable_window:
                converged = True
                break
        else:
            stable = 0
            first_stable = None
            a = nxt
    conviter = first_stable if first_stable is not None else maxiter
    return a, CompletionTrace(tuple(norms), conviter, converged, ps)


def perfect_pair_percentage(s: SimilarityMatrix) -> float:
    """Percentage of unordered word pairs whose cosine is (numerically) 1."""
    total = s.dim * (s.dim - 1) // 2
    if total == 0:
        return 0.0
    upper = sp.triu(s.matrix, k=1)
    perfect = int(np.count_nonzero(upper.data >= PERFECT_SIMILARITY))
    return 100.0 * perfect / total
