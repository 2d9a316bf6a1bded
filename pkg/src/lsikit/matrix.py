"""Dense/sparse matrix values and the numerical kernels used everywhere else.

Dense matrices are plain float64 ``numpy.ndarray`` objects in row-major
order.  Sparse matrices are immutable coordinate-triplet values
(:class:`SparseMatrix`).  The eigen and SVD paths share one algorithmic
core: cyclic Jacobi plane rotations, applied two-sided to a symmetric
matrix for eigenpairs and one-sided to the columns of a rectangular
matrix for singular triplets (which is the same rotation sequence the
implicit Gram matrix would receive, without squaring the condition
number).  Rotations are scheduled round-robin so that each round touches
disjoint index pairs and can be applied as one vectorized block; the
schedule is fixed, so results are deterministic.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

EPS = np.finfo(float).eps

_MAX_SWEEPS = 60
_NMF_GUARD = 1e-9
_ORTHO_TOL = 1e-8


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable sparse matrix in coordinate form.

    Triplets hold only nonzero, finite values; duplicate (row, col)
    pairs are rejected.  Arrays are locked after construction so values
    can be shared freely across threads.
    """

    rows: int
    cols: int
    row: np.ndarray
    col: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        row = np.ascontiguousarray(self.row, dtype=np.int64)
        col = np.ascontiguousarray(self.col, dtype=np.int64)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if not (row.shape == col.shape == data.shape) or row.ndim != 1:
            raise ValueError("row, col and data must be 1-D arrays of equal length")
        if row.size:
            if row.min() < 0 or row.max() >= self.rows:
                raise ValueError("row index out of range")
            if col.min() < 0 or col.max() >= self.cols:
                raise ValueError("column index out of range")
            if not np.all(np.isfinite(data)):
                raise ValueError("matrix entries must be finite")
            if np.any(data == 0.0):
                raise ValueError("explicit zeros are not stored; drop them first")
            flat = row * self.cols + col
            if np.unique(flat).size != flat.size:
                raise ValueError("duplicate (row, col) triplets")
        for arr, name in ((row, "row"), (col, "col"), (data, "data")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        r, c = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], r, c, a[r, c])

    @classmethod
    def from_scipy(cls, m) -> "SparseMatrix":
        coo = m.tocoo()
        coo.sum_duplicates()
        coo.eliminate_zeros()
        return cls(coo.shape[0], coo.shape[1], coo.row, coo.col, coo.data)

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        out[self.row, self.col] = self.data
        return out

    def tocsr(self):
        from scipy.sparse import csr_matrix

        return csr_matrix(
            (self.data, (self.row, self.col)), shape=(self.rows, self.cols)
        )


def as_dense(m) -> np.ndarray:
    """Return a float64 2-D array view/copy of a dense or sparse matrix."""
    if isinstance(m, SparseMatrix):
        return m.toarray()
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return a


@dataclass(frozen=True)
class SvdFactors:
    """Truncated singular triplets: ``left`` (MxK), ``values`` (K), ``right`` (NxK)."""

    left: np.ndarray
    values: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.asarray(self.left, dtype=float)
        values = np.asarray(self.values, dtype=float)
        right = np.asarray(self.right, dtype=float)
        k = values.shape[0]
        if left.ndim != 2 or right.ndim != 2 or left.shape[1] != k or right.shape[1] != k:
            raise ValueError("factor shapes inconsistent with the number of values")
        if np.any(values < 0):
            raise ValueError("singular values must be nonnegative")
        if np.any(np.diff(values) > 0):
            raise ValueError("singular values must be non-increasing")
        for name, f in (("left", left), ("right", right)):
            dev = np.abs(f.T @ f - np.eye(k)).max() if k else 0.0
            if dev > _ORTHO_TOL:
                raise ValueError(f"{name} factor is not column-orthonormal (max deviation {dev:.2e})")
        for name, arr in (("left", left), ("right", right), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def rank(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class EigenPairs:
    """Leading eigenvalues (non-increasing) with orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        vectors = np.asarray(self.vectors, dtype=float)
        k = values.shape[0]
        if vectors.ndim != 2 or vectors.shape[1] != k:
            raise ValueError("vector count does not match value count")
        if np.any(np.diff(values) > 0):
            raise ValueError("eigenvalues must be non-increasing")
        dev = np.abs(vectors.T @ vectors - np.eye(k)).max() if k else 0.0
        if dev > _ORTHO_TOL:
            raise ValueError(f"eigenvectors not orthonormal (max deviation {dev:.2e})")
        for name, arr in (("values", values), ("vectors", vectors)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


# ---------------------------------------------------------------------------
# norms


def frobenius_norm(m) -> float:
    """Square root of the sum of squared entries."""
    if isinstance(m, SparseMatrix):
        return float(np.sqrt(np.sum(m.data * m.data)))
    return float(np.sqrt(np.sum(np.square(np.asarray(m, dtype=float)))))


# ---------------------------------------------------------------------------
# Jacobi rotation core


@functools.lru_cache(maxsize=128)
def _round_robin_schedule(n):
    # Classic tournament schedule: n-1 rounds (n even) of disjoint pairs,
    # covering every pair exactly once per sweep.
    m = n if n % 2 == 0 else n + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotation_coeffs(app, aqq, apq):
    # Stable Jacobi angles: tan of the smaller rotation angle that
    # annihilates the off-diagonal entry apq.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        theta = (aqq - app) / (2.0 * apq)
        t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        t = np.where(np.abs(theta) > 1e8, 1.0 / (2.0 * theta), t)
    t = np.where(theta == 0.0, 1.0, t)
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def _jacobi_eigh(h, max_sweeps=_MAX_SWEEPS):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns unordered eigenvalues and the accumulated orthogonal matrix.
    Pairs are skipped once their off-diagonal entry is negligible
    relative to the local diagonal, which preserves high relative
    accuracy for small eigenvalues.
    """
    a = np.array(h, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n <= 1:
        return np.diagonal(a).copy(), v
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = a - np.diag(np.diagonal(a))
        if np.linalg.norm(off) <= n * EPS * norm:
            break
        rotated = False
        for ps, qs in _round_robin_schedule(n):
            app = a[ps, ps]
            aqq = a[qs, qs]
            apq = a[ps, qs]
            active = np.abs(apq) > EPS * np.sqrt(np.abs(app * aqq))
            if not np.any(active):
                continue
            rotated = True
            ps, qs = ps[active], qs[active]
            c, s = _rotation_coeffs(app[active], aqq[active], apq[active])
            # A <- J^T A J, J a direct sum of disjoint plane rotations.
            ap, aq = a[:, ps].copy(), a[:, qs].copy()
            a[:, ps] = c * ap - s * aq
            a[:, qs] = s * ap + c * aq
            ap, aq = a[ps, :].copy(), a[qs, :].copy()
            a[ps, :] = c[:, None] * ap - s[:, None] * aq
            a[qs, :] = s[:, None] * ap + c[:, None] * aq
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
            vp, vq = v[:, ps].copy(), v[:, qs].copy()
            v[:, ps] = c * vp - s * vq
            v[:, qs] = s * vp + c * vq
        if not rotated:
            break
    return np.diagonal(a).copy(), v


def _hestenes_svd(a, max_sweeps=_MAX_SWEEPS):
    """One-sided Jacobi SVD of ``a`` with at most as many columns as rows.

    Columns are rotated to mutual orthogonality; the rotation angles are
    exactly the Jacobi angles of the implicit Gram matrix.  Returns the
    working matrix (columns = singular values times left vectors) and
    the accumulated right-rotation matrix, both unordered.
    """
    w = np.array(a, dtype=float)
    n = w.shape[1]
    v = np.eye(n)
    if n <= 1:
        return w, v
    for _ in range(max_sweeps):
        rotated = False
        for ps, qs in _round_robin_schedule(n):
            wp = w[:, ps]
            wq = w[:, qs]
            app = np.einsum("ij,ij->j", wp, wp)
            aqq = np.einsum("ij,ij->j", wq, wq)
            apq = np.einsum("ij,ij->j", wp, wq)
            active = np.abs(apq) > EPS * np.sqrt(app * aqq)
            if not np.any(active):
                continue
            rotated = True
            ps, qs = ps[active], qs[active]
            c, s = _rotation_coeffs(app[active], aqq[active], apq[active])
            wp, wq = w[:, ps].copy(), w[:, qs].copy()
            w[:, ps] = c * wp - s * wq
            w[:, qs] = s * wp + c * wq
            vp, vq = v[:, ps].copy(), v[:, qs].copy()
            v[:, ps] = c * vp - s * vq
            v[:, qs] = s * vp + c * vq
        if not rotated:
            break
    return w, v


def _sign_fix(vectors):
    """Flip column signs so each column's largest-magnitude entry is positive.

    Ties in magnitude resolve to the lowest row index (argmax convention).
    Returns the flipped copy and the applied signs.
    """
    out = np.array(vectors, dtype=float)
    signs = np.ones(out.shape[1])
    for j in range(out.shape[1]):
        col = out[:, j]
        if col.size == 0:
            continue
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            out[:, j] = -col
            signs[j] = -1.0
    return out, signs


def _orthonormal_complement_column(existing, dim):
    # Deterministic Gram-Schmidt completion against coordinate axes.
    for cand in range(dim):
        e = np.zeros(dim)
        e[cand] = 1.0
        for i in range(existing.shape[1]):
            e -= (existing[:, i] @ e) * existing[:, i]
        e_norm = np.linalg.norm(e)
        if e_norm > 0.5:
            return e / e_norm
    raise ValueError("cannot extend orthonormal basis")


# ---------------------------------------------------------------------------
# public operations


def symmetric_eigen_topk(h, k: int) -> EigenPairs:
    """Top-k algebraically largest eigenpairs of a symmetric matrix.

    Eigenvalues are sorted non-increasing with ties resolved by
    ascending original position; each eigenvector's largest-magnitude
    component is made positive, so the output is fully deterministic.

    Raises ``ValueError`` for non-square or asymmetric input (the
    report includes the worst offending entry) and for k out of range.
    """
    a = as_dense(h)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: shape {a.shape}")
    asym = np.abs(a - a.T)
    worst = float(asym.max()) if n else 0.0
    scale = max(float(np.abs(a).max()) if n else 0.0, 1.0)
    if worst > 1e-10 * scale:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise ValueError(
            f"matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {worst:.3e}"
        )
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    values, vectors = _jacobi_eigh(a)
    order = np.argsort(-values, kind="stable")
    values = values[order][:k]
    vectors, _ = _sign_fix(vectors[:, order][:, :k])
    return EigenPairs(values, vectors)


def truncated_svd(a, k: int) -> SvdFactors:
    """Leading-k singular triplets of a dense or sparse real matrix.

    Signs follow the convention of :func:`symmetric_eigen_topk` applied
    to the right singular vectors, with the left vectors flipped in
    step.  Singular values below max(M, N) * eps * sigma_max are
    treated as zero and their left vectors completed orthonormally.
    """
    dense = as_dense(a)
    m, n = dense.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k={k} out of range [1, {min(m, n)}]")
    transposed = m < n
    work = dense.T if transposed else dense
    w, v = _hestenes_svd(work)
    sig = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-sig, kind="stable")
    sig = sig[order][:k]
    w = w[:, order][:, :k]
    v = v[:, order][:, :k]
    cutoff = max(m, n) * EPS * (float(sig[0]) if sig.size else 0.0)
    u = np.zeros_like(w)
    for j in range(k):
        if sig[j] > cutoff:
            u[:, j] = w[:, j] / sig[j]
        else:
            sig[j] = 0.0
            u[:, j] = _orthonormal_complement_column(u[:, :j], u.shape[0])
    if transposed:
        u, v = v, u
    v, signs = _sign_fix(v)
    u = u * signs
    return SvdFactors(u, sig, v)


def rank_k_reconstruct(f: SvdFactors) -> np.ndarray:
    """Product of the truncated factors, the best rank-k approximation."""
    if f.left.shape[1] != f.rank or f.right.shape[1] != f.rank:
        raise ValueError("factor shapes inconsistent")
    return (f.left * f.values) @ f.right.T


def _nmf_init(m, n, k, seed):
    rng = np.random.default_rng(seed)
    # uniform in (0, 1]: multiplicative updates must never start at zero
    return 1.0 - rng.random((m, k)), 1.0 - rng.random((k, n))


def _nmf_step(a, b, c):
    c *= (b.T @ a) / (b.T @ b @ c + _NMF_GUARD)
    b *= (a @ c.T) / (b @ (c @ c.T) + _NMF_GUARD)
    return b, c


def nmf_factorize(a, k: int, iterations: int, seed: int):
    """Nonnegative factorization A ~ B C by multiplicative updates.

    Both factors stay entrywise nonnegative and the Frobenius
    reconstruction error is non-increasing across iterations.  Fixed
    seed gives bitwise-identical factors.

    Returns ``(basis, coefficients)`` of shapes (M, k) and (k, N).
    """
    dense = as_dense(a)
    if np.any(dense < 0):
        raise ValueError("input must be nonnegative")
    if k < 1:
        raise ValueError("k must be at least 1")
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    b, c = _nmf_init(dense.shape[0], dense.shape[1], k, seed)
    for _ in range(iterations):
        b, c = _nmf_step(dense, b, c)
    return b, c


def nmf_objective_trace(a, k: int, iterations: int, seed: int) -> np.ndarray:
    """Frobenius error after each multiplicative update, same run as
    :func:`nmf_factorize` with identical arguments."""
    dense = as_dense(a)
    if np.any(dense < 0):
        raise ValueError("input must be nonnegative")
    b, c = _nmf_init(dense.shape[0], dense.shape[1], k, seed)
    errors = np.empty(iterations)
    for i in range(iterations):
        b, c = _nmf_step(dense, b, c)
        errors[i] = np.linalg.norm(dense - b @ c)
    return errors


# ---------------------------------------------------------------------------
# k-means


def _squared_distances(x, centers):
    # |x - c|^2 via expansion; clip tiny negatives from cancellation
    d2 = (
        np.einsum("ij,ij->i", x, x)[:, None]
        - 2.0 * (x @ centers.T)
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(x, k, rng):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.einsum("ij,ij->i", x - x[chosen[0]], x - x[chosen[0]])
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            # remaining mass is zero (duplicate points): take the lowest
            # index not yet chosen, deterministically
            taken = set(chosen)
            nxt = next(i for i in range(n) if i not in taken)
        else:
            r = rng.random() * total
            nxt = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            nxt = min(nxt, n - 1)
            if d2[nxt] == 0.0:
                nxt = int(np.argmax(d2))
        chosen.append(nxt)
        step = np.einsum("ij,ij->i", x - x[nxt], x - x[nxt])
        d2 = np.minimum(d2, step)
    return x[chosen].copy()


def _lloyd(x, centers, max_iter=300):
    """One k-means run.  Returns (labels, inertia, per-iteration inertia)."""
    n, k = x.shape[0], centers.shape[0]
    labels = None
    history = []
    for _ in range(max_iter):
        d2 = _squared_distances(x, centers)
        new_labels = np.argmin(d2, axis=1)
        counts = np.bincount(new_labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            # move the point farthest from its centroid, never emptying
            # another cluster
            own = d2[np.arange(n), new_labels]
            eligible = counts[new_labels] > 1
            if not np.any(eligible):
                break
            far = int(np.argmax(np.where(eligible, own, -np.inf)))
            counts[new_labels[far]] -= 1
            new_labels[far] = empty
            counts[empty] = 1
        history.append(float(d2[np.arange(n), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums = np.zeros((k, x.shape[1]))
        np.add.at(sums, labels, x)
        counts = np.maximum(np.bincount(labels, minlength=k), 1)
        centers = sums / counts[:, None]
    inertia = float(
        _squared_distances(x, centers)[np.arange(n), labels].sum()
    )
    return labels, inertia, history


def kmeans(points, k: int, seed: int, restarts: int = 10) -> np.ndarray:
    """Best-of-``restarts`` k-means labels, k-means++ seeded, deterministic.

    Points are the rows of ``points``.  The run with the lowest
    within-cluster sum of squared distances wins; ties keep the
    earliest restart.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ValueError("points must be a 2-D array with rows as points")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_init(x, k, rng)
        labels, inertia, _ = _lloyd(x, centers)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels.astype(np.int64)
