"""Compressed-column sparse matrices, complex sparse LU and Matrix Market I/O.

The LU is a left-looking (Gilbert-Peierls style) factorization with partial
pivoting by maximum modulus inside the active column.  Factors are stored
column by column so that triangular solves cost one numpy update per column,
for any number of right-hand sides at once.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, MatrixMarketError, SingularShift, StructuralError

PIVOT_RTOL = 1e-14


class SparseMatrix:
    """Square matrix in compressed sparse column (CSC) storage.

    ``colptr[j]:colptr[j+1]`` indexes the entries of column ``j`` inside
    ``rowind`` / ``values``; row indices are sorted within each column and
    unique.
    """

    __slots__ = ("order", "colptr", "rowind", "values")

    def __init__(self, order, colptr, rowind, values):
        self.order = int(order)
        self.colptr = np.asarray(colptr, dtype=np.int64)
        self.rowind = np.asarray(rowind, dtype=np.int64)
        self.values = np.asarray(values)
        if self.order < 1:
            raise StructuralError("order must be positive")
        if self.colptr.shape != (self.order + 1,) or self.colptr[0] != 0:
            raise StructuralError("column pointer array has wrong shape")
        if np.any(np.diff(self.colptr) < 0):
            raise StructuralError("column pointers must be monotone")
        if self.colptr[-1] != self.rowind.size or self.rowind.size != self.values.size:
            raise StructuralError("index and value arrays disagree in length")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_triplets(cls, triplets, order, dtype=None):
        """Assemble from ``(row, col, value)`` triplets, summing duplicates."""
        triplets = list(triplets)
        if triplets:
            rows, cols, vals = zip(*triplets)
        else:
            rows, cols, vals = (), (), ()
        return cls.from_arrays(rows, cols, vals, order, dtype=dtype)

    @classmethod
    def from_arrays(cls, rows, cols, vals, order, dtype=None):
        order = int(order)
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if dtype is None:
            dtype = np.result_type(np.asarray(vals).dtype, np.float64)
        vals = np.asarray(vals, dtype=dtype).ravel()
        if not (rows.size == cols.size == vals.size):
            raise StructuralError("triplet arrays must have equal length")
        bad = (rows < 0) | (rows >= order) | (cols < 0) | (cols >= order)
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise StructuralError(
                f"entry ({rows[k]}, {cols[k]}) out of range for order {order}"
            )
        key = cols * order + rows
        uniq, inverse = np.unique(key, return_inverse=True)
        summed = np.zeros(uniq.size, dtype=dtype)
        np.add.at(summed, inverse, vals)
        ucols = uniq // order
        urows = uniq % order
        colptr = np.zeros(order + 1, dtype=np.int64)
        np.add.at(colptr, ucols + 1, 1)
        return cls(order, np.cumsum(colptr), urows, summed)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise StructuralError("dense input must be square")
        cols, rows = np.nonzero(a.T)
        return cls.from_arrays(rows, cols, a[rows, cols], a.shape[0], dtype=a.dtype)

    @classmethod
    def identity(cls, order, dtype=float):
        idx = np.arange(order)
        return cls.from_arrays(idx, idx, np.ones(order, dtype=dtype), order, dtype=dtype)

    # -- views ------------------------------------------------------------

    @property
    def nnz(self):
        return int(self.rowind.size)

    @property
    def dtype(self):
        return self.values.dtype

    @property
    def shape(self):
        return (self.order, self.order)

    def column_indices(self):
        return np.repeat(np.arange(self.order), np.diff(self.colptr))

    def triplets(self):
        """Canonical (column-major, row-sorted) list of ``(row, col, value)``."""
        cols = self.column_indices()
        return [(int(i), int(j), v.item()) for i, j, v in zip(self.rowind, cols, self.values)]

    def column(self, j):
        lo, hi = self.colptr[j], self.colptr[j + 1]
        return self.rowind[lo:hi], self.values[lo:hi]

    def toarray(self):
        out = np.zeros((self.order, self.order), dtype=self.dtype)
        out[self.rowind, self.column_indices()] = self.values
        return out

    def astype(self, dtype):
        return SparseMatrix(self.order, self.colptr, self.rowind, self.values.astype(dtype))

    def max_abs(self):
        return float(np.max(np.abs(self.values))) if self.nnz else 0.0

    def submatrix(self, rows, cols):
        """Extract ``A[rows][:, cols]`` (index arrays, order preserved)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size != cols.size:
            raise StructuralError("submatrix must be square")
        rmap = np.full(self.order, -1, dtype=np.int64)
        rmap[rows] = np.arange(rows.size)
        allcols = self.column_indices()
        cmap = np.full(self.order, -1, dtype=np.int64)
        cmap[cols] = np.arange(cols.size)
        keep = (rmap[self.rowind] >= 0) & (cmap[allcols] >= 0)
        return SparseMatrix.from_arrays(
            rmap[self.rowind[keep]], cmap[allcols[keep]], self.values[keep],
            rows.size, dtype=self.dtype,
        )

    def add_diagonal(self, diag):
        """Return ``A + diag(d)``; the pattern gains every nonzero diagonal slot."""
        diag = np.asarray(diag)
        if diag.shape != (self.order,):
            raise DimensionError(f"diagonal length {diag.shape} != order {self.order}")
        idx = np.flatnonzero(diag)
        rows = np.concatenate([self.rowind, idx])
        cols = np.concatenate([self.column_indices(), idx])
        dtype = np.result_type(self.dtype, diag.dtype)
        vals = np.concatenate([self.values.astype(dtype), diag[idx].astype(dtype)])
        return SparseMatrix.from_arrays(rows, cols, vals, self.order, dtype=dtype)

    def matvec(self, x):
        """``A @ x`` for a vector or an ``order x k`` block."""
        x = np.asarray(x)
        if x.shape[0] != self.order:
            raise DimensionError(f"vector length {x.shape[0]} != order {self.order}")
        cols = self.column_indices()
        dtype = np.result_type(self.dtype, x.dtype)
        out = np.zeros(x.shape, dtype=dtype)
        contrib = self.values.reshape((-1,) + (1,) * (x.ndim - 1)) * x[cols]
        np.add.at(out, self.rowind, contrib)
        return out

    __matmul__ = matvec

    def __repr__(self):
        return f"SparseMatrix(order={self.order}, nnz={self.nnz}, dtype={self.dtype})"


def from_triplets(triplets, order):
    return SparseMatrix.from_triplets(triplets, order)


def matvec(a, x):
    return a.matvec(x)


# ---------------------------------------------------------------------------
# LU factorization
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ShiftedFactorization:
    """Immutable factorization ``P A Q = L U`` of a complex sparse matrix.

    ``perm_r[k]`` is the original row placed at position ``k``; ``perm_c[k]``
    likewise for columns.  ``L`` has a unit diagonal (not stored).  Each
    column of the factors is kept as ``(rows, values)`` in permuted row
    numbering.
    """

    order: int
    shift: complex
    perm_r: np.ndarray
    perm_c: np.ndarray
    l_cols: tuple
    u_cols: tuple
    u_diag: np.ndarray
    pivot_growth: float
    solve_count: list = field(default_factory=lambda: [0], repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def nnz(self):
        return int(sum(r.size for r, _ in self.l_cols) + sum(r.size for r, _ in self.u_cols)) + self.order

    def lower(self):
        out = np.eye(self.order, dtype=complex)
        for j, (rows, vals) in enumerate(self.l_cols):
            out[rows, j] = vals
        return out

    def upper(self):
        out = np.diag(self.u_diag).astype(complex)
        for j, (rows, vals) in enumerate(self.u_cols):
            out[rows, j] = vals
        return out

    def solve(self, b):
        """Solve ``A x = b``; ``b`` may be a vector or an ``order x k`` block.

        Each right-hand-side column counts as one triangular solve pair.
        """
        b = np.asarray(b)
        if b.shape[0] != self.order:
            raise DimensionError(f"right-hand side length {b.shape[0]} != order {self.order}")
        x = self._substitute(b)
        with self._lock:
            self.solve_count[0] += 1 if b.ndim == 1 else b.shape[1]
        return x

    def _substitute(self, b):
        y = b[self.perm_r].astype(complex, copy=True)
        for j, (rows, vals) in enumerate(self.l_cols):
            if rows.size:
                yj = y[j]
                if np.any(yj):
                    y[rows] -= np.multiply.outer(vals, yj) if y.ndim > 1 else vals * yj
        for j in range(self.order - 1, -1, -1):
            y[j] /= self.u_diag[j]
            rows, vals = self.u_cols[j]
            if rows.size:
                yj = y[j]
                y[rows] -= np.multiply.outer(vals, yj) if y.ndim > 1 else vals * yj
        x = np.empty_like(y)
        x[self.perm_c] = y
        return x

    def smallest_singular_estimate(self, steps=2):
        """Upper estimate of ``sigma_min(A)`` from a few inverse-iteration steps.

        Uses a fixed pseudo-random start, so the result is deterministic.
        Does not touch the solve counter.
        """
        n = self.order
        x = np.random.default_rng(n).standard_normal(n).astype(complex)
        x /= np.linalg.norm(x)
        est = np.inf
        with np.errstate(all="ignore"):
            for _ in range(steps):
                y = self._substitute(x)
                ny = np.linalg.norm(y)
                if not np.isfinite(ny) or ny == 0:
                    return 0.0
                est = 1.0 / ny
                x = y / ny
        return float(est)

    @property
    def solves(self):
        return self.solve_count[0]


def minimum_degree_order(a):
    """Greedy minimum-degree column order on the pattern of ``A + A^T``.

    Plain elimination-graph version; adequate at desk scale.
    """
    n = a.order
    adj = [set() for _ in range(n)]
    cols = a.column_indices()
    for i, j in zip(a.rowind.tolist(), cols.tolist()):
        if i != j:
            adj[i].add(j)
            adj[j].add(i)
    alive = set(range(n))
    order = []
    while alive:
        v = min(alive, key=lambda k: (len(adj[k]), k))
        nbrs = adj[v]
        for u in nbrs:
            adj[u].discard(v)
            adj[u] |= nbrs - {u}
        alive.remove(v)
        adj[v] = set()
        order.append(v)
    return np.asarray(order, dtype=np.int64)


def factorize(a, shift=0j, ordering=None):
    """Complex LU with partial pivoting: ``P A Q = L U``.

    ``ordering`` is ``None`` (natural column order) or ``"mindegree"``.
    Raises :class:`SingularShift` when a pivot falls below
    ``1e-14`` times the largest magnitude of the corresponding original
    column, or when an inverse-iteration estimate of the smallest singular
    value falls below ``1e-14`` times the Frobenius norm of ``A``.
    """
    n = a.order
    if ordering is None:
        perm_c = np.arange(n, dtype=np.int64)
    elif ordering == "mindegree":
        perm_c = minimum_degree_order(a)
    else:
        raise ValueError(f"unknown ordering {ordering!r}")

    pinv = np.full(n, -1, dtype=np.int64)  # original row -> pivot position
    prow = np.empty(n, dtype=np.int64)  # pivot position -> original row
    l_raw = []
    u_cols = []
    u_diag = np.empty(n, dtype=complex)
    x = np.zeros(n, dtype=complex)
    amax = a.max_abs() or 1.0
    umax = 0.0

    for j in range(n):
        rows, vals = a.column(perm_c[j])
        x[:] = 0
        x[rows] = vals
        colmax = float(np.max(np.abs(vals))) if vals.size else 0.0
        # columns k < j of L, in pivot order, form a valid topological order
        for k in range(j):
            xk = x[prow[k]]
            if xk != 0:
                lr, lv = l_raw[k]
                if lr.size:
                    x[lr] -= lv * xk
        nz = np.flatnonzero(x)
        piv_mask = pinv[nz] >= 0
        urows_orig = nz[piv_mask]
        cand = nz[~piv_mask]
        if cand.size == 0:
            raise SingularShift(shift, f"no nonzero pivot candidate at column {j}")
        mags = np.abs(x[cand])
        best = int(np.argmax(mags))
        pivot_row = int(cand[best])
        pivot = x[pivot_row]
        if abs(pivot) <= PIVOT_RTOL * colmax or colmax == 0.0:
            raise SingularShift(shift, f"pivot {abs(pivot):.3e} at column {j}")
        pinv[pivot_row] = j
        prow[j] = pivot_row
        u_diag[j] = pivot
        u_cols.append((pinv[urows_orig], x[urows_orig].copy()))
        lrows = np.delete(cand, best)
        l_raw.append((lrows, x[lrows] / pivot))
        umax = max(umax, abs(pivot), float(np.max(np.abs(x[urows_orig]))) if urows_orig.size else 0.0)

    l_cols = tuple((pinv[r], v) for r, v in l_raw)
    fact = ShiftedFactorization(
        order=n,
        shift=complex(shift),
        perm_r=prow.copy(),
        perm_c=perm_c,
        l_cols=l_cols,
        u_cols=tuple(u_cols),
        u_diag=u_diag,
        pivot_growth=umax / amax,
    )
    # partial pivoting is not rank revealing: a near-singular matrix can
    # keep every pivot large, so also test an estimate of sigma_min
    fro = float(np.linalg.norm(a.values))
    if fact.smallest_singular_estimate() <= PIVOT_RTOL * fro:
        raise SingularShift(shift, "smallest singular value estimate below threshold")
    return fact


def solve(fact, b):
    return fact.solve(b)


# ---------------------------------------------------------------------------
# Matrix Market
# ---------------------------------------------------------------------------

_MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def write_matrix_market(a, path):
    """Write a real matrix in coordinate format, 1-based, 17 significant digits."""
    if np.iscomplexobj(a.values) and np.any(a.values.imag != 0):
        raise MatrixMarketError("only real matrices can be written", 0)
    trip = a.triplets()
    lines = [_MM_HEADER, f"{a.order} {a.order} {len(trip)}"]
    lines += [f"{i + 1} {j + 1} {float(np.real(v)):.17g}" for i, j, v in trip]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_market(path):
    """Read a ``coordinate real general`` Matrix Market file into a SparseMatrix."""
    path = Path(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    head = lines[0].split()
    if (
        len(head) != 5
        or head[0] != "%%MatrixMarket"
        or [h.lower() for h in head[1:]] != ["matrix", "coordinate", "real", "general"]
    ):
        raise MatrixMarketError(f"unsupported header {lines[0]!r}", 1)
    lineno = 1
    size = None
    rows, cols, vals = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if size is None:
            if len(parts) != 3:
                raise MatrixMarketError(f"bad size line {s!r}", lineno)
            try:
                nr, nc, nnz = (int(p) for p in parts)
            except ValueError:
                raise MatrixMarketError(f"bad size line {s!r}", lineno) from None
            if nr != nc or nr < 1 or nnz < 0:
                raise MatrixMarketError(f"matrix must be square, got {nr}x{nc}", lineno)
            size = (nr, nnz)
            continue
        if len(parts) != 3:
            raise MatrixMarketError(f"bad entry {s!r}", lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"bad entry {s!r}", lineno) from None
        if not (1 <= i <= size[0] and 1 <= j <= size[0]):
            raise MatrixMarketError(f"index ({i}, {j}) out of range", lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    if size is None:
        raise MatrixMarketError("missing size line", lineno)
    if len(vals) != size[1]:
        raise MatrixMarketError(f"expected {size[1]} entries, found {len(vals)}", lineno)
    return SparseMatrix.from_arrays(rows, cols, np.asarray(vals, dtype=float), size[0])
