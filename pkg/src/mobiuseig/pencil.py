"""The pencil ``(J, L)`` with diagonal, singular ``L``."""

from __future__ import annotations

from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    DenseCapExceeded,
    DimensionError,
    LDiagFormatError,
    SingularJ4,
    SingularShift,
    StructuralError,
)
from .sparse_core import SparseMatrix, factorize

DENSE_CAP = 500


class Pencil:
    """Sparse real ``J`` together with the diagonal of ``L``.

    State coordinates are those with ``l_diag != 0``; the rest are
    algebraic.  They need not be contiguous.
    """

    def __init__(self, J, l_diag):
        l_diag = np.asarray(l_diag, dtype=float)
        if l_diag.shape != (J.order,):
            raise DimensionError(f"L diagonal has length {l_diag.size}, J has order {J.order}")
        self.J = J
        self.l_diag = l_diag
        self.l_diag.setflags(write=False)
        self.state_indices = np.flatnonzero(l_diag != 0)
        self.algebraic_indices = np.flatnonzero(l_diag == 0)
        if self.state_indices.size == 0:
            raise StructuralError("L must have at least one nonzero diagonal entry")

    @property
    def order(self):
        return self.J.order

    @property
    def n(self):
        return int(self.state_indices.size)

    @property
    def m(self):
        return int(self.algebraic_indices.size)

    def __repr__(self):
        return f"Pencil(n={self.n}, m={self.m}, nnz(J)={self.J.nnz})"

    @cached_property
    def _j4_checked(self):
        if self.m == 0:
            return True
        idx = self.algebraic_indices
        try:
            factorize(self.J.submatrix(idx, idx).astype(complex))
        except SingularShift as exc:
            raise SingularJ4(f"algebraic block J4 is singular: {exc}") from None
        return True

    def check_j4(self):
        """Raise :class:`SingularJ4` unless the algebraic block factorizes."""
        return self._j4_checked

    def assemble_shifted(self, a):
        """Return ``J - aL`` as a complex sparse matrix."""
        return self.J.astype(complex).add_diagonal(-complex(a) * self.l_diag.astype(complex))

    def apply_L(self, v):
        v = np.asarray(v)
        if v.shape[0] != self.order:
            raise DimensionError(f"vector length {v.shape[0]} != order {self.order}")
        d = self.l_diag.reshape((-1,) + (1,) * (v.ndim - 1))
        return d * v

    def project_state_space(self, v):
        """Zero the algebraic coordinates (copy)."""
        out = np.array(v, copy=True)
        out[self.algebraic_indices] = 0
        return out

    def dense_blocks(self, cap=DENSE_CAP):
        if self.order > cap:
            raise DenseCapExceeded(f"order {self.order} exceeds dense cap {cap}")
        Jd = self.J.toarray().astype(float)
        s, a = self.state_indices, self.algebraic_indices
        return Jd[np.ix_(s, s)], Jd[np.ix_(s, a)], Jd[np.ix_(a, s)], Jd[np.ix_(a, a)]

    def dense_state_matrix(self, cap=DENSE_CAP):
        """``D^-1 (J1 - J2 J4^-1 J3)``: its eigenvalues are the finite pencil eigenvalues."""
        J1, J2, J3, J4 = self.dense_blocks(cap)
        self.check_j4()
        A = J1 - J2 @ np.linalg.solve(J4, J3) if self.m else J1
        return A / self.l_diag[self.state_indices][:, None]

    def embed_state(self, x):
        """Place state-length vector(s) at ``state_indices``, zeros elsewhere."""
        x = np.asarray(x)
        out = np.zeros((self.order,) + x.shape[1:], dtype=np.result_type(x.dtype, float))
        out[self.state_indices] = x
        return out


def read_l_diag(path, order):
    """Parse the ``index value`` (1-based) L diagonal file."""
    path = Path(path)
    d = np.zeros(order)
    seen = set()
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith(("#", "%")):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise LDiagFormatError(f"expected 'index value', got {s!r}", lineno)
        try:
            i, v = int(parts[0]), float(parts[1])
        except ValueError:
            raise LDiagFormatError(f"expected 'index value', got {s!r}", lineno) from None
        if not 1 <= i <= order:
            raise LDiagFormatError(f"index {i} outside 1..{order}", lineno)
        if i in seen:
            raise LDiagFormatError(f"index {i} listed twice", lineno)
        seen.add(i)
        d[i - 1] = v
    return d


def write_l_diag(l_diag, path):
    lines = [f"{i + 1} {float(v):.17g}" for i, v in enumerate(l_diag) if v != 0]
    Path(path).write_text("\n".join(lines) + "\n")
