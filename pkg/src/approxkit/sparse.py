"""Symmetric sparse matrices, weighted graphs and dense reference oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseSymMatrix",
    "ShiftedOperator",
    "WeightedGraph",
    "walk_matrix_sym",
    "normalized_laplacian",
    "dense_expm_ref",
    "dense_solve_ref",
    "dense_eigs_ref",
    "ORACLE_CAP",
    "OracleCapError",
]

ORACLE_CAP = 500


def _as_vector(v, n: int, name: str = "v") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != n:
        raise ValueError(f"dimension mismatch: matrix has n={n}, {name} has shape {v.shape}")
    return v


class SparseSymMatrix:
    """Symmetric matrix stored as its upper triangle in CSR form.

    Each unordered pair ``{i, j}`` is stored once; ``matvec`` applies the
    stored triangle, its transpose and removes the doubly counted diagonal.
    ``scale`` multiplies every entry at matvec time, so ``t * A`` shares the
    storage of ``A``.
    """

    __slots__ = ("_upper", "_upper_t", "_diag", "n", "scale")

    def __init__(self, upper: sp.csr_matrix, scale: float = 1.0):
        upper = sp.csr_matrix(upper, dtype=float)
        if upper.shape[0] != upper.shape[1]:
            raise ValueError(f"matrix must be square, got shape {upper.shape}")
        if not math.isfinite(scale):
            raise ValueError("scale must be finite")
        upper = sp.triu(upper, format="csr")
        upper.sum_duplicates()
        upper.eliminate_zeros()
        upper.sort_indices()
        if not np.all(np.isfinite(upper.data)):
            raise ValueError("matrix entries must be finite")
        self._upper = upper
        self._upper_t = upper.T.tocsr()
        self._diag = upper.diagonal()
        self.n = upper.shape[0]
        self.scale = float(scale)

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseSymMatrix":
        """Build from coordinates; each unordered pair is given once, in either orientation.

        Repeated coordinates are summed.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols and vals must have equal length")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or max(rows.max(), cols.max()) >= n):
            raise ValueError(f"indices must lie in [0, {n})")
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        return cls(sp.csr_matrix((vals, (lo, hi)), shape=(n, n)))

    @classmethod
    def from_dense(cls, a, tol: float = 0.0) -> "SparseSymMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dense input must be a square matrix")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        if np.max(np.abs(a - a.T), initial=0.0) > tol:
            raise ValueError("dense input is not symmetric")
        return cls(sp.csr_matrix(np.triu(a)))

    @classmethod
    def identity(cls, n: int) -> "SparseSymMatrix":
        return cls(sp.identity(n, format="csr"))

    @property
    def nnz(self) -> int:
        """Stored nonzeros (upper triangle including the diagonal)."""
        return int(self._upper.nnz)

    def triplets(self):
        """Stored ``(rows, cols, vals)`` with ``rows <= cols``, values scaled."""
        coo = self._upper.tocoo()
        return coo.row.copy(), coo.col.copy(), coo.data * self.scale

    def diagonal(self) -> np.ndarray:
        return self._diag * self.scale

    def scaled(self, c: float) -> "SparseSymMatrix":
        """``c * A`` without copying the stored entries."""
        out = object.__new__(SparseSymMatrix)
        for name in ("_upper", "_upper_t", "_diag", "n"):
            setattr(out, name, getattr(self, name))
        out.scale = self.scale * float(c)
        return out

    def matvec(self, v) -> np.ndarray:
        v = _as_vector(v, self.n)
        y = self._upper @ v
        y += self._upper_t @ v
        y -= self._diag * v
        if self.scale != 1.0:
            y *= self.scale
        return y

    __matmul__ = matvec

    def to_scipy(self) -> sp.csr_matrix:
        full = self._upper + self._upper_t - sp.diags(self._diag)
        return sp.csr_matrix(full * self.scale)

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def norm_bound(self) -> float:
        """Max absolute row sum, an upper bound on the spectral norm."""
        rows = np.asarray(abs(self.to_scipy()).sum(axis=1)).ravel()
        return float(np.max(rows, initial=0.0))

    def __repr__(self) -> str:
        return f"SparseSymMatrix(n={self.n}, nnz={self.nnz}, scale={self.scale})"


@dataclass(frozen=True)
class ShiftedOperator:
    """The operator ``alpha * I + beta * A``, applied without forming it."""

    base: SparseSymMatrix
    alpha: float = 1.0
    beta: float = 1.0

    @property
    def n(self) -> int:
        return self.base.n

    def matvec(self, v) -> np.ndarray:
        v = _as_vector(v, self.n)
        y = self.base.matvec(v)
        y *= self.beta
        y += self.alpha * v
        return y

    __matmul__ = matvec

    def to_dense(self) -> np.ndarray:
        return self.alpha * np.eye(self.n) + self.beta * self.base.to_dense()


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights and no isolated vertices.

    Duplicate edges, in either orientation, are merged by summing weights.
    """

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        u = np.asarray(self.u, dtype=np.int64).ravel()
        v = np.asarray(self.v, dtype=np.int64).ravel()
        w = np.asarray(self.w, dtype=float).ravel()
        if not (u.shape == v.shape == w.shape):
            raise ValueError("edge arrays must have equal length")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ValueError(f"edge endpoints must lie in [0, {n})")
        if np.any(u == v):
            k = int(np.nonzero(u == v)[0][0])
            raise ValueError(f"self-loop at vertex {int(u[k])} (edge {k})")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("edge weights must be finite and strictly positive")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        merged = sp.coo_matrix((w, (lo, hi)), shape=(n, n)).tocsr()
        merged.sum_duplicates()
        merged.sort_indices()
        coo = merged.tocoo()
        deg = np.bincount(coo.row, coo.data, minlength=n) + np.bincount(coo.col, coo.data, minlength=n)
        if np.any(deg <= 0):
            k = int(np.nonzero(deg <= 0)[0][0])
            raise ValueError(f"vertex {k} is isolated")
        for name, arr in (("u", coo.row.astype(np.int64)), ("v", coo.col.astype(np.int64)), ("w", coo.data), ("degrees", deg)):
            arr = np.array(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """``edges`` is an iterable of ``(u, v)`` or ``(u, v, weight)`` tuples."""
        edges = [tuple(e) for e in edges]
        u = [e[0] for e in edges]
        v = [e[1] for e in edges]
        w = [e[2] if len(e) > 2 else 1.0 for e in edges]
        return cls(n, u, v, w)

    @property
    def m(self) -> int:
        return int(self.w.size)

    def adjacency(self) -> SparseSymMatrix:
        return SparseSymMatrix.from_coo(self.n, self.u, self.v, self.w)

    def laplacian(self) -> SparseSymMatrix:
        """Combinatorial Laplacian ``D - A``."""
        idx = np.arange(self.n)
        rows = np.concatenate((idx, self.u))
        cols = np.concatenate((idx, self.v))
        vals = np.concatenate((self.degrees, -self.w))
        return SparseSymMatrix.from_coo(self.n, rows, cols, vals)

    def volume(self, mask) -> float:
        return float(np.sum(self.degrees[np.asarray(mask, dtype=bool)]))

    def sqrt_degrees(self) -> np.ndarray:
        return np.sqrt(self.degrees)


def walk_matrix_sym(g: WeightedGraph) -> SparseSymMatrix:
    """``W = D^{-1/2} A D^{-1/2}``; its spectrum lies in ``[-1, 1]``."""
    s = g.sqrt_degrees()
    return SparseSymMatrix.from_coo(g.n, g.u, g.v, g.w / (s[g.u] * s[g.v]))


def normalized_laplacian(g: WeightedGraph) -> SparseSymMatrix:
    """``I - D^{-1/2} A D^{-1/2}``, PSD with kernel vector ``D^{1/2} 1``."""
    s = g.sqrt_degrees()
    idx = np.arange(g.n)
    rows = np.concatenate((idx, g.u))
    cols = np.concatenate((idx, g.v))
    vals = np.concatenate((np.ones(g.n), -g.w / (s[g.u] * s[g.v])))
    return SparseSymMatrix.from_coo(g.n, rows, cols, vals)


class OracleCapError(ValueError):
    """Raised when a dense reference is requested above :data:`ORACLE_CAP`."""


def _dense(a, cap: int) -> np.ndarray:
    n = a.n if hasattr(a, "n") else np.asarray(a).shape[0]
    if n > cap:
        raise OracleCapError(f"dense oracle limited to n <= {cap}, got n={n}")
    return a.to_dense() if hasattr(a, "to_dense") else np.asarray(a, dtype=float)


def dense_eigs_ref(a, cap: int = ORACLE_CAP) -> np.ndarray:
    """Eigenvalues in ascending order."""
    return np.linalg.eigh(_dense(a, cap))[0]


def dense_expm_ref(a, cap: int = ORACLE_CAP) -> np.ndarray:
    """``exp(-A) = U exp(-Lambda) U^T``."""
    lam, u = np.linalg.eigh(_dense(a, cap))
    return (u * np.exp(-lam)) @ u.T


def dense_solve_ref(a, v, cap: int = ORACLE_CAP) -> np.ndarray:
    """``A^{-1} v`` through the eigendecomposition; singular input raises."""
    m = _dense(a, cap)
    v = _as_vector(v, m.shape[0])
    lam, u = np.linalg.eigh(m)
    scale = np.max(np.abs(lam), initial=0.0)
    if scale == 0.0 or np.min(np.abs(lam)) <= m.shape[0] * np.finfo(float).eps * scale:
        raise np.linalg.LinAlgError("matrix is singular to working precision")
    return u @ ((u.T @ v) / lam)
