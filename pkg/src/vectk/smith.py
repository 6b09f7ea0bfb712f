"""Smith normal form over the integers with unimodular transforms.

All arithmetic uses Python integers held in numpy object arrays, so entries
never overflow.
"""

from dataclasses import dataclass

import numpy as np


def as_int_matrix(M, shape=None):
    """Copy ``M`` into a 2-d object array of Python ints."""
    arr = np.array(M, dtype=object)
    if arr.ndim == 1 and shape is None:
        raise ValueError("integer matrix must be 2-d")
    if shape is not None:
        arr = arr.reshape(shape)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        iv = int(v)
        if iv != v:
            raise ValueError(f"non-integer entry {v!r}")
        out[idx] = iv
    return out


def int_identity(n):
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    for idx in np.ndindex(out.shape):
        out[idx] = int(out[idx])
    return out


def int_zeros(shape):
    out = np.empty(shape, dtype=object)
    out.fill(0)
    return out


@dataclass
class SmithForm:
    """Result of :func:`smith_normal_form`: ``U @ M @ V == D``.

    ``U_inv`` and ``V_inv`` are the exact inverses, kept because every caller
    needs them and recomputing them from ``U`` and ``V`` is wasteful.
    """

    D: np.ndarray
    U: np.ndarray
    V: np.ndarray
    U_inv: np.ndarray
    V_inv: np.ndarray

    @property
    def diagonal(self):
        k = min(self.D.shape)
        return [int(self.D[i, i]) for i in range(k)]

    @property
    def rank(self):
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self):
        """Nonzero diagonal entries greater than one (the torsion part)."""
        return [d for d in self.diagonal if d > 1]


def _pivot(A, t):
    sub = A[t:, t:]
    if sub.size == 0:
        return None
    best = None
    rows, cols = np.nonzero(sub != 0)
    for i, j in zip(rows, cols):
        v = abs(sub[i, j])
        if best is None or v < best[0]:
            best = (v, i + t, j + t)
            if v == 1:
                break
    return best


def smith_normal_form(M):
    """Return a :class:`SmithForm` of the integer matrix ``M``.

    ``D`` is diagonal with nonnegative entries ``d1 | d2 | ...``; ``U`` and
    ``V`` are unimodular.
    """
    A = as_int_matrix(M) if not (isinstance(M, np.ndarray) and M.dtype == object) else M.copy()
    if A.ndim != 2:
        raise ValueError("integer matrix must be 2-d")
    m, n = A.shape
    U, U_invT = int_identity(m), int_identity(m)
    VT, V_inv = int_identity(n), int_identity(n)

    def swap_rows(i, j):
        if i != j:
            A[[i, j], :] = A[[j, i], :]
            U[[i, j], :] = U[[j, i], :]
            U_invT[[i, j], :] = U_invT[[j, i], :]

    def swap_cols(i, j):
        if i != j:
            A[:, [i, j]] = A[:, [j, i]]
            VT[[i, j], :] = VT[[j, i], :]
            V_inv[[i, j], :] = V_inv[[j, i], :]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        A[dst, :] += q * A[src, :]
        U[dst, :] += q * U[src, :]
        U_invT[src, :] -= q * U_invT[dst, :]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        A[:, dst] += q * A[:, src]
        VT[dst, :] += q * VT[src, :]
        V_inv[src, :] -= q * V_inv[dst, :]

    for t in range(min(m, n)):
        while True:
            piv = _pivot(A, t)
            if piv is None:
                break
            _, i, j = piv
            swap_rows(t, i)
            swap_cols(t, j)
            p = A[t, t]
            clean = True
            for i in np.nonzero(A[t + 1:, t] != 0)[0] + t + 1:
                q = A[i, t] // p
                if q:
                    add_row(i, t, -q)
                if A[i, t] != 0:
                    clean = False
            for j in np.nonzero(A[t, t + 1:] != 0)[0] + t + 1:
                q = A[t, j] // p
                if q:
                    add_col(j, t, -q)
                if A[t, j] != 0:
                    clean = False
            if not clean:
                continue
            bad = np.nonzero(A[t + 1:, t + 1:] % p != 0)
            if len(bad[0]):
                add_row(t, int(bad[0][0]) + t + 1, 1)
                continue
            break
        if t < m and t < n and A[t, t] < 0:
            A[t, :] = -A[t, :]
            U[t, :] = -U[t, :]
            U_invT[t, :] = -U_invT[t, :]
    return SmithForm(A, U, VT.T.copy(), U_invT.T.copy(), V_inv)


def int_matmul(A, B):
    """Exact product of object-dtype integer matrices (handles empty shapes)."""
    if A.shape[1] == 0 or A.shape[0] == 0 or B.shape[1] == 0:
        return int_zeros((A.shape[0], B.shape[1]))
    return A.dot(B)
