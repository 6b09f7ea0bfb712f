"""Dense linear algebra on finite Z2-graded Hermitian spaces.

A graded space ``C^n0 (+) C^n1`` is stored with the even summand first. An odd
map on it is a Hermitian matrix of block form ``[[0, A^*], [A, 0]]`` with
``A`` of shape ``(n1, n0)``.
"""

from dataclasses import dataclass, field
from math import atan2, cos, sin

import numpy as np

from .config import resolve
from .exceptions import AmbientMismatch, CutoffOnSpectrum, InputError, NoGap
from .validation import check_hermitian, check_matrix


@dataclass(frozen=True)
class GradedSpace:
    dim_even: int
    dim_odd: int

    def __post_init__(self):
        if self.dim_even < 0 or self.dim_odd < 0:
            raise InputError("graded dimensions must be nonnegative")

    @property
    def dim(self):
        return self.dim_even + self.dim_odd

    @property
    def dims(self):
        return (self.dim_even, self.dim_odd)

    def degrees(self):
        return np.array([0] * self.dim_even + [1] * self.dim_odd, dtype=int)


@dataclass(frozen=True, eq=False)
class OddMap:
    """A Hermitian degree-1 map on a graded space."""

    space: GradedSpace
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, M, dim_even, tol=None):
        tol = resolve(tol)
        M = check_hermitian(M, tol.eps_herm, name="odd map")
        space = GradedSpace(dim_even, M.shape[0] - dim_even)
        n0 = dim_even
        defect = max(_max_abs(M[:n0, :n0]), _max_abs(M[n0:, n0:]))
        if defect > tol.eps_herm:
            raise InputError(f"odd map has even-degree component of size {defect:.3g}")
        return cls(space, M)

    @property
    def block(self):
        """The odd-from-even block ``A`` (shape ``(n1, n0)``)."""
        n0 = self.space.dim_even
        return self.matrix[n0:, :n0]

    def square_blocks(self):
        """Return ``(A^*A, AA^*)``, the even and odd blocks of the square."""
        A = self.block
        return A.conj().T @ A, A @ A.conj().T

    def spectrum_sq(self, tol=None):
        """Eigenvalues of the square, ascending, as one array."""
        even, odd = self.square_blocks()
        vals = np.concatenate([hermitian_eig(even, tol)[0], hermitian_eig(odd, tol)[0]])
        return np.sort(vals)

    def restrict(self, sub):
        """Compress onto an invariant graded subspace (even basis vectors first)."""
        B = sub.basis
        h = B.conj().T @ self.matrix @ B
        k0 = sub.dims[0]
        h[:k0, :k0] = 0
        h[k0:, k0:] = 0
        h = 0.5 * (h + h.conj().T)
        return OddMap(GradedSpace(*sub.dims), h)


@dataclass(frozen=True, eq=False)
class GradedSubspace:
    """Orthonormal homogeneous basis of a subspace, even vectors first.

    ``labels`` holds the eigenvalue of the square of the defining odd map for
    each basis vector.
    """

    ambient: GradedSpace
    basis: np.ndarray = field(repr=False)
    dims: tuple
    labels: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def projector(self):
        return self.basis @ self.basis.conj().T


def _max_abs(M):
    return float(np.max(np.abs(M))) if M.size else 0.0


def hat(A):
    """The odd self-adjoint operator ``[[0, A^*], [A, 0]]`` of ``A: C^n0 -> C^n1``."""
    A = check_matrix(A, name="A")
    n1, n0 = A.shape
    M = np.zeros((n0 + n1, n0 + n1), dtype=complex)
    M[n0:, :n0] = A
    M[:n0, n0:] = A.conj().T
    return OddMap(GradedSpace(n0, n1), M)


def _orthonormalize_clusters(w, V, eps):
    n = len(w)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[start] < eps:
            stop += 1
        if stop - start > 1:
            q, _ = np.linalg.qr(V[:, start:stop])
            V[:, start:stop] = q
        start = stop
    return V


def hermitian_eig(M, tol=None):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ascending eigenvalues and a unitary matrix of eigenvectors (as
    columns). Eigenvectors of an eigenvalue cluster are orthonormalized
    together, so callers must not depend on the basis inside a cluster.
    """
    tol = resolve(tol)
    M = check_hermitian(M, tol.eps_herm)
    if M.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    V = _orthonormalize_clusters(w, V, tol.eps_eig)
    return w, V


def jacobi_eig(M, tol=None, max_sweeps=64):
    """Cyclic two-sided Jacobi diagonalization of a Hermitian matrix.

    Slow and simple; kept as an independent reference for ``hermitian_eig``.
    """
    tol = resolve(tol)
    A = check_hermitian(M, tol.eps_herm).copy()
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(A)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                beta = abs(b)
                if beta <= 1e-300:
                    continue
                phase = b / beta
                theta = 0.5 * atan2(2.0 * beta, A[q, q].real - A[p, p].real)
                c, s = cos(theta), sin(theta)
                # columns p, q of J = diag(1, conj(phase)) . [[c, s], [-s, c]]
                J = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _check_admissible(vals, mu, gap_tol):
    if vals.size and np.min(np.abs(vals - mu)) <= gap_tol:
        near = vals[np.argmin(np.abs(vals - mu))]
        raise CutoffOnSpectrum(f"cutoff {mu:.6g} lies within {gap_tol:.1g} of eigenvalue {near:.6g}")


def low_spectrum(H, mu, tol=None):
    """Span of the eigenvectors of ``H^2`` with eigenvalue below ``mu``.

    The square of an odd map preserves degree, so the even and odd blocks are
    diagonalized separately and the returned basis is homogeneous.
    """
    tol = resolve(tol)
    if not mu > 0:
        raise InputError(f"cutoff must be positive, got {mu!r}")
    n0, n1 = H.space.dims
    even, odd = H.square_blocks()
    w0, V0 = hermitian_eig(even, tol)
    w1, V1 = hermitian_eig(odd, tol)
    _check_admissible(np.concatenate([w0, w1]), mu, tol.gap_tol)
    keep0, keep1 = w0 < mu, w1 < mu
    k0, k1 = int(keep0.sum()), int(keep1.sum())
    basis = np.zeros((n0 + n1, k0 + k1), dtype=complex)
    basis[:n0, :k0] = V0[:, keep0]
    basis[n0:, k0:] = V1[:, keep1]
    labels = np.concatenate([w0[keep0], w1[keep1]]).clip(min=0.0)
    return GradedSubspace(H.space, basis, (k0, k1), labels)


def select_gap(spectra, lambda_max, tol=None):
    """Pick a spectral cutoff in ``(0, lambda_max]`` avoiding every spectrum.

    Candidate intervals are those between consecutive points of
    ``{0} | union(spectra) | {lambda_max}`` (values above ``lambda_max`` are
    ignored). The midpoint of the widest candidate wider than ``2*gap_tol``
    is returned; widths within ``gap_tol`` of each other count as ties,
    which go to the lowest interval.
    """
    tol = resolve(tol)
    spectra = list(spectra)
    if not spectra:
        raise InputError("select_gap needs at least one spectrum")
    if not lambda_max > 0:
        raise InputError("lambda_max must be positive")
    pts = [0.0, float(lambda_max)]
    for s in spectra:
        for v in np.asarray(s, dtype=float).ravel():
            v = max(float(v), 0.0)
            if v <= lambda_max:
                pts.append(v)
    pts = sorted(set(pts))
    best = None
    for a, b in zip(pts, pts[1:]):
        width = b - a
        if width > 2 * tol.gap_tol and (best is None or width > best[1] - best[0] + tol.gap_tol):
            best = (a, b)
    if best is None:
        raise NoGap(f"no spectral gap wider than {2 * tol.gap_tol:.2g} below {lambda_max}")
    return 0.5 * (best[0] + best[1])


def orthogonal_project(sub, target):
    """Matrix of (projection onto ``target``) o (inclusion of ``sub``)."""
    if sub.ambient != target.ambient:
        raise AmbientMismatch(f"ambient spaces differ: {sub.ambient} vs {target.ambient}")
    return target.basis.conj().T @ sub.basis
