"""Finite-dimensional approximation of operator families by vectorial bundles.

An operator is a rectangular matrix ``A: C^n0 -> C^n1``; its index is
``n0 - n1``. ``fit`` chooses a spectral cutoff per patch from the sampled
spectra of ``hat(A)^2``; ``transform`` cuts each fiber down to the
eigenvectors below that cutoff and glues patches by orthogonal projection.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cech import SampledU1Cochain, dd_cocycle
from .config import resolve
from .exceptions import (EmbeddingTooSmall, IncompatibleSection, InputError, NoGap, ShapeMismatch)
from .graded import GradedSpace, OddMap, hat, hermitian_eig, low_spectrum, select_gap
from .simplicial import simplex_key
from .validation import check_matrix
from .vectorial import VectorialBundle, graded_index, support


@dataclass(frozen=True, eq=False)
class FredholmFamily:
    """One ``n1 x n0`` matrix per sample point of a star cover."""

    cover: object
    shape: tuple  # (n0, n1)
    matrices: dict = field(repr=False)

    @classmethod
    def build(cls, cover, matrices):
        mats = {}
        shape = None
        for s in cover.samples:
            if s not in matrices:
                raise InputError(f"family has no operator at sample {simplex_key(s)}")
            A = check_matrix(matrices[s], name=f"operator at {simplex_key(s)}")
            if shape is None:
                shape = (A.shape[1], A.shape[0])
            elif (A.shape[1], A.shape[0]) != shape:
                raise ShapeMismatch(f"operator at {simplex_key(s)} has shape {A.shape}, "
                                    f"expected {(shape[1], shape[0])}")
            mats[s] = A
        return cls(cover, shape, mats)

    def local(self, patch, sample):
        return self.matrices[sample]


@dataclass(frozen=True, eq=False)
class TwistedFamilyData:
    """Local families ``A_p`` related on overlaps by ``A_p = g_pq A_q g_pq^-1``.

    ``local[p, s]`` is the ``n x n`` operator of patch ``p`` at sample ``s``;
    the lifts act on ``C^n (+) C^n`` diagonally.
    """

    cover: object
    shape: tuple
    local_ops: dict = field(repr=False)
    lifts: object = None

    @classmethod
    def build(cls, cover, local, lifts, tol=None):
        tol = resolve(tol)
        n = lifts.rank
        ops = {}
        for s in cover.samples:
            for p in s:
                if (p, s) not in local:
                    raise InputError(f"no local operator for patch {p} at {simplex_key(s)}")
                ops[(p, s)] = check_matrix(local[(p, s)], name=f"A_{p} at {simplex_key(s)}",
                                           shape=(n, n))
        for s in cover.samples:
            for p, q in product(s, repeat=2):
                if p >= q:
                    continue
                g = lifts.g(p, q)
                err = np.max(np.abs(ops[(p, s)] - g @ ops[(q, s)] @ g.conj().T))
                if err > tol.eps_compat:
                    raise IncompatibleSection(f"A_{p} != g A_{q} g^-1 at {simplex_key(s)} "
                                              f"(defect {err:.3g})")
        return cls(cover, (n, n), ops, lifts)

    def local(self, patch, sample):
        return self.local_ops[(patch, sample)]

    def hat_lift(self, p, q):
        g = self.lifts.g(p, q)
        n = g.shape[0]
        G = np.zeros((2 * n, 2 * n), complex)
        G[:n, :n] = g
        G[n:, n:] = g
        return G


def index_of_family(family):
    """Index of the truncated model, ``n0 - n1``."""
    n0, n1 = family.shape
    return n0 - n1


def _frame(sub, reference, floor=1e-3):
    """Orthonormal frame of ``sub`` closest to ``reference`` (degree by degree).

    Falls back to the eigenbasis when the dimensions differ or the projection
    of the reference nearly degenerates.
    """
    B = sub.basis
    if reference is None or reference.shape != B.shape:
        return B
    k0 = sub.dims[0]
    F = np.empty_like(B)
    for cols in (slice(0, k0), slice(k0, B.shape[1])):
        Bd, Rd = B[:, cols], reference[:, cols]
        if Bd.shape[1] == 0:
            continue
        W, sig, Yh = np.linalg.svd(Bd.conj().T @ Rd)
        if sig.min() < floor:
            return B
        F[:, cols] = Bd @ (W @ Yh)
    return F


def _restrict(op, F, k0):
    h = F.conj().T @ op.matrix @ F
    h[:k0, :k0] = 0
    h[k0:, k0:] = 0
    return OddMap(GradedSpace(k0, F.shape[1] - k0), 0.5 * (h + h.conj().T))


class SpectralTruncation(TransformerMixin, BaseEstimator):
    """Approximate a single operator by a graded space with an odd map.

    Parameters
    ----------
    lambda_max : float
        Upper bound for the automatically selected cutoff.
    cutoff : float, optional
        Use this cutoff instead of selecting one.
    tol : Tolerances, optional
    """

    def __init__(self, lambda_max=1.0, cutoff=None, tol=None):
        self.lambda_max = lambda_max
        self.cutoff = cutoff
        self.tol = tol

    def fit(self, A, y=None):
        op = hat(A)
        if self.cutoff is None:
            self.cutoff_ = select_gap([op.spectrum_sq(self.tol)], self.lambda_max, self.tol)
        else:
            self.cutoff_ = float(self.cutoff)
        self.shape_ = op.space.dims
        return self

    def transform(self, A):
        """Return ``(E, h)``: the low-spectrum subspace and the restricted map."""
        check_is_fitted(self, "cutoff_")
        op = hat(A)
        sub = low_spectrum(op, self.cutoff_, self.tol)
        return sub, op.restrict(sub)


def approximate_single(A, lambda_max=1.0, tol=None):
    return SpectralTruncation(lambda_max=lambda_max, tol=tol).fit_transform(A)


class FamilyApproximation(BaseEstimator):
    """Approximate a (possibly twisted) operator family by a vectorial bundle.

    Parameters
    ----------
    lambda_max : float
        Upper bound for every per-patch cutoff.
    frame : {"reference", "eigen"}
        How fiber bases are chosen. ``"reference"`` projects the basis at the
        patch's own vertex onto every other fiber of the patch, so fiber
        coordinates vary continuously; ``"eigen"`` keeps raw eigenbases.
    lipschitz_bound : float, optional
        If set, ``fit`` flags pairs of incident samples whose sorted spectra
        differ by more than this amount.
    n_jobs : int
        Patches processed concurrently; results do not depend on it.
    tol : Tolerances, optional
    """

    def __init__(self, lambda_max=1.0, frame="reference", lipschitz_bound=None, n_jobs=1, tol=None):
        self.lambda_max = lambda_max
        self.frame = frame
        self.lipschitz_bound = lipschitz_bound
        self.n_jobs = n_jobs
        self.tol = tol

    def _map(self, fn, items):
        if self.n_jobs and self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    def _ops(self, family, p):
        return {s: hat(family.local(p, s)) for s in family.cover.samples_in(p)}

    def fit(self, family, y=None):
        tol = resolve(self.tol)
        if self.frame not in ("reference", "eigen"):
            raise InputError(f"unknown frame policy {self.frame!r}")
        cover = family.cover

        def cutoff(p):
            spectra = [op.spectrum_sq(tol) for op in self._ops(family, p).values()]
            try:
                return select_gap(spectra, self.lambda_max, tol)
            except NoGap as exc:
                raise NoGap(f"patch {p}: {exc}", patch=p) from None

        patches = list(cover.patches)
        self.cutoffs_ = dict(zip(patches, self._map(cutoff, patches)))
        self.diagnostics_ = self._lipschitz(family, tol) if self.lipschitz_bound is not None else []
        return self

    def _lipschitz(self, family, tol):
        K = family.cover.complex
        spectra = {s: hat(family.local(s[0], s)).spectrum_sq(tol) for s in family.cover.samples}
        flagged = []
        for level in K.simplices[1:]:
            for t in level:
                for i in range(len(t)):
                    s = t[:i] + t[i + 1:]
                    jump = float(np.max(np.abs(spectra[s] - spectra[t]))) if spectra[s].size else 0.0
                    if jump > self.lipschitz_bound:
                        flagged.append({"samples": [simplex_key(s), simplex_key(t)], "jump": jump})
        return flagged

    def transform(self, family):
        check_is_fitted(self, "cutoffs_")
        tol = resolve(self.tol)
        cover = family.cover
        twisted = isinstance(family, TwistedFamilyData)

        def local(p):
            ops = self._ops(family, p)
            mu = self.cutoffs_[p]
            subs = {s: low_spectrum(op, mu, tol) for s, op in ops.items()}
            ref = subs[(p,)].basis if self.frame == "reference" else None
            frames, hs = {}, {}
            for s, sub in subs.items():
                F = _frame(sub, ref)
                frames[s] = F
                hs[s] = _restrict(ops[s], F, sub.dims[0])
            return frames, hs

        patches = list(cover.patches)
        results = dict(zip(patches, self._map(local, patches)))
        h, frames, phi = {}, {}, {}
        for p, (fr, hs) in results.items():
            for s in fr:
                frames[(p, s)] = fr[s]
                h[(p, s)] = hs[s]
        for s in cover.samples:
            for p, q in product(s, repeat=2):
                Fp, Fq = frames[(p, s)], frames[(q, s)]
                if twisted and p != q:
                    phi[(p, q, s)] = Fp.conj().T @ family.hat_lift(p, q) @ Fq
                else:
                    phi[(p, q, s)] = Fp.conj().T @ Fq
        twist = dd_cocycle(family.lifts, tol) if twisted else None
        return VectorialBundle.build(cover, h, phi, twist=twist, cutoffs=dict(self.cutoffs_),
                                     frames=frames, tol=tol)

    def fit_transform(self, family, y=None):
        return self.fit(family).transform(family)


def approximate_family(family, lambda_max=1.0, tol=None, n_jobs=1, frame="reference"):
    return FamilyApproximation(lambda_max=lambda_max, frame=frame, n_jobs=n_jobs,
                               tol=tol).fit_transform(family)


def approximate_twisted_family(data, lambda_max=1.0, tol=None, n_jobs=1, frame="reference"):
    if not isinstance(data, TwistedFamilyData):
        raise InputError("expected TwistedFamilyData")
    return approximate_family(data, lambda_max, tol, n_jobs, frame)


# --- kernel bundles -----------------------------------------------------------

def _coloring(K):
    color = {}
    nbrs = {v: set() for v in range(K.n_vertices)}
    for a, b in (K.simplices[1] if K.dim >= 1 else ()):
        nbrs[a].add(b)
        nbrs[b].add(a)
    for v in range(K.n_vertices):
        used = {color[u] for u in nbrs[v] if u in color}
        color[v] = min(c for c in range(len(used) + 1) if c not in used)
    return color


def embed_bundle(E, n0=None, tol=None):
    """Isometric embedding of an ordinary bundle into a trivial bundle.

    ``E`` must have ``h = 0``, purely even fibers of one rank ``r`` and
    unitary transitions. Patches are colored so that the vertices of any
    simplex get distinct colors; at a sample ``s`` a vector ``v`` in patch
    ``b``'s frame goes to ``sum_a sqrt(1/|s|) e_color(a) (x) phi_ab v``.
    Returns ``(n0, iota)`` with ``iota[b, s]`` an ``n0 x r`` isometry.
    """
    tol = resolve(tol)
    cover, K = E.cover, E.complex
    ranks = {E.dims(a, s) for (a, s) in E.h}
    if len(ranks) != 1 or next(iter(ranks))[1] != 0:
        raise InputError("kernel realization needs purely even fibers of constant rank")
    r = next(iter(ranks))[0]
    if any(np.max(np.abs(m.matrix), initial=0.0) > tol.eps_doteq for m in E.h.values()):
        raise InputError("kernel realization needs h = 0")
    color = _coloring(K)
    n_colors = max(color.values()) + 1
    needed = r * n_colors
    if n0 is None:
        n0 = needed + 1
    if n0 < needed:
        raise EmbeddingTooSmall(f"embedding needs n0 >= {needed}, got {n0}")
    iota = {}
    for s in cover.samples:
        w = np.sqrt(1.0 / len(s))
        for b in s:
            M = np.zeros((n0, r), complex)
            for a in s:
                c = color[a]
                M[c * r:(c + 1) * r, :] += w * E.phi[(a, b, s)]
            iota[(b, s)] = M
    return n0, iota


def kernel_bundle_family(E, n0=None, tol=None):
    """A family of partial isometries whose kernels realize ``E``.

    The square of the hat operator has spectrum in ``{0, 1}`` at every
    sample. When the embedded fibers are the same at every sample, ``A`` maps
    onto ``C^(n0 - r)`` (so the cokernel vanishes); otherwise ``A = 1 - P``
    with ``P`` the projection onto the embedded fiber.
    """
    tol = resolve(tol)
    n0, iota = embed_bundle(E, n0, tol)
    cover = E.cover
    P = {s: iota[(s[0], s)] @ iota[(s[0], s)].conj().T for s in cover.samples}
    first = P[cover.samples[0]]
    constant = all(np.max(np.abs(Ps - first)) < tol.eps_orth for Ps in P.values())
    mats = {}
    if constant:
        w, V = hermitian_eig(first, tol)
        comp = V[:, w < 0.5]
        for s in cover.samples:
            mats[s] = comp.conj().T
    else:
        for s in cover.samples:
            mats[s] = np.eye(n0) - P[s]
    return FredholmFamily.build(cover, mats)


def kernel_line_transitions(E, degree=0, tol=None):
    """Transition phases of the kernel line bundle of ``h`` in one degree.

    Every fiber must have a one-dimensional kernel in the given degree and a
    patch must use one fiber dimension throughout, so that fiber coordinates
    act as a trivialization. In patch ``a`` the kernel line is spanned by the
    projection of the kernel vector at the vertex ``a`` itself.
    """
    tol = resolve(tol)
    cover = E.cover

    def kernel(a, s):
        hm = E.h[(a, s)]
        even, odd = hm.square_blocks()
        block = even if degree == 0 else odd
        w, V = hermitian_eig(block, tol)
        ker = V[:, w < tol.gap_tol]
        if ker.shape[1] != 1:
            raise InputError(f"kernel in degree {degree} at patch {a}, sample {simplex_key(s)} "
                             f"has dimension {ker.shape[1]}, expected 1")
        off = 0 if degree == 0 else hm.space.dim_even
        full = np.zeros((hm.space.dim, 1), complex)
        full[off:off + block.shape[0]] = ker
        return full

    line = {}
    for a in cover.patches:
        samples = cover.samples_in(a)
        if len({E.dims(a, s) for s in samples}) != 1:
            raise InputError(f"fiber dimension varies over patch {a}")
        ref = kernel(a, (a,))
        for s in samples:
            k = kernel(a, s)
            v = k @ (k.conj().T @ ref)
            norm = np.linalg.norm(v)
            if norm < 1e-3:
                raise InputError(f"kernel line at patch {a}, sample {simplex_key(s)} is orthogonal "
                                 "to the patch reference")
            line[(a, s)] = v / norm
    K = cover.complex
    vals = {}
    for e in (K.simplices[1] if K.dim >= 1 else ()):
        a, b = e
        row = {}
        for s in cover.samples_in(a, b):
            z = (line[(a, s)].conj().T @ E.phi[(a, b, s)] @ line[(b, s)])[0, 0]
            if abs(z) < 0.5:
                raise InputError(f"transition {a},{b} at {simplex_key(s)} does not preserve the kernel line")
            row[s] = (np.angle(z) / (2 * np.pi)) % 1.0
        vals[e] = row
    return SampledU1Cochain(K, vals)


@dataclass(frozen=True)
class CutoffComparison:
    """How two approximations of one family at different cutoffs relate.

    Defects compare, patch by patch, the approximation with the smaller
    cutoff against the compression of the other one onto it.
    """

    index_equal: bool
    support_equal: bool
    max_containment: float
    max_h_defect: float
    max_phi_defect: float

    def passed(self, tol=None):
        eps = resolve(tol).eps_doteq
        return (self.index_equal and self.support_equal and self.max_containment < eps
                and self.max_h_defect < eps and self.max_phi_defect < eps)


def compare_cutoffs(E1, E2, support_tol=1e-6):
    """Compare two untwisted approximations of the same family.

    Both bundles must carry frames (as produced by :class:`FamilyApproximation`).
    """
    if E1.frames is None or E2.frames is None:
        raise InputError("cutoff comparison needs bundles with recorded frames")
    if E1.twist is not None or E2.twist is not None:
        raise InputError("cutoff comparison is defined for untwisted bundles")
    cover = E1.cover
    small = {p: (E1, E2) if E1.cutoffs[p] <= E2.cutoffs[p] else (E2, E1) for p in cover.patches}
    contain = hdef = pdef = 0.0
    for s in cover.samples:
        for a in s:
            S, L = small[a]
            Fs, Fl = S.frames[(a, s)], L.frames[(a, s)]
            contain = max(contain, _max(Fs - Fl @ (Fl.conj().T @ Fs)))
            big = Fl @ L.h[(a, s)].matrix @ Fl.conj().T
            hdef = max(hdef, _max(Fs.conj().T @ big @ Fs - S.h[(a, s)].matrix))
        for a, b in product(s, repeat=2):
            if small[a] != small[b]:
                continue
            S, L = small[a]
            Pa, Pb = S.frames[(a, s)].conj().T @ L.frames[(a, s)], L.frames[(b, s)].conj().T @ S.frames[(b, s)]
            pdef = max(pdef, _max(Pa @ L.phi[(a, b, s)] @ Pb - S.phi[(a, b, s)]))
    return CutoffComparison(graded_index(E1) == graded_index(E2),
                            set(support(E1, support_tol)) == set(support(E2, support_tol)),
                            contain, hdef, pdef)


def _max(M):
    return float(np.max(np.abs(M))) if M.size else 0.0
