"""Z2-graded vectorial bundles over a star cover, and their verification.

A bundle is stored sample-wise: for every patch ``a`` and every sample point
``s`` in the patch there is a graded fiber with an odd Hermitian map
``h[a, s]``, and for every sample ``s`` and ordered pair of patches ``a, b``
containing it there is a degree-0 matrix ``phi[a, b, s]`` from the
``b``-fiber to the ``a``-fiber.

Cocycle-type conditions are checked with the low-spectrum agreement
relation: two maps with common source agree at a sample if they coincide on
the span of the eigenvectors of ``h^2`` below some admissible cutoff ``mu > 0``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from math import inf

import numpy as np

from .config import resolve
from .exceptions import CoverMismatch, InconsistentIndex, InputError, ShapeMismatch, TwistMismatch
from .graded import GradedSpace, OddMap, hermitian_eig
from .simplicial import simplex_key


@dataclass(frozen=True, eq=False)
class VectorialBundle:
    cover: object
    h: dict = field(repr=False)
    phi: dict = field(repr=False)
    twist: object = None
    cutoffs: dict = None
    frames: dict = field(default=None, repr=False)

    @classmethod
    def build(cls, cover, h, phi, twist=None, cutoffs=None, frames=None, tol=None):
        """Validate shapes and degrees, then assemble the bundle."""
        tol = resolve(tol)
        K = cover.complex
        for s in cover.samples:
            for a in s:
                if (a, s) not in h:
                    raise InputError(f"missing fiber for patch {a} at sample {simplex_key(s)}")
            for a, b in product(s, repeat=2):
                M = phi.get((a, b, s))
                if M is None:
                    raise InputError(f"missing transition {a},{b} at sample {simplex_key(s)}")
                Ea, Eb = h[(a, s)].space, h[(b, s)].space
                if M.shape != (Ea.dim, Eb.dim):
                    raise ShapeMismatch(f"transition {a},{b} at {simplex_key(s)} has shape {M.shape}, "
                                        f"expected {(Ea.dim, Eb.dim)}")
                if _odd_part(M, Ea, Eb) > tol.eps_doteq:
                    raise InputError(f"transition {a},{b} at {simplex_key(s)} is not of degree 0")
        if twist is not None and (twist.complex is not K or twist.degree != 2):
            raise TwistMismatch("twist must be a degree-2 cochain on the bundle's complex")
        return cls(cover, dict(h), dict(phi), twist, cutoffs, frames)

    @property
    def complex(self):
        return self.cover.complex

    def fiber(self, a, s):
        return self.h[(a, s)].space

    def dims(self, a, s):
        return self.h[(a, s)].space.dims

    @classmethod
    def zero(cls, cover, twist=None):
        h = {(a, s): OddMap(GradedSpace(0, 0), np.zeros((0, 0), complex))
             for s in cover.samples for a in s}
        phi = {(a, b, s): np.zeros((0, 0), complex)
               for s in cover.samples for a, b in product(s, repeat=2)}
        return cls(cover, h, phi, twist)

    @classmethod
    def from_vector_bundle(cls, cover, dims, transitions=None, twist=None, tol=None):
        """Promote an ordinary graded bundle (``h = 0``) to a vectorial bundle.

        ``transitions[a, b, s]`` defaults to the identity, giving the trivial
        bundle with fiber dims ``dims = (even, odd)``.
        """
        n0, n1 = dims
        space = GradedSpace(n0, n1)
        h = {(a, s): OddMap(space, np.zeros((n0 + n1,) * 2, complex))
             for s in cover.samples for a in s}
        phi = {}
        for s in cover.samples:
            for a, b in product(s, repeat=2):
                M = None if transitions is None else transitions.get((a, b, s))
                phi[(a, b, s)] = np.eye(n0 + n1, dtype=complex) if M is None else np.asarray(M, complex)
        return cls.build(cover, h, phi, twist=twist, tol=tol)


def _odd_part(M, Ea, Eb):
    a0, b0 = Ea.dim_even, Eb.dim_even
    blocks = [M[:a0, b0:], M[a0:, :b0]]
    return max((float(np.max(np.abs(B))) for B in blocks if B.size), default=0.0)


def same_cover(E, F):
    KE, KF = E.cover.complex, F.cover.complex
    return KE is KF or (KE.n_vertices == KF.n_vertices and KE.simplices == KF.simplices)


# --- low-spectrum agreement -------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Spectral:
    """Eigen-data of ``h^2`` at one fiber, grouped into admissible clusters."""

    values: np.ndarray
    vectors: np.ndarray
    cluster_ends: tuple

    @classmethod
    def of(cls, hmap, tol):
        even, odd = hmap.square_blocks()
        n0 = hmap.space.dim_even
        w0, V0 = hermitian_eig(even, tol)
        w1, V1 = hermitian_eig(odd, tol)
        n = hmap.space.dim
        V = np.zeros((n, n), complex)
        V[:n0, :len(w0)] = V0
        V[n0:, len(w0):] = V1
        w = np.concatenate([w0, w1])
        order = np.argsort(w, kind="stable")
        w, V = np.clip(w[order], 0.0, None), V[:, order]
        ends = []
        for i in range(1, len(w)):
            if w[i] - w[i - 1] > 2 * tol.gap_tol:
                ends.append(i)
        if len(w):
            ends.append(len(w))
        return cls(w, V, tuple(ends))


def _mu_agree(D, spectrum, tol):
    """Largest admissible cutoff below which ``D`` vanishes on the low spectrum."""
    if spectrum.values.size == 0:
        return inf
    DV = D @ spectrum.vectors
    start = 0
    for end in spectrum.cluster_ends:
        if DV.shape[0] and np.linalg.norm(DV[:, :end], 2) >= tol.eps_doteq:
            return max(0.0, float(spectrum.values[start]) - tol.gap_tol)
        start = end
    return inf


@dataclass
class DoteqReport:
    """Per-sample cutoffs of agreement; passes iff every cutoff is positive."""

    mu_agree: dict

    @property
    def passed(self):
        return all(mu > 0 for mu in self.mu_agree.values())

    @property
    def min_mu(self):
        return min(self.mu_agree.values(), default=inf)

    def failures(self):
        return [s for s, mu in self.mu_agree.items() if not mu > 0]


def doteq_check(f, g, source, tol=None):
    """Compare two map families on the low spectrum of their common source.

    ``f`` and ``g`` map sample -> matrix, ``source`` maps sample -> the odd map
    ``h`` on the source fiber there.
    """
    tol = resolve(tol)
    if set(f) != set(g) or not set(f) <= set(source):
        raise ShapeMismatch("map families are defined at different sample points")
    out = {}
    for s in f:
        F, G = np.asarray(f[s], complex), np.asarray(g[s], complex)
        n = source[s].space.dim
        if F.shape != G.shape or F.shape[1] != n:
            raise ShapeMismatch(f"shape mismatch at sample {s}: {F.shape} vs {G.shape}, source dim {n}")
        out[s] = _mu_agree(F - G, _Spectral.of(source[s], tol), tol)
    return DoteqReport(out)


# --- verification reports -----------------------------------------------------

@dataclass
class Condition:
    checked: int = 0
    failed: int = 0
    min_mu: float = inf
    max_defect: float = 0.0


@dataclass
class VerificationReport:
    kind: str
    conditions: dict
    failures: list

    @property
    def passed(self):
        return all(c.failed == 0 for c in self.conditions.values())

    def merge(self, other, prefix):
        for name, c in other.conditions.items():
            self.conditions[f"{prefix}{name}"] = c
        self.failures.extend(dict(f, condition=f"{prefix}{f['condition']}") for f in other.failures)
        return self

    def to_dict(self, max_failures=50):
        return {
            "kind": self.kind,
            "passed": self.passed,
            "conditions": {name: {"checked": c.checked, "failed": c.failed,
                                  "min_mu_agree": c.min_mu, "max_defect": c.max_defect}
                           for name, c in sorted(self.conditions.items())},
            "failures": self.failures[:max_failures],
            "n_failures": len(self.failures),
        }

    def summary(self):
        lines = [f"{self.kind}: {'PASS' if self.passed else 'FAIL'}"]
        for name, c in sorted(self.conditions.items()):
            mu = "inf" if c.min_mu == inf else f"{c.min_mu:.6g}"
            lines.append(f"  {name}: {c.checked - c.failed}/{c.checked} ok, "
                         f"min mu_agree {mu}, max defect {c.max_defect:.3g}")
        return "\n".join(lines)


def _record(report, name, mu=None, defect=None, passed=True, where=None):
    c = report.conditions.setdefault(name, Condition())
    c.checked += 1
    if mu is not None:
        c.min_mu = min(c.min_mu, mu)
    if defect is not None:
        c.max_defect = max(c.max_defect, defect)
    if not passed:
        c.failed += 1
        entry = {"condition": name}
        entry.update(where or {})
        if mu is not None:
            entry["mu_agree"] = mu
        if defect is not None:
            entry["defect"] = defect
        report.failures.append(entry)


def _max_abs(M):
    return float(np.max(np.abs(M))) if M.size else 0.0


def _check_sample(E, s, twist, tol):
    """All per-sample conditions of a bundle; returns a list of records."""
    recs = []
    spectrum = {a: _Spectral.of(E.h[(a, s)], tol) for a in s}
    key = simplex_key(s)
    for a, b in product(s, repeat=2):
        M = E.phi[(a, b, s)]
        ha, hb = E.h[(a, s)].matrix, E.h[(b, s)].matrix
        defect = _max_abs(ha @ M - M @ hb)
        recs.append(("intertwining", None, defect, defect < tol.eps_doteq,
                     {"patches": [a, b], "sample": key}))
    for a in s:
        M = E.phi[(a, a, s)]
        mu = _mu_agree(M - np.eye(M.shape[0]), spectrum[a], tol)
        recs.append(("identity", mu, None, mu > 0, {"patches": [a], "sample": key}))
    cocycle = "twisted_cocycle" if twist is not None else "cocycle"
    for a, b, c in product(s, repeat=3):
        lhs = E.phi[(a, b, s)] @ E.phi[(b, c, s)]
        rhs = E.phi[(a, c, s)]
        if twist is not None and len({a, b, c}) == 3:
            rhs = twist.phase((a, b, c)) * rhs
        mu = _mu_agree(lhs - rhs, spectrum[c], tol)
        recs.append((cocycle, mu, None, mu > 0, {"patches": [a, b, c], "sample": key}))
    return recs


def _run(samples, fn, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, samples))
    return [fn(s) for s in samples]


def _assemble(kind, results):
    report = VerificationReport(kind, {}, [])
    for recs in results:
        for name, mu, defect, ok, where in recs:
            _record(report, name, mu, defect, ok, where)
    return report


def verify_vectorial(E, tol=None, jobs=1):
    """Check the untwisted conditions ``phi_aa = 1`` and ``phi_ab phi_bc = phi_ac``
    on low spectra, plus strict intertwining ``h_a phi_ab = phi_ab h_b``."""
    tol = resolve(tol)
    results = _run(E.cover.samples, lambda s: _check_sample(E, s, None, tol), jobs)
    return _assemble("vectorial", results)


def verify_twisted(E, c, tol=None, jobs=1):
    """As :func:`verify_vectorial` with ``phi_ab phi_bc = c_abc phi_ac``.

    ``c`` must be a degree-2 cochain on the bundle's complex; its values need
    not agree with ``E.twist``, and a disagreement shows up as failures.
    """
    tol = resolve(tol)
    if c.complex is not E.complex and c.complex.simplices != E.complex.simplices:
        raise TwistMismatch("twist cocycle lives on a different complex")
    if c.degree != 2:
        raise TwistMismatch(f"twist must have degree 2, got {c.degree}")
    results = _run(E.cover.samples, lambda s: _check_sample(E, s, c, tol), jobs)
    return _assemble("twisted", results)


def verify(E, tol=None, jobs=1):
    """Verify against the bundle's own twist, if any."""
    if E.twist is None:
        return verify_vectorial(E, tol, jobs)
    return verify_twisted(E, E.twist, tol, jobs)


def verify_homomorphism(f, E, F, tol=None):
    """Check that per-patch maps ``f[a, s]: E_a -> F_a`` form a homomorphism."""
    tol = resolve(tol)
    if not same_cover(E, F):
        raise CoverMismatch("homomorphisms are only checked between bundles on one cover")
    report = VerificationReport("homomorphism", {}, [])
    for s in E.cover.samples:
        key = simplex_key(s)
        for a in s:
            M = np.asarray(f[(a, s)], complex)
            Ea, Fa = E.fiber(a, s), F.fiber(a, s)
            if M.shape != (Fa.dim, Ea.dim):
                raise ShapeMismatch(f"map at patch {a}, sample {key} has shape {M.shape}")
            odd = _odd_part(M, Fa, Ea)
            _record(report, "degree", defect=odd, passed=odd < tol.eps_doteq,
                    where={"patches": [a], "sample": key})
            d = _max_abs(M @ E.h[(a, s)].matrix - F.h[(a, s)].matrix @ M)
            _record(report, "intertwining", defect=d, passed=d < tol.eps_doteq,
                    where={"patches": [a], "sample": key})
        specs = {b: _Spectral.of(E.h[(b, s)], tol) for b in s}
        for a, b in product(s, repeat=2):
            D = np.asarray(f[(a, s)]) @ E.phi[(a, b, s)] - F.phi[(a, b, s)] @ np.asarray(f[(b, s)])
            mu = _mu_agree(D, specs[b], tol)
            _record(report, "compatibility", mu=mu, passed=mu > 0,
                    where={"patches": [a, b], "sample": key})
    return report


def compose(g, f):
    """Patchwise composite ``g o f`` of two homomorphisms."""
    return {k: np.asarray(g[k]) @ np.asarray(f[k]) for k in f}


def _identity_check(name, comp, E, tol, report):
    for s in E.cover.samples:
        for a in s:
            M = comp[(a, s)]
            mu = _mu_agree(M - np.eye(M.shape[0]), _Spectral.of(E.h[(a, s)], tol), tol)
            _record(report, name, mu=mu, passed=mu > 0,
                    where={"patches": [a], "sample": simplex_key(s)})


def verify_isomorphism(f, f_inv, E, F, tol=None):
    """``f: E -> F`` and ``f_inv: F -> E`` are homomorphisms with both
    composites agreeing with the identity on low spectra."""
    tol = resolve(tol)
    report = VerificationReport("isomorphism", {}, [])
    report.merge(verify_homomorphism(f, E, F, tol), "forward.")
    report.merge(verify_homomorphism(f_inv, F, E, tol), "backward.")
    _identity_check("inverse_on_source", compose(f_inv, f), E, tol, report)
    _identity_check("inverse_on_target", compose(f, f_inv), F, tol, report)
    return report


def _sum_perm(d1, d2):
    """Reorder the block sum of two graded spaces so even vectors come first."""
    (a0, a1), (b0, b1) = d1, d2
    n1 = a0 + a1
    return list(range(a0)) + list(range(n1, n1 + b0)) + list(range(a0, n1)) + list(range(n1 + b0, n1 + b0 + b1))


def _block_sum(A, B, rows, cols):
    M = np.zeros((A.shape[0] + B.shape[0], A.shape[1] + B.shape[1]), complex)
    M[:A.shape[0], :A.shape[1]] = A
    M[A.shape[0]:, A.shape[1]:] = B
    return M[np.ix_(rows, cols)]


def direct_sum(E, F):
    """Fiberwise graded direct sum."""
    if not same_cover(E, F):
        raise CoverMismatch("direct sums need a common cover")
    if (E.twist is None) != (F.twist is None) or (E.twist is not None and E.twist.turns != F.twist.turns):
        raise TwistMismatch("direct sums need identical twists")
    perms, h, phi = {}, {}, {}
    for s in E.cover.samples:
        for a in s:
            dE, dF = E.dims(a, s), F.dims(a, s)
            p = _sum_perm(dE, dF)
            perms[(a, s)] = p
            h[(a, s)] = OddMap(GradedSpace(dE[0] + dF[0], dE[1] + dF[1]),
                               _block_sum(E.h[(a, s)].matrix, F.h[(a, s)].matrix, p, p))
        for a, b in product(s, repeat=2):
            phi[(a, b, s)] = _block_sum(E.phi[(a, b, s)], F.phi[(a, b, s)], perms[(a, s)], perms[(b, s)])
    return VectorialBundle(E.cover, h, phi, E.twist)


def conjugate(E, u):
    """Gauge transform by degree-0 unitaries ``u[a, s]`` on each fiber.

    Returns the transformed bundle together with the isomorphism maps
    ``(forward, backward)``.
    """
    h, phi = {}, {}
    for (a, s), hm in E.h.items():
        U = np.asarray(u[(a, s)], complex)
        h[(a, s)] = OddMap(hm.space, U @ hm.matrix @ U.conj().T)
    for (a, b, s), M in E.phi.items():
        phi[(a, b, s)] = np.asarray(u[(a, s)]) @ M @ np.asarray(u[(b, s)]).conj().T
    forward = {k: np.asarray(v, complex) for k, v in u.items()}
    backward = {k: v.conj().T for k, v in forward.items()}
    return VectorialBundle(E.cover, h, phi, E.twist, E.cutoffs), forward, backward


def support(E, tol=1e-6):
    """Samples where some local ``h`` has a singular value below ``tol``."""
    out = []
    for s in E.cover.samples:
        for a in s:
            M = E.h[(a, s)].matrix
            if M.size and np.min(np.linalg.svd(M, compute_uv=False)) < tol:
                out.append(s)
                break
    return out


def graded_index(E):
    """``dim E^0 - dim E^1`` per connected component of the base.

    Raises :class:`InconsistentIndex` if the value depends on the patch or
    varies within a component.
    """
    K = E.complex
    per_comp = [None] * len(K.components())
    for s in E.cover.samples:
        vals = {a: E.dims(a, s)[0] - E.dims(a, s)[1] for a in s}
        if len(set(vals.values())) != 1:
            raise InconsistentIndex(f"patches disagree on the graded index at {simplex_key(s)}: {vals}")
        v = next(iter(vals.values()))
        i = K.component_of(s)
        if per_comp[i] is None:
            per_comp[i] = v
        elif per_comp[i] != v:
            raise InconsistentIndex(f"graded index is not locally constant (component {i})")
    return tuple(per_comp)
