"""U(1)-valued Cech cochains with exact rational phases.

A phase ``exp(2 pi i q)`` is stored as its turn ``q``, a ``Fraction`` reduced
into ``[0, 1)``; the group law is addition of turns. Cochains live on the
simplices of a complex, which is the nerve of its star cover, and use the
same orientation convention as :func:`vectk.simplicial.coboundary_matrix`.
"""

import cmath
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

import numpy as np

from .config import resolve
from .exceptions import (DegreeOutOfRange, InputError, IrrationalPhase, NotACocycle,
                         NotClosedSurface, NotProjectivelyFlat)
from .simplicial import (IntegerCochain, _coboundary, cohomology, integer_class,
                         permutation_sign, simplex_key)
from .smith import as_int_matrix, int_matmul, smith_normal_form
from .validation import check_unitary


def _turn(q):
    q = Fraction(q)
    return q - floor(q)


@dataclass(frozen=True, eq=False)
class U1Cochain:
    complex: object
    degree: int
    turns: tuple

    def __post_init__(self):
        if len(self.turns) != self.complex.count(self.degree):
            raise InputError(f"degree-{self.degree} U(1) cochain needs "
                             f"{self.complex.count(self.degree)} values, got {len(self.turns)}")
        object.__setattr__(self, "turns", tuple(_turn(q) for q in self.turns))

    @classmethod
    def zero(cls, K, degree):
        return cls(K, degree, (Fraction(0),) * K.count(degree))

    @classmethod
    def from_dict(cls, K, degree, turns):
        out = [Fraction(0)] * K.count(degree)
        for key, q in turns.items():
            s = tuple(int(x) for x in key.split(",")) if isinstance(key, str) else tuple(key)
            sign = permutation_sign(s)
            srt = tuple(sorted(s))
            if sign == 0 or len(srt) != degree + 1 or srt not in K:
                raise InputError(f"{key!r} is not a {degree}-simplex of the complex")
            try:
                out[K.index(srt)] = sign * Fraction(q)
            except (ValueError, ZeroDivisionError):
                raise InputError(f"bad turn {q!r} on {key!r}") from None
        return cls(K, degree, tuple(out))

    def value(self, simplex):
        """Turn on an arbitrarily ordered simplex (0 on degenerate tuples)."""
        sign = permutation_sign(simplex)
        if sign == 0:
            return Fraction(0)
        return _turn(sign * self.turns[self.complex.index(tuple(sorted(simplex)))])

    def phase(self, simplex):
        return cmath.exp(2j * cmath.pi * float(self.value(simplex)))

    def __add__(self, other):
        self._check_same(other)
        return U1Cochain(self.complex, self.degree,
                         tuple(a + b for a, b in zip(self.turns, other.turns)))

    def __neg__(self):
        return U1Cochain(self.complex, self.degree, tuple(-a for a in self.turns))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n):
        """``c * r`` is the pointwise ``r``-th power ``c^r``."""
        return U1Cochain(self.complex, self.degree, tuple(int(n) * a for a in self.turns))

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, U1Cochain) and other.complex is self.complex
                and other.degree == self.degree and other.turns == self.turns)

    def __hash__(self):
        return hash((self.degree, self.turns))

    def _check_same(self, other):
        if other.complex is not self.complex or other.degree != self.degree:
            raise InputError("cochains live on different complexes or degrees")

    def is_zero(self):
        return not any(self.turns)

    def lift(self):
        """Rational lift with values in ``[0, 1)``, as an object column vector."""
        v = np.empty((len(self.turns), 1), dtype=object)
        for i, q in enumerate(self.turns):
            v[i, 0] = q
        return v

    def to_dict(self):
        K = self.complex
        level = K.simplices[self.degree] if self.degree <= K.dim else ()
        return {"degree": self.degree,
                "turns": {simplex_key(s): str(q) for s, q in zip(level, self.turns) if q}}


def u1_delta(c):
    """Coboundary of a U(1) cochain, computed on turns."""
    M = _coboundary(c.complex, c.degree)
    v = int_matmul(M, c.lift())
    return U1Cochain(c.complex, c.degree + 1, tuple(v[:, 0]))


def _require_cocycle(c):
    if not u1_delta(c).is_zero():
        raise NotACocycle(f"degree-{c.degree} U(1) cochain is not a cocycle")


def _snf(K, k):
    key = ("snf_delta", k)
    cached = K._cache.get(key)
    if cached is None:
        cached = smith_normal_form(_coboundary(K, k))
        K._cache[key] = cached
    return cached


def solve_u1_coboundary(c):
    """Return ``b`` with ``u1_delta(b) == c`` in Q/Z-valued cochains, or None.

    With ``U B V = D`` the Smith form of the integer coboundary ``B``, the
    equation ``B b = c + z`` (``z`` integral) is solvable iff every
    coordinate of ``U c`` beyond the rank of ``B`` is an integer.
    """
    K, k = c.complex, c.degree
    if k < 1:
        raise DegreeOutOfRange("coboundary solving needs degree >= 1")
    _require_cocycle(c)
    S = _snf(K, k - 1)
    y = int_matmul(S.U, c.lift())[:, 0] if S.U.shape[0] else []
    diag, rho = S.diagonal, S.rank
    for i in range(rho, len(y)):
        if Fraction(y[i]).denominator != 1:
            return None
    w = np.empty((S.V.shape[0], 1), dtype=object)
    w.fill(Fraction(0))
    for i in range(rho):
        w[i, 0] = Fraction(y[i]) / diag[i]
    b = U1Cochain(K, k - 1, tuple(int_matmul(S.V, w)[:, 0]) if S.V.shape[0] else ())
    if u1_delta(b) != c:
        raise ArithmeticError("U(1) coboundary witness failed verification")
    return b


@dataclass(frozen=True, eq=False)
class UnitaryLiftSystem:
    """Locally constant unitaries ``u_ab`` on the edges of a star cover.

    Only ascending edges ``a < b`` are stored; ``u_ba`` is the inverse and
    ``u_aa`` the identity.
    """

    complex: object
    rank: int
    unitaries: dict = field(repr=False)

    @classmethod
    def build(cls, K, rank, unitaries, tol=None):
        tol = resolve(tol)
        out = {}
        for edge, U in unitaries.items():
            a, b = edge
            if (min(a, b), max(a, b)) not in K or a == b:
                raise InputError(f"{edge} is not an edge of the complex")
            U = check_unitary(U, tol.eps_orth, name=f"lift on {edge}")
            if U.shape != (rank, rank):
                raise InputError(f"lift on {edge} has shape {U.shape}, expected {(rank, rank)}")
            out[(a, b) if a < b else (b, a)] = U if a < b else U.conj().T
        missing = [e for e in K.simplices[1] if e not in out] if K.dim >= 1 else []
        if missing:
            raise InputError(f"missing lifts on edges {missing[:5]}")
        return cls(K, rank, out)

    def g(self, a, b):
        if a == b:
            return np.eye(self.rank, dtype=complex)
        if a < b:
            return self.unitaries[(a, b)]
        return self.unitaries[(b, a)].conj().T


def _recognize_turn(z, q_max, eps):
    q = (cmath.phase(z) / (2 * cmath.pi)) % 1.0
    frac = Fraction(q).limit_denominator(q_max)
    for cand in (frac, Fraction(0), Fraction(1)):
        if abs(q - float(cand)) < eps:
            return _turn(cand)
    raise IrrationalPhase(f"phase {q:.12g} turns has no rational match with denominator <= {q_max}")


def dd_cocycle(lifts, tol=None):
    """The scalar 2-cochain ``c_abc`` with ``u_ab u_bc = c_abc u_ac``."""
    tol = resolve(tol)
    K = lifts.complex
    r = lifts.rank
    turns = []
    for a, b, c in (K.simplices[2] if K.dim >= 2 else ()):
        M = lifts.g(a, b) @ lifts.g(b, c) @ lifts.g(a, c).conj().T
        m = np.trace(M) / r
        if np.max(np.abs(M - m * np.eye(r))) > tol.eps_scalar or abs(abs(m) - 1) > tol.eps_scalar:
            raise NotProjectivelyFlat(f"u_ab u_bc u_ac^-1 is not a scalar unitary on {(a, b, c)}")
        turns.append(_recognize_turn(m, tol.q_max, tol.eps_scalar))
    out = U1Cochain(K, 2, tuple(turns))
    if not u1_delta(out).is_zero():
        raise NotACocycle("triple products of the lifts violate associativity")
    return out


def connecting_to_integer(c):
    """Integer ``(k+1)``-cocycle ``delta(lift of c)`` representing the Bockstein of ``c``."""
    v = int_matmul(_coboundary(c.complex, c.degree), c.lift())
    vals = []
    for x in v[:, 0]:
        x = Fraction(x)
        if x.denominator != 1:
            raise NotACocycle(f"degree-{c.degree} U(1) cochain is not a cocycle")
        vals.append(int(x))
    return IntegerCochain(c.complex, c.degree + 1, tuple(vals))


@dataclass(frozen=True)
class DDClass:
    """Integral class of a U(1) cocycle, with its representative."""

    cocycle: U1Cochain
    coordinates: object  # simplicial.ClassCoordinates

    @property
    def is_zero(self):
        return self.coordinates.is_zero

    @property
    def order(self):
        return self.coordinates.order

    @property
    def free(self):
        return self.coordinates.free

    @property
    def torsion(self):
        return self.coordinates.torsion

    @property
    def group(self):
        return self.coordinates.group

    def invariant(self):
        """Hashable summary used to compare twists."""
        return (self.coordinates.group.degree, self.free, self.torsion,
                self.coordinates.group.torsion)

    def to_dict(self):
        g = self.coordinates.group
        return {"degree": g.degree, "group": str(g), "free": list(self.free),
                "torsion": list(self.torsion), "torsion_orders": list(g.torsion),
                "order": self.order, "zero": self.is_zero}


def dd_class(c):
    return DDClass(c, integer_class(connecting_to_integer(c)))


@dataclass(frozen=True)
class ObstructionResult:
    """Outcome of :func:`rank_obstruction`.

    When ``solvable`` is true, ``witness`` is a cochain ``b`` with
    ``u1_delta(b) == c * rank`` whenever one exists among locally constant
    cochains (always, if the second rational cohomology vanishes).
    """

    solvable: bool
    rank: int
    order: object
    witness: U1Cochain = None


def rank_obstruction(c, r):
    """Decide whether ``c^r`` is a coboundary, i.e. whether ``r * [c] = 0``."""
    if int(r) != r or r < 1:
        raise InputError(f"rank must be a positive integer, got {r!r}")
    _require_cocycle(c)
    order = dd_class(c).order
    if order is None or r % order:
        return ObstructionResult(False, r, order)
    return ObstructionResult(True, r, order, solve_u1_coboundary(c * r))


def torsion_cocycle(K, degree, index=0):
    """A U(1) cocycle whose Bockstein is the ``index``-th torsion generator of H^(degree+1)."""
    G = cohomology(K, degree + 1)
    if index >= len(G.torsion):
        raise InputError(f"H^{degree + 1} has only {len(G.torsion)} torsion summands")
    n, z = G.torsion[index], G.representatives[index]
    b = integer_class(z * n).witness
    return U1Cochain(K, degree, tuple(Fraction(v, n) for v in b.values))


@dataclass(frozen=True, eq=False)
class SampledU1Cochain:
    """Line-bundle transition phases sampled on overlaps.

    ``values[(a, b)][sample]`` is the turn of ``g_ab`` at the sample point;
    every sample in the overlap of patches ``a < b`` must be present.
    """

    complex: object
    values: dict = field(repr=False)

    @classmethod
    def from_cochain(cls, c):
        if c.degree != 1:
            raise DegreeOutOfRange("transitions are degree-1 cochains")
        K = c.complex
        vals = {}
        for e, q in zip(K.simplices[1], c.turns):
            vals[e] = {s: q for s in K.cofaces(e)}
        return cls(K, vals)


def fundamental_cycle(K):
    """Orientation signs of the triangles of a closed oriented surface.

    In each component the least triangle gets sign +1.
    """
    if K.dim != 2:
        raise NotClosedSurface(f"expected a 2-dimensional complex, got dimension {K.dim}")
    tris = K.simplices[2]
    edge_tris = {e: [] for e in K.simplices[1]}
    covered = set()
    for t in tris:
        for i in range(3):
            e = t[:i] + t[i + 1:]
            edge_tris[e].append((t, (-1) ** i))
            covered.update(e)
    if covered != set(range(K.n_vertices)):
        raise NotClosedSurface("some vertex lies in no triangle")
    for e, ts in edge_tris.items():
        if len(ts) != 2:
            raise NotClosedSurface(f"edge {e} lies in {len(ts)} triangles")
    sign = {}
    for start in tris:
        if start in sign:
            continue
        sign[start] = 1
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for i in range(3):
                e = t[:i] + t[i + 1:]
                (t1, s1), (t2, s2) = edge_tris[e]
                other, so = (t2, s2) if t1 == t else (t1, s1)
                st = s1 if t1 == t else s2
                want = -sign[t] * st * so
                if other in sign:
                    if sign[other] != want:
                        raise NotClosedSurface("surface is not orientable")
                else:
                    sign[other] = want
                    queue.append(other)
    return sign


def _wrap(x):
    return x - floor(x + Fraction(1, 2)) if isinstance(x, Fraction) else x - floor(x + 0.5)


def chern_number(transitions, tol=1e-6):
    """First Chern number of a line bundle over a closed oriented surface.

    ``transitions`` is a degree-1 :class:`U1Cochain` or a
    :class:`SampledU1Cochain`. Each phase ``g_ab`` is unwrapped continuously
    from the edge sample to the adjacent triangle samples; the integers
    ``n_abc = t_ab + t_bc - t_ac`` form the connecting-map cocycle, which is
    paired with the fundamental cycle.
    """
    if isinstance(transitions, U1Cochain):
        if transitions.degree != 1:
            raise DegreeOutOfRange("transitions are degree-1 cochains")
        K = transitions.complex
        signs = fundamental_cycle(K)
        z = connecting_to_integer(transitions)
        return sum(signs[t] * v for t, v in zip(K.simplices[2], z.values))
    K = transitions.complex
    signs = fundamental_cycle(K)
    vals = transitions.values

    def unwrapped(e, t):
        try:
            base, at = vals[e][e], vals[e][t]
        except KeyError:
            raise InputError(f"missing transition sample for edge {e} at {t}") from None
        return (base - floor(base)) + _wrap(at - base)

    total = 0
    for t in K.simplices[2]:
        a, b, c = t
        n = unwrapped((a, b), t) + unwrapped((b, c), t) - unwrapped((a, c), t)
        k = round(n)
        if abs(n - k) > tol:
            raise NotACocycle(f"transitions fail the cocycle condition at {t} (defect {float(n - k):.3g})")
        total += signs[t] * int(k)
    return total
