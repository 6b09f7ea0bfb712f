"""Finite simplicial complexes, star covers and integral cohomology.

Simplices are stored as ascending vertex tuples. Cochains of degree ``k`` are
vectors indexed by the ``k``-simplices in the complex's canonical order
(lexicographic), and the coboundary uses the alternating-sign convention

    (delta c)(v0..vk+1) = sum_i (-1)^i c(v0..^vi..vk+1).
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import gcd

import numpy as np

from .exceptions import DegreeOutOfRange, InputError, NotACocycle
from .smith import as_int_matrix, int_matmul, int_zeros, smith_normal_form


def simplex_key(simplex):
    return ",".join(str(v) for v in simplex)


def parse_simplex_key(key):
    key = key.strip()
    if not key:
        return ()
    return tuple(sorted(int(v) for v in key.split(",")))


def permutation_sign(seq):
    """Sign of the permutation sorting ``seq`` (0 if it has repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    n_vertices: int
    simplices: tuple  # simplices[k] = tuple of ascending k-simplices, lexicographic
    _index: dict = field(repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self):
        return len(self.simplices) - 1

    def count(self, k):
        return len(self.simplices[k]) if 0 <= k < len(self.simplices) else 0

    def f_vector(self):
        return tuple(len(s) for s in self.simplices)

    def index(self, simplex):
        """Position of an ascending simplex within its dimension."""
        return self._index[tuple(simplex)]

    def __contains__(self, simplex):
        return tuple(sorted(simplex)) in self._index

    def all_simplices(self):
        for level in self.simplices:
            yield from level

    @property
    def maximal_simplices(self):
        cached = self._cache.get("maximal")
        if cached is None:
            faces = set()
            for level in self.simplices[1:]:
                for s in level:
                    faces.update(combinations(s, len(s) - 1))
            cached = tuple(s for s in self.all_simplices() if s not in faces)
            self._cache["maximal"] = cached
        return cached

    def cofaces(self, simplex):
        """All simplices containing ``simplex`` (itself included), canonical order."""
        table = self._cache.get("cofaces")
        if table is None:
            table = {s: [] for s in self.all_simplices()}
            for s in self.all_simplices():
                for r in range(1, len(s) + 1):
                    for face in combinations(s, r):
                        table[face].append(s)
            table = {k: tuple(v) for k, v in table.items()}
            self._cache["cofaces"] = table
        return table.get(tuple(sorted(simplex)), ())

    def components(self):
        """Connected components as sorted vertex tuples, ordered by least vertex."""
        cached = self._cache.get("components")
        if cached is None:
            parent = list(range(self.n_vertices))

            def find(v):
                while parent[v] != v:
                    parent[v] = parent[parent[v]]
                    v = parent[v]
                return v

            for a, b in self.simplices[1] if self.dim >= 1 else ():
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            groups = {}
            for v in range(self.n_vertices):
                groups.setdefault(find(v), []).append(v)
            cached = tuple(tuple(g) for _, g in sorted(groups.items()))
            self._cache["components"] = cached
        return cached

    def component_of(self, simplex):
        v = simplex[0]
        for i, comp in enumerate(self.components()):
            if v in comp:
                return i
        raise KeyError(simplex)

    def to_dict(self):
        return {"vertices": self.n_vertices,
                "maximal_simplices": [list(s) for s in self.maximal_simplices]}


def build_complex(maximal_simplices, n_vertices=None):
    """Close a list of vertex sets under taking faces.

    Every vertex ``0..n_vertices-1`` becomes a 0-simplex, so isolated vertices
    are allowed. Duplicates are ignored.
    """
    faces = set()
    top = 0
    for s in maximal_simplices:
        s = tuple(sorted(set(int(v) for v in s)))
        if not s:
            continue
        if s[0] < 0:
            raise InputError(f"negative vertex index in {s}")
        top = max(top, s[-1] + 1)
        for r in range(1, len(s) + 1):
            faces.update(combinations(s, r))
    if n_vertices is None:
        n_vertices = top
    if n_vertices < top:
        raise InputError(f"vertex count {n_vertices} is smaller than max index + 1 = {top}")
    if n_vertices == 0:
        raise InputError("a simplicial complex needs at least one vertex")
    faces.update((v,) for v in range(n_vertices))
    dim = max(len(s) for s in faces) - 1
    levels = tuple(tuple(sorted(s for s in faces if len(s) == k + 1)) for k in range(dim + 1))
    index = {s: i for level in levels for i, s in enumerate(level)}
    return SimplicialComplex(n_vertices, levels, index)


def complex_from_dict(data):
    try:
        return build_complex(data["maximal_simplices"], data.get("vertices"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed complex description: {exc}") from None


@dataclass(frozen=True, eq=False)
class StarCover:
    """Cover of |K| by open vertex stars.

    Patch ``a`` is the open star of vertex ``a``. Each simplex contributes one
    sample point (its barycenter), which lies exactly in the patches indexed
    by the simplex's vertices; so the overlap of a set of patches is nonempty
    iff the set spans a simplex.
    """

    complex: SimplicialComplex

    @property
    def patches(self):
        return range(self.complex.n_vertices)

    @property
    def samples(self):
        return tuple(self.complex.all_simplices())

    def samples_in(self, *patches):
        """Sample points lying in the common overlap of ``patches``."""
        return self.complex.cofaces(tuple(sorted(set(patches))))

    @staticmethod
    def patches_at(sample):
        return tuple(sample)

    def barycentric(self, sample):
        """Partition of unity at a sample point: ``{vertex: weight}``."""
        return {v: 1.0 / len(sample) for v in sample}


def star_cover(K):
    return StarCover(K)


def _coboundary(K, k):
    key = ("delta", k)
    cached = K._cache.get(key)
    if cached is not None:
        return cached
    rows, cols = K.count(k + 1), K.count(k) if k >= 0 else 0
    M = int_zeros((rows, cols))
    if k >= 0:
        for r, tau in enumerate(K.simplices[k + 1] if k + 1 <= K.dim else ()):
            for i in range(len(tau)):
                face = tau[:i] + tau[i + 1:]
                M[r, K.index(face)] = (-1) ** i
    K._cache[key] = M
    return M


def coboundary_matrix(K, k):
    """Integer matrix of ``delta_k : C^k -> C^(k+1)`` (rows = (k+1)-simplices)."""
    if not 0 <= k < K.dim:
        raise DegreeOutOfRange(f"coboundary degree {k} outside [0, {K.dim})")
    return _coboundary(K, k).copy()


@dataclass(frozen=True, eq=False)
class IntegerCochain:
    complex: SimplicialComplex
    degree: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.complex.count(self.degree):
            raise InputError(f"degree-{self.degree} cochain needs {self.complex.count(self.degree)} "
                             f"values, got {len(self.values)}")

    @classmethod
    def zero(cls, K, degree):
        return cls(K, degree, (0,) * K.count(degree))

    @classmethod
    def from_dict(cls, K, degree, values):
        out = [0] * K.count(degree)
        for key, v in values.items():
            s = tuple(int(x) for x in key.split(",")) if isinstance(key, str) else tuple(key)
            sign = permutation_sign(s)
            srt = tuple(sorted(s))
            if sign == 0 or srt not in K or len(srt) != degree + 1:
                raise InputError(f"{key!r} is not a {degree}-simplex of the complex")
            out[K.index(srt)] = sign * int(v)
        return cls(K, degree, tuple(out))

    def value(self, simplex):
        sign = permutation_sign(simplex)
        if sign == 0:
            return 0
        return sign * self.values[self.complex.index(tuple(sorted(simplex)))]

    def vector(self):
        return as_int_matrix(list(self.values), shape=(len(self.values), 1))

    def delta(self):
        M = _coboundary(self.complex, self.degree)
        v = int_matmul(M, self.vector())
        return IntegerCochain(self.complex, self.degree + 1, tuple(int(x) for x in v[:, 0]))

    def __add__(self, other):
        return IntegerCochain(self.complex, self.degree,
                              tuple(a + b for a, b in zip(self.values, other.values)))

    def __neg__(self):
        return IntegerCochain(self.complex, self.degree, tuple(-a for a in self.values))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n):
        return IntegerCochain(self.complex, self.degree, tuple(n * a for a in self.values))

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, IntegerCochain) and other.complex is self.complex
                and other.degree == self.degree and other.values == self.values)

    def __hash__(self):
        return hash((self.degree, self.values))

    def is_zero(self):
        return not any(self.values)

    def to_dict(self):
        K = self.complex
        return {"degree": self.degree,
                "values": {simplex_key(s): v for s, v in zip(K.simplices[self.degree]
                                                              if self.degree <= K.dim else (),
                                                              self.values) if v}}


@dataclass(frozen=True, eq=False)
class CohomologyGroup:
    """``H^k(K; Z) = Z^free_rank (+) Z/d1 (+) Z/d2 ...``.

    ``representatives`` lists one cocycle per summand: torsion generators in
    the order of ``torsion``, then free generators.
    """

    complex: SimplicialComplex
    degree: int
    free_rank: int
    torsion: tuple
    representatives: tuple
    _kernel_rank: int = field(repr=False)
    _outer: object = field(repr=False)
    _inner: object = field(repr=False)

    def __str__(self):
        parts = (["Z"] * self.free_rank) + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    @property
    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion


@dataclass(frozen=True)
class ClassCoordinates:
    """Coordinates of a cohomology class.

    ``torsion[i]`` is taken modulo ``group.torsion[i]``. ``witness`` is an
    integer cochain ``b`` with ``delta b = c``, present exactly when the class
    vanishes.
    """

    group: CohomologyGroup
    free: tuple
    torsion: tuple
    witness: IntegerCochain = None

    @property
    def is_zero(self):
        return not any(self.free) and not any(self.torsion)

    @property
    def order(self):
        """Order of the class; ``None`` when it has infinite order."""
        if any(self.free):
            return None
        n = 1
        for t, d in zip(self.torsion, self.group.torsion):
            o = d // gcd(t, d)
            n = n * o // gcd(n, o)
        return n


def cohomology(K, k):
    """Integral cohomology group ``H^k(K)`` with representative cocycles.

    Degrees above ``dim K`` are allowed and give the trivial group.
    """
    if k < 0:
        raise DegreeOutOfRange(f"cohomology degree must be nonnegative, got {k}")
    key = ("H", k)
    cached = K._cache.get(key)
    if cached is not None:
        return cached
    outer = smith_normal_form(_coboundary(K, k))
    r = outer.rank
    m_k = K.count(k)
    Z = outer.V[:, r:]
    C = int_matmul(outer.V_inv, _coboundary(K, k - 1))[r:, :]
    inner = smith_normal_form(C)
    rho = inner.rank
    diag = inner.diagonal
    gens = int_matmul(Z, inner.U_inv) if Z.shape[1] else int_zeros((m_k, 0))
    torsion, reps = [], []
    for i in range(rho):
        if diag[i] > 1:
            torsion.append(diag[i])
            reps.append(IntegerCochain(K, k, tuple(int(x) for x in gens[:, i])))
    for i in range(rho, Z.shape[1]):
        reps.append(IntegerCochain(K, k, tuple(int(x) for x in gens[:, i])))
    group = CohomologyGroup(K, k, Z.shape[1] - rho, tuple(torsion), tuple(reps), r, outer, inner)
    K._cache[key] = group
    return group


def integer_class(c):
    """Coordinates of the class of the integer cocycle ``c``.

    Raises :class:`NotACocycle` if ``delta c != 0``.
    """
    K, k = c.complex, c.degree
    if any(c.delta().values):
        raise NotACocycle(f"degree-{k} integer cochain is not a cocycle")
    G = cohomology(K, k)
    outer, inner, r = G._outer, G._inner, G._kernel_rank
    if K.count(k) == 0:
        return ClassCoordinates(G, (), (), IntegerCochain.zero(K, k - 1) if k >= 1 else None)
    x = int_matmul(outer.V_inv, c.vector())[r:, :]
    y = int_matmul(inner.U, x)[:, 0] if x.shape[0] else []
    diag = inner.diagonal
    rho = inner.rank
    torsion = tuple(int(y[i]) % diag[i] for i in range(rho) if diag[i] > 1)
    free = tuple(int(y[i]) for i in range(rho, len(y)))
    coords = ClassCoordinates(G, free, torsion)
    if not coords.is_zero:
        return coords
    if k == 0:
        return ClassCoordinates(G, free, torsion, None)
    w = int_zeros((inner.V.shape[0], 1))
    for i in range(rho):
        w[i, 0] = int(y[i]) // diag[i]
    b = int_matmul(inner.V, w)
    witness = IntegerCochain(K, k - 1, tuple(int(v) for v in b[:, 0]))
    if witness.delta() != c:
        raise ArithmeticError("coboundary witness failed to reproduce the cocycle")
    return ClassCoordinates(G, free, torsion, witness)


def euler_characteristic(K):
    return sum((-1) ** k * n for k, n in enumerate(K.f_vector()))


def betti_numbers(K):
    return tuple(cohomology(K, k).free_rank for k in range(K.dim + 1))
