"""Built-in test scenarios: small bases with operator families on them."""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .approx import FredholmFamily, TwistedFamilyData, kernel_bundle_family
from .cech import UnitaryLiftSystem, dd_cocycle
from .exceptions import InputError, UnknownScenario
from .simplicial import StarCover, complex_from_dict, parse_simplex_key
from .triangulations import boundary_simplex, circle, point
from .vectorial import VectorialBundle

SCENARIOS = ("point-operator", "flow-s1", "bott-s2", "pauli-torsion")

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_Y = 1j * PAULI_X @ PAULI_Z


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    cover: object
    family: object
    lambda_max: float
    expected: dict
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def complex(self):
        return self.cover.complex


def random_unitary(n, rng):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _point_operator(kernel_dims=(1, 1), rank=2, seed=0):
    k0, k1 = (int(k) for k in kernel_dims)
    rank = int(rank)
    if min(k0, k1, rank) < 0:
        raise InputError("kernel dims and rank must be nonnegative")
    rng = np.random.default_rng(seed)
    n0, n1 = rank + k0, rank + k1
    sv = rng.uniform(1.0, 2.0, size=rank)
    A = random_unitary(n1, rng)[:, :rank] @ np.diag(sv) @ random_unitary(n0, rng)[:, :rank].conj().T
    cover = StarCover(point())
    family = FredholmFamily.build(cover, {(0,): A})
    expected = {"graded_dims": [k0, k1], "index": n0 - n1}
    return Scenario("point-operator", cover, family, 1.0, expected, {"operator": A})


def circle_angle(sample, n):
    z = np.mean([np.exp(2j * np.pi * v / n) for v in sample])
    return float(np.angle(z)) % (2 * np.pi)


def _flow_s1(n=12):
    n = int(n)
    cover = StarCover(circle(n))
    mats = {s: np.array([[1 - np.exp(1j * circle_angle(s, n))]]) for s in cover.samples}
    family = FredholmFamily.build(cover, mats)
    expected = {"index": 0, "support": ["0"]}
    return Scenario("flow-s1", cover, family, 1.0, expected)


TETRAHEDRON = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)


def sphere_point(sample):
    y = TETRAHEDRON[list(sample)].mean(axis=0)
    return y / np.linalg.norm(y)


def spin_projector(y):
    """Projection onto the +1 eigenline of ``y . sigma``."""
    return 0.5 * (np.eye(2) + y[0] * PAULI_X + y[1] * PAULI_Y + y[2] * PAULI_Z)


def bott_bundle():
    """Tautological line bundle over the tetrahedral sphere, as a vectorial bundle.

    In patch ``a`` the fiber at ``y`` is framed by the projection of the
    spin-up vector at the vertex ``a``; transitions are inner products of
    these frames.
    """
    cover = StarCover(boundary_simplex(3))
    anchor = {}
    for a in cover.patches:
        w, V = np.linalg.eigh(spin_projector(TETRAHEDRON[a]))
        anchor[a] = V[:, 1]
    trans = {}
    for s in cover.samples:
        P = spin_projector(sphere_point(s))
        frame = {}
        for a in s:
            v = P @ anchor[a]
            frame[a] = v / np.linalg.norm(v)
        for a in s:
            for b in s:
                trans[(a, b, s)] = np.array([[np.vdot(frame[a], frame[b])]])
    return VectorialBundle.from_vector_bundle(cover, (1, 0), trans)


# chern number of bott_bundle() with the orientation of fundamental_cycle
BOTT_CHERN = -1


def _bott_s2():
    E = bott_bundle()
    family = kernel_bundle_family(E)
    expected = {"index": 0, "chern": BOTT_CHERN, "kernel_rank": 1}
    return Scenario("bott-s2", E.cover, family, 2.0, expected, {"bundle": E})


def load_rp2_x_s1():
    """The shipped triangulation of RP^2 x S^1 with its product structure."""
    text = resources.files("vectk").joinpath("data/rp2_x_s1.json").read_text()
    data = json.loads(text)
    return complex_from_dict(data), data


def pauli_lifts(K, data):
    """Rank-2 lifts ``X^w Z^t`` on the product triangulation.

    ``w`` is a mod-2 cocycle pulled back from the projective plane and ``t``
    marks one edge of the circle, so the twist cocycle is their cup product.
    """
    pairs = [tuple(p) for p in data["factors"]["vertex_pairs"]]
    base = {parse_simplex_key(k): v for k, v in data["base_z2_cocycle"].items()}
    marked = set(data["fiber_marked_edge"])
    lifts = {}
    for i, j in K.simplices[1]:
        (a, b), (c, d) = pairs[i], pairs[j]
        w = base.get((min(a, c), max(a, c)), 0) if a != c else 0
        t = 1 if {b, d} == marked else 0
        lifts[(i, j)] = np.linalg.matrix_power(PAULI_X, w) @ np.linalg.matrix_power(PAULI_Z, t)
    return UnitaryLiftSystem.build(K, 2, lifts)


def _pauli_torsion(seed=0, center=None):
    K, data = load_rp2_x_s1()
    cover = StarCover(K)
    lifts = pauli_lifts(K, data)
    if center is None:
        deg = [len(K.cofaces((v,))) for v in range(K.n_vertices)]
        center = int(np.argmin(deg))
    near = {center} | {v for e in K.simplices[1] if center in e for v in e}
    rng = np.random.default_rng(seed)
    local = {}
    for s in cover.samples:
        scale = sum(v not in near for v in s) / len(s)
        B = scale * random_unitary(2, rng)
        m = min(s)
        for p in s:
            g = lifts.g(p, m)
            local[(p, s)] = g @ B @ g.conj().T
    family = TwistedFamilyData.build(cover, local, lifts)
    expected = {"index": 0, "twist_group": "Z/2", "twist_torsion": [1],
                "obstruction": {"1": "Obstructed", "2": "Solvable", "3": "Obstructed", "4": "Solvable"},
                "cohomology": data["cohomology"]}
    extras = {"lifts": lifts, "cocycle": dd_cocycle(lifts), "center": center, "source": data}
    return Scenario("pauli-torsion", cover, family, 2.0, expected, extras)


_BUILDERS = {
    "point-operator": _point_operator,
    "flow-s1": _flow_s1,
    "bott-s2": _bott_s2,
    "pauli-torsion": _pauli_torsion,
}


def builtin_scenario(name, params=None):
    """Build a named scenario; ``params`` are passed to its builder."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    try:
        return builder(**(params or {}))
    except TypeError as exc:
        raise InputError(f"bad parameters for {name}: {exc}") from None
