from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from test_simplicial import rank_mod_p
from vectk.cech import (SampledU1Cochain, U1Cochain, UnitaryLiftSystem, chern_number,
                        connecting_to_integer, dd_class, dd_cocycle, fundamental_cycle,
                        rank_obstruction, solve_u1_coboundary, torsion_cocycle, u1_delta)
from vectk.exceptions import (IrrationalPhase, NotACocycle, NotClosedSurface,
                              NotProjectivelyFlat)
from vectk.scenarios import TETRAHEDRON, bott_bundle, load_rp2_x_s1, pauli_lifts, spin_projector
from vectk.simplicial import IntegerCochain, _coboundary, integer_class
from vectk.triangulations import (boundary_simplex, circle, projective_plane,
                                  pseudo_projective_plane, suspension)

turns = st.fractions(min_value=0, max_value=1, max_denominator=12)


@pytest.fixture(scope="module")
def pauli():
    K, data = load_rp2_x_s1()
    return K, pauli_lifts(K, data)


def test_delta_of_single_edge_turn():
    K = boundary_simplex(3)
    b = U1Cochain.from_dict(K, 1, {"0,1": "1/3"})
    d = u1_delta(b)
    nonzero = {t: q for t, q in zip(K.simplices[2], d.turns) if q}
    # (0,1) is the last face of both incident triangles, so the sign is +1
    assert nonzero == {(0, 1, 2): Fraction(1, 3), (0, 1, 3): Fraction(1, 3)}


def test_turns_are_reduced_and_antisymmetric():
    K = boundary_simplex(3)
    c = U1Cochain.from_dict(K, 1, {"1,0": "1/4"})
    assert c.value((0, 1)) == Fraction(3, 4)
    assert c.value((1, 0)) == Fraction(1, 4)
    assert U1Cochain.from_dict(K, 1, {"0,1": "5/4"}).value((0, 1)) == Fraction(1, 4)


@given(st.lists(turns, min_size=10, max_size=10))
def test_delta_squares_to_zero(vals):
    K = boundary_simplex(4)
    b = U1Cochain(K, 1, tuple(vals))
    assert u1_delta(u1_delta(b)).is_zero()


def test_solve_zero():
    K = boundary_simplex(3)
    b = solve_u1_coboundary(U1Cochain.zero(K, 2))
    assert b is not None and u1_delta(b).is_zero()


@given(st.lists(turns, min_size=6, max_size=6))
def test_solve_recovers_coboundaries(vals):
    K = boundary_simplex(3)
    c = u1_delta(U1Cochain(K, 1, tuple(vals)))
    b = solve_u1_coboundary(c)
    assert b is not None and u1_delta(b) == c


def test_solve_detects_torsion():
    K = suspension(pseudo_projective_plane(3))
    c = torsion_cocycle(K, 2)
    assert solve_u1_coboundary(c) is None
    assert solve_u1_coboundary(c * 2) is None
    b = solve_u1_coboundary(c * 3)
    assert b is not None and u1_delta(b) == c * 3


def test_solve_rejects_non_cocycle():
    K = boundary_simplex(4)
    with pytest.raises(NotACocycle):
        solve_u1_coboundary(U1Cochain.from_dict(K, 2, {"0,1,2": "1/2"}))


def test_identity_lifts_give_zero_cocycle():
    K = boundary_simplex(3)
    lifts = UnitaryLiftSystem.build(K, 2, {e: np.eye(2) for e in K.simplices[1]})
    assert dd_cocycle(lifts).is_zero()


twelfths = st.integers(0, 11).map(lambda k: Fraction(k, 12))


@given(st.lists(twelfths, min_size=6, max_size=6))
def test_scalar_lifts_give_the_coboundary(vals):
    K = boundary_simplex(3)
    b = U1Cochain(K, 1, tuple(vals))
    lifts = UnitaryLiftSystem.build(
        K, 3, {e: np.exp(2j * np.pi * float(q)) * np.eye(3) for e, q in zip(K.simplices[1], b.turns)})
    assert dd_cocycle(lifts) == u1_delta(b)


def test_non_scalar_triple_product_is_rejected():
    K = boundary_simplex(3)
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    lifts = {e: np.eye(2) for e in K.simplices[1]}
    lifts[(0, 1)] = H
    with pytest.raises(NotProjectivelyFlat):
        dd_cocycle(UnitaryLiftSystem.build(K, 2, lifts))


def test_irrational_phase_is_rejected():
    K = boundary_simplex(3)
    lifts = {e: np.eye(1) for e in K.simplices[1]}
    lifts[(0, 1)] = np.array([[np.exp(2j * np.pi * (np.sqrt(2) - 1))]])
    with pytest.raises(IrrationalPhase):
        dd_cocycle(UnitaryLiftSystem.build(K, 1, lifts))


def test_pauli_cocycle_has_half_turns(pauli):
    K, lifts = pauli
    c = dd_cocycle(lifts)
    assert set(c.turns) == {Fraction(0), Fraction(1, 2)}
    assert u1_delta(c).is_zero()


def test_pauli_class_is_the_nonzero_element_of_z2(pauli):
    K, lifts = pauli
    c = dd_cocycle(lifts)
    cls = dd_class(c)
    assert str(cls.group) == "Z/2" and cls.torsion == (1,) and cls.order == 2
    # independent check: the Bockstein cocycle is not a coboundary even mod 2
    z = connecting_to_integer(c)
    D = _coboundary(K, 2)
    aug = np.concatenate([D, z.vector()], axis=1)
    assert rank_mod_p(aug, 2) == rank_mod_p(D, 2) + 1


def test_pauli_cocycle_is_not_solvable_but_its_double_is(pauli):
    K, lifts = pauli
    c = dd_cocycle(lifts)
    assert solve_u1_coboundary(c) is None
    b = solve_u1_coboundary(c * 2)
    assert b is not None and u1_delta(b) == c * 2


def test_connecting_map_ignores_the_choice_of_lift(pauli, rng):
    K, lifts = pauli
    c = dd_cocycle(lifts)
    shift = rng.integers(-3, 4, size=len(c.turns))
    lift = np.array([[q + int(n)] for q, n in zip(c.turns, shift)], dtype=object)
    from vectk.smith import int_matmul
    other = IntegerCochain(K, 3, tuple(int(x) for x in int_matmul(_coboundary(K, 2), lift)[:, 0]))
    assert integer_class(other).torsion == dd_class(c).torsion


def test_class_ignores_coboundary_changes(pauli, rng):
    K, lifts = pauli
    c = dd_cocycle(lifts)
    b = U1Cochain(K, 1, tuple(Fraction(int(x), 6) for x in rng.integers(0, 6, size=K.count(1))))
    assert dd_class(c + u1_delta(b)).torsion == dd_class(c).torsion


def test_class_on_two_sphere_vanishes():
    K = boundary_simplex(3)
    c = U1Cochain.from_dict(K, 2, {"0,1,2": "1/5"})
    cls = dd_class(c)
    assert cls.is_zero and cls.coordinates.witness is not None


@pytest.mark.parametrize("n", [2, 3, 4])
def test_obstruction_follows_the_order(n):
    K = suspension(pseudo_projective_plane(n))
    c = torsion_cocycle(K, 2)
    assert dd_class(c).order == n
    for r in range(1, 13):
        res = rank_obstruction(c, r)
        assert res.solvable == (r % n == 0)
        if res.solvable:
            assert u1_delta(res.witness) == c * r


def test_obstruction_of_trivial_class():
    K = boundary_simplex(4)
    for r in (1, 2, 5):
        res = rank_obstruction(U1Cochain.zero(K, 2), r)
        assert res.solvable and res.witness.is_zero() is not None


def test_obstruction_rejects_bad_rank():
    K = boundary_simplex(4)
    with pytest.raises(ValueError):
        rank_obstruction(U1Cochain.zero(K, 2), 0)


def test_fundamental_cycle_requires_closed_surface():
    with pytest.raises(NotClosedSurface):
        fundamental_cycle(circle(4))
    with pytest.raises(NotClosedSurface):
        fundamental_cycle(pseudo_projective_plane(2))
    with pytest.raises(NotClosedSurface):
        fundamental_cycle(projective_plane())


def test_fundamental_cycle_is_a_cycle():
    K = boundary_simplex(3)
    signs = fundamental_cycle(K)
    D = _coboundary(K, 1)
    z = np.array([signs[t] for t in K.simplices[2]], dtype=object)
    assert not (D.T.dot(z)).any()


def test_locally_constant_transitions_have_zero_chern_number():
    K = boundary_simplex(3)
    assert chern_number(U1Cochain.zero(K, 1)) == 0
    c = u1_delta(U1Cochain.from_dict(K, 0, {"1": "1/3", "2": "1/7"}))
    assert not c.is_zero() and chern_number(c) == 0


def test_chern_number_requires_cocycle():
    K = boundary_simplex(3)
    bad = SampledU1Cochain.from_cochain(U1Cochain.from_dict(K, 1, {"0,1": "1/3"}))
    with pytest.raises(NotACocycle):
        chern_number(bad)


def bott_transitions():
    E = bott_bundle()
    K = E.complex
    vals = {}
    for a, b in K.simplices[1]:
        vals[(a, b)] = {s: (np.angle(E.phi[(a, b, s)][0, 0]) / (2 * np.pi)) % 1.0
                        for s in E.cover.samples_in(a, b)}
    return SampledU1Cochain(K, vals)


def berry_flux(subdivisions=24):
    """Total Berry phase of the spin-up line over the unit sphere, in turns.

    Each triangle of a fine geodesic subdivision of the tetrahedral sphere
    contributes the phase of the product of overlaps around its boundary,
    oriented by the outward normal.
    """
    K = boundary_simplex(3)
    total = 0.0
    for tri in K.simplices[2]:
        P = TETRAHEDRON[list(tri)]
        if np.dot(np.cross(P[1] - P[0], P[2] - P[0]), P.sum(axis=0)) < 0:
            P = P[[0, 2, 1]]
        n = subdivisions

        def state(i, j):
            x = (P[0] * (n - i - j) + P[1] * i + P[2] * j) / n
            w, V = np.linalg.eigh(spin_projector(x / np.linalg.norm(x)))
            return V[:, 1]

        grid = {(i, j): state(i, j) for i in range(n + 1) for j in range(n + 1 - i)}
        for i in range(n):
            for j in range(n - i):
                cells = [((i, j), (i + 1, j), (i, j + 1))]
                if i + j + 1 < n:
                    cells.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
                for a, b, c in cells:
                    z = (np.vdot(grid[a], grid[b]) * np.vdot(grid[b], grid[c]) * np.vdot(grid[c], grid[a]))
                    total += np.angle(z)
    return total / (2 * np.pi)


def test_bott_transitions_have_unit_chern_number():
    c1 = chern_number(bott_transitions())
    assert abs(c1) == 1
    assert round(abs(berry_flux())) == 1


def test_tensor_square_doubles_the_chern_number():
    t = bott_transitions()
    doubled = SampledU1Cochain(t.complex, {e: {s: (2 * q) % 1.0 for s, q in row.items()}
                                           for e, row in t.values.items()})
    assert chern_number(doubled) == 2 * chern_number(t)
