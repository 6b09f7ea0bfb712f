"""Small triangulations used by the scenarios and the tests."""

from itertools import combinations

from .simplicial import build_complex


def boundary_simplex(n):
    """Boundary of the ``n``-simplex, a triangulated ``(n-1)``-sphere."""
    return build_complex(combinations(range(n + 1), n))


def point():
    return build_complex([[0]])


def circle(n):
    if n < 3:
        raise ValueError("a triangulated circle needs at least 3 vertices")
    return build_complex([(k, (k + 1) % n) for k in range(n)])


# six-vertex real projective plane (half of the icosahedron)
RP2_TRIANGLES = (
    (0, 1, 3), (0, 1, 5), (0, 2, 4), (0, 2, 5), (0, 3, 4),
    (1, 2, 3), (1, 2, 4), (1, 4, 5), (2, 3, 5), (3, 4, 5),
)


def projective_plane():
    return build_complex(RP2_TRIANGLES)


def pseudo_projective_plane(n):
    """Disk whose boundary wraps ``n`` times around a 3-vertex circle.

    ``H^2 = Z/n``. Vertices 0, 1, 2 form the circle; the disk is filled with
    one ring of ``3n`` vertices and a center vertex.
    """
    if n < 2:
        raise ValueError("wrapping number must be at least 2")
    m = 3 * n
    ring = [3 + i for i in range(m)]
    center = 3 + m
    tris = []
    for i in range(m):
        w0, w1 = i % 3, (i + 1) % 3
        u0, u1 = ring[i], ring[(i + 1) % m]
        tris += [(w0, w1, u0), (w1, u1, u0), (u0, u1, center)]
    return build_complex(tris)


def product(K, L):
    """Staircase triangulation of ``|K| x |L|``.

    Vertex ``(a, b)`` gets index ``a * L.n_vertices + b``. Returns the complex
    and the list of ``(a, b)`` pairs by vertex index.
    """
    nL = L.n_vertices
    tops = []
    for s in K.maximal_simplices:
        for t in L.maximal_simplices:
            p, q = len(s) - 1, len(t) - 1
            for ups in combinations(range(p + q), p):
                i = j = 0
                verts = [s[0] * nL + t[0]]
                for step in range(p + q):
                    if step in ups:
                        i += 1
                    else:
                        j += 1
                    verts.append(s[i] * nL + t[j])
                tops.append(verts)
    pairs = [(v // nL, v % nL) for v in range(K.n_vertices * nL)]
    return build_complex(tops, K.n_vertices * nL), pairs


def suspension(K):
    """Join with two points; the apexes get the two highest indices."""
    north, south = K.n_vertices, K.n_vertices + 1
    tops = [tuple(s) + (north,) for s in K.maximal_simplices]
    tops += [tuple(s) + (south,) for s in K.maximal_simplices]
    return build_complex(tops, K.n_vertices + 2)
