"""JSON reading and writing for complexes, cochains, families and bundles.

Complex scalars are ``[re, im]`` pairs and matrices are row-major nested
lists. Floats are written with 12 significant digits and exact turns as
fraction strings, so output is stable across runs.
"""

import json
from pathlib import Path

import numpy as np

from .approx import FredholmFamily, TwistedFamilyData
from .cech import U1Cochain, UnitaryLiftSystem
from .exceptions import InputError
from .graded import GradedSpace, OddMap
from .simplicial import IntegerCochain, StarCover, complex_from_dict, parse_simplex_key, simplex_key
from .vectorial import VectorialBundle


def fmt(x):
    """Round a float to 12 significant digits (``-0.0`` becomes ``0.0``)."""
    x = float(f"{float(x):.12g}")
    return 0.0 if x == 0 else x


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return [[[fmt(z.real), fmt(z.imag)] for z in row] for row in M]


def decode_matrix(data, name="matrix"):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{name} is not a nested array of numbers") from None
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    if arr.size == 0:
        # an empty matrix, with rows given or not
        rows = len(data) if isinstance(data, list) else 0
        return np.zeros((rows, 0), dtype=complex)
    raise InputError(f"{name} must be a matrix of numbers or of [re, im] pairs")


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def _key(s):
    return parse_simplex_key(s) if isinstance(s, str) else tuple(s)


# --- complexes and cochains ---------------------------------------------------

def complex_to_dict(K):
    return K.to_dict()


def load_complex(ref, base_dir=None):
    """A complex given inline as a dict or as a path (relative to ``base_dir``)."""
    if isinstance(ref, dict):
        return complex_from_dict(ref)
    if isinstance(ref, str):
        path = Path(ref)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return complex_from_dict(read_json(path))
    raise InputError("complex reference must be an object or a file path")


def cochain_from_dict(K, data):
    """Integer cochains use ``values``; U(1) cochains use ``turns``."""
    try:
        degree = int(data["degree"])
        if "turns" in data:
            return U1Cochain.from_dict(K, degree, data["turns"])
        return IntegerCochain.from_dict(K, degree, data["values"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed cochain: {exc}") from None


def lifts_to_dict(lifts):
    return {"rank": lifts.rank,
            "unitaries": {simplex_key(e): encode_matrix(U) for e, U in sorted(lifts.unitaries.items())}}


def lifts_from_dict(K, data, tol=None):
    try:
        return UnitaryLiftSystem.build(K, int(data["rank"]),
                                       {_key(k): decode_matrix(v, f"lift {k}")
                                        for k, v in data["unitaries"].items()}, tol)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed lift system: {exc}") from None


# --- families -----------------------------------------------------------------

def family_to_dict(family, complex_ref=None):
    K = family.cover.complex
    out = {"complex": complex_ref if complex_ref is not None else K.to_dict(),
           "shape": list(family.shape)}
    if isinstance(family, TwistedFamilyData):
        out["kind"] = "twisted"
        local = {}
        for p in family.cover.patches:
            local[str(p)] = {simplex_key(s): encode_matrix(family.local(p, s))
                             for s in family.cover.samples_in(p)}
        out["local_families"] = local
        out["lifts"] = lifts_to_dict(family.lifts)
    else:
        out["matrices"] = {simplex_key(s): encode_matrix(family.matrices[s])
                           for s in family.cover.samples}
    return out


def family_from_dict(data, base_dir=None, lifts=None, tol=None):
    """Read a plain or twisted family; ``lifts`` overrides embedded lifts."""
    try:
        K = load_complex(data["complex"], base_dir)
        cover = StarCover(K)
        if data.get("kind", "plain") == "twisted":
            if lifts is None:
                ref = data.get("lifts")
                if ref is None:
                    raise InputError("twisted family needs a lift system")
                if isinstance(ref, str):
                    path = Path(ref) if base_dir is None else Path(base_dir) / ref
                    ref = read_json(path)
                lifts = lifts_from_dict(K, ref, tol)
            elif isinstance(lifts, dict):
                lifts = lifts_from_dict(K, lifts, tol)
            local = {}
            for p, mats in data["local_families"].items():
                for key, M in mats.items():
                    local[(int(p), _key(key))] = decode_matrix(M, f"A_{p} at {key}")
            return TwistedFamilyData.build(cover, local, lifts, tol)
        mats = {_key(k): decode_matrix(M, f"operator at {k}") for k, M in data["matrices"].items()}
        family = FredholmFamily.build(cover, mats)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed family file: missing or bad field {exc}") from None
    shape = data.get("shape")
    if shape is not None and tuple(shape) != family.shape:
        raise InputError(f"declared shape {shape} does not match the matrices {list(family.shape)}")
    return family


# --- bundles ------------------------------------------------------------------

def bundle_to_dict(E):
    K = E.complex
    fibers, trans = {}, {}
    for s in E.cover.samples:
        key = simplex_key(s)
        for a in s:
            hm = E.h[(a, s)]
            fibers[f"{a}|{key}"] = {"dims": list(hm.space.dims), "h": encode_matrix(hm.matrix)}
        for a in s:
            for b in s:
                trans[f"{a},{b}|{key}"] = encode_matrix(E.phi[(a, b, s)])
    out = {"complex": K.to_dict(), "fibers": fibers, "transitions": trans,
           "twist": None if E.twist is None else E.twist.to_dict()}
    if E.cutoffs is not None:
        out["cutoffs"] = {str(a): fmt(mu) for a, mu in sorted(E.cutoffs.items())}
    return out


def _split(key):
    try:
        left, right = key.split("|")
        return left, parse_simplex_key(right)
    except ValueError:
        raise InputError(f"bad fiber key {key!r}; expected 'patch|simplex'") from None


def bundle_from_dict(data, base_dir=None, tol=None):
    try:
        K = load_complex(data["complex"], base_dir)
        cover = StarCover(K)
        h = {}
        for key, fib in data["fibers"].items():
            a, s = _split(key)
            n0, n1 = (int(d) for d in fib["dims"])
            M = decode_matrix(fib["h"], f"h at {key}").reshape(n0 + n1, n0 + n1)
            h[(int(a), s)] = OddMap.from_matrix(M, n0, tol) if M.size else OddMap(GradedSpace(n0, n1), M)
        phi = {}
        for key, M in data["transitions"].items():
            ab, s = _split(key)
            a, b = (int(x) for x in ab.split(","))
            rows, cols = h[(a, s)].space.dim, h[(b, s)].space.dim
            phi[(a, b, s)] = decode_matrix(M, f"transition {key}").reshape(rows, cols)
        twist = data.get("twist")
        twist = None if twist is None else cochain_from_dict(K, twist)
        cutoffs = data.get("cutoffs")
        cutoffs = None if cutoffs is None else {int(a): float(mu) for a, mu in cutoffs.items()}
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed bundle file: {exc}") from None
    return VectorialBundle.build(cover, h, phi, twist=twist, cutoffs=cutoffs, tol=tol)
