"""Formal differences of vectorial-bundle classes, tracked by invariants.

Two classes can be told apart by their twist class or their graded index
vector. Telling them equal needs more: either an isomorphism witness linking
the summands, or a base on which the invariants are known to be complete
(an untwisted bundle over a point is determined by its index). Everything
else is reported as unknown.
"""

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import count

from .cech import dd_class
from .exceptions import InputError, TwistMismatch
from .vectorial import graded_index, verify

_ids = count()


class Verdict(enum.Enum):
    EQUAL = "Equal"
    DISTINCT = "Distinct"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class KClassDescriptor:
    """Invariants of one bundle class.

    ``twist`` is ``None`` for a zero twist class, otherwise a hashable
    summary of the class. ``witnesses`` holds ids of descriptors known to
    describe isomorphic bundles.
    """

    id: str
    twist: object
    index: tuple
    provenance: tuple = ()
    witnesses: frozenset = frozenset()
    complete: bool = False

    def invariants(self):
        return (self.twist, self.index)

    def linked(self, other):
        return (self.id == other.id or other.id in self.witnesses or self.id in other.witnesses)

    def to_dict(self):
        return {"id": self.id, "twist": None if self.twist is None else repr(self.twist),
                "index": list(self.index), "provenance": list(self.provenance),
                "witnesses": sorted(self.witnesses), "complete": self.complete}


def _twist_key(E):
    if E.twist is None:
        return None
    c = dd_class(E.twist)
    return None if c.is_zero else c.invariant()


def class_of(E, name=None, verify_first=True, tol=None):
    """Descriptor of a verified bundle. Raises if verification fails."""
    if verify_first:
        report = verify(E, tol)
        if not report.passed:
            raise InputError("class_of needs a bundle that passes verification:\n" + report.summary())
    twist = _twist_key(E)
    K = E.complex
    complete = twist is None and K.n_vertices == 1
    ident = name if name is not None else f"bundle-{next(_ids)}"
    return KClassDescriptor(ident, twist, tuple(graded_index(E)), (ident,), frozenset(), complete)


def with_witness(a, b):
    """Record that ``a`` and ``b`` describe isomorphic bundles."""
    if a.invariants() != b.invariants():
        raise InputError("an isomorphism cannot join classes with different invariants")
    return (KClassDescriptor(a.id, a.twist, a.index, a.provenance, a.witnesses | {b.id}, a.complete),
            KClassDescriptor(b.id, b.twist, b.index, b.provenance, b.witnesses | {a.id}, b.complete))


@dataclass(frozen=True)
class FormalDifference:
    """``sum(positive) - sum(negative)``, kept in reduced form."""

    positive: tuple = ()
    negative: tuple = ()
    components: int = field(default=None, compare=False)

    @classmethod
    def of(cls, descriptor):
        return cls((descriptor,), (), len(descriptor.index))

    @property
    def twist(self):
        twists = {d.twist for d in self.positive + self.negative}
        if len(twists) > 1:
            raise TwistMismatch("summands carry different twist classes")
        return next(iter(twists), None)

    @property
    def index(self):
        n = self.components
        if n is None:
            return ()
        total = [0] * n
        for d in self.positive:
            total = [t + v for t, v in zip(total, d.index)]
        for d in self.negative:
            total = [t - v for t, v in zip(total, d.index)]
        return tuple(total)

    @property
    def is_empty(self):
        return not self.positive and not self.negative

    def to_dict(self):
        return {"positive": [d.id for d in self.positive], "negative": [d.id for d in self.negative],
                "index": list(self.index), "twist": None if self.twist is None else repr(self.twist)}


ZERO = FormalDifference()


def _reduce(pos, neg):
    pos, neg = list(pos), list(neg)
    changed = True
    while changed:
        changed = False
        for i, p in enumerate(pos):
            j = next((j for j, n in enumerate(neg) if p.linked(n)), None)
            if j is not None:
                del pos[i], neg[j]
                changed = True
                break
    key = lambda d: d.id  # noqa: E731
    return tuple(sorted(pos, key=key)), tuple(sorted(neg, key=key))


def _components(*diffs):
    sizes = {d.components for d in diffs if d.components is not None}
    if len(sizes) > 1:
        raise InputError("formal differences live over bases with different component counts")
    return next(iter(sizes), None)


def add(a, b):
    n = _components(a, b)
    twists = {d.twist for d in a.positive + a.negative + b.positive + b.negative}
    if len(twists) > 1:
        raise TwistMismatch("cannot add classes with different twists")
    pos, neg = _reduce(a.positive + b.positive, a.negative + b.negative)
    return FormalDifference(pos, neg, n)


def negate(a):
    return FormalDifference(a.negative, a.positive, a.components)


def subtract(a, b):
    return add(a, negate(b))


def equals(a, b):
    """Compare two formal differences: Equal, Distinct or Unknown."""
    twists_a = {d.twist for d in a.positive + a.negative}
    twists_b = {d.twist for d in b.positive + b.negative}
    ta = next(iter(twists_a), None) if twists_a else None
    tb = next(iter(twists_b), None) if twists_b else None
    if len(twists_a) > 1 or len(twists_b) > 1:
        return Verdict.UNKNOWN
    if (twists_a and twists_b and ta != tb):
        return Verdict.DISTINCT
    n = _components(a, b)
    diff = FormalDifference(*_reduce(a.positive + b.negative, a.negative + b.positive), n)
    if diff.index and any(diff.index):
        return Verdict.DISTINCT
    if diff.is_empty:
        return Verdict.EQUAL
    if all(d.complete for d in diff.positive + diff.negative):
        return Verdict.EQUAL
    return Verdict.UNKNOWN


class Ledger:
    """Named descriptors plus isomorphism witnesses, serializable to JSON."""

    def __init__(self):
        self.descriptors = {}

    def register(self, name, E, tol=None):
        if name in self.descriptors:
            raise InputError(f"{name!r} is already registered")
        d = class_of(E, name=name, tol=tol)
        self.descriptors[name] = d
        return d

    def record_isomorphism(self, a, b, report):
        if not report.passed:
            raise InputError("isomorphism report did not pass")
        self.descriptors[a], self.descriptors[b] = with_witness(self.descriptors[a], self.descriptors[b])

    def difference(self, positive=(), negative=()):
        pos = tuple(self.descriptors[n] for n in positive)
        neg = tuple(self.descriptors[n] for n in negative)
        sizes = {len(d.index) for d in pos + neg}
        if len(sizes) > 1:
            raise InputError("descriptors live over bases with different component counts")
        return FormalDifference(*_reduce(pos, neg), next(iter(sizes), None))

    def counts(self):
        return Counter(d.index for d in self.descriptors.values())

    def to_dict(self):
        return {"descriptors": [self.descriptors[k].to_dict() for k in sorted(self.descriptors)]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)
