"""Deciding and measuring fulfillment of abstract diagrams by relator sets.

The constraint engine is a :class:`SlotSystem`: one slot per (relator
class, position), signed unions between slots that meet on an edge, and
pinned letters from fixed edges.  A fulfillment assigns distinct relators
of ``R`` to the classes so that every slot constraint holds.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .decorate import AbstractDiagram, ReductionPairError, has_reduction_pair
from .unionfind import ParityConflict, ParityUnionFind
from .words import (
    DEFAULT_WORD_CAP,
    Letter,
    SizeCapError,
    Word,
    enumerate_reduced_words,
    format_word,
    is_reduced,
    reduced_word_count,
)


class UnfulfillableError(ValueError):
    """The slot constraints contradict themselves; no relator set can fulfill."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class Member(NamedTuple):
    cls: int
    position: int
    sign: int  # letter(cls, position) = sign * letter(root)


class Group(NamedTuple):
    members: tuple[Member, ...]
    pin: Letter | None  # letter of the root, if pinned


@dataclass
class SlotSystem:
    n: int
    l: int
    classes: tuple[int, ...]
    uf: ParityUnionFind = field(repr=False)
    pins: dict[int, Letter] = field(default_factory=dict)

    def slot(self, cls: int, position: int) -> int:
        return (cls - 1) * self.l + position - 1

    def find(self, cls: int, position: int) -> tuple[int, int]:
        return self.uf.find(self.slot(cls, position))

    def groups(self) -> list[Group]:
        """Union classes touching the included classes, singletons omitted unless pinned."""
        l = self.l
        out = []
        for root, members in sorted(self.uf.groups().items()):
            ms = tuple(Member(x // l + 1, x % l + 1, s) for x, s in members
                       if x // l + 1 in self.classes)
            if len(ms) >= 2 or root in self.pins:
                out.append(Group(ms, self.pins.get(root)))
        return out


def build_slots(A: AbstractDiagram, upto: int | None = None) -> SlotSystem:
    """Compile the diagram (restricted to faces of class <= ``upto``) into slots."""
    if has_reduction_pair(A):
        raise ReductionPairError("diagram has a reduction pair")
    n, l = A.n, A.l
    upto = n if upto is None else upto
    Y = A.complex
    uf = ParityUnionFind(n * l)
    pins: dict[int, Letter] = {}
    fixed = A.base.fixed_letters
    for e, edge in enumerate(Y.edges):
        refs = [A.slots[Y.side_index(s)] for s in edge.sides]
        refs = [r for r in refs if r.cls <= upto]
        if not refs:
            continue
        x0 = (refs[0].cls - 1) * l + refs[0].position - 1
        for r in refs[1:]:
            try:
                uf.union(x0, (r.cls - 1) * l + r.position - 1, refs[0].twist * r.twist)
            except ParityConflict:
                raise UnfulfillableError(
                    "twist", f"edge {e} forces a letter to equal its own inverse") from None
        if e in fixed:
            root, s = uf.find(x0)
            want = s * refs[0].twist * fixed[e]
            if pins.setdefault(root, want) != want:
                raise UnfulfillableError("pin", f"edge {e} pinned to two different letters")
    # unions made after a pin can merge two pinned roots
    final: dict[int, Letter] = {}
    for root, letter in pins.items():
        r, s = uf.find(root)
        want = s * letter
        if final.setdefault(r, want) != want:
            raise UnfulfillableError("pin", "fixed edges pin one slot class to two letters")
    return SlotSystem(n, l, tuple(range(1, upto + 1)), uf, final)


# -- concrete fulfillment ---------------------------------------------------

@dataclass(frozen=True)
class Fulfillment:
    assignment: dict[int, int]
    words: tuple[Word, ...]  # words[c-1] bears class c

    def to_json(self) -> str:
        return json.dumps({"assignment": {str(c): i for c, i in sorted(self.assignment.items())},
                           "words": [format_word(w) for w in self.words]})

    @classmethod
    def from_json(cls, text: str, R: Sequence[Word]) -> "Fulfillment":
        doc = json.loads(text)
        assignment = {int(c): int(i) for c, i in doc["assignment"].items()}
        return cls(assignment, tuple(tuple(R[assignment[c]]) for c in sorted(assignment)))


def is_fulfilled_by(A: AbstractDiagram, R: Sequence[Word], assignment: dict[int, int]) -> bool:
    """Check an assignment class -> index into ``R`` directly against the geometry."""
    n, l = A.n, A.l
    if sorted(assignment) != list(range(1, n + 1)):
        return False
    idx = list(assignment.values())
    if len(set(idx)) != n or any(not 0 <= i < len(R) for i in idx):
        return False
    words = {c: tuple(R[i]) for c, i in assignment.items()}
    if any(len(w) != l or not is_reduced(w) for w in words.values()):
        return False
    Y = A.complex
    fixed = A.base.fixed_letters
    for e, edge in enumerate(Y.edges):
        seen = set()
        for s in edge.sides:
            r = A.slots[Y.side_index(s)]
            seen.add(r.twist * words[r.cls][r.position - 1])
        if len(seen) != 1:
            return False
        if e in fixed and seen != {fixed[e]}:
            return False
    return True


class _Compiled:
    """Per-class slot lists against union roots, ready for the search."""

    def __init__(self, ss: SlotSystem):
        self.n = ss.n
        self.l = ss.l
        self.pins = ss.pins
        self.per_class: list[list[tuple[int, int, int]]] = [[] for _ in range(ss.n + 1)]
        weight = {}
        for g in ss.groups():
            for mm in g.members:
                root, _ = ss.find(mm.cls, mm.position)
                self.per_class[mm.cls].append((mm.position - 1, root, mm.sign))
                weight[mm.cls] = weight.get(mm.cls, 0) + 1
        self.weight = weight

    def intra_ok(self, c: int, w: Word) -> bool:
        local: dict[int, int] = {}
        for k, root, s in self.per_class[c]:
            v = s * w[k]
            if local.setdefault(root, v) != v:
                return False
            pin = self.pins.get(root)
            if pin is not None and pin != v:
                return False
        return True


def find_fulfillment(A: AbstractDiagram, R: Sequence[Word]) -> Fulfillment | None:
    """Backtracking search over injective class -> relator assignments."""
    try:
        ss = build_slots(A)
    except UnfulfillableError:
        return None
    comp = _Compiled(ss)
    usable = [i for i, w in enumerate(R) if len(w) == A.l and is_reduced(w)]
    cands = {c: [i for i in usable if comp.intra_ok(c, R[i])] for c in range(1, A.n + 1)}
    return _search(comp, R, cands)


def _search(comp: _Compiled, R: Sequence[Word], cands: dict[int, list[int]]) -> Fulfillment | None:
    if any(not v for v in cands.values()):
        return None
    # most constrained class first
    order = sorted(cands, key=lambda c: (len(cands[c]), -comp.weight.get(c, 0), c))
    roots: dict[int, int] = {}
    chosen: dict[int, int] = {}

    def extend(depth: int) -> bool:
        if depth == len(order):
            return True
        c = order[depth]
        slots = comp.per_class[c]
        used = set(chosen.values())
        for i in cands[c]:
            if i in used:
                continue
            w = R[i]
            added = []
            ok = True
            for k, root, s in slots:
                v = s * w[k]
                have = roots.get(root)
                if have is None:
                    roots[root] = v
                    added.append(root)
                elif have != v:
                    ok = False
                    break
            if ok:
                chosen[c] = i
                if extend(depth + 1):
                    return True
                del chosen[c]
            for root in added:
                del roots[root]
        return False

    if not extend(0):
        return None
    n = len(cands)
    return Fulfillment(dict(sorted(chosen.items())),
                       tuple(tuple(R[chosen[c]]) for c in range(1, n + 1)))


def exhaustive_fulfillment(A: AbstractDiagram, R: Sequence[Word]) -> dict[int, int] | None:
    """Try every injective assignment with :func:`is_fulfilled_by`; first hit or None."""
    for idx in itertools.permutations(range(len(R)), A.n):
        assignment = {c: i for c, i in enumerate(idx, start=1)}
        if is_fulfilled_by(A, R, assignment):
            return assignment
    return None


# -- exact partial-fulfillment probabilities -------------------------------

def partial_count_exact(A: AbstractDiagram, i: int, m: int,
                        cap: int = DEFAULT_WORD_CAP) -> tuple[int, int]:
    """(fulfilling i-tuples, all i-tuples) of reduced words for classes ``1..i``."""
    if not 0 <= i <= A.n:
        raise ValueError(f"class count i={i} outside 0..{A.n}")
    if i == 0:
        return 1, 1
    N = reduced_word_count(m, A.l)
    if N**i > cap:
        raise SizeCapError(f"{i}-tuples of reduced words", N**i, cap)
    try:
        ss = build_slots(A, upto=i)
    except UnfulfillableError:
        return 0, N**i
    W = np.array(enumerate_reduced_words(m, A.l), dtype=np.int8).reshape(N, A.l)
    shape = (N,) * i

    def along(c: int, vec: np.ndarray) -> np.ndarray:
        view = [1] * i
        view[c - 1] = N
        return vec.reshape(view)

    ok = np.ones(shape, dtype=bool)
    for g in ss.groups():
        if g.pin is not None:
            for mm in g.members:
                ok &= along(mm.cls, mm.sign * W[:, mm.position - 1] == g.pin)
            continue
        first = g.members[0]
        ref = along(first.cls, first.sign * W[:, first.position - 1].astype(np.int16))
        for mm in g.members[1:]:
            ok &= along(mm.cls, mm.sign * W[:, mm.position - 1].astype(np.int16)) == ref
    return int(ok.sum()), N**i


def partial_probability_exact(A: AbstractDiagram, i: int, m: int,
                              cap: int = DEFAULT_WORD_CAP) -> Fraction:
    """Share of i-tuples of uniform reduced words that fulfill the classes ``1..i``."""
    hits, total = partial_count_exact(A, i, m, cap)
    return Fraction(hits, total)


def fulfillment_probability_mc(A: AbstractDiagram, m: int, l: int, d: float, trials: int,
                               seed: int = 0):
    """Monte Carlo frequency, over sampled presentations, of ``find_fulfillment`` success."""
    from .batch import monte_carlo

    if l != A.l:
        raise ValueError(f"diagram has l={A.l}, sampler asked for l={l}")
    return monte_carlo([A], m, d, trials, seed)[0]
