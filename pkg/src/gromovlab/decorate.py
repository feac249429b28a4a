"""Abstract diagrams: relator classes, first edges, orientations.

Also the bookkeeping behind the cancellation bound: which sides of an edge
"belong" to their faces, the per-face count ``delta``, the per-class
maximum ``kappa`` and the multiplicities ``m_i``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

from .complex import ComplexWithFixed, EdgeClass, Side, TwoComplex, cancel, fix_size


class ReductionPairError(ValueError):
    """Two sides of one non-fixed edge carry the same (class, position) slot."""


class SlotRef(NamedTuple):
    cls: int
    position: int
    twist: int


def canonical_classes(class_of: Sequence[int]) -> tuple[int, ...]:
    """Relabel classes ``1..n`` by multiplicity descending, ties by smallest face."""
    counts = Counter(class_of)
    first: dict[int, int] = {}
    for f, c in enumerate(class_of):
        first.setdefault(c, f)
    order = sorted(counts, key=lambda c: (-counts[c], first[c]))
    relabel = {c: i + 1 for i, c in enumerate(order)}
    return tuple(relabel[c] for c in class_of)


@dataclass(frozen=True)
class Decoration:
    class_of: tuple[int, ...]
    first_edge: tuple[int, ...]
    orientation: tuple[int, ...]

    @classmethod
    def make(cls, class_of: Sequence[int], first_edge: Sequence[int],
             orientation: Sequence[int]) -> "Decoration":
        if not len(class_of) == len(first_edge) == len(orientation):
            raise ValueError("decoration lists differ in length")
        if any(o not in (1, -1) for o in orientation):
            raise ValueError(f"orientations must be +1/-1, got {list(orientation)}")
        return cls(canonical_classes(class_of), tuple(first_edge), tuple(orientation))

    @classmethod
    def standard(cls, class_of: Sequence[int]) -> "Decoration":
        """First edge 1 and orientation +1 on every face."""
        K = len(class_of)
        return cls.make(class_of, (1,) * K, (1,) * K)

    @property
    def n(self) -> int:
        return len(set(self.class_of))


@dataclass(frozen=True, eq=False)
class AbstractDiagram:
    base: ComplexWithFixed
    deco: Decoration

    def __post_init__(self):
        Y = self.base.complex
        if len(self.deco.class_of) != Y.K:
            raise ValueError(f"decoration covers {len(self.deco.class_of)} faces, complex has {Y.K}")
        if any(not 1 <= p <= Y.l for p in self.deco.first_edge):
            raise ValueError(f"first edges must lie in 1..{Y.l}")

    @property
    def complex(self) -> TwoComplex:
        return self.base.complex

    @property
    def K(self) -> int:
        return self.base.complex.K

    @property
    def l(self) -> int:
        return self.base.complex.l

    @property
    def n(self) -> int:
        return self.deco.n

    @cached_property
    def multiplicities(self) -> tuple[int, ...]:
        counts = Counter(self.deco.class_of)
        return tuple(counts[i] for i in range(1, self.n + 1))

    @cached_property
    def slots(self) -> tuple[SlotRef, ...]:
        """Slot of every side, indexed like :meth:`TwoComplex.side_index`."""
        Y = self.complex
        l = Y.l
        out = []
        for f in range(Y.K):
            c = self.deco.class_of[f]
            p = self.deco.first_edge[f]
            o = self.deco.orientation[f]
            for s in range(1, l + 1):
                out.append(SlotRef(c, 1 + ((s - p) * o) % l, o * Y.direction_of[f * l + s - 1]))
        return tuple(out)

    def faces_of_class(self, i: int) -> list[int]:
        return [f for f, c in enumerate(self.deco.class_of) if c == i]


def slot_of(A: AbstractDiagram, s: Side) -> SlotRef:
    return A.slots[A.complex.side_index(s)]


def _edge_slots(A: AbstractDiagram, e: EdgeClass) -> list[SlotRef]:
    Y = A.complex
    return [A.slots[Y.side_index(s)] for s in e.sides]


def belongs_to(A: AbstractDiagram, e: int) -> tuple[Side, ...]:
    """Sides through which edge ``e`` belongs to their faces.

    A fixed edge belongs through every side; any other edge through all
    sides except the one with lexicographically least (class, position).
    """
    edge = A.complex.edges[e]
    if e in A.base.fixed_letters:
        return edge.sides
    keys = [(r.cls, r.position) for r in _edge_slots(A, edge)]
    if len(set(keys)) != len(keys):
        raise ReductionPairError(f"edge {e} carries a repeated slot {keys}")
    j_min = keys.index(min(keys))
    return tuple(s for j, s in enumerate(edge.sides) if j != j_min)


def delta_all(A: AbstractDiagram) -> list[int]:
    """``delta(f)`` for every face: sides of ``f`` through which an edge belongs to it."""
    out = [0] * A.K
    fixed = A.base.fixed_letters
    for e, edge in enumerate(A.complex.edges):
        if edge.degree == 1 and e not in fixed:
            continue  # its only side is the excluded least one
        for s in belongs_to(A, e):
            out[s.face] += 1
    return out


def delta(A: AbstractDiagram, f: int) -> int:
    return delta_all(A)[f]


def kappa(A: AbstractDiagram, i: int, deltas: Sequence[int] | None = None) -> int:
    faces = A.faces_of_class(i)
    if not faces:
        raise ValueError(f"class {i} is not used (n = {A.n})")
    if deltas is None:
        deltas = delta_all(A)
    return max(deltas[f] for f in faces)


class BelongingAudit(NamedTuple):
    lhs: int
    mid: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.mid <= self.rhs


def belonging_audit(A: AbstractDiagram) -> BelongingAudit:
    """(Cancel + N, sum of delta over faces, sum over classes of m_i * kappa_i)."""
    deltas = delta_all(A)
    lhs = cancel(A.complex) + fix_size(A.base)
    rhs = sum(m * kappa(A, i, deltas) for i, m in enumerate(A.multiplicities, start=1))
    return BelongingAudit(lhs, sum(deltas), rhs)


def repeated_slots(A: AbstractDiagram) -> list[tuple[int, SlotRef, SlotRef]]:
    """Edges on which two sides carry the same (class, position): ``(edge, slot, slot)``."""
    out = []
    for e, edge in enumerate(A.complex.edges):
        seen: dict[tuple[int, int], SlotRef] = {}
        for r in _edge_slots(A, edge):
            key = (r.cls, r.position)
            if key in seen:
                out.append((e, seen[key], r))
            else:
                seen[key] = r
    return out


def has_reduction_pair(A: AbstractDiagram) -> bool:
    """Some edge has two sides with equal (class, position) and equal twist."""
    return any(a.twist == b.twist for _, a, b in repeated_slots(A))


def is_reduced_diagram(A: AbstractDiagram) -> bool:
    """No edge repeats a slot at all.

    A repeat with opposite twists is not a reduction pair but forces a letter
    to equal its own inverse, so such diagrams are never fulfilled either.
    """
    return not repeated_slots(A)


def normalized(A: AbstractDiagram) -> AbstractDiagram:
    """The isomorphic diagram with first edge 1 and orientation +1 on every face."""
    from .complex import FixedPath, complex_from_code

    Y = A.complex
    l = Y.l

    def new_index(i: int) -> int:
        r = A.slots[i]
        return (i // l) * l + r.position - 1

    code = []
    for e in Y.edges:
        i0 = Y.side_index(e.sides[0])
        t0 = A.slots[i0].twist
        for s in e.sides[1:]:
            i = Y.side_index(s)
            code.append((new_index(i0), new_index(i), t0 * A.slots[i].twist))
    Z = complex_from_code(Y.K, l, code)
    paths = []
    for p in A.base.paths:
        sides, letters = [], []
        for s, x in zip(p.sides, p.letters):
            i = Y.side_index(s)
            j = new_index(i)
            sides.append(Side(j // l, j % l + 1))
            letters.append(x * A.deco.orientation[s.face])
        paths.append(FixedPath(p.face, tuple(sides), tuple(letters)))
    return AbstractDiagram(ComplexWithFixed(Z, tuple(paths)), Decoration.standard(A.deco.class_of))
