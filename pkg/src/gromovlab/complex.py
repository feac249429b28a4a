"""Two-complexes built from glued ``l``-gons, with optional fixed paths.

Faces are numbered ``0..K-1``; the sides of a face are numbered ``1..l``
in its intrinsic cyclic order.  Side ``k`` runs from corner ``k`` to corner
``k+1`` (mod ``l``).  A gluing entry ``(a, b, flip)`` puts sides ``a`` and
``b`` on one geometric edge; ``flip`` means they traverse it in opposite
directions.  Edge classes are the transitive closure of the entries and
vertices are the finest corner identification compatible with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .unionfind import ParityConflict, ParityUnionFind
from .words import Letter


class ComplexError(ValueError):
    pass


class Side(NamedTuple):
    face: int
    position: int


class Corner(NamedTuple):
    face: int
    index: int


class EdgeClass(NamedTuple):
    """Sides of one geometric edge; ``directions[j]`` is +1 when side ``j``
    runs along the edge's reference direction (that of ``sides[0]``)."""

    sides: tuple[Side, ...]
    directions: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.sides)


class Gluing(NamedTuple):
    a: Side
    b: Side
    flip: bool


@dataclass(frozen=True, eq=False)
class TwoComplex:
    K: int
    l: int
    edges: tuple[EdgeClass, ...]
    # per side index (face*l + position-1): edge index and direction
    edge_of: tuple[int, ...] = field(repr=False)
    direction_of: tuple[int, ...] = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, TwoComplex):
            return NotImplemented
        return (self.K, self.l, self.code) == (other.K, other.l, other.code)

    def __hash__(self):
        return hash((self.K, self.l, self.code))

    def side_index(self, s: Side) -> int:
        return s.face * self.l + s.position - 1

    def edge_index(self, s: Side) -> int:
        return self.edge_of[self.side_index(s)]

    def direction(self, s: Side) -> int:
        return self.direction_of[self.side_index(s)]

    @property
    def sides(self) -> list[Side]:
        return [Side(f, k) for f in range(self.K) for k in range(1, self.l + 1)]

    @cached_property
    def code(self) -> tuple[tuple[int, int, int], ...]:
        """Canonical gluing code: ``(min side, other side, relative direction)``
        over side indices, sorted.  Two complexes are equal iff codes agree."""
        out = []
        for e in self.edges:
            i0 = self.side_index(e.sides[0])
            for s, d in zip(e.sides[1:], e.directions[1:]):
                out.append((i0, self.side_index(s), d))
        return tuple(sorted(out))

    @property
    def gluing(self) -> list[Gluing]:
        ls = self.l
        return [Gluing(Side(a // ls, a % ls + 1), Side(b // ls, b % ls + 1), d == -1)
                for a, b, d in self.code]

    @cached_property
    def vertices(self) -> tuple[tuple[Corner, ...], ...]:
        l = self.l
        parent = list(range(self.K * l))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def join(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)

        def ends(s: Side) -> tuple[int, int]:
            return s.face * l + s.position - 1, s.face * l + s.position % l

        for e in self.edges:
            r0, r1 = ends(e.sides[0])
            for s, d in zip(e.sides[1:], e.directions[1:]):
                s0, s1 = ends(s)
                if d == 1:
                    join(s0, r0)
                    join(s1, r1)
                else:
                    join(s0, r1)
                    join(s1, r0)
        classes: dict[int, list[Corner]] = {}
        for c in range(self.K * l):
            classes.setdefault(find(c), []).append(Corner(c // l, c % l + 1))
        return tuple(tuple(v) for v in sorted(classes.values()))

    @cached_property
    def vertex_of_corner(self) -> dict[Corner, int]:
        return {c: i for i, v in enumerate(self.vertices) for c in v}

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        """Vertex indices (start, end) of edge ``e`` in its reference direction."""
        s = self.edges[e].sides[0]
        v = self.vertex_of_corner
        return v[Corner(s.face, s.position)], v[Corner(s.face, s.position % self.l + 1)]

    def degrees(self) -> list[int]:
        return [e.degree for e in self.edges]

    @cached_property
    def is_connected(self) -> bool:
        if self.K <= 1:
            return True
        parent = list(range(self.K))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for e in self.edges:
            f0 = find(e.sides[0].face)
            for s in e.sides[1:]:
                f = find(s.face)
                if f != f0:
                    parent[f] = f0
        return len({find(f) for f in range(self.K)}) == 1

    @property
    def max_degree(self) -> int:
        return max((e.degree for e in self.edges), default=0)


def _as_side(x) -> Side:
    f, p = x
    return Side(int(f), int(p))


def build_complex(K: int, l: int, gluing: Iterable = ()) -> TwoComplex:
    """Glue ``K`` copies of an ``l``-gon along the given side identifications.

    ``gluing`` holds ``(a, b, flip)`` triples (or :class:`Gluing`), with
    sides as ``(face, position)`` pairs and positions in ``1..l``.
    """
    if K < 0 or l < 1:
        raise ComplexError(f"bad dimensions K={K}, l={l}")
    n = K * l
    uf = ParityUnionFind(n)
    for entry in gluing:
        a, b, flip = entry
        a, b = _as_side(a), _as_side(b)
        for s in (a, b):
            if not (0 <= s.face < K and 1 <= s.position <= l):
                raise ComplexError(f"dangling side reference {tuple(s)} (K={K}, l={l})")
        try:
            uf.union(a.face * l + a.position - 1, b.face * l + b.position - 1,
                     -1 if flip else 1)
        except ParityConflict:
            raise ComplexError(
                f"inconsistent direction flags gluing {tuple(a)} to {tuple(b)}") from None
    return _from_unionfind(K, l, uf)


def _from_unionfind(K: int, l: int, uf: ParityUnionFind) -> TwoComplex:
    groups = sorted(uf.groups().values(), key=lambda g: g[0][0])
    edges = []
    edge_of = [0] * (K * l)
    direction_of = [1] * (K * l)
    for e, members in enumerate(groups):
        s0 = members[0][1]
        sides = tuple(Side(i // l, i % l + 1) for i, _ in members)
        dirs = tuple(s * s0 for _, s in members)
        edges.append(EdgeClass(sides, dirs))
        for (i, _), d in zip(members, dirs):
            edge_of[i] = e
            direction_of[i] = d
    return TwoComplex(K, l, tuple(edges), tuple(edge_of), tuple(direction_of))


def complex_from_code(K: int, l: int, code: Iterable[tuple[int, int, int]]) -> TwoComplex:
    """Inverse of :attr:`TwoComplex.code` (side indices, relative directions)."""
    uf = ParityUnionFind(K * l)
    for a, b, d in code:
        uf.union(a, b, d)
    return _from_unionfind(K, l, uf)


def cancel(Y: TwoComplex) -> int:
    return sum(e.degree - 1 for e in Y.edges)


def boundary_length(Y: TwoComplex) -> int:
    return sum(1 for e in Y.edges if e.degree == 1)


# -- fixed paths ---------------------------------------------------------

@dataclass(frozen=True)
class FixedPath:
    """An edge path on the boundary of ``face``.

    Edges are named by sides; ``letters[j]`` is the letter read along
    ``sides[j]`` in its own face's intrinsic direction.
    """

    face: int
    sides: tuple[Side, ...]
    letters: tuple[Letter, ...]

    def __post_init__(self):
        object.__setattr__(self, "sides", tuple(_as_side(s) for s in self.sides))
        object.__setattr__(self, "letters", tuple(self.letters))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class ComplexWithFixed:
    complex: TwoComplex
    paths: tuple[FixedPath, ...] = ()

    @cached_property
    def fixed_letters(self) -> dict[int, Letter]:
        """Edge index -> letter along the edge's reference direction."""
        out: dict[int, Letter] = {}
        Y = self.complex
        for p in self.paths:
            for s, x in zip(p.sides, p.letters):
                out.setdefault(Y.edge_index(s), x * Y.direction(s))
        return out

    @property
    def fixed_edges(self) -> frozenset[int]:
        return frozenset(self.fixed_letters)


def fix_size(Yf: ComplexWithFixed) -> int:
    return len(Yf.fixed_letters)


def validate_fixed_paths(Yf: ComplexWithFixed) -> ValidationReport:
    Y = Yf.complex
    report = ValidationReport()
    seen: dict[int, tuple[int, Letter]] = {}
    for i, p in enumerate(Yf.paths):
        if len(p.letters) != len(p.sides):
            report.violations.append(
                f"path {i}: {len(p.letters)} letters for {len(p.sides)} edges")
        if not 0 <= p.face < Y.K:
            report.violations.append(f"path {i}: host face {p.face} out of range")
            continue
        bad = [s for s in p.sides if not (0 <= s.face < Y.K and 1 <= s.position <= Y.l)]
        if bad:
            report.violations.append(f"path {i}: dangling side references {bad}")
            continue
        if not p.sides:
            report.violations.append(f"path {i}: empty path")
            continue
        edges = [Y.edge_index(s) for s in p.sides]
        if len(set(edges)) != len(edges):
            report.violations.append(f"path {i}: not embedded, an edge repeats")
        for s, e in zip(p.sides, edges):
            if all(t.face != p.face for t in Y.edges[e].sides):
                report.violations.append(
                    f"path {i}: edge of side {tuple(s)} is not on host face {p.face}")
        for e0, e1 in zip(edges, edges[1:]):
            if not set(Y.edge_endpoints(e0)) & set(Y.edge_endpoints(e1)):
                report.violations.append(f"path {i}: consecutive edges {e0}, {e1} share no vertex")
        for s, e, x in zip(p.sides, edges, p.letters):
            g = x * Y.direction(s)
            if e in seen and seen[e][1] != g:
                report.violations.append(
                    f"paths {seen[e][0]} and {i} prescribe different letters on edge {e}")
            seen.setdefault(e, (i, g))
    return report


def with_fixed_paths(Y: TwoComplex, paths: Sequence[FixedPath] = ()) -> ComplexWithFixed:
    """Attach fixed paths, rejecting any that fail validation."""
    Yf = ComplexWithFixed(Y, tuple(paths))
    report = validate_fixed_paths(Yf)
    if not report.ok:
        raise ComplexError("; ".join(report.violations))
    return Yf


def boundary_path(face: int, start: int, length: int, l: int) -> tuple[Side, ...]:
    """Sides ``start, start+1, ...`` (cyclically) on one face."""
    return tuple(Side(face, (start - 1 + j) % l + 1) for j in range(length))
