"""Exhaustive generation of small complexes and abstract diagrams.

Complexes are counted as labeled gluing codes: each edge class of the
gluing is listed once, by its least side, so every side partition (with
direction flags) appears exactly once.  The identification budget bounds
the total cancellation ``sum(deg(e) - 1)``.

Abstract diagrams come in two conventions.  *Labeled* decorates every
complex with every class partition, first edge and orientation.  *Dedup*
keeps one representative per isomorphism class: every face gets first
edge 1 and orientation +1 (any decoration can be rotated and reflected
into that form), and face relabelings are quotiented out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, NamedTuple

from .complex import (
    ComplexWithFixed,
    FixedPath,
    TwoComplex,
    boundary_path,
    complex_from_code,
)
from .decorate import AbstractDiagram, Decoration, canonical_classes
from .words import SizeCapError, parse_word

DEFAULT_DIAGRAM_CAP = 5_000_000


class GluingCode(NamedTuple):
    K: int
    l: int
    entries: tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class EnumerationFilter:
    min_faces: int = 1
    max_identifications: int = 1
    min_identifications: int = 0
    max_degree: int | None = None
    require_reduced: bool = True
    require_connected: bool = True
    dedup: bool = False
    alphabet: str = "a"
    include_empty: bool = False
    cap: int = DEFAULT_DIAGRAM_CAP

    def __post_init__(self):
        for name in ("min_faces", "max_identifications", "min_identifications", "cap"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.alphabet:
            raise ValueError("alphabet must name at least one letter")
        parse_word(self.alphabet)


# -- complexes ---------------------------------------------------------------

def _blocks(n: int, budget: int) -> Iterator[list[tuple[int, tuple[int, ...], tuple[int, ...]]]]:
    """Every set of disjoint blocks of size >= 2 on ``0..n-1`` with
    ``sum(size - 1) <= budget``, each block as (least member, others, directions)."""
    used = [False] * n

    def rec(start, left, acc):
        yield acc
        if left == 0:
            return
        for s in range(start, n):
            if used[s]:
                continue
            free = [t for t in range(s + 1, n) if not used[t]]
            used[s] = True
            for size in range(1, min(left, len(free)) + 1):
                for mates in itertools.combinations(free, size):
                    for t in mates:
                        used[t] = True
                    for dirs in itertools.product((1, -1), repeat=size):
                        yield from rec(s + 1, left - size, acc + [(s, mates, dirs)])
                    for t in mates:
                        used[t] = False
            used[s] = False

    yield from rec(0, budget, [])


def gluing_codes(K: int, l: int, max_identifications: int) -> Iterator[GluingCode]:
    for blocks in _blocks(K * l, max_identifications):
        entries = tuple(sorted((s, t, d) for s, mates, dirs in blocks for t, d in zip(mates, dirs)))
        yield GluingCode(K, l, entries)


def _keep_complex(Y: TwoComplex, filt: EnumerationFilter) -> bool:
    if filt.require_connected and not Y.is_connected:
        return False
    if filt.max_degree is not None and Y.max_degree > filt.max_degree:
        return False
    return len(Y.code) >= filt.min_identifications


def _dihedral_key(code: tuple, K: int, l: int) -> tuple:
    """Least code over face relabelings, rotations and reflections."""
    best = None
    for perm in itertools.permutations(range(K)):
        for rots in itertools.product(range(l), repeat=K):
            for refl in itertools.product((1, -1), repeat=K):
                key = _transform_code(code, l, perm, rots, refl)
                if best is None or key < best:
                    best = key
    return best


def _transform_code(code, l, perm, rots, refl) -> tuple:
    def move(i):
        f, s = divmod(i, l)
        if refl[f] == 1:
            s2 = (s + rots[f]) % l
        else:
            # reflected: side s now runs backwards as side -s-1
            s2 = (-s - 1 + rots[f]) % l
        return perm[f] * l + s2

    classes: dict[int, list[tuple[int, int]]] = {}
    for a, b, d in code:
        fa, fb = a // l, b // l
        cls = classes.setdefault(a, [(move(a), refl[fa])])
        cls.append((move(b), d * refl[fb]))
    out = []
    for members in classes.values():
        members.sort()
        i0, d0 = members[0]
        out.extend((i0, i, d * d0) for i, d in members[1:])
    return tuple(sorted(out))


def enumerate_complexes(K: int, l: int, filt: EnumerationFilter = EnumerationFilter()
                        ) -> Iterator[TwoComplex]:
    """Complexes of exactly ``K`` faces within the filter's budget, degree and connectivity.

    With ``filt.dedup`` one complex per isomorphism class (face relabeling,
    rotation and reflection of each face) is emitted.
    """
    if K == 0:
        if filt.include_empty:
            yield complex_from_code(0, l, ())
        return
    seen = set()
    emitted = 0
    for code in gluing_codes(K, l, filt.max_identifications):
        Y = complex_from_code(K, l, code.entries)
        if not _keep_complex(Y, filt):
            continue
        if filt.dedup:
            key = _dihedral_key(Y.code, K, l)
            if key in seen:
                continue
            seen.add(key)
        emitted += 1
        if emitted > filt.cap:
            raise SizeCapError(f"complexes (K={K}, l={l})", emitted, filt.cap)
        yield Y


# -- decorations and fixed paths -----------------------------------------------

def set_partitions(K: int) -> list[tuple[int, ...]]:
    """Class labelings of ``K`` faces, one per partition, canonically labeled."""
    out = set()

    def rec(f, labels, used):
        if f == K:
            out.add(canonical_classes(labels))
            return
        for c in range(1, used + 2):
            rec(f + 1, labels + [c], max(used, c))

    rec(0, [], 0)
    return sorted(out)


def _decorations(K: int, l: int, dedup: bool) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    if dedup:
        yield (1,) * K, (1,) * K
        return
    for first in itertools.product(range(1, l + 1), repeat=K):
        for orient in itertools.product((1, -1), repeat=K):
            yield first, orient


def reduced_decoration(Y: TwoComplex, class_of, first, orient) -> bool:
    """No glued edge repeats a (class, position) slot under this decoration."""
    l = Y.l
    for e in Y.edges:
        if e.degree < 2:
            continue
        seen = set()
        for s in e.sides:
            f = s.face
            key = (class_of[f], ((s.position - first[f]) * orient[f]) % l)
            if key in seen:
                return False
            seen.add(key)
    return True


def candidate_paths(Y: TwoComplex, alphabet: str) -> list[FixedPath]:
    """Embedded boundary paths on each face, with every prescription over ``alphabet``."""
    letters = sorted(set(parse_word(alphabet)), key=lambda x: (abs(x), -x))
    out = []
    l = Y.l
    for f in range(Y.K):
        for start in range(1, l + 1):
            for length in range(1, l + 1):
                sides = boundary_path(f, start, length, l)
                edges = [Y.edge_index(s) for s in sides]
                if len(set(edges)) != len(edges):
                    break
                for word in itertools.product(letters, repeat=length):
                    out.append(FixedPath(f, sides, word))
    return out


def _consistent(Y: TwoComplex, paths: tuple[FixedPath, ...]) -> bool:
    seen: dict[int, int] = {}
    for p in paths:
        for s, x in zip(p.sides, p.letters):
            e = Y.edge_index(s)
            g = x * Y.direction(s)
            if seen.setdefault(e, g) != g:
                return False
    return True


def path_sets(Y: TwoComplex, L: int, alphabet: str) -> list[tuple[FixedPath, ...]]:
    if L == 0:
        return [()]
    cands = candidate_paths(Y, alphabet)
    out = [()]
    for r in range(1, L + 1):
        out.extend(ps for ps in itertools.combinations(cands, r) if _consistent(Y, ps))
    return out


def _relabel_code(Y: TwoComplex, perm) -> tuple:
    K = Y.K
    return _transform_code(Y.code, Y.l, perm, (0,) * K, (1,) * K)


def face_automorphisms(Y: TwoComplex) -> list[tuple[int, ...]] | None:
    """Face relabelings fixing ``Y``'s code, or None if some relabeling gives a smaller code."""
    auts = []
    for perm in itertools.permutations(range(Y.K)):
        code = _relabel_code(Y, perm)
        if code < Y.code:
            return None
        if code == Y.code:
            auts.append(perm)
    return auts


def _decoration_key(perm, class_of, paths) -> tuple:
    K = len(class_of)
    inv = [0] * K
    for f, g in enumerate(perm):
        inv[g] = f
    classes = canonical_classes([class_of[inv[g]] for g in range(K)])
    ps = tuple(sorted((perm[p.face], tuple((perm[s.face], s.position) for s in p.sides), p.letters)
                      for p in paths))
    return classes, ps


def _abstract_raw(K: int, L: int, l: int, filt: EnumerationFilter
                  ) -> Iterator[tuple[TwoComplex, tuple, tuple, tuple, list, list | None]]:
    """(complex, classes, first edges, orientations, path sets, automorphisms).

    In dedup mode only complexes whose code is least among their face
    relabelings are kept, and their automorphisms are passed along; in
    labeled mode the automorphism slot is None.
    """
    lo = max(filt.min_faces, 1)
    inner = replace(filt, dedup=False)
    for k in range(lo, K + 1):
        for Y in enumerate_complexes(k, l, inner):
            auts = None
            if filt.dedup:
                auts = face_automorphisms(Y)
                if auts is None:
                    continue
            psets = path_sets(Y, L, filt.alphabet)
            for classes in set_partitions(k):
                for first, orient in _decorations(k, l, filt.dedup):
                    if filt.require_reduced and not reduced_decoration(Y, classes, first, orient):
                        continue
                    yield Y, classes, first, orient, psets, auts


def enumerate_abstract(K: int, L: int, l: int, filt: EnumerationFilter = EnumerationFilter()
                       ) -> Iterator[AbstractDiagram]:
    """Decorated diagrams with at most ``K`` faces and at most ``L`` fixed paths."""
    emitted = 0
    seen: set = set()
    current = None
    for Y, classes, first, orient, psets, auts in _abstract_raw(K, L, l, filt):
        if Y is not current:
            current, seen = Y, set()
        deco = Decoration(classes, first, orient)
        for paths in psets:
            if auts is not None and len(auts) > 1:
                key = min(_decoration_key(p, classes, paths) for p in auts)
                if key in seen:
                    continue
                seen.add(key)
            emitted += 1
            if emitted > filt.cap:
                raise SizeCapError(f"abstract diagrams (K<={K}, L<={L}, l={l})", emitted, filt.cap)
            yield AbstractDiagram(ComplexWithFixed(Y, paths), deco)


def count_abstract(K: int, L: int, l: int, filt: EnumerationFilter = EnumerationFilter()) -> int:
    """Size of :func:`enumerate_abstract`'s output (plus the empty complex if configured)."""
    base = 1 if (filt.include_empty and filt.min_faces == 0) else 0
    if filt.dedup:
        return base + sum(1 for _ in enumerate_abstract(K, L, l, filt))
    total = 0
    for *_, psets, _auts in _abstract_raw(K, L, l, filt):
        total += len(psets)
        if total > filt.cap:
            raise SizeCapError(f"abstract diagrams (K<={K}, L<={L}, l={l})", total, filt.cap)
    return base + total


# -- constructed families ----------------------------------------------------

def enumerate_arc_complexes(l: int, min_arc: int = 1, max_arc: int | None = None,
                            flips: Iterable[bool] = (True, False)) -> Iterator[TwoComplex]:
    """Two faces glued along one contiguous arc of ``j`` sides, at every offset."""
    max_arc = l if max_arc is None else max_arc
    for j in range(max(min_arc, 1), max_arc + 1):
        for flip in flips:
            for p in range(l):
                for q in range(l):
                    code = []
                    for i in range(j):
                        a = (p + i) % l
                        b = l + ((q + j - 1 - i) % l if flip else (q + i) % l)
                        code.append((min(a, b), max(a, b), -1 if flip else 1))
                    yield complex_from_code(2, l, code)


def enumerate_planar(K: int, l: int) -> Iterator[TwoComplex]:
    """Disc diagrams of up to ``K`` faces, all oriented alike, built by
    attaching each new face along a proper contiguous arc of the current
    boundary.  Every result is a disc with all degrees at most 2."""
    frontier = {(): tuple(range(l))}
    yield complex_from_code(1, l, ())
    for k in range(2, K + 1):
        grown: dict[tuple, tuple] = {}
        for code, boundary in frontier.items():
            for entries, bnd in _attach(code, boundary, k - 1, l):
                grown.setdefault(entries, bnd)
        for entries in grown:
            yield complex_from_code(k, l, entries)
        frontier = grown


def _attach(code, boundary, f, l):
    B = len(boundary)
    for j in range(1, min(l - 1, B - 1) + 1):
        for b in range(B):
            arc = [boundary[(b + i) % B] for i in range(j)]
            for q in range(l):
                # new face's sides q+j-1, ..., q run against the arc
                new_sides = [f * l + (q + j - 1 - i) % l for i in range(j)]
                entries = tuple(sorted(code + tuple(
                    (min(x, y), max(x, y), -1) for x, y in zip(arc, new_sides))))
                rest = [f * l + (q + j + i) % l for i in range(l - j)]
                yield entries, tuple([boundary[(b + j + i) % B] for i in range(B - j)] + rest)
