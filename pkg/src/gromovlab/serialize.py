"""JSON interchange for complexes and abstract diagrams.

A diagram document looks like::

    {"K": 2, "l": 4,
     "gluing": [{"a": [0, 1], "b": [1, 1], "flip": true}],
     "fixed_paths": [{"face": 0, "edges": [[0, 2], [0, 3]], "letters": "ab"}],
     "classes": [1, 2], "first_edge": [1, 1], "orient": [1, 1]}

Positions are 1-based.  The decoration keys are optional; a missing
decoration gives every face its own class, first edge 1 and orientation +1.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Iterator, TextIO

from .complex import ComplexError, ComplexWithFixed, FixedPath, Side, TwoComplex, build_complex, validate_fixed_paths
from .decorate import AbstractDiagram, Decoration
from .words import format_word, parse_word


class DiagramParseError(ValueError):
    """Malformed diagram document; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
        self.field = field
        self.line = line


def complex_to_dict(Y: TwoComplex) -> dict[str, Any]:
    return {"K": Y.K, "l": Y.l,
            "gluing": [{"a": list(g.a), "b": list(g.b), "flip": g.flip} for g in Y.gluing]}


def diagram_to_dict(A: AbstractDiagram) -> dict[str, Any]:
    doc = complex_to_dict(A.complex)
    doc["fixed_paths"] = [{"face": p.face, "edges": [list(s) for s in p.sides],
                           "letters": format_word(p.letters)} for p in A.base.paths]
    doc["classes"] = list(A.deco.class_of)
    doc["first_edge"] = list(A.deco.first_edge)
    doc["orient"] = list(A.deco.orientation)
    return doc


def diagram_to_json(A: AbstractDiagram, indent: int | None = None) -> str:
    return json.dumps(diagram_to_dict(A), indent=indent)


def _int(doc: dict, key: str, where: str) -> int:
    if key not in doc:
        raise DiagramParseError(f"{where}{key}", "missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise DiagramParseError(f"{where}{key}", f"expected an integer, got {v!r}")
    return v


def _side(v: Any, where: str) -> Side:
    if (not isinstance(v, list) or len(v) != 2
            or any(isinstance(x, bool) or not isinstance(x, int) for x in v)):
        raise DiagramParseError(where, f"expected [face, position], got {v!r}")
    return Side(v[0], v[1])


def _int_list(doc: dict, key: str, K: int) -> list[int] | None:
    if key not in doc:
        return None
    v = doc[key]
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
        raise DiagramParseError(key, f"expected a list of integers, got {v!r}")
    if len(v) != K:
        raise DiagramParseError(key, f"has {len(v)} entries for K={K} faces")
    return v


def diagram_from_dict(doc: Any, line: int | None = None) -> AbstractDiagram:
    try:
        return _diagram_from_dict(doc)
    except DiagramParseError as exc:
        if line is None:
            raise
        raise DiagramParseError(exc.field, str(exc).split(": ", 1)[1], line) from None


def _diagram_from_dict(doc: Any) -> AbstractDiagram:
    if not isinstance(doc, dict):
        raise DiagramParseError("<root>", "expected a JSON object")
    K = _int(doc, "K", "")
    l = _int(doc, "l", "")
    if K < 0 or l < 1:
        raise DiagramParseError("K" if K < 0 else "l", "out of range")
    gluing = []
    for j, g in enumerate(doc.get("gluing", [])):
        where = f"gluing[{j}]"
        if not isinstance(g, dict):
            raise DiagramParseError(where, "expected an object with a, b, flip")
        a = _side(g.get("a"), f"{where}.a")
        b = _side(g.get("b"), f"{where}.b")
        flip = g.get("flip", False)
        if not isinstance(flip, bool):
            raise DiagramParseError(f"{where}.flip", f"expected true/false, got {flip!r}")
        gluing.append((a, b, flip))
    try:
        Y = build_complex(K, l, gluing)
    except ComplexError as exc:
        raise DiagramParseError("gluing", str(exc)) from None
    paths = []
    for j, p in enumerate(doc.get("fixed_paths", [])):
        where = f"fixed_paths[{j}]"
        if not isinstance(p, dict):
            raise DiagramParseError(where, "expected an object with face, edges, letters")
        face = _int(p, "face", f"{where}.")
        edges = p.get("edges")
        if not isinstance(edges, list):
            raise DiagramParseError(f"{where}.edges", "expected a list of [face, position]")
        sides = tuple(_side(s, f"{where}.edges[{k}]") for k, s in enumerate(edges))
        try:
            letters = parse_word(p.get("letters", ""))
        except (ValueError, TypeError) as exc:
            raise DiagramParseError(f"{where}.letters", str(exc)) from None
        paths.append(FixedPath(face, sides, letters))
    base = ComplexWithFixed(Y, tuple(paths))
    report = validate_fixed_paths(base)
    if not report.ok:
        raise DiagramParseError("fixed_paths", "; ".join(report.violations))
    classes = _int_list(doc, "classes", K) or list(range(1, K + 1))
    first = _int_list(doc, "first_edge", K) or [1] * K
    orient = _int_list(doc, "orient", K) or [1] * K
    if any(c < 1 for c in classes):
        raise DiagramParseError("classes", "class labels must be positive")
    try:
        deco = Decoration.make(classes, first, orient)
        return AbstractDiagram(base, deco)
    except ValueError as exc:
        raise DiagramParseError("decoration", str(exc)) from None


def diagram_from_json(text: str) -> AbstractDiagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramParseError("<json>", exc.msg, exc.lineno) from None
    return diagram_from_dict(doc)


def write_ndjson(diagrams: Iterable[AbstractDiagram], out: TextIO) -> int:
    n = 0
    for A in diagrams:
        out.write(diagram_to_json(A))
        out.write("\n")
        n += 1
    return n


def read_ndjson(lines: Iterable[str]) -> Iterator[AbstractDiagram]:
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DiagramParseError("<json>", exc.msg, i) from None
        yield diagram_from_dict(doc, line=i)
