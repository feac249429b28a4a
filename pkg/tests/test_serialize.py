import io
import json

import pytest

from gromovlab.enumerate import EnumerationFilter, enumerate_abstract
from gromovlab.serialize import (
    DiagramParseError,
    diagram_from_dict,
    diagram_from_json,
    diagram_to_dict,
    diagram_to_json,
    read_ndjson,
    write_ndjson,
)


def _doc(**kw):
    doc = {"K": 2, "l": 4, "gluing": [{"a": [0, 1], "b": [1, 1], "flip": True}],
           "fixed_paths": [{"face": 0, "edges": [[0, 2], [0, 3]], "letters": "ab"}],
           "classes": [1, 2], "first_edge": [1, 1], "orient": [1, 1]}
    doc.update(kw)
    return doc


def test_round_trip_population():
    pop = list(enumerate_abstract(2, 1, 3, EnumerationFilter(max_identifications=1, alphabet="aB")))
    for A in pop[::25]:
        B = diagram_from_json(diagram_to_json(A))
        assert diagram_to_dict(B) == diagram_to_dict(A)
        assert B.complex == A.complex and B.deco == A.deco


def test_ndjson_round_trip():
    pop = list(enumerate_abstract(2, 0, 3, EnumerationFilter(max_identifications=1, dedup=True)))
    buf = io.StringIO()
    assert write_ndjson(pop, buf) == len(pop)
    back = list(read_ndjson(io.StringIO(buf.getvalue() + "\n\n")))
    assert [diagram_to_dict(A) for A in back] == [diagram_to_dict(A) for A in pop]


def test_missing_decoration_defaults():
    A = diagram_from_dict({"K": 2, "l": 3})
    assert list(A.deco.class_of) == [1, 2]
    assert list(A.deco.first_edge) == [1, 1] and list(A.deco.orientation) == [1, 1]


@pytest.mark.parametrize("doc,field", [
    ([], "<root>"),
    ({"l": 4}, "K"),
    (_doc(K="2"), "K"),
    (_doc(l=0), "l"),
    (_doc(gluing=[{"a": [0], "b": [1, 1]}]), "gluing[0].a"),
    (_doc(gluing=[{"a": [0, 1], "b": [1, 1], "flip": "yes"}]), "gluing[0].flip"),
    (_doc(gluing=[{"a": [0, 9], "b": [1, 1]}]), "gluing"),
    (_doc(fixed_paths=[{"edges": [[0, 1]], "letters": "a"}]), "fixed_paths[0].face"),
    (_doc(fixed_paths=[{"face": 0, "edges": "x", "letters": "a"}]), "fixed_paths[0].edges"),
    (_doc(fixed_paths=[{"face": 0, "edges": [[0, 1]], "letters": "z1"}]), "fixed_paths[0].letters"),
    (_doc(fixed_paths=[{"face": 0, "edges": [[0, 1], [0, 3]], "letters": "ab"}]), "fixed_paths"),
    (_doc(classes=[1]), "classes"),
    (_doc(classes=[0, 1]), "classes"),
    (_doc(orient=[1, 2]), "decoration"),
])
def test_field_errors(doc, field):
    with pytest.raises(DiagramParseError) as info:
        diagram_from_dict(doc)
    assert info.value.field == field


def test_json_error_reports_line():
    with pytest.raises(DiagramParseError) as info:
        diagram_from_json('{"K": 1,\n "l": }')
    assert info.value.line == 2
    lines = [json.dumps(_doc()), json.dumps(_doc(l=0))]
    with pytest.raises(DiagramParseError) as info:
        list(read_ndjson(lines))
    assert info.value.line == 2 and info.value.field == "l"
