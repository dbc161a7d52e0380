import json

import pytest
from hypothesis import given

from conftest import any_spaces
from moebiuslab.qspace import InvalidSpaceError, SpaceParseError, line_space
from moebiuslab.spaceio import (
    digest,
    dumps_space,
    family_from_json,
    family_to_json,
    load_space,
    save_space,
    space_from_json,
    space_to_json,
)


@given(any_spaces())
def test_json_round_trip_is_byte_exact(S):
    text = dumps_space(S)
    T = space_from_json(json.loads(text))
    assert T == S
    assert dumps_space(T) == text


def test_no_floats_in_space_files():
    doc = space_to_json(line_space(["1/3", 2, 5]))
    assert all(isinstance(v, str) for row in doc["dist"] for v in row)
    assert doc["dist"][0][1] == "5/3"


def test_asymmetric_input_is_not_symmetrized():
    doc = {"points": ["a", "b", "c"], "infinity": None, "dist": [["0", "1", "2"], ["3", "0", "1"], ["2", "1", "0"]]}
    with pytest.raises(InvalidSpaceError) as err:
        space_from_json(doc)
    assert "symmetry" in err.value.report.rules()


def test_malformed_documents():
    with pytest.raises(SpaceParseError):
        space_from_json({"points": ["a"]})
    with pytest.raises(SpaceParseError):
        space_from_json({"points": ["a", "b", "c"], "dist": [["0", "x", "1"], ["x", "0", "1"], ["1", "1", "0"]]})


def test_files_and_digest(tmp_path):
    S = line_space([0, 1, 2, 4])
    p = tmp_path / "s.json"
    save_space(S, p)
    assert load_space(p) == S
    assert len(digest(p)) == 64


def test_family_round_trip():
    S = line_space([0, 1, 2, 4])
    sets, meta = family_from_json(S, {"sets": [["0", "1"], ["2"], ["4"]], "s": "1/2", "c": "3"})
    assert sets == [frozenset({0, 1}), frozenset({2}), frozenset({3})]
    assert family_to_json(S, sets, **meta) == {"sets": [["0", "1"], ["2"], ["4"]], "s": "1/2", "c": "3"}
    with pytest.raises(SpaceParseError):
        family_from_json(S, {"sets": [["9"]]})
