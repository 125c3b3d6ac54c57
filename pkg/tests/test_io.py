"""Dataset and model JSON round-trips and the bundled fixture."""

import json

import pytest

from sortrep import io
from sortrep.core import assign, comprehensive_value
from tests.conftest import REFERENCE_CLASSES, REFERENCE_EXAMPLES


def test_bundled_dataset_shape():
    table, examples = io.bundled_dataset()
    assert len(table.alternatives) == 30
    assert [c.id for c in table.criteria] == ["g1", "g2", "g3", "g4"]
    assert all(c.char_point_count == 3 for c in table.criteria)
    assert table.class_count == 3
    assert examples.assignments == REFERENCE_EXAMPLES


def test_bundled_reference_model_reproduces_assignments():
    table, _ = io.bundled_dataset()
    model = io.bundled_reference_model()
    for alt in table.alternatives:
        assert assign(model, alt) == REFERENCE_CLASSES[alt.id]


def test_dataset_round_trip(tmp_path):
    table, examples = io.bundled_dataset()
    path = tmp_path / "data.json"
    io.save_dataset(table, examples, path)
    table2, examples2 = io.load_dataset(path)
    assert table2 == table
    assert examples2 == examples


def test_model_round_trip(tmp_path):
    model = io.bundled_reference_model()
    path = tmp_path / "model.json"
    io.save_model(model, path)
    back = io.load_model(path)
    assert back == model


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(io.ParseError):
        io.load_dataset(bad)
    with pytest.raises(io.ParseError):
        io.load_model(bad)

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"criteria": []}))
    with pytest.raises(io.ParseError, match="alternatives"):
        io.load_dataset(missing)
    missing.write_text(json.dumps({"marginals": [{"criterion_id": "g"}]}))
    with pytest.raises(io.ParseError, match="breakpoints"):
        io.load_model(missing)


def test_export_assignments_csv(tmp_path):
    path = tmp_path / "assignments.csv"
    io.export_assignments_csv({"a1": 3, "a2": 1}, path)
    assert path.read_text().splitlines() == ["alternative,class", "a1,3", "a2,1"]


def test_comprehensive_values_stay_in_unit_interval():
    table, _ = io.bundled_dataset()
    model = io.bundled_reference_model()
    for alt in table.alternatives:
        assert 0.0 <= comprehensive_value(model, alt) <= 1.0
