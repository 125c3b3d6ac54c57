"""Load and save datasets and models.

Formats are documented in docs/formats.md: a dataset JSON bundles criteria,
alternatives, the class count, and the assignment examples; a model JSON
holds marginal breakpoint values and thresholds. A bundled example dataset
and its reference model ship with the package.
"""

from __future__ import annotations

import csv
import json
from importlib import resources
from typing import Mapping

from .core import (
    Alternative,
    AssignmentExamples,
    Criterion,
    MarginalFunction,
    PerformanceTable,
    SortingModel,
)


class ParseError(ValueError):
    """A dataset or model file does not match the documented schema."""


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing key {key!r}")
    return obj[key]


def dataset_from_dict(doc: Mapping) -> tuple[PerformanceTable, AssignmentExamples]:
    criteria = tuple(
        Criterion(
            id=str(_require(c, "id", "criterion")),
            scale_min=float(_require(c, "scale_min", "criterion")),
            scale_max=float(_require(c, "scale_max", "criterion")),
            char_point_count=int(_require(c, "char_point_count", "criterion")),
        )
        for c in _require(doc, "criteria", "dataset")
    )
    alternatives = tuple(
        Alternative(
            id=str(_require(a, "id", "alternative")),
            performances={
                str(k): float(v)
                for k, v in _require(a, "performances", "alternative").items()
            },
        )
        for a in _require(doc, "alternatives", "dataset")
    )
    table = PerformanceTable(
        criteria=criteria,
        alternatives=alternatives,
        class_count=int(_require(doc, "class_count", "dataset")),
    )
    examples = AssignmentExamples(
        {str(k): int(v) for k, v in doc.get("assignments", {}).items()}
    )
    examples.validate(table)
    return table, examples


def dataset_to_dict(table: PerformanceTable, examples: AssignmentExamples) -> dict:
    return {
        "class_count": table.class_count,
        "criteria": [
            {
                "id": c.id,
                "scale_min": c.scale_min,
                "scale_max": c.scale_max,
                "char_point_count": c.char_point_count,
            }
            for c in table.criteria
        ],
        "alternatives": [
            {"id": a.id, "performances": dict(a.performances)}
            for a in table.alternatives
        ],
        "assignments": dict(examples.assignments),
    }


def load_dataset(path) -> tuple[PerformanceTable, AssignmentExamples]:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return dataset_from_dict(doc)


def save_dataset(table, examples, path) -> None:
    with open(path, "w") as f:
        json.dump(dataset_to_dict(table, examples), f, indent=2)
        f.write("\n")


def model_from_dict(doc: Mapping) -> SortingModel:
    marginals = tuple(
        MarginalFunction(
            criterion_id=str(_require(m, "criterion_id", "marginal")),
            breakpoints=tuple(float(x) for x in _require(m, "breakpoints", "marginal")),
            values=tuple(float(x) for x in _require(m, "values", "marginal")),
        )
        for m in _require(doc, "marginals", "model")
    )
    thresholds = tuple(float(x) for x in _require(doc, "thresholds", "model"))
    return SortingModel(marginals, thresholds)


def model_to_dict(model: SortingModel) -> dict:
    return {
        "marginals": [
            {
                "criterion_id": m.criterion_id,
                "breakpoints": list(m.breakpoints),
                "values": list(m.values),
            }
            for m in model.marginals
        ],
        "thresholds": list(model.thresholds),
    }


def load_model(path) -> SortingModel:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)


def save_model(model: SortingModel, path) -> None:
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=2)
        f.write("\n")


def export_assignments_csv(assignments: Mapping[str, int], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["alternative", "class"])
        for alt_id, cls in assignments.items():
            writer.writerow([alt_id, cls])


def bundled_dataset() -> tuple[PerformanceTable, AssignmentExamples]:
    """The packaged city-evaluation example dataset."""
    text = resources.files("sortrep.data").joinpath("green_cities.json").read_text()
    return dataset_from_dict(json.loads(text))


def bundled_reference_model() -> SortingModel:
    text = resources.files("sortrep.data").joinpath(
        "green_cities_reference_model.json"
    ).read_text()
    return model_from_dict(json.loads(text))
