"""Comparison measures: assignment quality of a selected model against held
out reference assignments and acceptability indices, and similarity of two
models (marginal values, comprehensive values, thresholds).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import DomainError, PerformanceTable, SortingModel, assign, comprehensive_value
from .sampler import Acceptabilities


@dataclass(frozen=True)
class MeasureReport:
    accuracy: float
    mcai_abs: float
    mcai_max: float
    mcai_rel: float
    delta_marginal_ref: float
    delta_marginal_cent: float
    delta_cv_ref: float
    delta_th_ref: float

    FIELDS = (
        "accuracy", "mcai_abs", "mcai_max", "mcai_rel",
        "delta_marginal_ref", "delta_marginal_cent",
        "delta_cv_ref", "delta_th_ref",
    )

    def as_row(self) -> list[float]:
        return [getattr(self, f) for f in self.FIELDS]


def accuracy(
    model: SortingModel,
    table: PerformanceTable,
    reference_assignments: Mapping[str, int],
) -> float:
    """Fraction of the given alternatives the model assigns to their
    reference class."""
    if not reference_assignments:
        raise DomainError("accuracy needs a nonempty test set")
    hits = sum(
        assign(model, table.alternative(alt_id)) == cls
        for alt_id, cls in reference_assignments.items()
    )
    return hits / len(reference_assignments)


def mcai(
    model: SortingModel,
    table: PerformanceTable,
    acc: Acceptabilities,
    test_ids: Sequence[str],
) -> tuple[float, float, float]:
    """(mean CAI of the model's assignments, mean best-class CAI, and the
    relative gap abs/max - 1) over the test alternatives.

    Argmax ties in the best-class CAI resolve toward the lower class.
    """
    if not test_ids:
        raise DomainError("mcai needs a nonempty test set")
    abs_sum = 0.0
    max_sum = 0.0
    for alt_id in test_ids:
        cls = assign(model, table.alternative(alt_id))
        row = acc.cai[acc.index(alt_id)]
        abs_sum += row[cls - 1]
        max_sum += row[int(np.argmax(row))]
    mcai_abs = abs_sum / len(test_ids)
    mcai_max = max_sum / len(test_ids)
    return mcai_abs, mcai_max, mcai_abs / mcai_max - 1.0


def delta_marginal(model_p: SortingModel, model_q: SortingModel) -> float:
    """Mean absolute difference of marginal values at shared breakpoints
    (the first breakpoint, identically zero, is excluded)."""
    total = 0.0
    count = 0
    if len(model_p.marginals) != len(model_q.marginals):
        raise DomainError("models have different criteria")
    for mp in model_p.marginals:
        mq = model_q.marginal(mp.criterion_id)
        if not np.allclose(mp.breakpoints, mq.breakpoints, atol=1e-9):
            raise DomainError(
                f"breakpoint grids differ on criterion {mp.criterion_id!r}"
            )
        for s in range(1, len(mp.breakpoints)):
            total += abs(mp.values[s] - mq.values[s])
            count += 1
    return total / count


def delta_cv(
    model_p: SortingModel,
    model_ref: SortingModel,
    table: PerformanceTable,
    test_ids: Sequence[str],
) -> float:
    """Mean absolute difference of comprehensive values over the test set."""
    if not test_ids:
        raise DomainError("delta_cv needs a nonempty test set")
    total = 0.0
    for alt_id in test_ids:
        alt = table.alternative(alt_id)
        total += abs(
            comprehensive_value(model_p, alt) - comprehensive_value(model_ref, alt)
        )
    return total / len(test_ids)


def delta_th(model_p: SortingModel, model_ref: SortingModel) -> float:
    """Mean absolute threshold difference."""
    if len(model_p.thresholds) != len(model_ref.thresholds):
        raise DomainError("models have different class counts")
    return float(
        np.mean(
            np.abs(np.array(model_p.thresholds) - np.array(model_ref.thresholds))
        )
    )


def measure_report(
    model: SortingModel,
    table: PerformanceTable,
    reference_model: SortingModel,
    centroid_model: SortingModel,
    acc: Acceptabilities,
    test_assignments: Mapping[str, int],
) -> MeasureReport:
    test_ids = list(test_assignments)
    mcai_abs, mcai_max, mcai_rel = mcai(model, table, acc, test_ids)
    return MeasureReport(
        accuracy=accuracy(model, table, test_assignments),
        mcai_abs=mcai_abs,
        mcai_max=mcai_max,
        mcai_rel=mcai_rel,
        delta_marginal_ref=delta_marginal(model, reference_model),
        delta_marginal_cent=delta_marginal(model, centroid_model),
        delta_cv_ref=delta_cv(model, reference_model, table, test_ids),
        delta_th_ref=delta_th(model, reference_model),
    )
