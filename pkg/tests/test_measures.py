"""Comparison measures between models and against sampled indices."""

import pytest

from sortrep import measures
from sortrep.core import DomainError, MarginalFunction, SortingModel, assign
from tests.conftest import REFERENCE_CLASSES, TEST_IDS, make_table


def two_models():
    grid = (0.0, 5.0, 10.0)
    p = SortingModel(
        (
            MarginalFunction("g1", grid, (0.0, 0.2, 0.6)),
            MarginalFunction("g2", grid, (0.0, 0.1, 0.4)),
        ),
        (0.5,),
    )
    q = SortingModel(
        (
            MarginalFunction("g1", grid, (0.0, 0.3, 0.5)),
            MarginalFunction("g2", grid, (0.0, 0.2, 0.5)),
        ),
        (0.4,),
    )
    return p, q


def test_accuracy():
    p, _ = two_models()
    table = make_table(
        {"a": {"g1": 10.0, "g2": 10.0}, "b": {"g1": 0.0, "g2": 0.0}},
        class_count=2, char_points=3,
    )
    assert measures.accuracy(p, table, {"a": 2, "b": 1}) == 1.0
    assert measures.accuracy(p, table, {"a": 1, "b": 1}) == 0.5
    with pytest.raises(DomainError):
        measures.accuracy(p, table, {})


def test_delta_marginal_hand_computed():
    p, q = two_models()
    # |0.2-0.3| + |0.6-0.5| + |0.1-0.2| + |0.4-0.5| over 4 shared points
    assert measures.delta_marginal(p, q) == pytest.approx(0.1)
    assert measures.delta_marginal(p, p) == 0.0


def test_delta_marginal_rejects_mismatched_grids():
    p, _ = two_models()
    other = SortingModel(
        (MarginalFunction("g1", (0.0, 10.0), (0.0, 1.0)),), (0.5,)
    )
    with pytest.raises(DomainError):
        measures.delta_marginal(p, other)


def test_delta_cv_and_th():
    p, q = two_models()
    table = make_table(
        {"a": {"g1": 5.0, "g2": 5.0}, "b": {"g1": 10.0, "g2": 0.0}},
        class_count=2, char_points=3,
    )
    # U_p(a)=0.3, U_q(a)=0.5; U_p(b)=0.6, U_q(b)=0.5
    assert measures.delta_cv(p, q, table, ["a", "b"]) == pytest.approx(0.15)
    assert measures.delta_th(p, q) == pytest.approx(0.1)


def test_mcai_identities(city_acc, city_table, reference_model):
    mcai_abs, mcai_max, mcai_rel = measures.mcai(
        reference_model, city_table, city_acc, TEST_IDS
    )
    assert 0.0 <= mcai_abs <= mcai_max <= 1.0
    assert mcai_rel == pytest.approx(mcai_abs / mcai_max - 1.0)
    assert mcai_rel <= 0.0


def test_mcai_max_is_attained_by_argmax_assignments(
    city_acc, city_table, reference_model
):
    # mcai_max only depends on the acceptabilities, not the model under test
    import numpy as np

    rows = city_acc.cai[[city_acc.index(a) for a in TEST_IDS]]
    best = float(np.mean(rows.max(axis=1)))
    _, mcai_max, _ = measures.mcai(reference_model, city_table, city_acc, TEST_IDS)
    assert mcai_max == pytest.approx(best)


def test_measure_report_fields(city_acc, city_table, reference_model, city_sample):
    from sortrep.procedures import centroid

    cent = centroid(city_sample).model
    truth = {a: REFERENCE_CLASSES[a] for a in TEST_IDS}
    report = measures.measure_report(
        reference_model, city_table, reference_model, cent, city_acc, truth
    )
    assert report.accuracy == 1.0
    assert report.delta_marginal_ref == 0.0
    assert report.delta_cv_ref == 0.0
    assert report.delta_th_ref == 0.0
    row = report.as_row()
    assert len(row) == len(measures.MeasureReport.FIELDS)
    assert row[0] == report.accuracy
