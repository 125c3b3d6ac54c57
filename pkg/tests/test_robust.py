"""Exact necessary relations over the compatible polytope."""

import numpy as np
import pytest

from sortrep import robust, sampler
from tests.conftest import REFERENCE_EXAMPLES


def test_weak_relation_is_reflexive(city_relations):
    assert np.all(np.diag(city_relations.weak))


def test_weak_relation_is_transitive(city_relations):
    w = city_relations.weak
    composed = (w.astype(np.uint8) @ w.astype(np.uint8)) > 0
    assert np.all(w[composed])


def test_reference_pairs_follow_their_classes(city_relations):
    for a, la in REFERENCE_EXAMPLES.items():
        for b, lb in REFERENCE_EXAMPLES.items():
            assert city_relations.weak_of(a, b) == (la >= lb)


def test_dominance_implies_weak(city_relations, city_table):
    # a3 dominates a17 criterion-wise
    a3 = city_table.alternative("a3").performances
    a17 = city_table.alternative("a17").performances
    assert all(a3[g] >= a17[g] for g in a3)
    assert city_relations.weak_of("a3", "a17")


def test_weak_implies_apoi_one(city_relations, city_acc):
    # necessary weak preference means no sampled model ranks b above a
    for i, a in enumerate(city_relations.alt_ids):
        for j, b in enumerate(city_relations.alt_ids):
            if i != j and city_relations.weak[i, j]:
                assert sampler.apoi(city_acc, a, b) == 1.0


def test_necessary_weak_matches_batch(city_cs, city_relations):
    # recompute a few entries pair-by-pair without pruning shortcuts
    for a, b in (("a1", "a14"), ("a14", "a1"), ("a10", "a9"), ("a9", "a10")):
        assert robust.necessary_weak(city_cs, a, b) == city_relations.weak_of(a, b)


def test_strict_pairs_exclude_symmetric_weak(city_relations):
    strict = set(city_relations.strict_pairs())
    equal = set(city_relations.equal_pairs(include_diagonal=False))
    assert not strict & equal
    for a, b in strict:
        assert city_relations.weak_of(a, b)
        assert not city_relations.weak_of(b, a)


def test_necessary_strict_pairs_hold_in_every_sampled_model(
    city_cs, city_relations, city_sample
):
    strict = robust.necessary_strict_pairs(city_cs, city_relations, city_sample)
    assert set(strict) <= set(city_relations.strict_pairs())
    assert strict  # the city polytope separates many pairs exactly
    classes = robust._sample_classes(city_cs, city_sample, city_relations.alt_ids)
    idx = {a: i for i, a in enumerate(city_relations.alt_ids)}
    for a, b in strict:
        assert np.all(classes[:, idx[a]] > classes[:, idx[b]])


def test_export_csv(tmp_path, city_relations):
    path = tmp_path / "necessary.csv"
    city_relations.export_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[0] == "alternative"
    assert len(lines) == len(city_relations.alt_ids) + 1
    first = lines[1].split(",")
    assert first[0] == city_relations.alt_ids[0]
    assert set(first[1:]) <= {"0", "1"}
