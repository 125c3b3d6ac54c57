"""Shared fixtures: the bundled city dataset, its sampled polytope, and a
synthetic tiny-instance factory. Expensive fixtures are session-scoped."""

import numpy as np
import pytest

from sortrep import io, robust, sampler
from sortrep.core import (
    Alternative,
    AssignmentExamples,
    Criterion,
    PerformanceTable,
)
from sortrep.polytope import build_compatible_set

# classification of all 30 cities under the bundled reference model
REFERENCE_CLASSES = {
    "a1": 3, "a2": 3, "a3": 3, "a4": 3, "a5": 3, "a6": 2, "a7": 2, "a8": 3,
    "a9": 2, "a10": 3, "a11": 3, "a12": 3, "a13": 3, "a14": 1, "a15": 1,
    "a16": 1, "a17": 2, "a18": 2, "a19": 2, "a20": 1, "a21": 2, "a22": 1,
    "a23": 2, "a24": 1, "a25": 2, "a26": 2, "a27": 1, "a28": 1, "a29": 1,
    "a30": 1,
}

# comprehensive values of all 30 cities under the bundled reference model
REFERENCE_U = {
    "a1": 0.6963, "a2": 0.6802, "a3": 0.8129, "a4": 0.7960, "a5": 0.7339,
    "a6": 0.6414, "a7": 0.5292, "a8": 0.8163, "a9": 0.6163, "a10": 0.6805,
    "a11": 0.6881, "a12": 0.8258, "a13": 0.7775, "a14": 0.2662,
    "a15": 0.3900, "a16": 0.3573, "a17": 0.4677, "a18": 0.4016,
    "a19": 0.4978, "a20": 0.3252, "a21": 0.4759, "a22": 0.3659,
    "a23": 0.4952, "a24": 0.2276, "a25": 0.5185, "a26": 0.4216,
    "a27": 0.2701, "a28": 0.2757, "a29": 0.1418, "a30": 0.2085,
}

REFERENCE_EXAMPLES = {
    "a15": 1, "a20": 1, "a27": 1,
    "a7": 2, "a18": 2, "a19": 2,
    "a1": 3, "a8": 3, "a10": 3,
}

TEST_IDS = tuple(sorted(
    (a for a in REFERENCE_CLASSES if a not in REFERENCE_EXAMPLES),
    key=lambda s: int(s[1:]),
))


@pytest.fixture(scope="session")
def city():
    return io.bundled_dataset()


@pytest.fixture(scope="session")
def city_table(city):
    return city[0]


@pytest.fixture(scope="session")
def city_examples(city):
    return city[1]


@pytest.fixture(scope="session")
def city_cs(city):
    table, examples = city
    return build_compatible_set(table, examples)


@pytest.fixture(scope="session")
def reference_model():
    return io.bundled_reference_model()


@pytest.fixture(scope="session")
def city_sample(city_cs):
    return sampler.har_sample(city_cs, count=10_000, seed=0)


@pytest.fixture(scope="session")
def city_acc(city_sample, city_table):
    return sampler.compute_acceptabilities(city_sample, city_table)


@pytest.fixture(scope="session")
def city_relations(city_cs, city_sample):
    return robust.necessary_relations(city_cs, sample=city_sample)


@pytest.fixture(scope="session")
def city_ctx(city_cs, city_acc, city_relations, city_sample):
    from sortrep.procedures import SelectionContext

    return SelectionContext(
        cs=city_cs,
        acceptabilities=city_acc,
        relations=city_relations,
        sample=city_sample,
    )


@pytest.fixture(scope="session")
def city_results(city_ctx):
    from sortrep.procedures import ProcedureId, select_representative

    return {pid: select_representative(pid, city_ctx) for pid in ProcedureId}


def make_table(performances, class_count=2, char_points=2, scale=(0.0, 10.0)):
    """Performance table from {alt_id: {crit_id: value}}."""
    crit_ids = sorted({c for perf in performances.values() for c in perf})
    criteria = tuple(
        Criterion(cid, scale[0], scale[1], char_points) for cid in crit_ids
    )
    alternatives = tuple(
        Alternative(aid, dict(perf)) for aid, perf in performances.items()
    )
    return PerformanceTable(criteria, alternatives, class_count)


def tiny_instance(seed, n_alternatives=5, n_examples=4):
    """Random 2-criteria, 2-class, 2-point instance with a compatible
    example set (derived from a random linear model). Retries until the
    hidden model leaves a clear gap at the threshold, so the compatible
    polytope has a usable interior."""
    for attempt in range(50):
        rng = np.random.default_rng(seed * 1000 + attempt)
        perfs = {
            f"b{i}": {
                "g1": float(rng.uniform(0, 10)),
                "g2": float(rng.uniform(0, 10)),
            }
            for i in range(1, n_alternatives + 1)
        }
        w = rng.dirichlet([1.0, 1.0])
        values = {
            aid: (w[0] * p["g1"] + w[1] * p["g2"]) / 10.0
            for aid, p in perfs.items()
        }
        ranked = sorted(values, key=values.get)
        split = len(ranked) // 2
        gap = values[ranked[split]] - values[ranked[split - 1]]
        if gap < 0.05:
            continue
        threshold = values[ranked[split - 1]] + 0.5 * gap
        ids = list(perfs)
        rng.shuffle(ids)
        assignments = {
            aid: (2 if values[aid] >= threshold else 1) for aid in ids[:n_examples]
        }
        if len(set(assignments.values())) == 1:
            assignments[ranked[0]] = 1
            assignments[ranked[-1]] = 2
        return make_table(perfs), AssignmentExamples(assignments)
    raise RuntimeError(f"no usable tiny instance for seed {seed}")
