"""Synthetic benchmark: generate sorting instances with a hidden reference
model, recover representative models with every procedure, and score them.

An instance draws two pools of 1,000 alternatives with iid uniform [0,1]
performances. A random reference additive value function scores pool 1;
thresholds are placed at empirical U-quantiles matching fixed class
proportions. Reference alternatives (R per class) come from pool 1, test
alternatives (10 per class) from pool 2. Everything is deterministic per
seed.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import core, measures, procedures, robust, sampler
from .core import (
    Alternative,
    AssignmentExamples,
    ConfigurationError,
    Criterion,
    MarginalFunction,
    PerformanceTable,
    SortingModel,
)
from .polytope import build_compatible_set
from .procedures import ProcedureId, SelectionContext, select_representative

POOL_SIZE = 1_000
TEST_PER_CLASS = 10
MAX_RETRIES = 10

CLASS_PROPORTIONS = {
    2: (0.50, 0.50),
    3: (0.30, 0.40, 0.30),
    4: (0.20, 0.30, 0.30, 0.20),
    5: (0.15, 0.20, 0.30, 0.20, 0.15),
}

#: procedures needing the exact necessary relation (one LP sweep per instance)
_NEEDS_RELATIONS = {ProcedureId.ROBUST_ITER, ProcedureId.ROBUST_COMP}


@dataclass(frozen=True)
class InstanceSpec:
    p: int
    m: int
    gamma: int
    r: int
    seed: int

    def __post_init__(self):
        if self.p < 2 or self.m < 1 or self.gamma < 2 or self.r < 1:
            raise ConfigurationError(f"invalid instance spec {self}")
        if self.p not in CLASS_PROPORTIONS:
            raise ConfigurationError(
                f"class proportions defined for p in "
                f"{sorted(CLASS_PROPORTIONS)}, got {self.p}"
            )


@dataclass(frozen=True)
class Instance:
    spec: InstanceSpec
    table: PerformanceTable  # reference + test alternatives
    reference_model: SortingModel
    reference_assignments: dict[str, int]  # true class of every alternative
    reference_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    @property
    def examples(self) -> AssignmentExamples:
        return AssignmentExamples(
            {a: self.reference_assignments[a] for a in self.reference_ids}
        )

    @property
    def test_assignments(self) -> dict[str, int]:
        return {a: self.reference_assignments[a] for a in self.test_ids}


def _random_reference_model(
    rng: np.random.Generator, m: int, gamma: int
) -> list[MarginalFunction]:
    # criterion weights: gaps of sorted uniforms, a uniform simplex draw
    cuts = np.sort(np.concatenate(([0.0], rng.random(m - 1), [1.0])))
    weights = np.diff(cuts)
    breakpoints = tuple(np.linspace(0.0, 1.0, gamma))
    marginals = []
    for j, w in enumerate(weights):
        interior = np.sort(rng.random(gamma - 2)) * w
        values = (0.0, *interior.tolist(), float(w))
        marginals.append(MarginalFunction(f"g{j + 1}", breakpoints, values))
    return marginals


def _pool_values(marginals, pool: np.ndarray) -> np.ndarray:
    total = np.zeros(pool.shape[0])
    for j, mf in enumerate(marginals):
        total += np.interp(pool[:, j], mf.breakpoints, mf.values)
    return total


def _quantile_thresholds(values: np.ndarray, proportions) -> tuple[float, ...]:
    """Thresholds halfway between the pool values straddling each cumulative
    proportion cut."""
    ordered = np.sort(values)
    n = len(ordered)
    thresholds = []
    cum = 0.0
    for share in proportions[:-1]:
        cum += share
        k = int(round(n * cum))
        thresholds.append((ordered[k - 1] + ordered[k]) / 2.0)
    return tuple(thresholds)


def generate_instance(spec: InstanceSpec) -> Instance:
    last_error = None
    for attempt in range(MAX_RETRIES + 1):
        derived = spec.seed if attempt == 0 else spec.seed * 10 + attempt
        try:
            return _generate_once(spec, derived)
        except _RetryGeneration as exc:
            last_error = exc
    raise ConfigurationError(
        f"could not generate instance for {spec} in {MAX_RETRIES + 1} "
        f"attempts: {last_error}"
    )


class _RetryGeneration(Exception):
    pass


def _generate_once(spec: InstanceSpec, seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    p, m = spec.p, spec.m
    pool1 = rng.random((POOL_SIZE, m))
    pool2 = rng.random((POOL_SIZE, m))
    marginals = _random_reference_model(rng, m, spec.gamma)
    u1 = _pool_values(marginals, pool1)
    u2 = _pool_values(marginals, pool2)
    thresholds = _quantile_thresholds(u1, CLASS_PROPORTIONS[p])
    if any(
        t2 - t1 <= 1e-9 for t1, t2 in zip((0.0, *thresholds), (*thresholds, 1.0))
    ):
        raise _RetryGeneration("degenerate quantile thresholds")
    model = SortingModel(tuple(marginals), thresholds)

    c1 = np.fromiter(
        (core.assign_value(thresholds, u) for u in u1), dtype=int, count=POOL_SIZE
    )
    c2 = np.fromiter(
        (core.assign_value(thresholds, u) for u in u2), dtype=int, count=POOL_SIZE
    )

    alternatives: list[Alternative] = []
    assignments: dict[str, int] = {}
    ref_ids: list[str] = []
    test_ids: list[str] = []

    def pick(pool, classes, cls, count):
        members = np.flatnonzero(classes == cls)
        if len(members) < count:
            raise _RetryGeneration(f"class {cls} has only {len(members)} members")
        return rng.choice(members, size=count, replace=False)

    for cls in range(1, p + 1):
        for k, row in enumerate(pick(pool1, c1, cls, spec.r)):
            alt_id = f"r{cls}_{k + 1}"
            alternatives.append(
                Alternative(alt_id, {f"g{j + 1}": pool1[row, j] for j in range(m)})
            )
            assignments[alt_id] = cls
            ref_ids.append(alt_id)
    for cls in range(1, p + 1):
        for k, row in enumerate(pick(pool2, c2, cls, TEST_PER_CLASS)):
            alt_id = f"t{cls}_{k + 1}"
            alternatives.append(
                Alternative(alt_id, {f"g{j + 1}": pool2[row, j] for j in range(m)})
            )
            assignments[alt_id] = cls
            test_ids.append(alt_id)

    criteria = tuple(
        Criterion(f"g{j + 1}", 0.0, 1.0, spec.gamma) for j in range(m)
    )
    table = PerformanceTable(criteria, tuple(alternatives), p)

    # the hidden model must stay compatible once the epsilon margins apply
    for alt_id in ref_ids:
        u = core.comprehensive_value(model, table.alternative(alt_id))
        cls = assignments[alt_id]
        if cls <= p - 1 and thresholds[cls - 1] - u < 2 * core.DEFAULT_EPSILON:
            raise _RetryGeneration(f"{alt_id} too close to its upper threshold")
        if cls >= 2 and u - thresholds[cls - 2] < 2 * core.DEFAULT_EPSILON:
            raise _RetryGeneration(f"{alt_id} too close to its lower threshold")

    return Instance(spec, table, model, assignments, tuple(ref_ids), tuple(test_ids))


# ---------------------------------------------------------------------------
# suite harness


@dataclass
class ResultTable:
    rows: list[dict] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def ok_frame(self) -> pd.DataFrame:
        df = self.to_frame()
        return df[df["error"].isna()] if len(df) else df

    def aggregate(self, by: str | None = None) -> pd.DataFrame:
        """Mean and std of every measure per procedure, optionally split by
        one instance dimension (p, m, gamma, r)."""
        df = self.ok_frame()
        keys = ["procedure"] if by is None else ["procedure", by]
        cols = list(measures.MeasureReport.FIELDS)
        return df.groupby(keys)[cols].agg(["mean", "std"])

    def export_csv(self, path) -> None:
        # wall_time varies between runs; keep the exported artifact
        # reproducible for a fixed seed and leave timing to to_frame()
        df = self.to_frame()
        df.drop(columns=["wall_time"], errors="ignore").to_csv(path, index=False)

    def export_aggregates(self, directory) -> None:
        import pathlib

        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.aggregate().to_csv(directory / "overall.csv")
        for dim in ("p", "m", "gamma", "r"):
            self.aggregate(by=dim).to_csv(directory / f"by_{dim}.csv")


def applicable_procedures(spec: InstanceSpec, requested=None) -> list[ProcedureId]:
    procs = list(requested) if requested else list(ProcedureId)
    if spec.gamma < 3 and ProcedureId.MSCVF in procs:
        procs.remove(ProcedureId.MSCVF)
    return procs


def run_instance(
    instance: Instance,
    procs,
    sample_count: int = sampler.DEFAULT_SAMPLE_COUNT,
    backend=None,
) -> list[dict]:
    spec = instance.spec
    table = instance.table
    cs = build_compatible_set(table, instance.examples)
    sample = sampler.har_sample(cs, count=sample_count, seed=spec.seed)
    acc = sampler.compute_acceptabilities(sample, table)
    relations = None
    if any(pid in _NEEDS_RELATIONS for pid in procs):
        relations = robust.necessary_relations(cs, sample=sample, backend=backend)
    cent = procedures.centroid(sample).model

    ctx = SelectionContext(
        cs=cs,
        acceptabilities=acc,
        relations=relations,
        sample=sample,
        backend=backend,
    )
    rows = []
    for pid in procs:
        base = {
            "p": spec.p, "m": spec.m, "gamma": spec.gamma, "r": spec.r,
            "seed": spec.seed, "procedure": pid.value,
        }
        started = time.perf_counter()
        try:
            result = select_representative(pid, ctx)
            report = measures.measure_report(
                result.model,
                table,
                instance.reference_model,
                cent,
                acc,
                instance.test_assignments,
            )
        except Exception as exc:
            rows.append({
                **base,
                **{f: np.nan for f in measures.MeasureReport.FIELDS},
                "wall_time": time.perf_counter() - started,
                "error": f"{type(exc).__name__}: {exc}",
            })
            continue
        rows.append({
            **base,
            **dict(zip(measures.MeasureReport.FIELDS, report.as_row())),
            "wall_time": time.perf_counter() - started,
            "error": None,
        })
    return rows


def run_suite(
    specs,
    procedures_requested=None,
    sample_count: int = sampler.DEFAULT_SAMPLE_COUNT,
    backend=None,
    progress=None,
) -> ResultTable:
    """Run every applicable procedure on every instance spec.

    Procedure failures become error rows; the suite never aborts.
    """
    specs = list(specs)
    if not specs:
        raise ConfigurationError("empty instance grid")
    result = ResultTable()
    for k, spec in enumerate(specs):
        procs = applicable_procedures(spec, procedures_requested)
        try:
            instance = generate_instance(spec)
            result.rows.extend(run_instance(instance, procs, sample_count, backend))
        except Exception as exc:
            for pid in procs:
                result.rows.append({
                    "p": spec.p, "m": spec.m, "gamma": spec.gamma, "r": spec.r,
                    "seed": spec.seed, "procedure": pid.value,
                    **{f: np.nan for f in measures.MeasureReport.FIELDS},
                    "wall_time": 0.0,
                    "error": f"{type(exc).__name__}: {exc}",
                })
        if progress is not None:
            progress(k + 1, len(specs))
    return result


def grid_specs(
    p_values, m_values, gamma_values, r_values, instances_per_cell: int,
    base_seed: int = 0,
) -> list[InstanceSpec]:
    """Full factorial grid with deterministic per-instance seeds."""
    specs = []
    cell = 0
    for p in p_values:
        for m in m_values:
            for gamma in gamma_values:
                for r in r_values:
                    for k in range(instances_per_cell):
                        specs.append(
                            InstanceSpec(
                                p=p, m=m, gamma=gamma, r=r,
                                seed=base_seed + 1_000 * cell + k,
                            )
                        )
                    cell += 1
    return specs


def desk_grid(instances_per_cell: int = 10, base_seed: int = 0):
    """Reduced grid sized for a single workstation run (160 instances)."""
    return grid_specs((2, 3), (3, 5), (2, 4), (3, 5), instances_per_cell, base_seed)


def paper_grid(instances_per_cell: int = 100, base_seed: int = 0):
    """The full published grid; 19,200 instances, long-running."""
    return grid_specs(
        (2, 3, 4, 5), (3, 5, 7, 9), (2, 4, 6), (3, 5, 7, 10),
        instances_per_cell, base_seed,
    )


def load_run_spec(path):
    """Read a suite configuration JSON: grid lists, instances per cell,
    sample count, seed, optional procedure subset."""
    with open(path) as f:
        doc = json.load(f)
    grid = doc.get("grid", {})
    specs = grid_specs(
        grid.get("p", (2, 3)),
        grid.get("m", (3, 5)),
        grid.get("gamma", (2, 4)),
        grid.get("r", (3, 5)),
        int(doc.get("instances_per_cell", 10)),
        int(doc.get("seed", 0)),
    )
    procs = None
    if "procedures" in doc:
        procs = [ProcedureId(name) for name in doc["procedures"]]
    sample_count = int(doc.get("sample_count", sampler.DEFAULT_SAMPLE_COUNT))
    return specs, procs, sample_count
