"""Acceptance gate: seven numbered criteria, one PASS/FAIL line each.

Pinned targets and tolerances live next to the checks. Criterion 3 pins
externally published acceptability estimates that two independent samplers
both contradict; it is asserted at its stated tolerances regardless, so a
FAIL there is expected and documented.
"""

import time

import numpy as np
import pytest

from sortrep import experiment, io, measures, robust, sampler
from sortrep.core import assign, comprehensive_value, marginal_value
from sortrep.mathprog import BruteForceBackend, Program, solve
from sortrep.polytope import build_compatible_set, chebyshev_center
from sortrep.procedures import (
    ProcedureId,
    repdis,
    robust_exact,
    stochastic_milp,
    sum_scores,
    utadismp,
)
from tests.conftest import (
    REFERENCE_CLASSES,
    REFERENCE_EXAMPLES,
    REFERENCE_U,
    TEST_IDS,
    tiny_instance,
)

# pinned class-acceptability targets for the city study, 10,000 samples
PINNED_CAI = {
    "a1": (0.000, 0.000, 1.000), "a2": (0.000, 0.029, 0.971),
    "a3": (0.000, 0.000, 1.000), "a4": (0.000, 0.000, 1.000),
    "a5": (0.000, 0.000, 1.000), "a6": (0.000, 0.056, 0.944),
    "a7": (0.000, 1.000, 0.000), "a8": (0.000, 0.000, 1.000),
    "a9": (0.000, 0.124, 0.876), "a10": (0.000, 0.000, 1.000),
    "a11": (0.000, 0.200, 0.800), "a12": (0.000, 0.000, 1.000),
    "a13": (0.000, 0.000, 1.000), "a14": (1.000, 0.000, 0.000),
    "a15": (1.000, 0.000, 0.000), "a16": (1.000, 0.000, 0.000),
    "a17": (0.088, 0.912, 0.000), "a18": (0.000, 1.000, 0.000),
    "a19": (0.000, 1.000, 0.000), "a20": (1.000, 0.000, 0.000),
    "a21": (0.001, 0.999, 0.000), "a22": (1.000, 0.000, 0.000),
    "a23": (0.000, 0.935, 0.065), "a24": (1.000, 0.000, 0.000),
    "a25": (0.000, 0.849, 0.151), "a26": (0.008, 0.991, 0.001),
    "a27": (1.000, 0.000, 0.000), "a28": (1.000, 0.000, 0.000),
    "a29": (1.000, 0.000, 0.000), "a30": (1.000, 0.000, 0.000),
}


@pytest.fixture(scope="session")
def desk():
    """The 160-instance synthetic suite, run once per session."""
    started = time.perf_counter()
    result = experiment.run_suite(experiment.desk_grid())
    elapsed = time.perf_counter() - started
    return result.to_frame(), elapsed


def report(n, failures):
    status = "PASS" if not failures else "FAIL"
    line = f"acceptance criterion {n}: {status}"
    print(line)
    if failures:
        pytest.fail(line + "\n  " + "\n  ".join(failures), pytrace=False)


def misclassified(model, table):
    return {
        a for a in TEST_IDS
        if assign(model, table.alternative(a)) != REFERENCE_CLASSES[a]
    }


def test_criterion_1_reference_model(city_table, reference_model):
    failures = []
    started = time.perf_counter()
    for alt in city_table.alternatives:
        u = comprehensive_value(reference_model, alt)
        if abs(u - REFERENCE_U[alt.id]) > 1e-4:
            failures.append(f"U({alt.id}) = {u:.5f}, pinned {REFERENCE_U[alt.id]}")
        cls = assign(reference_model, alt)
        if cls != REFERENCE_CLASSES[alt.id]:
            failures.append(f"{alt.id} -> {cls}, pinned {REFERENCE_CLASSES[alt.id]}")
    elapsed = time.perf_counter() - started
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s >= 1s")
    report(1, failures)


def test_criterion_2_procedures(city_cs, city_table, city_sample):
    failures = []
    started = time.perf_counter()
    from sortrep.procedures import SelectionContext, mscvf, select_representative

    rel = robust.necessary_relations(city_cs, sample=city_sample)
    mp2 = utadismp(2, city_cs)
    mp3 = utadismp(3, city_cs)
    cheb = select_representative(
        ProcedureId.CHEBYSHEV, SelectionContext(cs=city_cs)
    )
    rob = robust_exact("iter", city_cs, rel, sample=city_sample)
    curve = mscvf(city_cs)
    aggressive = sum_scores("min", city_cs)
    elapsed = time.perf_counter() - started

    a2 = {a.id: assign(mp2.model, a) for a in city_table.alternatives}
    a3 = {a.id: assign(mp3.model, a) for a in city_table.alternatives}
    if a2 != a3:
        failures.append("UTADISMP2 and UTADISMP3 assignments differ")
    if len(misclassified(mp2.model, city_table)) != 1:
        failures.append(
            f"UTADISMP2 accuracy {21 - len(misclassified(mp2.model, city_table))}"
            "/21, pinned 20/21"
        )
    cheb_miss = len(misclassified(cheb.model, city_table))
    if cheb_miss != 4:
        failures.append(f"CHEBYSHEV accuracy {21 - cheb_miss}/21, pinned 17/21")
    rob_miss = len(misclassified(rob.model, city_table))
    if rob_miss != 6:
        failures.append(f"ROBUST-ITER misclassifies {rob_miss}/21, pinned 6/21")
    if abs(curve.diagnostics["phi"]) > 1e-9:
        failures.append(f"MSCVF phi* = {curve.diagnostics['phi']:.3e}, pinned 0")
    u2 = marginal_value(aggressive.model.marginal("g2"), 10.0)
    u4 = marginal_value(aggressive.model.marginal("g4"), 10.0)
    if abs(u2 - 0.6122) > 1e-2 or abs(u4 - 0.3878) > 1e-2:
        failures.append(f"MIN-SVF u2(10) = {u2:.4f}, u4(10) = {u4:.4f}")
    if elapsed >= 30.0:
        failures.append(f"runtime {elapsed:.1f}s >= 30s")
    report(2, failures)


def test_criterion_3_stochastic_reproduction(city_cs, city_table, reference_model):
    failures = []
    started = time.perf_counter()
    sample = sampler.har_sample(city_cs, count=10_000, seed=0)
    acc = sampler.compute_acceptabilities(sample, city_table)
    elapsed = time.perf_counter() - started

    for alt_id, pinned in PINNED_CAI.items():
        row = acc.cai[acc.index(alt_id)]
        for l in range(3):
            if abs(row[l] - pinned[l]) > 0.03:
                failures.append(
                    f"CAI'({alt_id}, C{l + 1}) = {row[l]:.3f}, "
                    f"pinned {pinned[l]} +- 0.03"
                )
    apwi = acc.apwi_of("a10", "a9")
    if abs(apwi - 0.124) > 0.03:
        failures.append(f"APWI'(a10, a9) = {apwi:.3f}, pinned 0.124 +- 0.03")
    _, mcai_max, mcai_rel = measures.mcai(
        reference_model, city_table, acc, TEST_IDS
    )
    if abs(mcai_max - 0.9656) > 0.02:
        failures.append(f"MCAI_max = {mcai_max:.4f}, pinned 0.9656 +- 0.02")
    if abs(mcai_rel - (-0.0809)) > 0.02:
        failures.append(f"MCAI_rel = {mcai_rel:.4f}, pinned -0.0809 +- 0.02")
    if elapsed >= 120.0:
        failures.append(f"runtime {elapsed:.1f}s >= 2min")
    report(3, failures)


def test_criterion_4_cai_acceptability(
    city_results, city_acc, city_table, desk
):
    failures = []
    frame, elapsed = desk
    model = city_results[ProcedureId.CAI].model
    _, _, mcai_rel = measures.mcai(model, city_table, city_acc, TEST_IDS)
    if mcai_rel < -1e-3:
        failures.append(f"city instance MCAI_rel = {mcai_rel:.2e} < -1e-3")
    rows = frame[(frame["procedure"] == "cai") & frame["error"].isna()]
    share = float((rows["mcai_rel"] >= -1e-3).mean())
    if len(rows) < 160:
        failures.append(f"only {len(rows)}/160 CAI runs succeeded")
    if share < 0.95:
        failures.append(f"MCAI_rel >= -1e-3 on {share:.1%} of instances (< 95%)")
    if elapsed >= 1800.0:
        failures.append(f"desk suite took {elapsed:.0f}s >= 30min")
    report(4, failures)


def test_criterion_5_desk_scale_trends(desk):
    failures = []
    frame, _ = desk
    ok = frame[frame["error"].isna()]
    acc = ok.groupby("procedure")["accuracy"].mean()

    for rival in ("max-svf", "min-svf"):
        gap = acc["acutadis"] - acc[rival]
        if gap < 0.05:
            failures.append(f"(a) acutadis - {rival} accuracy gap {gap:.3f} < 0.05")

    by_r = ok.groupby(["procedure", "r"])["accuracy"].mean().unstack()
    for proc, row in by_r.iterrows():
        if row[5] < row[3]:
            failures.append(
                f"(b) {proc}: accuracy {row[5]:.3f} at r=5 < {row[3]:.3f} at r=3"
            )

    for proc in ("cai", "apoi", "comb", "centroid"):
        sub = ok[ok["procedure"] == proc]
        gap = float((sub["mcai_max"] - sub["mcai_abs"]).mean())
        if gap > 0.01:
            failures.append(f"(c) {proc}: mean mcai gap {gap:.4f} > 0.01")

    by_g = ok.groupby(["procedure", "gamma"])["accuracy"].mean().unstack()
    for proc, row in by_g.iterrows():
        if row[4] > row[2]:
            failures.append(
                f"(d) {proc}: accuracy {row[4]:.3f} at gamma=4 > "
                f"{row[2]:.3f} at gamma=2"
            )
    report(5, failures)


def test_criterion_6_property_suites(
    city_results, city_table, city_acc, city_relations, city_cs, desk, tmp_path
):
    failures = []

    # universal compatibility: every procedure reproduces every example
    for pid, result in city_results.items():
        for alt_id, cls in REFERENCE_EXAMPLES.items():
            if assign(result.model, city_table.alternative(alt_id)) != cls:
                failures.append(f"{pid.value} breaks the example for {alt_id}")
    frame, _ = desk
    errors = int(frame["error"].notna().sum())
    if errors:
        failures.append(f"{errors} desk-suite runs errored")

    # acceptability identities
    if float(np.abs(city_acc.cai.sum(axis=1) - 1.0).max()) > 1e-9:
        failures.append("CAI rows do not sum to 1 within 1e-9")
    part = city_acc.apwi + city_acc.apwi.T + city_acc.apei
    np.fill_diagonal(part, 1.0)
    if float(np.abs(part - 1.0).max()) > 1e-9:
        failures.append("APWI/APEI partition identity broken")

    # exact necessity implies unanimous sampled outranking
    for i, a in enumerate(city_relations.alt_ids):
        for j, b in enumerate(city_relations.alt_ids):
            if i != j and city_relations.weak[i, j]:
                if sampler.apoi(city_acc, a, b) != 1.0:
                    failures.append(f"necessary_weak({a}, {b}) but APOI' < 1")

    # uniformity on the analytic simplex, 3 standard errors
    from tests.conftest import make_table
    from sortrep.core import AssignmentExamples

    m, n = 3, 20_000
    simplex_cs = build_compatible_set(
        make_table({"x": {f"g{j}": 5.0 for j in range(1, m + 1)}}),
        AssignmentExamples({}),
    )
    s = sampler.har_sample(simplex_cs, count=n, seed=11)
    tops = np.array([
        s.values[:, simplex_cs.marginal_index[(f"g{j}", 1)]]
        for j in range(1, m + 1)
    ]).T
    se = np.sqrt((m - 1) / (m * m * (m + 1.0)) / n)
    for j in range(m):
        dev = abs(float(tops[:, j].mean()) - 1.0 / m)
        if dev > 3 * se:
            failures.append(f"simplex coordinate {j} off by {dev / se:.1f} SE")

    # byte-identical reruns: sampler and a small suite
    a = sampler.har_sample(city_cs, count=1000, seed=3)
    b = sampler.har_sample(city_cs, count=1000, seed=3)
    if a.values.tobytes() != b.values.tobytes():
        failures.append("sampler rerun is not byte-identical")
    spec = experiment.grid_specs([2], [3], [2], [3], 1, base_seed=2)
    paths = []
    for k in range(2):
        result = experiment.run_suite(
            spec, [ProcedureId.CHEBYSHEV, ProcedureId.CENTROID], 1000
        )
        path = tmp_path / f"suite{k}.csv"
        result.export_csv(path)
        paths.append(path)
    if paths[0].read_bytes() != paths[1].read_bytes():
        failures.append("suite rerun is not byte-identical")
    report(6, failures)


def _close(x, y, what, failures, tol=1e-6):
    if abs(x - y) > tol:
        failures.append(f"{what}: {x!r} vs {y!r}")


def test_criterion_7_oracle_equivalence():
    failures = []
    oracle = BruteForceBackend()
    for seed in range(50):
        table, examples = tiny_instance(seed)
        cs = build_compatible_set(table, examples)
        sample = sampler.har_sample(cs, count=2000, seed=seed)
        acc = sampler.compute_acceptabilities(sample, table)
        rel = robust.necessary_relations(cs, sample=sample)
        tag = f"instance {seed}"

        for variant, keys in ((1, ["delta"]), (2, ["delta", "rho"]), (3, ["rho"])):
            h = utadismp(variant, cs)
            b = utadismp(variant, cs, backend=oracle)
            for key in keys:
                _close(h.diagnostics[key], b.diagnostics[key],
                       f"{tag} utadismp{variant} {key}", failures)

        _close(chebyshev_center(cs)[1], chebyshev_center(cs, oracle)[1],
               f"{tag} chebyshev radius", failures)

        for direction in ("max", "min"):
            _close(
                sum_scores(direction, cs).diagnostics["score_sum"],
                sum_scores(direction, cs, backend=oracle).diagnostics["score_sum"],
                f"{tag} {direction}-svf score", failures,
            )

        # the per-criterion extreme LPs behind the averaged-extremes model
        for crit in table.criteria:
            for sense in ("max", "min"):
                prog = Program()
                cs.add_to_program(prog)
                top = f"u_{crit.id}_{crit.char_point_count - 1}"
                prog.set_objective(sense, {top: 1.0})
                _close(
                    solve(prog).objective, solve(prog, oracle).objective,
                    f"{tag} extreme {sense} {crit.id}", failures,
                )

        for key in ("omega", "omega_sum"):
            h = repdis(cs, acc)
            b = repdis(cs, acc, backend=oracle)
            if key in h.diagnostics:
                _close(h.diagnostics[key], b.diagnostics.get(key, np.nan),
                       f"{tag} repdis {key}", failures)

        h = stochastic_milp("cai", cs, acc)
        b = stochastic_milp("cai", cs, acc, backend=oracle)
        _close(h.diagnostics["kappa"], b.diagnostics["kappa"],
               f"{tag} cai kappa", failures)

        for variant, keys in (("iter", ["omega", "lambda"]),
                              ("comp", ["iota", "lambda"])):
            h = robust_exact(variant, cs, rel, sample=sample)
            b = robust_exact(variant, cs, rel, backend=oracle, sample=sample)
            for key in keys:
                _close(h.diagnostics[key], b.diagnostics[key],
                       f"{tag} robust-{variant} {key}", failures)

        # pairwise MILPs on a smaller instance to keep enumeration tractable
        table_s, examples_s = tiny_instance(seed, n_alternatives=3, n_examples=2)
        cs_s = build_compatible_set(table_s, examples_s)
        sample_s = sampler.har_sample(cs_s, count=2000, seed=seed)
        acc_s = sampler.compute_acceptabilities(sample_s, table_s)
        for variant in ("apoi", "comb"):
            h = stochastic_milp(variant, cs_s, acc_s)
            b = stochastic_milp(variant, cs_s, acc_s, backend=oracle)
            _close(h.diagnostics["kappa"], b.diagnostics["kappa"],
                   f"{tag} {variant} kappa", failures)
    report(7, failures)
