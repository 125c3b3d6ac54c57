"""Sixteen procedures selecting one representative sorting model from the
set of all models compatible with the assignment examples.

Every procedure returns a SelectionResult whose model reproduces all
assignment examples. Procedures whose objective leaves the thresholds free
(MAX/MIN-SVF, MSCVF, REPDIS, ROBUST-COMP) get thresholds placed at the
midpoints between the extreme reference values of adjacent classes, for
reproducibility; ROBUST-ITER places each threshold just above the top
reference value of its class, and the UTADISMP variants resolve any slack
left at delta* = 0 by keeping the extreme classes tight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import core, mathprog
from . import robust as robust_mod
from .core import (
    AssignmentExamples,
    ConfigurationError,
    MarginalFunction,
    PerformanceTable,
    SortingModel,
    midpoint_thresholds,
)
from .polytope import CompatibleSet, IncompatibilityError, chebyshev_center
from .robust import NecessaryRelations
from .sampler import Acceptabilities, DegenerateInteriorError, ModelSample

DEFAULT_MU = 1e-6
DEFAULT_BIG_M = 100.0

#: solver float noise absorbed when re-verifying assignment examples
_SNAP_TOL = 1e-6

#: stage-1 optimum is held within this slack in two-stage formulations
_STAGE_TOL = 1e-6
_LP_STAGE_TOL = 1e-9


class NumericError(RuntimeError):
    """An iterative or two-stage computation failed to converge cleanly."""


class ProcedureId(enum.Enum):
    UTADISMP1 = "utadismp1"
    UTADISMP2 = "utadismp2"
    UTADISMP3 = "utadismp3"
    UTADIS_JLS = "utadis-jls"
    CHEBYSHEV = "chebyshev"
    MAX_SVF = "max-svf"
    MIN_SVF = "min-svf"
    MSCVF = "mscvf"
    ACUTADIS = "acutadis"
    CENTROID = "centroid"
    REPDIS = "repdis"
    CAI = "cai"
    APOI = "apoi"
    COMB = "comb"
    ROBUST_ITER = "robust-iter"
    ROBUST_COMP = "robust-comp"


@dataclass
class SelectionContext:
    cs: CompatibleSet
    acceptabilities: Acceptabilities | None = None
    relations: NecessaryRelations | None = None
    sample: ModelSample | None = None
    mu: float = DEFAULT_MU
    big_m: float = DEFAULT_BIG_M
    backend: object = None


@dataclass(frozen=True)
class SelectionResult:
    model: SortingModel
    diagnostics: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# shared plumbing


def _solve(prog: mathprog.Program, backend) -> mathprog.Solution:
    sol = mathprog.solve(prog, backend)
    if sol.status == "infeasible":
        raise IncompatibilityError("assignment examples are incompatible")
    if not sol.optimal:
        raise mathprog.SolverError(f"unexpected solver status {sol.status}")
    return sol


def _snap_to_examples(model: SortingModel, cs: CompatibleSet) -> SortingModel:
    """Absorb sub-tolerance solver noise so assign() reproduces every example.

    Only threshold shifts bounded by the solver feasibility tolerance are
    applied; a genuine misassignment raises.
    """
    table, examples = cs.table, cs.examples
    thresholds = list(model.thresholds)
    values = {
        alt_id: core.comprehensive_value(model, table.alternative(alt_id))
        for alt_id in examples.assignments
    }
    for alt_id, cls in examples.assignments.items():
        u = values[alt_id]
        if cls >= 2 and u < thresholds[cls - 2]:
            gap = thresholds[cls - 2] - u
            if gap > _SNAP_TOL:
                raise NumericError(
                    f"model misassigns {alt_id!r} by {gap:.3e} below its class"
                )
            thresholds[cls - 2] = u
        if cls <= len(thresholds) and u >= thresholds[cls - 1]:
            gap = u - thresholds[cls - 1]
            if gap > _SNAP_TOL:
                raise NumericError(
                    f"model misassigns {alt_id!r} by {gap:.3e} above its class"
                )
            thresholds[cls - 1] = math.nextafter(u, math.inf)
    snapped = SortingModel(model.marginals, tuple(thresholds))
    for alt_id, cls in examples.assignments.items():
        if core.assign(snapped, table.alternative(alt_id)) != cls:
            raise NumericError(f"model cannot reproduce the example for {alt_id!r}")
    return snapped


def _with_midpoint_thresholds(cs: CompatibleSet, marginals) -> SortingModel:
    thresholds = midpoint_thresholds(marginals, cs.table, cs.examples)
    return SortingModel(tuple(marginals), thresholds)


def _threshold_intervals(cs: CompatibleSet, marginals, delta: float = 0.0):
    """Feasible range of each threshold once the value function is fixed."""
    table, p = cs.table, cs.table.class_count
    probe = SortingModel(
        tuple(marginals), tuple((l + 1.0) / p for l in range(p - 1))
    )
    by_class: dict[int, list[float]] = {}
    for alt_id, cls in cs.examples.assignments.items():
        by_class.setdefault(cls, []).append(
            core.comprehensive_value(probe, table.alternative(alt_id))
        )
    return [
        (max(by_class[l]) + delta + cs.epsilon, min(by_class[l + 1]) - delta)
        for l in range(1, p)
    ]


def _extreme_thresholds(cs: CompatibleSet, marginals, delta: float = 0.0):
    """Deterministic thresholds keeping the extreme classes as tight as
    possible: the first threshold at the bottom of its feasible range, the
    last at the top, intermediate ones at midpoints. Used where an LP leaves
    thresholds free at the optimum.
    """
    intervals = _threshold_intervals(cs, marginals, delta)
    out = []
    last = len(intervals) - 1
    for k, (lo, hi) in enumerate(intervals):
        if hi < lo:  # solver float noise on a degenerate interval
            lo = hi = 0.5 * (lo + hi)
        if len(intervals) == 1:
            out.append(0.5 * (lo + hi))
        elif k == 0:
            out.append(lo)
        elif k == last:
            out.append(hi)
        else:
            out.append(0.5 * (lo + hi))
    return tuple(out)


def _lower_thresholds(cs: CompatibleSet, marginals):
    """Every threshold just above the top reference value of its class."""
    return tuple(lo for lo, _ in _threshold_intervals(cs, marginals))


def _labeled_thresholds(cs: CompatibleSet, marginals, labels):
    """Thresholds centered in the gaps of a full class labeling.

    A vertex solution can leave a value exactly on its threshold, so the
    decode renormalization noise would flip the assignment; centering in
    the labeling's own gaps makes every assignment robust.
    """
    table, p = cs.table, cs.table.class_count
    probe = SortingModel(
        tuple(marginals), tuple((l + 1.0) / p for l in range(p - 1))
    )
    by_class: dict[int, list[float]] = {l: [] for l in range(1, p + 1)}
    for alt_id, cls in labels.items():
        by_class[cls].append(
            core.comprehensive_value(probe, table.alternative(alt_id))
        )
    out: list[float] = []
    prev = 0.0
    for l in range(1, p):
        lo = max(
            (max(by_class[k]) for k in range(1, l + 1) if by_class[k]),
            default=0.0,
        )
        hi = min(
            (min(by_class[k]) for k in range(l + 1, p + 1) if by_class[k]),
            default=1.0,
        )
        lo = max(lo, prev)  # stay increasing across empty classes
        t = 0.5 * (lo + hi) if hi > lo else math.nextafter(lo, math.inf)
        out.append(t)
        prev = t
    return tuple(out)


def _base_program(cs: CompatibleSet, delta=None, rho=None) -> mathprog.Program:
    prog = mathprog.Program()
    if delta:
        prog.add_variable(delta, lower=0.0)
    if rho:
        prog.add_variable(rho, lower=0.0)
    cs.add_to_program(prog, delta=delta, rho=rho)
    return prog


def _sum_terms(*term_dicts) -> dict[str, float]:
    out: dict[str, float] = {}
    for terms in term_dicts:
        for v, c in terms.items():
            out[v] = out.get(v, 0.0) + c
    return {v: c for v, c in out.items() if c != 0.0}


def _scale(terms: dict[str, float], factor: float) -> dict[str, float]:
    return {v: c * factor for v, c in terms.items()}


# ---------------------------------------------------------------------------
# discriminant / parsimonious / benevolent-aggressive procedures


def utadismp(variant: int, cs: CompatibleSet, backend=None) -> SelectionResult:
    """Most discriminant models: maximize delta (1), delta + rho (2), rho (3)."""
    if variant not in (1, 2, 3):
        raise ConfigurationError(f"unknown UTADISMP variant {variant}")
    delta = "delta" if variant in (1, 2) else None
    rho = "rho" if variant in (2, 3) else None
    prog = _base_program(cs, delta=delta, rho=rho)
    objective = {}
    if delta:
        objective[delta] = 1.0
    if rho:
        objective[rho] = 1.0
    prog.set_objective("max", objective)
    sol = _solve(prog, backend)
    diagnostics = {}
    if delta:
        diagnostics["delta"] = sol[delta]
    if rho:
        diagnostics["rho"] = sol[rho]
    # the optimum pins the value function but can leave threshold slack when
    # delta* = 0; re-derive thresholds deterministically within that slack
    marginals = cs.decode(sol.values).marginals
    thresholds = _extreme_thresholds(
        cs, marginals, delta=float(diagnostics.get("delta", 0.0))
    )
    model = _snap_to_examples(SortingModel(tuple(marginals), thresholds), cs)
    return SelectionResult(model, diagnostics)


def mscvf(cs: CompatibleSet, backend=None) -> SelectionResult:
    """Value function deviating minimally from per-criterion linearity."""
    for crit in cs.table.criteria:
        if crit.char_point_count < 3:
            raise ConfigurationError(
                f"slope-change minimization needs >= 3 characteristic points "
                f"(criterion {crit.id!r} has {crit.char_point_count})"
            )
    prog = _base_program(cs)
    prog.add_variable("phi", lower=0.0)
    for crit in cs.table.criteria:
        bps = core.characteristic_points(crit)
        h = bps[1] - bps[0]  # equal spacing
        for k in range(3, crit.char_point_count + 1):
            terms: dict[str, float] = {}
            terms[f"u_{crit.id}_{k - 1}"] = 1.0 / h
            terms[f"u_{crit.id}_{k - 2}"] = -2.0 / h
            if k - 3 >= 1:
                terms[f"u_{crit.id}_{k - 3}"] = 1.0 / h
            prog.add_constraint({**terms, "phi": -1.0}, "<=", 0.0)
            prog.add_constraint(
                {**_scale(terms, -1.0), "phi": -1.0}, "<=", 0.0
            )
    prog.set_objective("min", {"phi": 1.0})
    sol = _solve(prog, backend)
    marginals = cs.decode(sol.values).marginals
    model = _with_midpoint_thresholds(cs, marginals)
    return SelectionResult(model, {"phi": sol["phi"]})


def sum_scores(direction: str, cs: CompatibleSet, backend=None) -> SelectionResult:
    """Benevolent (max) or aggressive (min) sum of reference values."""
    if direction not in ("max", "min"):
        raise ConfigurationError(f"direction must be max or min, got {direction!r}")
    prog = _base_program(cs)
    objective = _sum_terms(
        *(cs.ucoef_terms(alt_id) for alt_id in cs.examples.assignments)
    )
    prog.set_objective(direction, objective)
    sol = _solve(prog, backend)
    marginals = cs.decode(sol.values).marginals
    model = _with_midpoint_thresholds(cs, marginals)
    return SelectionResult(model, {"score_sum": sol.objective})


# ---------------------------------------------------------------------------
# average and central models


def jls(cs: CompatibleSet, backend=None) -> SelectionResult:
    """Average of the 2m extreme models that max/minimize each criterion's
    greatest marginal value."""
    vectors = []
    for crit in cs.table.criteria:
        top = f"u_{crit.id}_{crit.char_point_count - 1}"
        for sense in ("max", "min"):
            prog = _base_program(cs)
            prog.set_objective(sense, {top: 1.0})
            sol = _solve(prog, backend)
            vectors.append(np.array([sol[v] for v in cs.var_names]))
    mean = np.mean(vectors, axis=0)
    model = _snap_to_examples(cs.decode(mean), cs)
    return SelectionResult(model, {"extreme_models": len(vectors)})


def centroid(sample: ModelSample) -> SelectionResult:
    """Componentwise mean of a uniform sample; compatible by convexity."""
    if sample.count == 0:
        raise core.DomainError("centroid of an empty sample")
    mean = sample.values.mean(axis=0)
    cs = sample.cs
    model = _snap_to_examples(cs.decode(mean), cs)
    return SelectionResult(model, {"sample_count": sample.count})


def acutadis(
    cs: CompatibleSet,
    newton_tol: float = 1e-8,
    max_iterations: int = 200,
    backend=None,
) -> SelectionResult:
    """Analytic center: maximize the log-barrier of the monotonicity and
    assignment slacks, by damped Newton in the equality-reduced space.

    The threshold-separation bounds stay outside the barrier and are kept
    feasible by the backtracking line search.
    """
    center, radius = chebyshev_center(cs, backend)
    if radius <= 1e-9:
        raise DegenerateInteriorError(
            f"Chebyshev radius {radius:.3e}; no interior for the barrier"
        )
    x0 = cs.encode(center)
    nrow = cs.normalization_row
    x0 = x0 + nrow * (1.0 - nrow @ x0) / (nrow @ nrow)
    N = scipy.linalg.null_space(nrow[None, :])

    barrier = [r for r in cs.rows if r.block in ("monotonicity", "assignment")]
    B = np.array([r.coeffs for r in barrier])
    # rows are stored as coeffs.x <= rhs with the value expression negated, so
    # the paper's slack (threshold minus value, value difference, ...) is -B x
    hard = [r for r in cs.rows if r.block == "threshold"]
    Ah = np.array([r.coeffs for r in hard])
    bh = np.array([r.rhs for r in hard])

    M = -(B @ N)
    s0 = -(B @ x0)
    Hn = Ah @ N
    h0 = bh - Ah @ x0
    if np.any(s0 <= 0):
        raise DegenerateInteriorError("start point is not strictly interior")

    z = np.zeros(N.shape[1])
    s = s0.copy()
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        inv_s = 1.0 / s
        grad = M.T @ inv_s
        W = M * inv_s[:, None]
        H = W.T @ W
        try:
            dz = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(H, grad, rcond=None)[0]
        decrement = float(grad @ dz)
        if np.linalg.norm(grad) <= newton_tol or decrement <= 1e-12:
            converged = True
            break
        f_old = float(np.log(s).sum())
        tau = 1.0
        while tau > 1e-13:
            z_new = z + tau * dz
            s_new = s0 + M @ z_new
            if np.all(s_new > 0) and np.all(h0 - Hn @ z_new >= -1e-12):
                if float(np.log(s_new).sum()) > f_old - 1e-12:
                    break
            tau *= 0.5
        else:
            raise NumericError(
                f"analytic-center line search stalled at iteration {iterations} "
                f"(decrement {decrement:.3e})"
            )
        z, s = z_new, s_new
    if not converged and decrement > 1e-8:
        raise NumericError(
            f"analytic center did not converge in {max_iterations} iterations "
            f"(decrement {decrement:.3e}, |grad| {np.linalg.norm(grad):.3e})"
        )
    model = _snap_to_examples(cs.decode(x0 + N @ z), cs)
    return SelectionResult(
        model,
        {"iterations": iterations, "barrier": float(np.log(s).sum()),
         "radius": radius},
    )


# ---------------------------------------------------------------------------
# robust procedures on exact outcomes


def _any_compatible_model(cs: CompatibleSet, backend=None) -> SortingModel:
    prog = _base_program(cs)
    prog.set_objective("min", {})
    sol = _solve(prog, backend)
    return cs.decode(sol.values)


def robust_exact(
    variant: str,
    cs: CompatibleSet,
    rel: NecessaryRelations,
    backend=None,
    sample: ModelSample | None = None,
) -> SelectionResult:
    """ROBUST-ITER (two-stage lexicographic) or ROBUST-COMP (compromise)
    exploitation of the necessary assignment-based relations.

    The margin constraints range over pairs whose strict preference holds in
    EVERY compatible model, so each margin is positive wherever the model can
    place it. Pairs that merely never invert (but may tie) would cap the
    maximized margin at an arbitrary negative value.
    """
    if variant not in ("iter", "comp"):
        raise ConfigurationError(f"unknown robust variant {variant!r}")
    strict = robust_mod.necessary_strict_pairs(cs, rel, sample, backend)
    equal = rel.equal_pairs(include_diagonal=False)
    if not strict:
        model = _with_midpoint_thresholds(
            cs, _any_compatible_model(cs, backend).marginals
        )
        return SelectionResult(
            model,
            {"omega": 0.0},
            warnings=("no strict necessary pairs; returned an arbitrary "
                      "compatible model",),
        )

    def diff_terms(a: str, b: str) -> dict[str, float]:
        return _sum_terms(cs.ucoef_terms(a), _scale(cs.ucoef_terms(b), -1.0))

    if variant == "comp":
        prog = _base_program(cs)
        prog.add_variable("iota", lower=-2.0, upper=2.0)
        prog.add_variable("lam", lower=0.0, upper=2.0)
        for a, b in strict:
            prog.add_constraint(
                {**diff_terms(a, b), "iota": -1.0, "lam": -1.0}, ">=", 0.0
            )
        for c, d in equal:
            prog.add_constraint({**diff_terms(c, d), "lam": -1.0}, "<=", 0.0)
            prog.add_constraint({**diff_terms(d, c), "lam": -1.0}, "<=", 0.0)
        prog.set_objective("max", {"iota": 1.0})
        sol = _solve(prog, backend)
        marginals = cs.decode(sol.values).marginals
        model = _with_midpoint_thresholds(cs, marginals)
        return SelectionResult(model, {"iota": sol["iota"], "lambda": sol["lam"]})

    prog = _base_program(cs)
    prog.add_variable("omega", lower=-1.0, upper=1.0)
    for a, b in strict:
        prog.add_constraint({**diff_terms(a, b), "omega": -1.0}, ">=", 0.0)
    prog.set_objective("max", {"omega": 1.0})
    sol1 = _solve(prog, backend)
    omega_star = sol1["omega"]
    stage1 = cs.decode(sol1.values)

    prog = _base_program(cs)
    prog.add_variable("lam", lower=0.0, upper=2.0)
    for a, b in strict:
        prog.add_constraint(diff_terms(a, b), ">=", omega_star - _LP_STAGE_TOL)
    for c, d in equal:
        prog.add_constraint({**diff_terms(c, d), "lam": -1.0}, "<=", 0.0)
        prog.add_constraint({**diff_terms(d, c), "lam": -1.0}, "<=", 0.0)
    prog.set_objective("min", {"lam": 1.0})
    sol = _solve(prog, backend)
    lam_star = sol["lam"]
    # stage 2 can be degenerate; keep the stage-1 model when it already
    # attains the stage-2 optimum instead of drifting to another vertex
    marginals = cs.decode(sol.values).marginals
    if equal:
        vals = {
            alt.id: core.comprehensive_value(stage1, alt)
            for alt in cs.table.alternatives
        }
        lam_stage1 = max(abs(vals[c] - vals[d]) for c, d in equal)
        if lam_stage1 <= lam_star + _STAGE_TOL:
            marginals = stage1.marginals
    model = SortingModel(tuple(marginals), _lower_thresholds(cs, marginals))
    return SelectionResult(model, {"omega": omega_star, "lambda": lam_star})


# ---------------------------------------------------------------------------
# robust procedures on stochastic outcomes


def repdis(cs: CompatibleSet, acc: Acceptabilities, backend=None) -> SelectionResult:
    """Maximize the minimal value difference for pairs winning more often
    (stage 1), then the sum of the elementary differences (stage 2)."""
    ids = cs.table.alternative_ids
    _require_full_coverage(acc, ids)
    pairs = [
        (a, b)
        for a in ids
        for b in ids
        if a != b and acc.apwi_of(a, b) > acc.apwi_of(b, a)
    ]
    if not pairs:
        model = _with_midpoint_thresholds(
            cs, _any_compatible_model(cs, backend).marginals
        )
        return SelectionResult(
            model, {"omega": 0.0},
            warnings=("no pair wins more often than its converse",),
        )

    def build(stage2_omega=None):
        prog = _base_program(cs)
        if stage2_omega is None:
            prog.add_variable("omega", lower=-1.0, upper=1.0)
        for k, (a, b) in enumerate(pairs):
            prog.add_variable(f"w_{k}", lower=-1.0, upper=1.0)
            terms = _sum_terms(cs.ucoef_terms(a), _scale(cs.ucoef_terms(b), -1.0))
            prog.add_constraint({**terms, f"w_{k}": -1.0}, ">=", 0.0)
            if stage2_omega is None:
                prog.add_constraint({f"w_{k}": 1.0, "omega": -1.0}, ">=", 0.0)
            else:
                prog.add_constraint(
                    {f"w_{k}": 1.0}, ">=", stage2_omega - _LP_STAGE_TOL
                )
        return prog

    prog = build()
    prog.set_objective("max", {"omega": 1.0})
    omega_star = _solve(prog, backend)["omega"]

    prog = build(stage2_omega=omega_star)
    prog.set_objective("max", {f"w_{k}": 1.0 for k in range(len(pairs))})
    sol = _solve(prog, backend)
    marginals = cs.decode(sol.values).marginals
    model = _with_midpoint_thresholds(cs, marginals)
    return SelectionResult(
        model, {"omega": omega_star, "omega_sum": sol.objective}
    )


def _require_full_coverage(acc: Acceptabilities, ids) -> None:
    missing = [a for a in ids if a not in acc.alt_ids]
    if missing:
        raise ConfigurationError(
            f"acceptabilities missing alternatives: {missing}"
        )


def _possible_classes(cs: CompatibleSet, acc: Acceptabilities, backend=None):
    """Exact per-alternative candidate class sets for the stochastic MILPs.

    Reference alternatives are pinned to their example class. For the rest,
    a class observed in the sample (CAI > 0) is possible; unobserved classes
    are settled by one feasibility LP each, so the fixing never cuts the
    MILP's true feasible set.
    """
    table = cs.table
    p = table.class_count
    out: dict[str, list[int]] = {}
    for alt_id in table.alternative_ids:
        if alt_id in cs.examples.assignments:
            out[alt_id] = [cs.examples.assignments[alt_id]]
            continue
        classes = []
        for l in range(1, p + 1):
            if acc.cai_of(alt_id, l) > 0.0:
                classes.append(l)
                continue
            prog = _base_program(cs)
            terms = cs.ucoef_terms(alt_id)
            if l >= 2:
                coeffs = dict(terms)
                coeffs[f"t_{l - 1}"] = coeffs.get(f"t_{l - 1}", 0.0) - 1.0
                prog.add_constraint(coeffs, ">=", 0.0)
            if l <= p - 1:
                coeffs = {f"t_{l}": 1.0}
                for v, c in terms.items():
                    coeffs[v] = coeffs.get(v, 0.0) - c
                prog.add_constraint(coeffs, ">=", cs.epsilon)
            prog.set_objective("min", {})
            if mathprog.solve(prog, backend).optimal:
                classes.append(l)
        if not classes:
            raise IncompatibilityError(
                f"no feasible class for alternative {alt_id!r}"
            )
        out[alt_id] = classes
    return out


def stochastic_milp(
    variant: str,
    cs: CompatibleSet,
    acc: Acceptabilities,
    mu: float = DEFAULT_MU,
    big_m: float = DEFAULT_BIG_M,
    backend=None,
) -> SelectionResult:
    """CAI / APOI / COMB: pick the model whose assignments (and, for
    APOI/COMB, pairwise relations) carry the largest acceptability product,
    then balance the criteria maxima at the optimum."""
    if variant not in ("cai", "apoi", "comb"):
        raise ConfigurationError(f"unknown stochastic variant {variant!r}")
    if mu <= 0:
        raise ConfigurationError("mu must be positive")
    p = cs.table.class_count
    if big_m <= max(p, 1):
        raise ConfigurationError(f"big-M {big_m} too small for p={p}")
    ids = cs.table.alternative_ids
    _require_full_coverage(acc, ids)

    candidates = _possible_classes(cs, acc, backend)

    def class_terms(alt_id: str):
        """(variable terms, constant) of the selected class index of alt."""
        cand = candidates[alt_id]
        if len(cand) == 1:
            return {}, float(cand[0])
        return {f"x_{alt_id}_{l}": float(l) for l in cand}, 0.0

    def build_stage(stage2_kappa=None):
        prog = _base_program(cs)
        kappa_terms: dict[str, float] = {}
        kappa_const = 0.0

        for alt_id in ids:
            cand = candidates[alt_id]
            if len(cand) == 1:
                l = cand[0]
                kappa_const += math.log(acc.cai_of(alt_id, l) + mu) \
                    if variant in ("cai", "comb") else 0.0
                if alt_id not in cs.examples.assignments:
                    # pinned by presolve, not by the example constraints
                    terms = cs.ucoef_terms(alt_id)
                    if l >= 2:
                        coeffs = dict(terms)
                        coeffs[f"t_{l - 1}"] = coeffs.get(f"t_{l - 1}", 0.0) - 1.0
                        prog.add_constraint(coeffs, ">=", 0.0)
                    if l <= p - 1:
                        coeffs = {f"t_{l}": 1.0}
                        for v, c in terms.items():
                            coeffs[v] = coeffs.get(v, 0.0) - c
                        prog.add_constraint(coeffs, ">=", cs.epsilon)
                continue
            for l in cand:
                x = f"x_{alt_id}_{l}"
                prog.add_variable(x, kind=mathprog.BINARY)
                if variant in ("cai", "comb"):
                    kappa_terms[x] = kappa_terms.get(x, 0.0) + math.log(
                        acc.cai_of(alt_id, l) + mu
                    )
                terms = cs.ucoef_terms(alt_id)
                if l >= 2:
                    # U - t_{l-1} - M x >= -M
                    coeffs = dict(terms)
                    coeffs[f"t_{l - 1}"] = coeffs.get(f"t_{l - 1}", 0.0) - 1.0
                    coeffs[x] = coeffs.get(x, 0.0) - big_m
                    prog.add_constraint(coeffs, ">=", -big_m)
                if l <= p - 1:
                    # t_l - U - M x >= eps - M
                    coeffs = {f"t_{l}": 1.0, x: -big_m}
                    for v, c in terms.items():
                        coeffs[v] = coeffs.get(v, 0.0) - c
                    prog.add_constraint(coeffs, ">=", cs.epsilon - big_m)
            prog.add_constraint(
                {f"x_{alt_id}_{l}": 1.0 for l in cand}, "=", 1.0
            )

        if variant in ("apoi", "comb"):
            for i, a in enumerate(ids):
                for b in ids[i + 1:]:
                    ca, cb = candidates[a], candidates[b]
                    log_w_ab = math.log(acc.apwi_of(a, b) + mu)
                    log_w_ba = math.log(acc.apwi_of(b, a) + mu)
                    log_e = math.log(acc.apei_of(a, b) + mu) + math.log(
                        acc.apei_of(b, a) + mu
                    )
                    if min(ca) > max(cb):
                        kappa_const += 2.0 * log_w_ab
                        continue
                    if max(ca) < min(cb):
                        kappa_const += 2.0 * log_w_ba
                        continue
                    if len(ca) == 1 and len(cb) == 1:  # equal singletons
                        kappa_const += log_e
                        continue
                    v_ab, v_ba, e_ab = f"v_{a}_{b}", f"v_{b}_{a}", f"e_{a}_{b}"
                    for name in (v_ab, v_ba, e_ab):
                        prog.add_variable(name, kind=mathprog.BINARY)
                    kappa_terms[v_ab] = kappa_terms.get(v_ab, 0.0) + 2.0 * log_w_ab
                    kappa_terms[v_ba] = kappa_terms.get(v_ba, 0.0) + 2.0 * log_w_ba
                    kappa_terms[e_ab] = kappa_terms.get(e_ab, 0.0) + log_e
                    prog.add_constraint(
                        {v_ab: 1.0, e_ab: 1.0, v_ba: 1.0}, "=", 1.0
                    )
                    ta, const_a = class_terms(a)
                    tb, const_b = class_terms(b)
                    base = _sum_terms(ta, _scale(tb, -1.0))
                    const = const_a - const_b
                    # l_a - l_b - M v >= 0.5 - M  and  l_a - l_b - M v <= 0.5
                    prog.add_constraint(
                        {**base, v_ab: -big_m}, ">=", 0.5 - big_m - const
                    )
                    prog.add_constraint(
                        {**base, v_ab: -big_m}, "<=", 0.5 - const
                    )
                    prog.add_constraint(
                        {**_scale(base, -1.0), v_ba: -big_m},
                        ">=",
                        0.5 - big_m + const,
                    )
                    prog.add_constraint(
                        {**_scale(base, -1.0), v_ba: -big_m}, "<=", 0.5 + const
                    )

        if stage2_kappa is not None:
            if kappa_terms:
                prog.add_constraint(
                    kappa_terms, ">=", stage2_kappa - kappa_const - _STAGE_TOL
                )
            prog.add_variable("xi", lower=0.0, upper=1.0)
            tops = [
                f"u_{c.id}_{c.char_point_count - 1}" for c in cs.table.criteria
            ]
            for i, ti in enumerate(tops):
                for tj in tops[i + 1:]:
                    prog.add_constraint(
                        {ti: 1.0, tj: -1.0, "xi": -1.0}, "<=", 0.0
                    )
                    prog.add_constraint(
                        {tj: 1.0, ti: -1.0, "xi": -1.0}, "<=", 0.0
                    )
            prog.set_objective("min", {"xi": 1.0})
        else:
            prog.set_objective("max", kappa_terms)
        return prog, kappa_terms, kappa_const

    prog, kappa_terms, kappa_const = build_stage()
    if kappa_terms:
        sol1 = _solve(prog, backend)
        kappa_star = sol1.objective + kappa_const
    else:
        kappa_star = kappa_const  # everything pinned; stage 1 is vacuous

    prog2, _, _ = build_stage(stage2_kappa=kappa_star)
    sol2 = mathprog.solve(prog2, backend)
    if sol2.status == "infeasible":
        # absorb MILP float slack on the stage-1 optimum and retry once
        prog2, _, _ = build_stage(stage2_kappa=kappa_star - 1e-4)
        sol2 = mathprog.solve(prog2, backend)
        if sol2.status == "infeasible":
            raise NumericError("stage 2 infeasible even after relaxing kappa")
    if not sol2.optimal:
        raise mathprog.SolverError(f"unexpected status {sol2.status}")
    # rebuild thresholds from the chosen labeling: the MILP vertex can leave
    # an alternative exactly on its threshold
    labels = {}
    for alt_id in ids:
        cand = candidates[alt_id]
        labels[alt_id] = cand[0] if len(cand) == 1 else next(
            l for l in cand if sol2.values[f"x_{alt_id}_{l}"] > 0.5
        )
    marginals = cs.decode(sol2.values).marginals
    model = _snap_to_examples(
        SortingModel(tuple(marginals), _labeled_thresholds(cs, marginals, labels)),
        cs,
    )
    return SelectionResult(
        model, {"kappa": kappa_star, "xi": sol2.objective}
    )


# ---------------------------------------------------------------------------
# dispatch


def select_representative(
    procedure: ProcedureId, ctx: SelectionContext
) -> SelectionResult:
    def need(attr: str):
        value = getattr(ctx, attr)
        if value is None:
            raise ConfigurationError(
                f"{procedure.value} requires {attr} in the selection context"
            )
        return value

    cs, backend = ctx.cs, ctx.backend
    if procedure is ProcedureId.UTADISMP1:
        return utadismp(1, cs, backend)
    if procedure is ProcedureId.UTADISMP2:
        return utadismp(2, cs, backend)
    if procedure is ProcedureId.UTADISMP3:
        return utadismp(3, cs, backend)
    if procedure is ProcedureId.UTADIS_JLS:
        return jls(cs, backend)
    if procedure is ProcedureId.CHEBYSHEV:
        model, radius = chebyshev_center(cs, backend)
        return SelectionResult(_snap_to_examples(model, cs), {"radius": radius})
    if procedure is ProcedureId.MAX_SVF:
        return sum_scores("max", cs, backend)
    if procedure is ProcedureId.MIN_SVF:
        return sum_scores("min", cs, backend)
    if procedure is ProcedureId.MSCVF:
        return mscvf(cs, backend)
    if procedure is ProcedureId.ACUTADIS:
        return acutadis(cs, backend=backend)
    if procedure is ProcedureId.CENTROID:
        return centroid(need("sample"))
    if procedure is ProcedureId.REPDIS:
        return repdis(cs, need("acceptabilities"), backend)
    if procedure is ProcedureId.CAI:
        return stochastic_milp("cai", cs, need("acceptabilities"),
                               ctx.mu, ctx.big_m, backend)
    if procedure is ProcedureId.APOI:
        return stochastic_milp("apoi", cs, need("acceptabilities"),
                               ctx.mu, ctx.big_m, backend)
    if procedure is ProcedureId.COMB:
        return stochastic_milp("comb", cs, need("acceptabilities"),
                               ctx.mu, ctx.big_m, backend)
    if procedure is ProcedureId.ROBUST_ITER:
        return robust_exact("iter", cs, need("relations"), backend, ctx.sample)
    if procedure is ProcedureId.ROBUST_COMP:
        return robust_exact("comp", cs, need("relations"), backend, ctx.sample)
    raise ConfigurationError(f"unknown procedure {procedure!r}")
