"""Constraint representation of all sorting models compatible with the
assignment examples, plus feasibility checking and the Chebyshev center.

Model variables are the marginal values at characteristic points s >= 2
(the first point is identically zero) followed by the class thresholds.
Comprehensive values of reference alternatives expand to linear expressions
via precomputed interpolation coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import core, mathprog
from .core import (
    AssignmentExamples,
    ConfigurationError,
    MarginalFunction,
    PerformanceTable,
    SortingModel,
)

#: decoded solver output may violate monotonicity/normalization by float noise
#: up to this much; larger violations indicate a bug and raise
_DECODE_TOL = 1e-6


class IncompatibilityError(Exception):
    """The assignment examples admit no compatible sorting model."""


@dataclass(frozen=True)
class ConstraintRow:
    """One inequality row in `coeffs . x <= rhs` form."""

    block: str  # "monotonicity" | "threshold" | "assignment"
    coeffs: np.ndarray
    rhs: float
    # payload: (criterion_id, s) for monotonicity, threshold index for
    # threshold rows, (alt_id, side, boundary) for assignment rows
    payload: tuple = ()


@dataclass(frozen=True)
class CompatibleSet:
    table: PerformanceTable
    examples: AssignmentExamples
    epsilon: float
    var_names: tuple[str, ...]
    marginal_index: dict  # (criterion_id, breakpoint index >= 1) -> column
    threshold_index: dict  # boundary l (1..p-1) -> column
    rows: tuple[ConstraintRow, ...]
    ucoefs: dict  # alternative id -> coefficient vector over all columns

    @property
    def dim(self) -> int:
        return len(self.var_names)

    @property
    def n_marginal_vars(self) -> int:
        return len(self.marginal_index)

    @property
    def a_ub(self) -> np.ndarray:
        return np.array([r.coeffs for r in self.rows])

    @property
    def b_ub(self) -> np.ndarray:
        return np.array([r.rhs for r in self.rows])

    @property
    def normalization_row(self) -> np.ndarray:
        row = np.zeros(self.dim)
        for crit in self.table.criteria:
            row[self.marginal_index[crit.id, crit.char_point_count - 1]] = 1.0
        return row

    def ucoef(self, alt_id: str) -> np.ndarray:
        return self.ucoefs[alt_id]

    # -- program building ---------------------------------------------------

    def add_to_program(self, prog: mathprog.Program, delta: str | None = None,
                       rho: str | None = None) -> None:
        """Write variables and the full constraint block into a program.

        `delta`/`rho` name already-declared slack variables to thread into the
        assignment and monotonicity constraints (both fixed to zero when None).
        """
        for name in self.var_names:
            prog.add_variable(name, lower=0.0, upper=1.0)
        prog.add_constraint(
            {
                f"u_{c.id}_{c.char_point_count - 1}": 1.0
                for c in self.table.criteria
            },
            "=",
            1.0,
            name="normalization",
        )
        for crit in self.table.criteria:
            for s in range(1, crit.char_point_count):
                coeffs = {f"u_{crit.id}_{s}": 1.0}
                if s > 1:
                    coeffs[f"u_{crit.id}_{s - 1}"] = -1.0
                if rho is not None:
                    coeffs[rho] = -1.0
                prog.add_constraint(coeffs, ">=", 0.0, name=f"mono_{crit.id}_{s}")
        p = self.table.class_count
        prog.add_constraint({"t_1": 1.0}, ">=", self.epsilon)
        for l in range(2, p):
            prog.add_constraint(
                {f"t_{l}": 1.0, f"t_{l - 1}": -1.0}, ">=", self.epsilon
            )
        prog.add_constraint({f"t_{p - 1}": 1.0}, "<=", 1.0 - self.epsilon)
        for alt_id, cls in self.examples.assignments.items():
            uterms = self.ucoef_terms(alt_id)
            if cls <= p - 1:
                coeffs = {f"t_{cls}": 1.0}
                for v, c in uterms.items():
                    coeffs[v] = coeffs.get(v, 0.0) - c
                if delta is not None:
                    coeffs[delta] = -1.0
                prog.add_constraint(coeffs, ">=", self.epsilon,
                                    name=f"upper_{alt_id}")
            if cls >= 2:
                coeffs = dict(uterms)
                coeffs[f"t_{cls - 1}"] = coeffs.get(f"t_{cls - 1}", 0.0) - 1.0
                if delta is not None:
                    coeffs[delta] = -1.0
                prog.add_constraint(coeffs, ">=", 0.0, name=f"lower_{alt_id}")

    def ucoef_terms(self, alt_id: str) -> dict[str, float]:
        """Comprehensive value of an alternative as variable -> coefficient."""
        vec = self.ucoefs[alt_id]
        return {
            self.var_names[i]: vec[i] for i in np.nonzero(vec)[0]
        }

    # -- solution decoding ---------------------------------------------------

    def encode(self, model: SortingModel) -> np.ndarray:
        x = np.zeros(self.dim)
        for crit in self.table.criteria:
            mf = model.marginal(crit.id)
            for s in range(1, crit.char_point_count):
                x[self.marginal_index[crit.id, s]] = mf.values[s]
        for l, idx in self.threshold_index.items():
            x[idx] = model.thresholds[l - 1]
        return x

    def decode(self, values) -> SortingModel:
        """Build a SortingModel from a solution vector or variable map,
        clearing sub-tolerance solver noise."""
        if isinstance(values, dict):
            x = np.array([values[n] for n in self.var_names])
        else:
            x = np.asarray(values, dtype=float)
        marginals = []
        for crit in self.table.criteria:
            vals = [0.0]
            for s in range(1, crit.char_point_count):
                vals.append(float(x[self.marginal_index[crit.id, s]]))
            for s in range(1, len(vals)):
                drop = vals[s - 1] - vals[s]
                if drop > 0:
                    if drop > _DECODE_TOL:
                        raise ConfigurationError(
                            f"non-monotone solution on {crit.id!r} (drop {drop})"
                        )
                    vals[s] = vals[s - 1]
            marginals.append(
                MarginalFunction(
                    crit.id,
                    tuple(core.characteristic_points(crit)),
                    tuple(vals),
                )
            )
        total = sum(mf.values[-1] for mf in marginals)
        if abs(total - 1.0) > _DECODE_TOL:
            raise ConfigurationError(f"unnormalized solution (sum {total})")
        marginals = [
            MarginalFunction(
                mf.criterion_id,
                mf.breakpoints,
                tuple(v / total for v in mf.values),
            )
            for mf in marginals
        ]
        thresholds = tuple(
            float(x[self.threshold_index[l]])
            for l in range(1, self.table.class_count)
        )
        return SortingModel(tuple(marginals), thresholds)


def build_compatible_set(
    table: PerformanceTable,
    examples: AssignmentExamples,
    epsilon: float = core.DEFAULT_EPSILON,
) -> CompatibleSet:
    examples.validate(table)
    p = table.class_count

    var_names: list[str] = []
    marginal_index: dict = {}
    for crit in table.criteria:
        for s in range(1, crit.char_point_count):
            marginal_index[crit.id, s] = len(var_names)
            var_names.append(f"u_{crit.id}_{s}")
    threshold_index: dict = {}
    for l in range(1, p):
        threshold_index[l] = len(var_names)
        var_names.append(f"t_{l}")
    dim = len(var_names)

    ucoefs: dict[str, np.ndarray] = {}
    for alt in table.alternatives:
        vec = np.zeros(dim)
        for crit in table.criteria:
            bps = core.characteristic_points(crit)
            for s, w in core.interpolation_weights(bps, alt.performances[crit.id]):
                if s >= 1:  # the first characteristic point carries value 0
                    vec[marginal_index[crit.id, s]] += w
        ucoefs[alt.id] = vec

    rows: list[ConstraintRow] = []

    def le_row(block, coeffs, rhs, payload):
        rows.append(ConstraintRow(block, np.asarray(coeffs, dtype=float),
                                  float(rhs), payload))

    for crit in table.criteria:
        for s in range(1, crit.char_point_count):
            # u(b_s) - u(b_{s-1}) >= 0
            row = np.zeros(dim)
            row[marginal_index[crit.id, s]] = -1.0
            if s > 1:
                row[marginal_index[crit.id, s - 1]] = 1.0
            le_row("monotonicity", row, 0.0, (crit.id, s))

    row = np.zeros(dim)
    row[threshold_index[1]] = -1.0
    le_row("threshold", row, -epsilon, (1,))
    for l in range(2, p):
        row = np.zeros(dim)
        row[threshold_index[l]] = -1.0
        row[threshold_index[l - 1]] = 1.0
        le_row("threshold", row, -epsilon, (l,))
    row = np.zeros(dim)
    row[threshold_index[p - 1]] = 1.0
    le_row("threshold", row, 1.0 - epsilon, (p,))

    for alt_id, cls in examples.assignments.items():
        uc = ucoefs[alt_id]
        if cls <= p - 1:
            # t_cls - U(a) >= eps
            row = uc.copy()
            row[threshold_index[cls]] -= 1.0
            le_row("assignment", row, -epsilon, (alt_id, "upper", cls))
        if cls >= 2:
            # U(a) - t_{cls-1} >= 0
            row = -uc
            row[threshold_index[cls - 1]] += 1.0
            le_row("assignment", row, 0.0, (alt_id, "lower", cls - 1))

    return CompatibleSet(
        table=table,
        examples=examples,
        epsilon=epsilon,
        var_names=tuple(var_names),
        marginal_index=marginal_index,
        threshold_index=threshold_index,
        rows=tuple(rows),
        ucoefs=ucoefs,
    )


def check_compatibility(cs: CompatibleSet, backend=None) -> bool:
    """LP feasibility of the full constraint system."""
    prog = mathprog.Program()
    cs.add_to_program(prog)
    prog.set_objective("min", {})
    sol = mathprog.solve(prog, backend)
    if sol.status == "infeasible":
        return False
    if not sol.optimal:
        raise mathprog.SolverError(f"unexpected status {sol.status}")
    return True


def chebyshev_center(cs: CompatibleSet, backend=None):
    """Model at the center of the largest ball inscribed in the compatible
    polytope, and the ball's radius.

    The radius enters the monotonicity rows with unit coefficient and the
    assignment rows scaled by the Euclidean norm of their coefficients; the
    threshold-separation rows are kept as plain bounds.
    """
    prog = mathprog.Program()
    for name in cs.var_names:
        prog.add_variable(name, lower=0.0, upper=1.0)
    prog.add_variable("r", lower=0.0)
    prog.add_constraint(
        {f"u_{c.id}_{c.char_point_count - 1}": 1.0 for c in cs.table.criteria},
        "=",
        1.0,
    )
    p = cs.table.class_count
    prog.add_constraint({"t_1": 1.0}, ">=", cs.epsilon)
    for l in range(2, p):
        prog.add_constraint({f"t_{l}": 1.0, f"t_{l - 1}": -1.0}, ">=", cs.epsilon)
    prog.add_constraint({f"t_{p - 1}": 1.0}, "<=", 1.0 - cs.epsilon)
    for row in cs.rows:
        if row.block == "threshold":
            continue
        coeffs = {
            cs.var_names[i]: -row.coeffs[i] for i in np.nonzero(row.coeffs)[0]
        }
        if row.block == "monotonicity":
            coeffs["r"] = -1.0
            prog.add_constraint(coeffs, ">=", 0.0)
        else:
            # the ball radius replaces the epsilon margin here
            norm = float(np.linalg.norm(row.coeffs))
            coeffs["r"] = -norm
            prog.add_constraint(coeffs, ">=", 0.0)
    prog.set_objective("max", {"r": 1.0})
    sol = mathprog.solve(prog, backend)
    if sol.status == "infeasible":
        raise IncompatibilityError("assignment examples are incompatible")
    if not sol.optimal:
        raise mathprog.SolverError(f"unexpected status {sol.status}")
    model = cs.decode(sol.values)
    return model, float(sol.values["r"])
