"""Solver-agnostic linear and mixed-integer program representation.

Programs are plain value objects; solving goes through a backend object so
tests can swap in the brute-force oracle. The default backend is HiGHS via
scipy. Feasibility tolerance is 1e-7 and the MILP gap is zero: the programs
built here are small and two-stage formulations need exact stage-1 optima.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize as sopt
import scipy.sparse as sp

FEASIBILITY_TOL = 1e-7

CONTINUOUS = "continuous"
BINARY = "binary"

_RELATIONS = ("<=", "=", ">=")


class SolverError(RuntimeError):
    """The backend failed for a reason other than infeasibility/unboundedness."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    coeffs: dict[str, float]
    relation: str
    rhs: float
    name: str = ""


@dataclass
class Solution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: float | None
    values: dict[str, float]

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def __getitem__(self, name: str) -> float:
        return self.values[name]


class Program:
    def __init__(self):
        self.variables: dict[str, Variable] = {}
        self.constraints: list[Constraint] = []
        self.objective_sense: str = "min"
        self.objective: dict[str, float] = {}

    def add_variable(self, name, kind=CONTINUOUS, lower=0.0, upper=math.inf) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name!r}")
        if kind == BINARY:
            lower, upper = 0.0, 1.0
        self.variables[name] = Variable(name, kind, lower, upper)
        return name

    def add_constraint(self, coeffs: dict[str, float], relation: str, rhs: float,
                       name: str = "") -> None:
        if relation not in _RELATIONS:
            raise ValueError(f"bad relation {relation!r}")
        for v in coeffs:
            if v not in self.variables:
                raise ValueError(f"constraint references unknown variable {v!r}")
        self.constraints.append(Constraint(dict(coeffs), relation, rhs, name))

    def set_objective(self, sense: str, coeffs: dict[str, float]) -> None:
        if sense not in ("min", "max"):
            raise ValueError(f"bad sense {sense!r}")
        for v in coeffs:
            if v not in self.variables:
                raise ValueError(f"objective references unknown variable {v!r}")
        self.objective_sense = sense
        self.objective = dict(coeffs)

    @property
    def binary_names(self) -> list[str]:
        return [v.name for v in self.variables.values() if v.kind == BINARY]

    # -- matrix form -------------------------------------------------------

    def to_arrays(self):
        """Return (names, c, A, lb_row, ub_row, lb_var, ub_var, integrality)
        with the objective already oriented for minimization."""
        names = list(self.variables)
        index = {n: i for i, n in enumerate(names)}
        n = len(names)
        c = np.zeros(n)
        sign = 1.0 if self.objective_sense == "min" else -1.0
        for v, coef in self.objective.items():
            c[index[v]] = sign * coef
        rows, cols, data = [], [], []
        lb_row = np.empty(len(self.constraints))
        ub_row = np.empty(len(self.constraints))
        for i, con in enumerate(self.constraints):
            for v, coef in con.coeffs.items():
                rows.append(i)
                cols.append(index[v])
                data.append(coef)
            if con.relation == "<=":
                lb_row[i], ub_row[i] = -np.inf, con.rhs
            elif con.relation == ">=":
                lb_row[i], ub_row[i] = con.rhs, np.inf
            else:
                lb_row[i], ub_row[i] = con.rhs, con.rhs
        A = sp.csr_matrix((data, (rows, cols)), shape=(len(self.constraints), n))
        lb_var = np.array([self.variables[v].lower for v in names])
        ub_var = np.array([self.variables[v].upper for v in names])
        integrality = np.array(
            [1 if self.variables[v].kind == BINARY else 0 for v in names]
        )
        return names, c, A, lb_row, ub_row, lb_var, ub_var, integrality

    def violation(self, values: dict[str, float]) -> float:
        """Largest constraint/bound violation of a candidate point."""
        worst = 0.0
        for v in self.variables.values():
            x = values[v.name]
            worst = max(worst, v.lower - x, x - v.upper)
        for con in self.constraints:
            lhs = sum(coef * values[v] for v, coef in con.coeffs.items())
            if con.relation == "<=":
                worst = max(worst, lhs - con.rhs)
            elif con.relation == ">=":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst

    # -- debug text format ---------------------------------------------------

    def dumps(self) -> str:
        """Plain-text dump; `Program.loads` round-trips it exactly."""
        lines = []
        obj = " + ".join(f"{coef!r} {v}" for v, coef in self.objective.items())
        lines.append(f"{self.objective_sense}: {obj}")
        for v in self.variables.values():
            lines.append(f"var {v.name} {v.kind} [{v.lower!r}, {v.upper!r}]")
        for i, con in enumerate(self.constraints):
            lhs = " + ".join(f"{coef!r} {v}" for v, coef in con.coeffs.items())
            label = con.name or f"c{i}"
            lines.append(f"{label}: {lhs} {con.relation} {con.rhs!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Program":
        prog = cls()
        term_re = re.compile(r"([^\s+]+)\s+(\S+)")
        con_re = re.compile(r"^(\S+):\s*(.*?)\s*(<=|>=|=)\s*(\S+)$")

        def parse_terms(chunk: str) -> dict[str, float]:
            out = {}
            for part in chunk.split(" + "):
                m = term_re.fullmatch(part.strip())
                if not m:
                    raise ValueError(f"bad term {part!r}")
                out[m.group(2)] = float(m.group(1))
            return out

        obj_sense, obj_coeffs = "min", {}
        pending = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith(("min:", "max:")):
                obj_sense = line[:3]
                chunk = line[4:].strip()
                obj_coeffs = parse_terms(chunk) if chunk else {}
            elif line.startswith("var "):
                m = re.fullmatch(
                    r"var (\S+) (\S+) \[(\S+), (\S+)\]", line
                )
                if not m:
                    raise ValueError(f"bad variable line {line!r}")
                prog.add_variable(
                    m.group(1), m.group(2), float(m.group(3)), float(m.group(4))
                )
            else:
                pending.append(line)
        for line in pending:
            m = con_re.fullmatch(line)
            if not m:
                raise ValueError(f"bad constraint line {line!r}")
            name = "" if re.fullmatch(r"c\d+", m.group(1)) else m.group(1)
            prog.add_constraint(
                parse_terms(m.group(2)), m.group(3), float(m.group(4)), name
            )
        prog.set_objective(obj_sense, obj_coeffs)
        return prog


def _restore_objective(program: Program, minimized_value: float) -> float:
    return -minimized_value if program.objective_sense == "max" else minimized_value


class HighsBackend:
    """Default backend: HiGHS through scipy (LP and MILP, zero MIP gap)."""

    def solve(self, program: Program) -> Solution:
        names, c, A, lbr, ubr, lbv, ubv, integrality = program.to_arrays()
        constraints = (
            sopt.LinearConstraint(A, lbr, ubr) if len(program.constraints) else ()
        )
        try:
            res = sopt.milp(
                c,
                constraints=constraints,
                bounds=sopt.Bounds(lbv, ubv),
                integrality=integrality,
                options={"mip_rel_gap": 0.0, "presolve": True},
            )
        except Exception as exc:  # pragma: no cover - backend crash path
            raise SolverError(str(exc)) from exc
        if res.status == 2:
            return Solution("infeasible", None, {})
        if res.status == 3:
            return Solution("unbounded", None, {})
        if res.status != 0 or res.x is None:
            raise SolverError(f"HiGHS failure: status={res.status} {res.message}")
        values = dict(zip(names, res.x))
        return Solution("optimal", _restore_objective(program, res.fun), values)


class BruteForceBackend:
    """Oracle backend: enumerate binary patterns, solve the LP per pattern.

    Only for programs with at most `max_binaries` binary variables.
    """

    def __init__(self, max_binaries: int = 20):
        self.max_binaries = max_binaries
        self._lp = HighsBackend()

    def solve(self, program: Program) -> Solution:
        binaries = program.binary_names
        if len(binaries) > self.max_binaries:
            raise SolverError(
                f"brute force limited to {self.max_binaries} binaries "
                f"({len(binaries)} present)"
            )
        if not binaries:
            return self._lp.solve(program)
        best: Solution | None = None
        any_unbounded = False
        for pattern in itertools.product((0.0, 1.0), repeat=len(binaries)):
            sub = Program()
            for v in program.variables.values():
                if v.kind == BINARY:
                    fixed = pattern[binaries.index(v.name)]
                    sub.add_variable(v.name, CONTINUOUS, fixed, fixed)
                else:
                    sub.add_variable(v.name, v.kind, v.lower, v.upper)
            for con in program.constraints:
                sub.add_constraint(con.coeffs, con.relation, con.rhs, con.name)
            sub.set_objective(program.objective_sense, program.objective)
            sol = self._lp.solve(sub)
            if sol.status == "unbounded":
                any_unbounded = True
            if not sol.optimal:
                continue
            if best is None or _better(program.objective_sense, sol, best):
                best = sol
        if best is None:
            return Solution("unbounded" if any_unbounded else "infeasible", None, {})
        return best


def _better(sense: str, a: Solution, b: Solution) -> bool:
    if sense == "max":
        return a.objective > b.objective
    return a.objective < b.objective


DEFAULT_BACKEND = HighsBackend()


def solve(program: Program, backend=None) -> Solution:
    return (backend or DEFAULT_BACKEND).solve(program)
