"""Exact robustness: necessary assignment-based weak preference over the
set of all compatible models, via LP feasibility.

a is necessarily weakly preferred to b when no compatible model places b in
a strictly better class. The check runs one feasibility LP per class
boundary; the batch sweep prunes with Pareto dominance, the reference
assignments, transitivity, and (when a sample is supplied) sampled
counterexamples, which are exact negative certificates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import mathprog
from .core import PerformanceTable
from .polytope import CompatibleSet
from .sampler import ModelSample


@dataclass(frozen=True)
class NecessaryRelations:
    alt_ids: tuple[str, ...]
    weak: np.ndarray  # boolean n x n, entry (a, b): a necessarily >= b

    def index(self, alt_id: str) -> int:
        return self.alt_ids.index(alt_id)

    def weak_of(self, a: str, b: str) -> bool:
        return bool(self.weak[self.index(a), self.index(b)])

    def strict_pairs(self) -> list[tuple[str, str]]:
        """Pairs (a, b) with a necessarily >= b but not b >= a."""
        out = []
        for i, a in enumerate(self.alt_ids):
            for j, b in enumerate(self.alt_ids):
                if i != j and self.weak[i, j] and not self.weak[j, i]:
                    out.append((a, b))
        return out

    def equal_pairs(self, include_diagonal: bool = True) -> list[tuple[str, str]]:
        """Pairs necessarily assigned to the same class."""
        out = []
        for i, a in enumerate(self.alt_ids):
            for j, b in enumerate(self.alt_ids):
                if i == j:
                    if include_diagonal:
                        out.append((a, b))
                elif self.weak[i, j] and self.weak[j, i]:
                    out.append((a, b))
        return out

    def export_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["alternative"] + list(self.alt_ids))
            for i, alt_id in enumerate(self.alt_ids):
                writer.writerow([alt_id] + [int(v) for v in self.weak[i]])


def _counterexample_feasible(cs: CompatibleSet, a: str, b: str, boundary: int,
                             backend=None) -> bool:
    """Is there a compatible model with b above and a below threshold l?"""
    prog = mathprog.Program()
    cs.add_to_program(prog)
    t = f"t_{boundary}"
    coeffs = dict(cs.ucoef_terms(b))
    coeffs[t] = coeffs.get(t, 0.0) - 1.0
    prog.add_constraint(coeffs, ">=", 0.0)
    coeffs = {t: 1.0}
    for v, c in cs.ucoef_terms(a).items():
        coeffs[v] = coeffs.get(v, 0.0) - c
    prog.add_constraint(coeffs, ">=", cs.epsilon)
    prog.set_objective("min", {})
    sol = mathprog.solve(prog, backend)
    if sol.status == "infeasible":
        return False
    if not sol.optimal:
        raise mathprog.SolverError(f"unexpected status {sol.status}")
    return True


def necessary_weak(cs: CompatibleSet, a: str, b: str, backend=None) -> bool:
    """True iff no compatible model assigns b to a strictly better class."""
    if a == b:
        return True
    for boundary in range(1, cs.table.class_count):
        if _counterexample_feasible(cs, a, b, boundary, backend):
            return False
    return True


def _tie_feasible(cs: CompatibleSet, a: str, b: str, cls: int,
                  backend=None) -> bool:
    """Is there a compatible model with class(a) <= cls and class(b) >= cls?"""
    prog = mathprog.Program()
    cs.add_to_program(prog)
    p = cs.table.class_count
    if cls <= p - 1:
        coeffs = {f"t_{cls}": 1.0}
        for v, c in cs.ucoef_terms(a).items():
            coeffs[v] = coeffs.get(v, 0.0) - c
        prog.add_constraint(coeffs, ">=", cs.epsilon)
    if cls >= 2:
        coeffs = dict(cs.ucoef_terms(b))
        coeffs[f"t_{cls - 1}"] = coeffs.get(f"t_{cls - 1}", 0.0) - 1.0
        prog.add_constraint(coeffs, ">=", 0.0)
    prog.set_objective("min", {})
    sol = mathprog.solve(prog, backend)
    if sol.status == "infeasible":
        return False
    if not sol.optimal:
        raise mathprog.SolverError(f"unexpected status {sol.status}")
    return True


def _sample_classes(cs: CompatibleSet, sample: ModelSample, ids) -> np.ndarray:
    """Class index of every alternative under every sampled model."""
    coef = np.array([cs.ucoef(a) for a in ids])
    U = sample.values @ coef.T
    t_cols = np.array(
        [sample.values[:, cs.threshold_index[l]]
         for l in range(1, cs.table.class_count)]
    ).T
    return 1 + (U[:, :, None] >= t_cols[:, None, :]).sum(axis=2)


def necessary_strict_pairs(
    cs: CompatibleSet,
    rel: NecessaryRelations,
    sample: ModelSample | None = None,
    backend=None,
) -> list[tuple[str, str]]:
    """Pairs (a, b) with class(a) > class(b) in EVERY compatible model.

    A strictly stronger family than NecessaryRelations.strict_pairs(),
    which also admits pairs that tie in some models. Every member pair
    has a positive value difference under every compatible model, which
    is what the margin-maximizing robust procedures rely on.
    """
    candidates = rel.strict_pairs()
    assigned = cs.examples.assignments
    idx = {a: i for i, a in enumerate(rel.alt_ids)}
    classes = None
    if sample is not None and sample.count:
        classes = _sample_classes(cs, sample, rel.alt_ids)
    p = cs.table.class_count
    out = []
    for a, b in candidates:
        if a in assigned and b in assigned:
            # pinned classes already differ (the pair is in strict_pairs)
            out.append((a, b))
            continue
        if classes is not None and not np.all(
            classes[:, idx[a]] > classes[:, idx[b]]
        ):
            continue  # a sampled model realizes a tie: exact refutation
        if not any(_tie_feasible(cs, a, b, l, backend) for l in range(1, p + 1)):
            out.append((a, b))
    return out


def _dominates(table: PerformanceTable, a: str, b: str) -> bool:
    pa = table.alternative(a).performances
    pb = table.alternative(b).performances
    return all(pa[c.id] >= pb[c.id] for c in table.criteria)


def necessary_relations(
    cs: CompatibleSet,
    table: PerformanceTable | None = None,
    sample: ModelSample | None = None,
    backend=None,
) -> NecessaryRelations:
    """Necessary weak relation over every ordered pair of alternatives."""
    table = table or cs.table
    ids = tuple(table.alternative_ids)
    n = len(ids)
    idx = {a: i for i, a in enumerate(ids)}
    weak = np.zeros((n, n), dtype=bool)
    known = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(weak, True)
    np.fill_diagonal(known, True)

    assigned = cs.examples.assignments
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if known[i, j]:
                continue
            if a in assigned and b in assigned:
                weak[i, j] = assigned[a] >= assigned[b]
                known[i, j] = True
            elif _dominates(table, a, b):
                weak[i, j] = True
                known[i, j] = True

    if sample is not None and sample.count:
        # any sampled model is compatible, so an observed l_b > l_a refutes
        classes = _sample_classes(cs, sample, ids)
        refuted = (classes[:, None, :] > classes[:, :, None]).any(axis=0)
        newly = refuted & ~known
        weak[newly] = False
        known |= newly

    def closure():
        # weak is transitive over the exact relation; propagate positives
        changed = True
        while changed:
            changed = False
            prod = (weak.astype(np.uint8) @ weak.astype(np.uint8)) > 0
            gain = prod & ~weak
            if gain.any():
                weak[gain] = True
                known[gain] = True
                changed = True

    closure()
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if known[i, j]:
                continue
            weak[i, j] = necessary_weak(cs, a, b, backend)
            known[i, j] = True
            if weak[i, j]:
                closure()
    return NecessaryRelations(ids, weak)
