"""Domain types for threshold-based sorting with additive value functions.

An alternative's desirability is the sum of piecewise-linear marginal value
functions over its criterion performances; classes are delimited by ordered
thresholds on that comprehensive value. All criteria are gain-type: callers
must pre-negate cost criteria.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DEFAULT_EPSILON = 1e-6

#: tolerance for the normalization invariant of a SortingModel
NORMALIZATION_TOL = 1e-8

#: slack allowed for floating-point noise in monotonicity checks
_MONOTONE_TOL = 1e-9


class DomainError(ValueError):
    """An input falls outside the domain an operation is defined on."""


class ConfigurationError(ValueError):
    """A structurally invalid configuration (bad counts, missing pieces)."""


class InconsistencyError(Exception):
    """Assignment examples cannot be reproduced by any model of the assumed form."""


@dataclass(frozen=True)
class Criterion:
    id: str
    scale_min: float
    scale_max: float
    char_point_count: int

    def __post_init__(self):
        if not self.scale_min < self.scale_max:
            raise ConfigurationError(
                f"criterion {self.id!r}: scale_min must be < scale_max"
            )
        if self.char_point_count < 2:
            raise ConfigurationError(
                f"criterion {self.id!r}: need at least 2 characteristic points"
            )


def characteristic_points(criterion: Criterion) -> np.ndarray:
    """Equally spaced breakpoints anchored at the scale endpoints."""
    return np.linspace(
        criterion.scale_min, criterion.scale_max, criterion.char_point_count
    )


@dataclass(frozen=True)
class Alternative:
    id: str
    performances: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "performances", dict(self.performances))


@dataclass(frozen=True)
class PerformanceTable:
    criteria: tuple[Criterion, ...]
    alternatives: tuple[Alternative, ...]
    class_count: int

    def __post_init__(self):
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if self.class_count < 2:
            raise ConfigurationError("need at least 2 classes")
        crit_ids = [c.id for c in self.criteria]
        if len(set(crit_ids)) != len(crit_ids):
            raise ConfigurationError("criterion ids must be unique")
        alt_ids = [a.id for a in self.alternatives]
        if len(set(alt_ids)) != len(alt_ids):
            raise ConfigurationError("alternative ids must be unique")
        for alt in self.alternatives:
            for crit in self.criteria:
                if crit.id not in alt.performances:
                    raise DomainError(
                        f"alternative {alt.id!r} has no performance on {crit.id!r}"
                    )
                x = alt.performances[crit.id]
                if not (crit.scale_min - 1e-12 <= x <= crit.scale_max + 1e-12):
                    raise DomainError(
                        f"performance {x} of {alt.id!r} outside scale of {crit.id!r}"
                    )

    @property
    def alternative_ids(self) -> list[str]:
        return [a.id for a in self.alternatives]

    def alternative(self, alt_id: str) -> Alternative:
        for a in self.alternatives:
            if a.id == alt_id:
                return a
        raise KeyError(alt_id)

    def criterion(self, crit_id: str) -> Criterion:
        for c in self.criteria:
            if c.id == crit_id:
                return c
        raise KeyError(crit_id)


@dataclass(frozen=True)
class AssignmentExamples:
    assignments: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    def validate(self, table: PerformanceTable) -> None:
        ids = set(table.alternative_ids)
        for alt_id, cls in self.assignments.items():
            if alt_id not in ids:
                raise ConfigurationError(f"unknown reference alternative {alt_id!r}")
            if not 1 <= cls <= table.class_count:
                raise ConfigurationError(
                    f"class {cls} for {alt_id!r} outside 1..{table.class_count}"
                )


@dataclass(frozen=True)
class MarginalFunction:
    criterion_id: str
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.breakpoints) != len(self.values):
            raise ConfigurationError("breakpoints and values must have equal length")
        if len(self.breakpoints) < 2:
            raise ConfigurationError("need at least 2 breakpoints")
        if abs(self.values[0]) > _MONOTONE_TOL:
            raise ConfigurationError("value at the first breakpoint must be 0")
        bp = np.asarray(self.breakpoints)
        if np.any(np.diff(bp) <= 0):
            raise ConfigurationError("breakpoints must be strictly increasing")
        v = np.asarray(self.values)
        if np.any(np.diff(v) < -_MONOTONE_TOL):
            raise ConfigurationError("marginal values must be non-decreasing")


def interpolation_weights(
    breakpoints: Sequence[float], x: float
) -> list[tuple[int, float]]:
    """Coefficients expressing the marginal value at x over breakpoint values.

    Returns (breakpoint index, weight) pairs; at most two entries. Raises
    DomainError if x is outside the breakpoint range.
    """
    bp = np.asarray(breakpoints, dtype=float)
    if x < bp[0] - 1e-12 or x > bp[-1] + 1e-12:
        raise DomainError(f"performance {x} outside [{bp[0]}, {bp[-1]}]")
    x = min(max(x, bp[0]), bp[-1])
    s = int(np.searchsorted(bp, x, side="right")) - 1
    if s >= len(bp) - 1:
        return [(len(bp) - 1, 1.0)]
    w = (x - bp[s]) / (bp[s + 1] - bp[s])
    if w == 0.0:
        return [(s, 1.0)]
    return [(s, 1.0 - w), (s + 1, w)]


def marginal_value(mf: MarginalFunction, x: float) -> float:
    """Linear interpolation between the surrounding characteristic points."""
    return sum(mf.values[i] * w for i, w in interpolation_weights(mf.breakpoints, x))


@dataclass(frozen=True)
class SortingModel:
    marginals: tuple[MarginalFunction, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "thresholds", tuple(self.thresholds))
        total = sum(mf.values[-1] for mf in self.marginals)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ConfigurationError(
                f"marginal maxima must sum to 1 (got {total:.12f})"
            )
        t = np.asarray(self.thresholds)
        if t.size:
            if np.any(np.diff(t) <= 0):
                raise ConfigurationError("thresholds must be strictly increasing")
            if t[0] <= 0 or t[-1] >= 1:
                raise ConfigurationError("thresholds must lie strictly inside (0, 1)")

    @property
    def class_count(self) -> int:
        return len(self.thresholds) + 1

    def marginal(self, crit_id: str) -> MarginalFunction:
        for mf in self.marginals:
            if mf.criterion_id == crit_id:
                return mf
        raise KeyError(crit_id)


def comprehensive_value(model: SortingModel, alternative: Alternative) -> float:
    """Sum of marginal values over all criteria; lies in [0, 1]."""
    total = 0.0
    for mf in model.marginals:
        if mf.criterion_id not in alternative.performances:
            raise DomainError(
                f"alternative {alternative.id!r} misses criterion "
                f"{mf.criterion_id!r}"
            )
        total += marginal_value(mf, alternative.performances[mf.criterion_id])
    return total


def assign(model: SortingModel, alternative: Alternative) -> int:
    """Class index l with t_{l-1} <= U(a) < t_l (t_0 = 0, t_p = +inf)."""
    return assign_value(model.thresholds, comprehensive_value(model, alternative))


def assign_value(thresholds: Sequence[float], value: float) -> int:
    cls = 1
    for t in thresholds:
        if value >= t:
            cls += 1
    return cls


def midpoint_thresholds(
    marginals: Sequence[MarginalFunction],
    table: PerformanceTable,
    examples: AssignmentExamples,
) -> tuple[float, ...]:
    """Thresholds halfway between the extreme comprehensive values of the
    reference alternatives in adjacent classes."""
    examples.validate(table)
    p = table.class_count
    per_class: dict[int, list[float]] = {l: [] for l in range(1, p + 1)}
    marg = {mf.criterion_id: mf for mf in marginals}
    for alt_id, cls in examples.assignments.items():
        alt = table.alternative(alt_id)
        u = sum(
            marginal_value(marg[c.id], alt.performances[c.id]) for c in table.criteria
        )
        per_class[cls].append(u)
    thresholds = []
    for l in range(1, p):
        if not per_class[l] or not per_class[l + 1]:
            raise ConfigurationError(
                f"midpoint thresholds need examples in every class; class "
                f"{l if not per_class[l] else l + 1} is empty"
            )
        lo = max(per_class[l])
        hi = min(per_class[l + 1])
        if lo >= hi:
            raise InconsistencyError(
                f"comprehensive values of classes {l} and {l + 1} overlap"
            )
        thresholds.append((lo + hi) / 2.0)
    return tuple(thresholds)
