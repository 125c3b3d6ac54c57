"""Uniform sampling of compatible sorting models and stochastic
acceptability estimation.

The normalization equality is eliminated by an affine null-space
reparameterization x = x0 + N z; the hit-and-run walk runs in z-space over
the transformed inequalities, starting from the Chebyshev center. Chain
parameters (burn-in 1000, thinning = reduced dimension) are exposed as
arguments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from numba import njit

from .core import PerformanceTable, SortingModel
from .polytope import CompatibleSet, chebyshev_center

DEFAULT_SAMPLE_COUNT = 10_000
DEFAULT_BURN_IN = 1_000

#: reject chords shorter than this during the walk
_MIN_CHORD = 1e-12

#: interior radius below which sampling is refused
_MIN_RADIUS = 1e-9

_FEASIBILITY_CHECK_STRIDE = 50
_FEASIBILITY_TOL = 1e-7


class DegenerateInteriorError(Exception):
    """The compatible polytope has (numerically) empty interior.

    Sampling needs a ball of positive radius; loosen the epsilon handling or
    reduce the assignment examples if this is raised for a feasible set.
    """


@dataclass(frozen=True)
class ModelSample:
    cs: CompatibleSet
    values: np.ndarray  # count x dim, one compatible model per row
    seed: int
    count: int

    @cached_property
    def models(self) -> tuple[SortingModel, ...]:
        return tuple(self.cs.decode(row) for row in self.values)


@njit(cache=True)
def _walk(A, b, z0, dirs, unifs, burn_in, thin, count, out):
    n_rows, d = A.shape
    z = z0.copy()
    resid = b - A @ z
    recorded = 0
    next_record = burn_in + thin
    for k in range(dirs.shape[0]):
        g = dirs[k]
        norm = 0.0
        for i in range(d):
            norm += g[i] * g[i]
        norm = np.sqrt(norm)
        if norm == 0.0:
            continue
        g = g / norm
        s = A @ g
        t_lo = -1e30
        t_hi = 1e30
        for i in range(n_rows):
            if s[i] > 1e-14:
                t = resid[i] / s[i]
                if t < t_hi:
                    t_hi = t
            elif s[i] < -1e-14:
                t = resid[i] / s[i]
                if t > t_lo:
                    t_lo = t
        if t_hi - t_lo >= _MIN_CHORD and t_lo <= 0.0 <= t_hi:
            t = t_lo + unifs[k] * (t_hi - t_lo)
            z = z + t * g
            resid = resid - t * s
        if k + 1 == next_record:
            out[recorded] = z
            recorded += 1
            if recorded == count:
                break
            next_record += thin
    return recorded


def har_sample(
    cs: CompatibleSet,
    count: int = DEFAULT_SAMPLE_COUNT,
    seed: int = 0,
    burn_in: int = DEFAULT_BURN_IN,
    thin: int | None = None,
) -> ModelSample:
    """Draw `count` approximately uniform compatible models, reproducibly."""
    if count == 0:
        return ModelSample(cs, np.zeros((0, cs.dim)), seed, 0)

    center, radius = chebyshev_center(cs)
    if radius <= _MIN_RADIUS:
        raise DegenerateInteriorError(
            f"Chebyshev radius {radius:.3e}; the polytope has no usable interior"
        )
    x0 = cs.encode(center)
    norm_row = cs.normalization_row
    # land exactly on the normalization hyperplane before reparameterizing
    x0 = x0 + norm_row * (1.0 - norm_row @ x0) / (norm_row @ norm_row)
    N = scipy.linalg.null_space(norm_row[None, :])
    d = N.shape[1]
    if thin is None:
        thin = d

    A = cs.a_ub
    Az = np.ascontiguousarray(A @ N)
    bz = cs.b_ub - A @ x0

    steps = burn_in + count * max(thin, 1)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((steps, d))
    unifs = rng.random(steps)

    out = np.empty((count, d))
    recorded = _walk(
        Az, bz, np.zeros(d), dirs, unifs, burn_in, max(thin, 1), count, out
    )
    if recorded != count:  # pragma: no cover - sized exactly above
        raise RuntimeError("sampler recorded fewer points than requested")

    values = out @ N.T + x0

    for k in range(0, count, _FEASIBILITY_CHECK_STRIDE):
        worst = float(np.max(A @ values[k] - cs.b_ub))
        if worst > _FEASIBILITY_TOL:
            raise RuntimeError(
                f"sampled model {k} violates the compatible set by {worst:.3e}"
            )
    return ModelSample(cs, values, seed, count)


@dataclass(frozen=True)
class Acceptabilities:
    alt_ids: tuple[str, ...]
    cai: np.ndarray  # n x p
    apwi: np.ndarray  # n x n
    apei: np.ndarray  # n x n
    sample_count: int

    def index(self, alt_id: str) -> int:
        return self.alt_ids.index(alt_id)

    def cai_of(self, alt_id: str, cls: int) -> float:
        return float(self.cai[self.index(alt_id), cls - 1])

    def apwi_of(self, a: str, b: str) -> float:
        return float(self.apwi[self.index(a), self.index(b)])

    def apei_of(self, a: str, b: str) -> float:
        return float(self.apei[self.index(a), self.index(b)])


def compute_acceptabilities(
    sample: ModelSample, table: PerformanceTable
) -> Acceptabilities:
    """Share of sampled models per class assignment and per pairwise
    assignment-based relation, over all alternatives in the table."""
    if sample.count == 0:
        raise ValueError("acceptabilities need a nonempty sample")
    cs = sample.cs
    ids = tuple(table.alternative_ids)
    n = len(ids)
    p = table.class_count
    S = sample.count

    coef = np.array([cs.ucoef(a) for a in ids])  # n x dim
    U = sample.values @ coef.T  # S x n
    t_cols = np.array(
        [sample.values[:, cs.threshold_index[l]] for l in range(1, p)]
    ).T  # S x (p-1)
    classes = 1 + (U[:, :, None] >= t_cols[:, None, :]).sum(axis=2)  # S x n

    cai = np.empty((n, p))
    apwi = np.zeros((n, n))
    apei = np.zeros((n, n))
    better = np.zeros((S, n))  # running indicator of class < l
    for l in range(1, p + 1):
        ind = (classes == l).astype(np.float64)
        cai[:, l - 1] = ind.mean(axis=0)
        apei += ind.T @ ind
        apwi += ind.T @ better
        better += ind
    apwi /= S
    apei /= S
    np.fill_diagonal(apwi, 0.0)
    np.fill_diagonal(apei, 1.0)
    return Acceptabilities(ids, cai, apwi, apei, S)


def apoi(acc: Acceptabilities, a: str, b: str) -> float:
    """Share of models assigning a to a class at least as good as b's."""
    return acc.apwi_of(a, b) + acc.apei_of(a, b)


def export_cai_csv(acc: Acceptabilities, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        p = acc.cai.shape[1]
        writer.writerow(["alternative"] + [f"C{l}" for l in range(1, p + 1)])
        for i, alt_id in enumerate(acc.alt_ids):
            writer.writerow([alt_id] + [f"{v:.6f}" for v in acc.cai[i]])


def export_pairwise_csv(matrix: np.ndarray, alt_ids, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["alternative"] + list(alt_ids))
        for i, alt_id in enumerate(alt_ids):
            writer.writerow([alt_id] + [f"{v:.6f}" for v in matrix[i]])
