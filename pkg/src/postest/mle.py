"""Grid-search maximum-likelihood estimation from outcome counts."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bayes import ParameterGrid, _log_table_1d, log_likelihood_table
from .statmodel import DiscreteModel, DomainError, sample_outcomes


class IncompatibleDataError(ArithmeticError):
    """Log-likelihood is ``-inf`` at every grid node."""


@dataclass(frozen=True)
class MleResult:
    estimate: float
    log_likelihood_at_max: float
    grid_index: int
    curvature: float

    @property
    def stderr(self) -> float:
        """Local error bar ``1/sqrt(-curvature)``; ``inf`` for a flat maximum."""
        return 1.0 / math.sqrt(-self.curvature) if self.curvature < 0 else math.inf


def _check_counts(histogram) -> np.ndarray:
    h = np.asarray(histogram)
    if h.ndim != 1 or np.any(h < 0) or np.any(h != np.round(h)):
        raise DomainError("counts must be a 1-D array of nonnegative integers")
    if h.sum() < 1:
        raise DomainError("need at least one count")
    return h.astype(np.int64)


def mle_estimate(model: DiscreteModel, histogram, grid: ParameterGrid) -> MleResult:
    """Exhaustive argmax of ``sum_k n_k log p_k`` over the grid.

    Ties go to the lowest grid value.  Curvature is the centered second
    difference of the log-likelihood at the maximiser (shifted one node
    inward at the grid edges).
    """
    h = _check_counts(histogram)
    if h.size != model.n_outcomes:
        raise DomainError(f"expected {model.n_outcomes} counts, got {h.size}")
    ll = log_likelihood_table(h, _log_table_1d(model, grid))
    i = int(np.argmax(ll))
    if not np.isfinite(ll[i]):
        raise IncompatibleDataError("data incompatible with model on every grid node")
    j = min(max(i, 1), grid.n - 2)
    with np.errstate(invalid="ignore"):
        curv = (ll[j + 1] - 2 * ll[j] + ll[j - 1]) / grid.spacing**2
    if not np.isfinite(curv):
        curv = -math.inf
    return MleResult(float(grid.nodes[i]), float(ll[i]), i, float(curv))


@dataclass(frozen=True)
class RepeatStatistics:
    mean: float
    variance: float
    estimates: np.ndarray


def mle_repeat_statistics(
    model: DiscreteModel,
    params_true,
    M: int,
    R: int,
    grid: ParameterGrid,
    seed: int,
    threads: int = 1,
) -> RepeatStatistics:
    """Mean and unbiased variance of MLEs over ``R`` simulated histograms.

    Repetition ``r`` is simulated with seed ``seed + r`` so the result does
    not depend on ``threads``.
    """
    if R < 2:
        raise DomainError(f"need R >= 2 repetitions, got {R}")

    def one(r):
        s = sample_outcomes(model, params_true, M, seed + r)
        return mle_estimate(model, s.histogram, grid).estimate

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            est = np.array(list(pool.map(one, range(R))))
    else:
        est = np.array([one(r) for r in range(R)])
    return RepeatStatistics(float(est.mean()), float(est.var(ddof=1)), est)


def read_histogram(path, n_outcomes: int | None = None) -> np.ndarray:
    """Read ``outcome,count`` CSV rows (optional header) into a count vector."""
    counts = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 'outcome,count'")
            a, b = (x.strip() for x in row)
            if lineno == 1 and not a.lstrip("-").isdigit():
                continue
            try:
                k, n = int(a), int(b)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: outcome and count must be integers") from None
            if k < 0 or n < 0:
                raise DomainError(f"{path}:{lineno}: negative outcome or count")
            if n_outcomes is not None and k >= n_outcomes:
                raise DomainError(f"{path}:{lineno}: outcome {k} outside 0..{n_outcomes - 1}")
            counts[k] = counts.get(k, 0) + n
    size = n_outcomes if n_outcomes is not None else (max(counts) + 1 if counts else 0)
    h = np.zeros(size, dtype=np.int64)
    for k, n in counts.items():
        h[k] = n
    return h
