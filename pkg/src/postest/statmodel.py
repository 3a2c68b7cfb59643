"""Discrete statistical models p(k|params) and outcome sampling.

Every model exposes integer outcome labels ``0..K-1`` and a vectorised
``probabilities`` method that broadcasts over arrays of parameter values,
returning an array whose leading axis runs over outcomes.  The scalar
``prob``/``dprob`` methods wrap it with domain checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FD_STEP = 1e-6


class DomainError(ValueError):
    """Argument outside the domain of a model or formula."""


class DiscreteModel:
    """Base class for a finite-outcome model with parameter vector ``params``.

    Subclasses set ``param_names`` and ``param_bounds`` and implement
    :meth:`probabilities`.  :meth:`derivatives` defaults to a centered finite
    difference with step ``FD_STEP``.
    """

    param_names: tuple[str, ...] = ()
    param_bounds: tuple[tuple[float, float], ...] = ()

    @property
    def outcomes(self) -> tuple[int, ...]:
        return tuple(range(self.n_outcomes))

    @property
    def n_outcomes(self) -> int:
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def probabilities(self, *params):
        raise NotImplementedError

    def derivatives(self, index, *params):
        """d p(k|params) / d params[index], shape ``(K, *broadcast)``."""
        lo = list(params)
        hi = list(params)
        lo[index] = np.asarray(params[index], dtype=float) - FD_STEP
        hi[index] = np.asarray(params[index], dtype=float) + FD_STEP
        return (self.probabilities(*hi) - self.probabilities(*lo)) / (2 * FD_STEP)

    # scalar API with validation

    def check_params(self, params) -> tuple[float, ...]:
        params = tuple(float(p) for p in np.atleast_1d(params))
        if len(params) != self.n_params:
            raise DomainError(
                f"{type(self).__name__} takes {self.n_params} parameter(s) "
                f"{self.param_names}, got {len(params)}"
            )
        for name, value, (lo, hi) in zip(self.param_names, params, self.param_bounds):
            if not (lo <= value <= hi) or math.isnan(value):
                raise DomainError(f"{name}={value} outside [{lo}, {hi}]")
        return params

    def check_outcome(self, k) -> int:
        if isinstance(k, (bool, np.bool_)) or int(k) != k or not 0 <= int(k) < self.n_outcomes:
            raise DomainError(f"outcome {k!r} not in {self.outcomes}")
        return int(k)

    def check_index(self, index) -> int:
        if not 0 <= int(index) < self.n_params:
            raise DomainError(f"parameter index {index} out of range for {self.param_names}")
        return int(index)

    def prob_vector(self, params) -> np.ndarray:
        return np.asarray(self.probabilities(*self.check_params(params)), dtype=float)

    def dprob_vector(self, params, index: int = 0) -> np.ndarray:
        index = self.check_index(index)
        return np.asarray(self.derivatives(index, *self.check_params(params)), dtype=float)

    def prob(self, k, params) -> float:
        return float(self.prob_vector(params)[self.check_outcome(k)])

    def dprob(self, k, params, index: int = 0) -> float:
        k = self.check_outcome(k)
        return float(self.dprob_vector(params, index)[k])


def _noon(phi, vis):
    k = np.arange(4).reshape((4,) + (1,) * np.ndim(np.broadcast(phi, vis)))
    return 0.25 * (1.0 + vis * np.cos(2.0 * phi - k * np.pi / 2))


def _noon_dphi(phi, vis):
    k = np.arange(4).reshape((4,) + (1,) * np.ndim(np.broadcast(phi, vis)))
    return -0.5 * vis * np.sin(2.0 * phi - k * np.pi / 2)


def _noon_dvis(phi, vis):
    k = np.arange(4).reshape((4,) + (1,) * np.ndim(np.broadcast(phi, vis)))
    return 0.25 * np.cos(2.0 * phi - k * np.pi / 2) + 0.0 * vis


@dataclass(frozen=True)
class NoonPhaseModel(DiscreteModel):
    """Four-outcome N00N fringe with fixed visibility; estimates the phase.

    ``p(k|phi) = (1 + vis*cos(2*phi - k*pi/2)) / 4``.  The phase may be any
    real number (period pi); default estimation grids cover one period,
    ``[-pi/2, pi/2]``.
    """

    vis: float = 1.0

    param_names = ("phi",)
    param_bounds = ((-math.inf, math.inf),)
    domain = (-math.pi / 2, math.pi / 2)

    def __post_init__(self):
        if not 0.0 <= self.vis <= 1.0:
            raise DomainError(f"visibility {self.vis} outside [0, 1]")

    @property
    def n_outcomes(self):
        return 4

    def probabilities(self, phi):
        return _noon(np.asarray(phi, dtype=float), self.vis)

    def derivatives(self, index, phi):
        return _noon_dphi(np.asarray(phi, dtype=float), self.vis)


@dataclass(frozen=True)
class TwoParamNoonModel(DiscreteModel):
    """N00N fringe with unknown phase and visibility.

    Outcome ``k`` is the projection setting ``theta = k*pi/16``, so that
    ``p(theta|phi, v) = (1 + v*cos(2*phi - 8*theta)) / 4``.
    """

    param_names = ("phi", "vis")
    param_bounds = ((-math.inf, math.inf), (0.0, 1.0))
    domain = (-math.pi / 2, math.pi / 2)

    @staticmethod
    def theta(k):
        return np.asarray(k) * np.pi / 16

    @property
    def n_outcomes(self):
        return 4

    def probabilities(self, phi, vis):
        phi, vis = np.asarray(phi, dtype=float), np.asarray(vis, dtype=float)
        theta = self.theta(np.arange(4)).reshape((4,) + (1,) * np.ndim(np.broadcast(phi, vis)))
        return 0.25 * (1.0 + vis * np.cos(2.0 * phi - 8.0 * theta))

    def derivatives(self, index, phi, vis):
        phi, vis = np.asarray(phi, dtype=float), np.asarray(vis, dtype=float)
        if index == 0:
            return _noon_dphi(phi, vis)
        return _noon_dvis(phi, vis)


@dataclass(frozen=True)
class FeedbackInterferometerModel(DiscreteModel):
    """Lossless Mach-Zehnder with unknown phase and controllable feedback.

    ``p(x|phi, feedback) = (1 + (-1)**x * cos(phi - feedback)) / 2`` for
    ``x in {0, 1}``.  Use :meth:`at_feedback` to change the control phase.
    """

    feedback: float = 0.0

    param_names = ("phi",)
    param_bounds = ((-math.inf, math.inf),)
    domain = (0.0, 2 * math.pi)

    @property
    def n_outcomes(self):
        return 2

    def at_feedback(self, feedback: float) -> "FeedbackInterferometerModel":
        return FeedbackInterferometerModel(float(feedback))

    def probabilities(self, phi):
        c = np.cos(np.asarray(phi, dtype=float) - self.feedback)
        return np.stack([0.5 * (1.0 + c), 0.5 * (1.0 - c)])

    def derivatives(self, index, phi):
        s = np.sin(np.asarray(phi, dtype=float) - self.feedback)
        return np.stack([-0.5 * s, 0.5 * s])


@dataclass(frozen=True, eq=False)
class TabulatedModel(DiscreteModel):
    """Single-parameter model given as a probability table on a grid.

    Rows are linearly interpolated between grid values; derivatives use the
    inherited centered finite difference.  Rows are renormalised on load.
    """

    grid: np.ndarray
    table: np.ndarray  # shape (n_grid, K)
    name: str = "table"

    param_names = ("lam",)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        table = np.asarray(self.table, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise DomainError("table grid must be strictly increasing with >= 2 rows")
        if table.shape != (grid.size, table.shape[-1]) or table.shape[-1] < 2:
            raise DomainError(f"table shape {table.shape} does not match grid of {grid.size}")
        if np.any(table < 0):
            raise DomainError("negative probability in table")
        sums = table.sum(axis=1)
        if np.any(sums <= 0):
            raise DomainError("table row with zero total probability")
        table = table / sums[:, None]
        grid.flags.writeable = False
        table.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "table", table)

    @property
    def param_bounds(self):
        return ((float(self.grid[0]), float(self.grid[-1])),)

    @property
    def domain(self):
        return self.param_bounds[0]

    @property
    def n_outcomes(self):
        return self.table.shape[1]

    def probabilities(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.stack([np.interp(lam, self.grid, col) for col in self.table.T])
        return out

    @classmethod
    def from_file(cls, path) -> "TabulatedModel":
        """Read a whitespace-separated table: lambda, then p(k|lambda) columns.

        Lines starting with ``#`` and blank lines are skipped.
        """
        path = Path(path)
        rows = []
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(x) for x in line.split()])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise DomainError(f"{path}:{lineno}: expected {len(rows[0])} columns")
        if len(rows) < 2 or len(rows[0]) < 3:
            raise DomainError(f"{path}: need >= 2 rows and >= 2 outcome columns")
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1:], name=str(path))


@dataclass(frozen=True, eq=False)
class Sample:
    """Ordered outcome record with its count histogram."""

    outcomes: np.ndarray
    histogram: np.ndarray = field(default=None)

    def __post_init__(self):
        outcomes = np.asarray(self.outcomes, dtype=np.int64).ravel()
        hist = self.histogram
        if hist is None:
            raise DomainError("Sample needs the number of outcome labels; use Sample.of")
        hist = np.asarray(hist, dtype=np.int64)
        if outcomes.size and (outcomes.min() < 0 or outcomes.max() >= hist.size):
            raise DomainError("outcome label outside histogram range")
        if not np.array_equal(np.bincount(outcomes, minlength=hist.size), hist):
            raise DomainError("histogram inconsistent with outcomes")
        outcomes.flags.writeable = False
        hist.flags.writeable = False
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "histogram", hist)

    @classmethod
    def of(cls, outcomes, n_outcomes: int) -> "Sample":
        outcomes = np.asarray(outcomes, dtype=np.int64).ravel()
        if outcomes.size and (outcomes.min() < 0 or outcomes.max() >= n_outcomes):
            raise DomainError(f"outcome label outside 0..{n_outcomes - 1}")
        return cls(outcomes, np.bincount(outcomes, minlength=n_outcomes))

    @classmethod
    def from_counts(cls, counts) -> "Sample":
        """Sample with the given histogram; outcomes listed in label order."""
        counts = np.asarray(counts)
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise DomainError("counts must be nonnegative integers")
        counts = counts.astype(np.int64)
        return cls(np.repeat(np.arange(counts.size), counts), counts)

    @property
    def M(self) -> int:
        return int(self.histogram.sum())

    def __len__(self):
        return self.M

    def __add__(self, other: "Sample") -> "Sample":
        if other.histogram.size != self.histogram.size:
            raise DomainError("samples over different outcome sets")
        return Sample(
            np.concatenate([self.outcomes, other.outcomes]),
            self.histogram + other.histogram,
        )


def outcome_probability(model: DiscreteModel, k, params) -> float:
    return model.prob(k, params)


def probability_derivative(model: DiscreteModel, k, params, index: int = 0) -> float:
    return model.dprob(k, params, index)


def sample_outcomes(model: DiscreteModel, params, M: int, seed) -> Sample:
    """Draw ``M`` i.i.d. outcomes from ``p(.|params)``.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``; the same
    seed always yields the same sequence.
    """
    if M < 0:
        raise DomainError(f"M must be >= 0, got {M}")
    p = model.prob_vector(params)
    rng = np.random.default_rng(seed)
    if M == 0:
        return Sample.of([], model.n_outcomes)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(M), side="right")
    return Sample.of(np.minimum(draws, model.n_outcomes - 1), model.n_outcomes)
