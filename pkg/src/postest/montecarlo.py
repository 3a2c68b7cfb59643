"""Simulation harness: bound-saturation sweeps and the PGH adaptive baseline.

Every repetition draws its randomness from ``SeedSequence((master, r, m))``
where ``r`` is the repetition index and ``m`` the position of ``M`` in the
sweep, so results are independent of the worker count.  Aggregation is a
reduction in repetition order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bayes
from .bayes import DegeneratePosteriorError, ParameterGrid
from .information import (
    conjugate_order,
    fisher_information,
    gaussian_limit_xi,
    generalized_fisher,
    xi_beta,
)
from .statmodel import (
    DiscreteModel,
    DomainError,
    FeedbackInterferometerModel,
    Sample,
    sample_outcomes,
)

SWEEP_COLUMNS = (
    "M",
    "beta",
    "xi_mean",
    "xi_std",
    "gaussian_limit",
    "bound_floor",
    "estimate_mean",
    "estimate_std",
    "n_valid",
)
BIAS_COLUMNS = ("M", "estimate_mean", "estimate_std", "estimate_stderr", "n_valid")


def default_m_values(lo: int = 10, hi: int = 450, n: int = 25) -> tuple[int, ...]:
    """``n`` log-spaced integers on ``[lo, hi]`` (duplicates after rounding dropped)."""
    return tuple(sorted({int(round(m)) for m in np.geomspace(lo, hi, n)}))


def child_seed(master: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(master),) + tuple(int(k) for k in keys))


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    model: DiscreteModel
    true_params: tuple[float, ...]
    m_values: tuple[int, ...] = field(default_factory=default_m_values)
    repetitions: int = 500
    betas: tuple[float, ...] = (2, 3, 4, 5)
    seed: int = 0
    grid: ParameterGrid | None = None

    def __post_init__(self):
        if not self.m_values or any(int(m) != m or m < 1 for m in self.m_values):
            raise DomainError("every M must be an integer >= 1")
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")
        if not self.betas or any(not b > 1 for b in self.betas):
            raise DomainError("every beta must be > 1")
        object.__setattr__(self, "true_params", tuple(float(p) for p in np.atleast_1d(self.true_params)))
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.grid is None:
            object.__setattr__(self, "grid", ParameterGrid.for_model(self.model))
        self.model.check_params(self.true_params)


@dataclass(frozen=True)
class SweepRow:
    M: int
    beta: float
    xi_mean: float
    xi_std: float
    gaussian_limit: float
    bound_floor: float
    estimate_mean: float
    estimate_std: float
    n_valid: int

    @property
    def xi_stderr(self) -> float:
        return self.xi_std / math.sqrt(self.n_valid) if self.n_valid else math.nan


@dataclass(frozen=True)
class BiasRow:
    M: int
    estimate_mean: float
    estimate_std: float
    estimate_stderr: float
    n_valid: int


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: ExperimentConfig
    rows: tuple[SweepRow, ...]
    bias: tuple[BiasRow, ...]
    n_degenerate: int
    xi: np.ndarray  # (repetitions, n_M, n_beta), nan where degenerate
    estimates: np.ndarray  # (repetitions, n_M)

    def row(self, M: int, beta: float) -> SweepRow:
        for r in self.rows:
            if r.M == M and r.beta == beta:
                return r
        raise KeyError((M, beta))

    @property
    def degenerate_fraction(self) -> float:
        return self.n_degenerate / self.estimates.size

    def to_csv(self) -> str:
        return _csv(SWEEP_COLUMNS, self.rows)

    def bias_csv(self) -> str:
        return _csv(BIAS_COLUMNS, self.bias)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(columns)
    for r in rows:
        out.writerow([fmt(getattr(r, c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, float]]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: float(v) for k, v in r.items()} for r in rows]


def _repetition(config: ExperimentConfig, r: int, fa_pow: np.ndarray):
    """Xi values and estimates for every M of one repetition."""
    n_m, n_b = len(config.m_values), len(config.betas)
    xi = np.full((n_m, n_b), np.nan)
    est = np.full(n_m, np.nan)
    for m_idx, M in enumerate(config.m_values):
        s = sample_outcomes(config.model, config.true_params, M, child_seed(config.seed, r, m_idx))
        try:
            post = bayes.posterior(config.model, s, config.grid)
        except DegeneratePosteriorError:
            continue
        mean = bayes.bayes_estimate(post)
        sigmas = bayes.central_abs_moments(post, mean, config.betas)
        betas = np.asarray(config.betas)
        xi[m_idx] = sigmas * float(M) ** (betas / 2) * fa_pow
        est[m_idx] = mean
    return xi, est


def run_sweep(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Simulate ``repetitions`` experiments per ``M`` and aggregate Xi_beta.

    Sigma_beta is the absolute central moment of each posterior about its
    mean; the information terms are evaluated at the true parameter.
    Degenerate posteriors are counted and excluded.
    """
    model, truth = config.model, config.true_params
    f2 = fisher_information(model, truth)
    fas = [generalized_fisher(model, truth, 0, conjugate_order(b)) for b in config.betas]
    # F_alpha ** (beta / alpha) == xi_beta(1, 1, F_alpha, beta)
    fa_pow = np.array([xi_beta(1.0, 1, fa, b) for fa, b in zip(fas, config.betas)])
    limits = []
    for fa, b in zip(fas, config.betas):
        if b.is_integer() and f2 > 0 and fa > 0:
            limits.append(gaussian_limit_xi(f2, fa, int(b)))
        else:
            limits.append(math.nan)

    reps = range(config.repetitions)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda r: _repetition(config, r, fa_pow), reps))
    else:
        parts = [_repetition(config, r, fa_pow) for r in reps]
    xi = np.stack([p[0] for p in parts])
    est = np.stack([p[1] for p in parts])

    rows, bias = [], []
    for m_idx, M in enumerate(config.m_values):
        e = est[:, m_idx]
        e = e[np.isfinite(e)]
        n = e.size
        e_mean = float(e.mean()) if n else math.nan
        e_std = float(e.std(ddof=1)) if n > 1 else 0.0 if n else math.nan
        bias.append(BiasRow(M, e_mean, e_std, e_std / math.sqrt(n) if n else math.nan, n))
        for b_idx, beta in enumerate(config.betas):
            x = xi[:, m_idx, b_idx]
            x = x[np.isfinite(x)]
            rows.append(
                SweepRow(
                    M=M,
                    beta=beta,
                    xi_mean=float(x.mean()) if n else math.nan,
                    xi_std=float(x.std(ddof=1)) if n > 1 else 0.0 if n else math.nan,
                    gaussian_limit=limits[b_idx],
                    bound_floor=1.0,
                    estimate_mean=e_mean,
                    estimate_std=e_std,
                    n_valid=n,
                )
            )
    n_degen = int(np.sum(~np.isfinite(est)))
    return SweepResult(config, tuple(rows), tuple(bias), n_degen, xi, est)


def bias_curve(config: ExperimentConfig, threads: int = 1) -> tuple[BiasRow, ...]:
    """Per-M mean and spread of the Bayesian estimate across repetitions."""
    return run_sweep(config, threads).bias


# adaptive phase estimation


@dataclass(frozen=True)
class PghStep:
    feedback: float
    outcome: int
    estimate: float
    resultant: float


@dataclass(frozen=True, eq=False)
class PghResult:
    steps: tuple[PghStep, ...]
    estimate: float
    no_information: bool
    posterior: bayes.Posterior

    def estimates(self) -> np.ndarray:
        return np.array([s.estimate for s in self.steps])


def pgh_run(
    model: FeedbackInterferometerModel,
    phi_true: float,
    M: int,
    grid: ParameterGrid | None = None,
    seed=0,
) -> PghResult:
    """Particle-guess-heuristic loop on a grid posterior over ``[0, 2*pi]``.

    Each shot sets the feedback phase to a random draw from the current
    posterior, simulates the outcome, and updates the posterior.  Point
    estimates are circular posterior means.
    """
    if M < 0:
        raise DomainError(f"M must be >= 0, got {M}")
    grid = grid or ParameterGrid.for_model(model)
    rng = np.random.default_rng(seed)
    post = bayes.uniform(grid)
    steps = []
    for _ in range(M):
        feedback = bayes.posterior_draw(post, rng)
        m = model.at_feedback(feedback)
        p0 = m.probabilities(phi_true)[0]
        outcome = int(rng.random() >= p0)
        post = bayes.update(post, m, Sample.of([outcome], 2))
        est, r = bayes.circular_mean(post)
        steps.append(PghStep(feedback, outcome, est, r))
    est, r = bayes.circular_mean(post)
    return PghResult(tuple(steps), est, bool(np.isnan(est)), post)


class UnboundedHolevoError(ArithmeticError):
    """Mean phasor of the estimates is zero."""


def holevo_variance(estimates) -> float:
    """``|mean(exp(i*phi))|**-2 - 1`` for a set of phase estimates."""
    phi = np.asarray(estimates, dtype=float).ravel()
    if phi.size == 0:
        raise DomainError("need at least one estimate")
    r = abs(np.mean(np.exp(1j * phi)))
    if r < 1e-12:
        raise UnboundedHolevoError("unbounded Holevo variance (zero resultant)")
    return max(r**-2 - 1.0, 0.0)


def pgh_holevo_curve(
    phi_true: float,
    checkpoints,
    repetitions: int,
    grid: ParameterGrid | None = None,
    seed: int = 0,
    threads: int = 1,
) -> list[tuple[int, float]]:
    """Holevo variance of PGH estimates after each checkpoint shot count.

    Repetition ``r`` runs with ``SeedSequence((seed, r))``.
    """
    checkpoints = sorted(int(c) for c in checkpoints)
    model = FeedbackInterferometerModel()
    M = checkpoints[-1] if checkpoints else 0

    def one(r):
        res = pgh_run(model, phi_true, M, grid, child_seed(seed, r))
        traj = res.estimates()
        return [traj[c - 1] if c > 0 else res.estimate for c in checkpoints]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            table = np.array(list(pool.map(one, range(repetitions))))
    else:
        table = np.array([one(r) for r in range(repetitions)])
    out = []
    for j, c in enumerate(checkpoints):
        col = table[:, j]
        try:
            out.append((c, holevo_variance(col) if np.all(np.isfinite(col)) else math.inf))
        except UnboundedHolevoError:
            out.append((c, math.inf))
    return out
