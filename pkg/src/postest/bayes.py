"""Grid-based Bayesian posteriors over one or two parameters.

Posteriors are densities sampled on uniform grids and normalised with the
trapezoid rule; every moment below uses the same quadrature.  Likelihoods
are accumulated in log space from the sample histogram and max-shifted
before exponentiation.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .statmodel import DiscreteModel, DomainError, Sample, TwoParamNoonModel

DEFAULT_PHI_POINTS = 2048
DEFAULT_VIS_POINTS = 256


class DegeneratePosteriorError(ArithmeticError):
    """Every grid node has zero posterior weight."""


@dataclass(frozen=True)
class ParameterGrid:
    lower: float
    upper: float
    n: int = DEFAULT_PHI_POINTS

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"grid needs lower < upper, got [{self.lower}, {self.upper}]")
        if self.n < 2:
            raise DomainError(f"grid needs n >= 2, got {self.n}")

    @classmethod
    def for_model(cls, model: DiscreteModel, n: int = DEFAULT_PHI_POINTS) -> "ParameterGrid":
        lo, hi = model.domain
        return cls(float(lo), float(hi), n)

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return _nodes(self.lower, self.upper, self.n)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        return _trap_weights(self.lower, self.upper, self.n)

    def doubled(self) -> "ParameterGrid":
        return ParameterGrid(self.lower, self.upper, 2 * self.n - 1)


@lru_cache(maxsize=64)
def _nodes(lower, upper, n):
    x = np.linspace(lower, upper, n)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=64)
def _trap_weights(lower, upper, n):
    w = np.full(n, (upper - lower) / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    w.flags.writeable = False
    return w


@dataclass(frozen=True, eq=False)
class Posterior:
    """Normalised density on a grid (1-D) or a product of two grids (2-D).

    ``weights`` has shape ``(n,)`` or ``(n_0, n_1)`` matching ``grids``.
    """

    grids: tuple[ParameterGrid, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != tuple(g.n for g in self.grids):
            raise DomainError(f"weights shape {w.shape} does not match grids")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def grid(self) -> ParameterGrid:
        return self.grids[0]

    @property
    def ndim(self) -> int:
        return len(self.grids)

    def integrate(self, values) -> float:
        """Trapezoid integral of ``values * density`` over the grid."""
        f = np.asarray(values, dtype=float) * self.weights
        for axis, g in reversed(list(enumerate(self.grids))):
            f = np.tensordot(f, g.weights, axes=([axis], [0]))
        return float(f)

    def to_csv(self, path) -> None:
        names = [f"x{i}" for i in range(self.ndim)]
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(names + ["weight"])
            mesh = np.meshgrid(*(g.nodes for g in self.grids), indexing="ij")
            for row in zip(*(m.ravel() for m in mesh), self.weights.ravel()):
                out.writerow([format(float(v), ".17g") for v in row])


def from_density(density, *grids: ParameterGrid) -> Posterior:
    """Normalise nonnegative node values into a posterior on ``grids``."""
    density = np.asarray(density, dtype=float)
    if np.any(density < 0):
        raise DomainError("density must be nonnegative")
    return _normalise(grids, _log(density))


def skewness_kurtosis(post: Posterior) -> tuple[float, float]:
    """Skewness and excess kurtosis of a 1-D posterior."""
    mean = bayes_estimate(post)
    d = post.grid.nodes - mean
    m2, m3, m4 = (post.integrate(d**j) for j in (2, 3, 4))
    if m2 <= 0:
        return math.nan, math.nan
    return m3 / m2**1.5, m4 / m2**2 - 3.0


def uniform(*grids: ParameterGrid) -> Posterior:
    return _normalise(grids, np.zeros(tuple(g.n for g in grids)))


def _normalise(grids, log_w) -> Posterior:
    top = np.max(log_w)
    if not np.isfinite(top):
        raise DegeneratePosteriorError("all posterior weights vanish")
    w = np.exp(log_w - top)
    z = Posterior(grids, w).integrate(1.0)
    if not z > 0:
        raise DegeneratePosteriorError("posterior normalisation is zero")
    return Posterior(grids, w / z)


def log_likelihood_table(hist, log_table) -> np.ndarray:
    """``sum_k n_k log p_k`` over grid nodes; ``log_table`` has outcomes first.

    Outcomes with zero count are skipped so that ``0 * log 0`` never appears.
    """
    hist = np.asarray(hist)
    used = np.flatnonzero(hist)
    if used.size == 0:
        return np.zeros(log_table.shape[1:])
    return np.tensordot(hist[used].astype(float), log_table[used], axes=1)


def _log(p):
    with np.errstate(divide="ignore"):
        return np.log(p)


@lru_cache(maxsize=32)
def _log_table_1d(model: DiscreteModel, grid: ParameterGrid) -> np.ndarray:
    if model.n_params != 1:
        raise DomainError(
            f"{type(model).__name__} has parameters {model.param_names}; "
            "1-D posteriors need a single-parameter model"
        )
    t = _log(np.clip(model.probabilities(grid.nodes), 0.0, None))
    t.flags.writeable = False
    return t


@lru_cache(maxsize=8)
def _log_table_2d(model: DiscreteModel, grid0: ParameterGrid, grid1: ParameterGrid) -> np.ndarray:
    a, b = np.meshgrid(grid0.nodes, grid1.nodes, indexing="ij")
    t = _log(np.clip(model.probabilities(a, b), 0.0, None))
    t.flags.writeable = False
    return t


def log_likelihood(model: DiscreteModel, sample: Sample, params) -> float:
    """Log-likelihood of the sample at one parameter point (may be ``-inf``)."""
    if sample.histogram.size != model.n_outcomes:
        raise DomainError("sample outcome alphabet does not match model")
    logp = _log(model.prob_vector(params))
    return float(log_likelihood_table(sample.histogram, logp[:, None])[0])


def _log_prior(prior, shape):
    if prior is None:
        return 0.0
    if isinstance(prior, Posterior):
        prior = prior.weights
    prior = np.asarray(prior, dtype=float)
    if prior.shape != shape:
        raise DomainError(f"prior shape {prior.shape} does not match grid {shape}")
    if np.any(prior < 0):
        raise DomainError("prior weights must be nonnegative")
    return _log(prior)


def posterior(
    model: DiscreteModel, sample: Sample, grid: ParameterGrid, prior=None
) -> Posterior:
    """Posterior of a single-parameter model; flat prior unless one is given.

    ``prior`` may be an array of nonnegative weights on the grid nodes or a
    previous :class:`Posterior` (sequential updating).
    """
    if sample.histogram.size != model.n_outcomes:
        raise DomainError("sample outcome alphabet does not match model")
    ll = log_likelihood_table(sample.histogram, _log_table_1d(model, grid))
    return _normalise((grid,), ll + _log_prior(prior, (grid.n,)))


def update(post: Posterior, model: DiscreteModel, sample: Sample) -> Posterior:
    """Bayes-update an existing posterior with more data from ``model``."""
    if post.ndim == 1:
        return posterior(model, sample, post.grid, prior=post)
    return posterior_2d(model, sample, *post.grids, prior=post)


def posterior_2d(
    model: TwoParamNoonModel,
    sample: Sample,
    phi_grid: ParameterGrid,
    vis_grid: ParameterGrid,
    prior=None,
) -> Posterior:
    """Joint posterior over ``(phi, vis)`` on the product grid."""
    if model.n_params != 2:
        raise DomainError("posterior_2d needs a two-parameter model")
    lo, hi = model.param_bounds[1]
    if vis_grid.lower < lo or vis_grid.upper > hi:
        raise DomainError(f"second-parameter grid must lie in [{lo}, {hi}]")
    if sample.histogram.size != model.n_outcomes:
        raise DomainError("sample outcome alphabet does not match model")
    ll = log_likelihood_table(sample.histogram, _log_table_2d(model, phi_grid, vis_grid))
    return _normalise((phi_grid, vis_grid), ll + _log_prior(prior, (phi_grid.n, vis_grid.n)))


def marginal(post: Posterior, axis: int = 0) -> Posterior:
    """1-D marginal along ``axis`` of a 2-D posterior."""
    if post.ndim != 2:
        raise DomainError("marginal needs a 2-D posterior")
    other = 1 - axis
    m = np.tensordot(post.weights, post.grids[other].weights, axes=([other], [0]))
    return _normalise((post.grids[axis],), _log(m))


def bayes_estimate(post: Posterior) -> float:
    """Posterior mean of a 1-D posterior."""
    return post.integrate(post.grid.nodes)


def posterior_variance(post: Posterior) -> float:
    mean = bayes_estimate(post)
    var = post.integrate(post.grid.nodes**2) - mean**2
    if var < 0:
        if var < -1e-12 * max(1.0, mean**2):
            warnings.warn(f"negative posterior variance {var:.3g} clamped to 0", RuntimeWarning)
        var = 0.0
    return var


def central_abs_moment(post: Posterior, center: float, beta: float) -> float:
    """``integral |x - center|**beta P(x) dx`` (beta > 1)."""
    if not beta > 1:
        raise DomainError(f"beta must be > 1, got {beta}")
    return post.integrate(np.abs(post.grid.nodes - center) ** beta)


def central_abs_moments(post: Posterior, center: float, betas) -> np.ndarray:
    dev = np.abs(post.grid.nodes - center)
    w = post.weights * post.grid.weights
    return np.array([float(w @ dev**b) for b in betas])


def circular_mean(post: Posterior) -> tuple[float, float]:
    """Mean direction in ``[0, 2*pi)`` and resultant length of a 1-D posterior.

    The direction is ``nan`` when the resultant vanishes.
    """
    x = post.grid.nodes
    c, s = post.integrate(np.cos(x)), post.integrate(np.sin(x))
    r = math.hypot(c, s)
    if r < 1e-12:
        return math.nan, r
    return math.atan2(s, c) % (2 * math.pi), r


def posterior_draw(post: Posterior, seed) -> float:
    """Inverse-CDF draw from a 1-D posterior.

    The CDF is the cumulative trapezoid integral at the nodes and is linearly
    interpolated inside each cell.  ``seed`` may be an int or a Generator.
    """
    rng = np.random.default_rng(seed)
    x = post.grid.nodes
    half = 0.5 * post.grid.spacing * (post.weights[1:] + post.weights[:-1])
    cdf = np.concatenate([[0.0], np.cumsum(half)])
    cdf /= cdf[-1]
    u = rng.random()
    i = int(np.searchsorted(cdf, u, side="right"))
    i = min(max(i, 1), x.size - 1)
    lo, hi = cdf[i - 1], cdf[i]
    t = 0.0 if hi <= lo else (u - lo) / (hi - lo)
    return float(x[i - 1] + t * (x[i] - x[i - 1]))


def grid_converged(model, sample, grid: ParameterGrid, tol: float = 1e-6) -> bool:
    """True if doubling the grid resolution moves the Bayes estimate by < tol."""
    coarse = bayes_estimate(posterior(model, sample, grid))
    fine = bayes_estimate(posterior(model, sample, grid.doubled()))
    return abs(fine - coarse) < tol
