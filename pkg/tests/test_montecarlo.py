import math

import numpy as np
import pytest

from postest import bayes
from postest.bayes import ParameterGrid
from postest.information import barankin_bound
from postest.montecarlo import (
    SWEEP_COLUMNS,
    ExperimentConfig,
    UnboundedHolevoError,
    bias_curve,
    child_seed,
    default_m_values,
    holevo_variance,
    pgh_holevo_curve,
    pgh_run,
    read_csv,
    run_sweep,
)
from postest.statmodel import DomainError, FeedbackInterferometerModel, NoonPhaseModel, sample_outcomes

NOON = NoonPhaseModel(0.9)


def test_default_m_values():
    ms = default_m_values()
    assert ms[0] == 10 and ms[-1] == 450
    assert len(ms) == 25
    assert list(ms) == sorted(set(ms))


def test_config_validation():
    with pytest.raises(DomainError):
        ExperimentConfig(NOON, (0.2,), m_values=(0,))
    with pytest.raises(DomainError):
        ExperimentConfig(NOON, (0.2,), repetitions=0)
    with pytest.raises(DomainError):
        ExperimentConfig(NOON, (0.2,), betas=(1.0,))
    with pytest.raises(DomainError):
        ExperimentConfig(NOON, (0.2, 0.3))


def test_single_cell_sweep_is_deterministic():
    cfg = ExperimentConfig(NOON, (0.2,), m_values=(1,), repetitions=1, betas=(2,), seed=5)
    a, b = run_sweep(cfg), run_sweep(cfg)
    assert len(a.rows) == 1
    assert a.to_csv() == b.to_csv()
    # recompute the single cell by hand
    s = sample_outcomes(NOON, (0.2,), 1, child_seed(5, 0, 0))
    post = bayes.posterior(NOON, s, cfg.grid)
    var = bayes.posterior_variance(post)
    assert a.rows[0].xi_mean == pytest.approx(var / barankin_bound(2.352084211178467, 1, 2), rel=1e-9)
    assert a.rows[0].estimate_mean == pytest.approx(bayes.bayes_estimate(post), abs=1e-15)


def test_sweep_thread_independence():
    cfg = ExperimentConfig(NOON, (0.2,), m_values=(5, 40), repetitions=12, seed=9)
    assert run_sweep(cfg, threads=1).to_csv() == run_sweep(cfg, threads=5).to_csv()


def test_sweep_csv_round_trip():
    cfg = ExperimentConfig(NOON, (0.2,), m_values=(7, 30), repetitions=6, betas=(2, 3), seed=1)
    res = run_sweep(cfg)
    text = res.to_csv()
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    rows = read_csv(text)
    assert len(rows) == 4
    for parsed, row in zip(rows, res.rows):
        for c in SWEEP_COLUMNS:
            assert parsed[c] == float(getattr(row, c))


def test_sweep_values_are_finite_and_consistent():
    cfg = ExperimentConfig(NOON, (0.2,), m_values=(20, 100), repetitions=30, seed=2)
    res = run_sweep(cfg)
    assert res.n_degenerate == 0
    for row in res.rows:
        assert math.isfinite(row.xi_mean) and row.xi_mean >= 0
        assert row.bound_floor == 1.0
        assert row.n_valid == 30
    assert res.row(20, 2).gaussian_limit == 1.0
    assert res.row(20, 3).gaussian_limit == pytest.approx(1.1108720502127343, rel=1e-12)


def test_bias_curve_flat_without_information():
    cfg = ExperimentConfig(NoonPhaseModel(0.0), (0.2,), m_values=(10, 100), repetitions=5, betas=(2,))
    for row in bias_curve(cfg):
        # flat posterior, mean at the grid midpoint (0 on [-pi/2, pi/2])
        assert row.estimate_mean == pytest.approx(0.0, abs=1e-12)


def test_bias_curve_large_m():
    cfg = ExperimentConfig(NOON, (0.2,), m_values=(4500,), repetitions=50, betas=(2,), seed=3)
    (row,) = bias_curve(cfg)
    assert abs(row.estimate_mean - 0.2) < 0.005


# Holevo variance


def test_holevo_variance_basics():
    assert holevo_variance([0.7] * 10) == 0.0
    with pytest.raises(UnboundedHolevoError):
        holevo_variance([math.pi / 2, -math.pi / 2])
    with pytest.raises(DomainError):
        holevo_variance([])


def test_holevo_small_spread_matches_variance():
    rng = np.random.default_rng(0)
    sigma = 0.1
    draws = 1.3 + sigma * rng.standard_normal(100_000)
    assert holevo_variance(draws) == pytest.approx(sigma**2, rel=0.05)
    # exact for wrapped normal: exp(sigma^2) - 1
    assert holevo_variance(draws) == pytest.approx(math.expm1(sigma**2), rel=0.02)


def test_holevo_invariant_to_rotation():
    rng = np.random.default_rng(1)
    x = rng.normal(0, 0.3, 1000)
    assert holevo_variance(x) == pytest.approx(holevo_variance(x + 2.0), rel=1e-10)


# PGH


def test_pgh_zero_shots():
    res = pgh_run(FeedbackInterferometerModel(), 1.0, 0, seed=0)
    assert res.no_information
    assert math.isnan(res.estimate)
    assert res.steps == ()


def test_pgh_deterministic():
    a = pgh_run(FeedbackInterferometerModel(), 1.0, 30, seed=4)
    b = pgh_run(FeedbackInterferometerModel(), 1.0, 30, seed=4)
    assert a.steps == b.steps
    assert a.estimate == b.estimate
    c = pgh_run(FeedbackInterferometerModel(), 1.0, 30, seed=5)
    assert a.steps != c.steps


def test_pgh_trajectory_contents():
    grid = ParameterGrid(0, 2 * math.pi, 512)
    res = pgh_run(FeedbackInterferometerModel(), 2.0, 60, grid, seed=1)
    assert len(res.steps) == 60
    for step in res.steps:
        assert 0 <= step.feedback <= 2 * math.pi
        assert step.outcome in (0, 1)
        assert 0 <= step.resultant <= 1
    assert res.posterior.integrate(1.0) == pytest.approx(1.0, abs=1e-10)
    assert abs(math.remainder(res.estimate - 2.0, 2 * math.pi)) < 0.5


def test_pgh_curve_thread_independent():
    grid = ParameterGrid(0, 2 * math.pi, 256)
    a = pgh_holevo_curve(1.0, [5, 10], 6, grid, seed=2, threads=1)
    b = pgh_holevo_curve(1.0, [5, 10], 6, grid, seed=2, threads=3)
    assert a == b
