import math

import numpy as np
import pytest

from postest.information import (
    ZeroInformationError,
    barankin_bound,
    bound_report,
    crb,
    double_factorial,
    fisher_information,
    gaussian_abs_moment,
    gaussian_limit_xi,
    generalized_fisher,
    xi_beta,
)
from postest.statmodel import DomainError, NoonPhaseModel, TabulatedModel, TwoParamNoonModel

# Frozen by direct four-term summation of p |dp/p|^alpha with
# p = (1 + v cos(2 phi - k pi/2))/4, dp = -(v/2) sin(2 phi - k pi/2), phi=0.2, v=0.9.
F2 = 2.352084211178467
F_3_2 = 1.5846619914687594
F_4_3 = 1.4179652410609602
F_5_4 = 1.3473859787391809
LIMIT = {3: 1.1108720502127343, 4: 1.546009920779872, 5: 2.47951064138453}

NOON = NoonPhaseModel(0.9)


def brute_force_fa(phi, v, alpha):
    total = 0.0
    for k in range(4):
        c = 2 * phi - k * math.pi / 2
        p = (1 + v * math.cos(c)) / 4
        dp = -(v / 2) * math.sin(c)
        if p >= 1e-300:
            total += p * abs(dp / p) ** alpha
    return total


def test_golden_values_match_oracle():
    assert brute_force_fa(0.2, 0.9, 2) == pytest.approx(F2, rel=1e-14)
    assert brute_force_fa(0.2, 0.9, 1.5) == pytest.approx(F_3_2, rel=1e-14)
    assert brute_force_fa(0.2, 0.9, 4 / 3) == pytest.approx(F_4_3, rel=1e-14)
    assert brute_force_fa(0.2, 0.9, 5 / 4) == pytest.approx(F_5_4, rel=1e-14)


def test_fisher_values():
    assert fisher_information(NoonPhaseModel(0.0), [0.3]) == 0.0
    # phi = 0 and phi = pi/4 multiples put p = 0 on an outcome; see the guard test
    for phi in np.linspace(-1.5, 1.5, 14):
        assert fisher_information(NoonPhaseModel(1.0), [phi]) == pytest.approx(4.0, abs=1e-12)
    assert fisher_information(NOON, [0.2]) == pytest.approx(2.3523, abs=1e-3)
    assert fisher_information(NOON, [0.2]) == pytest.approx(F2, rel=1e-13)


def test_generalized_fisher():
    assert generalized_fisher(NOON, [0.2], alpha=1.5) == pytest.approx(F_3_2, rel=1e-13)
    assert generalized_fisher(NOON, [0.2], alpha=4 / 3) == pytest.approx(F_4_3, rel=1e-13)
    for a in (1.1, 1.5, 2, 3):
        assert generalized_fisher(NoonPhaseModel(0.0), [0.7], alpha=a) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        phi, v = rng.uniform(-2, 2), rng.uniform(0, 1)
        m = NoonPhaseModel(v)
        assert generalized_fisher(m, [phi], alpha=2) == fisher_information(m, [phi])
    with pytest.raises(DomainError):
        generalized_fisher(NOON, [0.2], alpha=1.0)


def test_zero_probability_outcomes_are_skipped():
    # v=1, phi=pi/2: outcome 0 has p = dp = 0 and is excluded, which drops the
    # limiting contribution 2 of that outcome; any nearby phi recovers 4.
    m = NoonPhaseModel(1.0)
    assert fisher_information(m, [math.pi / 2]) == pytest.approx(2.0, abs=1e-12)
    assert fisher_information(m, [math.pi / 2 + 1e-4]) == pytest.approx(4.0, abs=1e-6)
    assert np.isfinite(generalized_fisher(m, [0.0], alpha=1.5))


def test_two_param_fisher_index():
    m = TwoParamNoonModel()
    assert fisher_information(m, [0.2, 0.9], 0) == pytest.approx(F2, rel=1e-13)
    # d/dv: sum_k cos^2 / (4 p) -- direct sum
    direct = sum(
        (0.25 * math.cos(0.4 - k * math.pi / 2)) ** 2 / (0.25 * (1 + 0.9 * math.cos(0.4 - k * math.pi / 2)))
        for k in range(4)
    )
    assert fisher_information(m, [0.2, 0.9], 1) == pytest.approx(direct, rel=1e-12)


def test_barankin_bound():
    assert barankin_bound(4.0, 100, 2) == pytest.approx(0.0025, rel=1e-15)
    assert barankin_bound(2.3523, 450, 2) == pytest.approx(9.446e-4, rel=1e-3)
    b1, b4 = barankin_bound(F2, 50, 2), barankin_bound(F2, 200, 2)
    assert b1 / b4 == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(ZeroInformationError):
        barankin_bound(0.0, 10, 2)
    with pytest.raises(DomainError):
        barankin_bound(1.0, 10, 1.0)


def test_barankin_reduces_to_crb_on_random_models():
    rng = np.random.default_rng(5)
    for _ in range(100):
        table = rng.random((9, rng.integers(2, 6))) + 0.05
        t = TabulatedModel(np.linspace(0, 1, 9), table)
        lam = rng.uniform(0.05, 0.95)
        f = fisher_information(t, [lam])
        M = int(rng.integers(1, 1000))
        assert abs(barankin_bound(f, M, 2) - 1 / (M * f)) <= 1e-12 * (1 / (M * f))


def test_xi_beta():
    for beta in (2, 3, 4.5):
        fa = 1.7
        bound = barankin_bound(fa, 37, beta)
        assert xi_beta(bound, 37, fa, beta) == pytest.approx(1.0, rel=1e-14)
    assert xi_beta(2 * crb(F2, 100), 100, F2, 2) == pytest.approx(2.0, rel=1e-14)


def test_double_factorial():
    assert [double_factorial(n) for n in range(0, 8)] == [1, 1, 2, 3, 8, 15, 48, 105]


def test_gaussian_abs_moment():
    assert gaussian_abs_moment(1.0, 2) == 1.0
    assert gaussian_abs_moment(1.0, 3) == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-15)
    assert gaussian_abs_moment(1.0, 3) == pytest.approx(1.595769, abs=1e-6)
    assert gaussian_abs_moment(1.0, 4) == 3.0
    assert gaussian_abs_moment(4.0, 4) == 48.0
    with pytest.raises(DomainError):
        gaussian_abs_moment(1.0, 1)
    with pytest.raises(DomainError):
        gaussian_abs_moment(1.0, 2.5)


def test_gaussian_abs_moment_against_quadrature():
    from scipy import integrate

    for beta in (2, 3, 4, 5):
        s = 0.7
        val, _ = integrate.quad(
            lambda x: abs(x) ** beta * math.exp(-x * x / (2 * s * s)) / (s * math.sqrt(2 * math.pi)),
            -np.inf, np.inf,
        )
        assert gaussian_abs_moment(s * s, beta) == pytest.approx(val, rel=1e-9)


def test_gaussian_limit_xi():
    assert gaussian_limit_xi(2.0, 2.0, 2) == 1.0
    assert gaussian_limit_xi(F2, F2, 2) == pytest.approx(1.0, rel=1e-15)
    for beta, fa in ((3, F_3_2), (4, F_4_3), (5, F_5_4)):
        g = gaussian_limit_xi(F2, fa, beta)
        assert g == pytest.approx(LIMIT[beta], rel=1e-13)
        assert g > 1


def test_gaussian_limit_floor_sweep():
    # holds for visibilities up to ~0.955; see the counterexample below
    rng = np.random.default_rng(11)
    for _ in range(100):
        phi, v = rng.uniform(0, math.pi), rng.uniform(0.05, 0.95)
        m = NoonPhaseModel(v)
        f2 = fisher_information(m, [phi])
        if f2 < 1e-8:
            continue
        for beta in (2, 3, 4, 5):
            fa = generalized_fisher(m, [phi], alpha=beta / (beta - 1))
            g = gaussian_limit_xi(f2, fa, beta)
            if beta == 2:
                assert g == pytest.approx(1.0, rel=1e-12)
            else:
                assert g > 1


def test_gaussian_limit_below_one_near_unit_visibility():
    m = NoonPhaseModel(1.0)
    phi = math.pi / 32
    f2 = fisher_information(m, [phi])
    assert gaussian_limit_xi(f2, generalized_fisher(m, [phi], alpha=1.5), 3) < 1


@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_information_monotone_in_visibility(alpha):
    vs = np.linspace(0.01, 0.99, 50)
    vals = [generalized_fisher(NoonPhaseModel(v), [0.2], alpha=alpha) for v in vs]
    assert np.all(np.diff(vals) > 0)


def test_bound_report():
    r = bound_report(NOON, [0.2], 450, 3, sigma_beta=1e-4)
    assert 1 / r.alpha + 1 / r.beta == pytest.approx(1.0, abs=1e-12)
    assert r.fisher == pytest.approx(F2, rel=1e-13)
    assert r.generalized_fisher == pytest.approx(F_3_2, rel=1e-13)
    assert r.gaussian_limit == pytest.approx(LIMIT[3], rel=1e-13)
    assert r.xi_beta == pytest.approx(1e-4 / r.barankin_bound, rel=1e-13)
    r2 = bound_report(NOON, [0.2], 450, 2)
    assert r2.barankin_bound == pytest.approx(r2.crb, abs=1e-12)
    assert r2.xi_beta is None
    r_frac = bound_report(NOON, [0.2], 10, 2.5)
    assert r_frac.gaussian_limit is None
