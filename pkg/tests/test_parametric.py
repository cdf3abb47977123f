import math

import numpy as np
import pytest
from scipy import stats

from gpucopula._rng import make_rng
from gpucopula.evaluation import kendall_tau
from gpucopula.parametric import (
    CopulaFamily,
    ParametricCopula,
    cdf,
    fit_mle,
    logdensity,
    loglik,
    param_to_tau,
    sample,
    tau_to_param,
)

from conftest import clustered_nodes

FAMILIES = [f.value for f in CopulaFamily]


def test_family_parse_and_label():
    assert CopulaFamily.parse("Gumbel") is CopulaFamily.GUMBEL
    with pytest.raises(ValueError):
        CopulaFamily.parse("student")
    assert ParametricCopula("gumbel", 2.5, rotated=True).label == "RotGumbel(2.5)"


@pytest.mark.parametrize(
    "family,param",
    [("clayton", 0.0), ("clayton", -1.0), ("gumbel", 0.9), ("joe", 0.5), ("frank", 0.0),
     ("gaussian", 1.0), ("gaussian", -1.2), ("clayton", math.inf)],
)
def test_invalid_parameters(family, param):
    with pytest.raises(ValueError):
        ParametricCopula(family, param)


# ---------------------------------------------------------------- tau conversions

def test_tau_to_param_examples():
    assert tau_to_param("clayton", 0.5) == pytest.approx(2.0, rel=1e-15)
    assert tau_to_param("gumbel", 0.6) == pytest.approx(2.5, rel=1e-15)
    p = tau_to_param("frank", 0.6)
    assert abs(param_to_tau("frank", p) - 0.6) < 1e-8


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("tau", [0.05, 0.3, 0.6, 0.9])
def test_tau_round_trip_analytic(family, tau):
    p = tau_to_param(family, tau)
    assert abs(param_to_tau(family, p) - tau) < 1e-10


def test_joe_tau_near_two_is_continuous():
    assert param_to_tau("joe", 2.0) == pytest.approx(param_to_tau("joe", 2.0 + 1e-6), abs=1e-6)
    assert param_to_tau("joe", 2.0) == pytest.approx(1 - (math.pi**2 / 6 - 1), abs=1e-14)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.3, 1.2])
def test_tau_out_of_range(tau):
    with pytest.raises(ValueError):
        tau_to_param("gumbel", tau)


def test_frank_negative_tau():
    assert param_to_tau("frank", -5.0) == pytest.approx(-param_to_tau("frank", 5.0), abs=1e-12)


# ---------------------------------------------------------------- sampling

@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("tau", [0.3, 0.6])
def test_empirical_tau_recovery(family, tau):
    r = make_rng(7, FAMILIES.index(family), int(round(tau * 10)))
    x = sample(ParametricCopula(family, tau_to_param(family, tau)), 100_000, r)
    assert abs(kendall_tau(x) - tau) < 0.01


def test_sampler_examples():
    r = make_rng(8)
    assert abs(kendall_tau(sample(ParametricCopula("clayton", 2.0), 100_000, r)) - 0.5) < 0.01
    assert abs(kendall_tau(sample(ParametricCopula("gaussian", 0.0), 10_000, r))) < 0.02
    assert abs(kendall_tau(sample(ParametricCopula("gumbel", 2.5), 100_000, r)) - 0.6) < 0.01


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("rotated", [False, True])
def test_margins_uniform(family, rotated):
    r = make_rng(31, FAMILIES.index(family), int(rotated))
    x = sample(ParametricCopula(family, tau_to_param(family, 0.6), rotated), 10_000, r)
    crit = stats.kstwo(10_000).ppf(0.99)
    assert np.all((x > 0) & (x < 1))
    for c in range(2):
        assert stats.kstest(x[:, c], "uniform").statistic < crit


def test_rotation_reflects_samples():
    for family in FAMILIES:
        base = sample(ParametricCopula(family, tau_to_param(family, 0.6)), 2000, make_rng(2))
        rot = sample(ParametricCopula(family, tau_to_param(family, 0.6), rotated=True), 2000, make_rng(2))
        inner = (base > 1e-15) & (base < 1 - 1e-15)
        np.testing.assert_array_equal(rot[inner], (1.0 - base)[inner])


def test_rotation_flips_tail():
    r = make_rng(2)
    x = sample(ParametricCopula("gumbel", 3.0), 100_000, r)
    y = sample(ParametricCopula("gumbel", 3.0, rotated=True), 100_000, r)
    up = lambda d: np.mean((d[:, 0] > 0.99) & (d[:, 1] > 0.99))
    low = lambda d: np.mean((d[:, 0] < 0.01) & (d[:, 1] < 0.01))
    # lambda_U = 2 - 2**(1/3) ~ 0.74 while the lower tail coefficient is zero
    assert up(x) > 2 * low(x)
    assert low(y) > 2 * up(y)


def test_sample_matches_cdf():
    r = make_rng(3)
    for family in FAMILIES:
        cop = ParametricCopula(family, tau_to_param(family, 0.45))
        x = sample(cop, 40_000, r)
        for a, b in [(0.2, 0.3), (0.5, 0.5), (0.8, 0.6)]:
            emp = np.mean((x[:, 0] <= a) & (x[:, 1] <= b))
            want = float(cdf(cop, a, b))
            assert abs(emp - want) < 4 * math.sqrt(want * (1 - want) / len(x)), family


def test_extreme_parameters_stay_interior():
    r = make_rng(4)
    for family, p in [("clayton", 150.0), ("gumbel", 80.0), ("joe", 100.0), ("frank", 300.0), ("gaussian", 0.9999)]:
        x = sample(ParametricCopula(family, p), 5000, r)
        assert np.all((x > 0) & (x < 1))
        # underflow in the frailty would pile mass onto the boundary
        crit = stats.kstwo(5000).ppf(0.99)
        for c in range(2):
            assert stats.kstest(x[:, c], "uniform").statistic < crit, family
        assert np.all(np.isfinite(logdensity(ParametricCopula(family, p), x[:, 0], x[:, 1])))


# ---------------------------------------------------------------- densities

def test_gaussian_independence_density_is_zero():
    g = np.linspace(0.01, 0.99, 9)
    np.testing.assert_array_equal(logdensity(ParametricCopula("gaussian", 0.0), g, g[::-1]), 0.0)


def test_frank_radial_symmetry():
    cop = ParametricCopula("frank", 7.3)
    g = np.arange(1, 64) / 64.0
    uu, vv = np.meshgrid(g, g)
    a = logdensity(cop, uu, vv)
    b = logdensity(cop, 1.0 - uu, 1.0 - vv)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("family", FAMILIES)
def test_density_is_mixed_partial_of_cdf(family):
    cop = ParametricCopula(family, tau_to_param(family, 0.5))
    h = 1e-4
    for u, v in [(0.5, 0.5), (0.2, 0.7), (0.9, 0.85)]:
        fd = (cdf(cop, u + h, v + h) - cdf(cop, u + h, v - h) - cdf(cop, u - h, v + h) + cdf(cop, u - h, v - h)) / (4 * h * h)
        tol = 1e-6 if family != "gaussian" else 1e-4  # the Gaussian cdf is itself numerical
        assert abs(math.exp(logdensity(cop, u, v)) - fd) < tol * max(1.0, fd)


def test_clayton_finite_difference_example():
    cop = ParametricCopula("clayton", 2.0)
    h = 1e-4
    C = lambda a, b: float(cdf(cop, a, b))
    fd = (C(0.5 + h, 0.5 + h) - C(0.5 + h, 0.5 - h) - C(0.5 - h, 0.5 + h) + C(0.5 - h, 0.5 - h)) / (4 * h * h)
    assert abs(math.exp(logdensity(cop, 0.5, 0.5)) - fd) < 1e-6


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("tau", [0.3, 0.6])
def test_density_normalises(family, tau):
    u, w = clustered_nodes(400)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    for rotated in (False, True):
        cop = ParametricCopula(family, tau_to_param(family, tau), rotated)
        total = np.sum(np.exp(logdensity(cop, uu, vv)) * np.outer(w, w))
        assert abs(total - 1.0) < 1e-4


def test_rotated_density_and_cdf():
    cop = ParametricCopula("joe", 2.2, rotated=True)
    base = ParametricCopula("joe", 2.2)
    assert logdensity(cop, 0.1, 0.3) == pytest.approx(logdensity(base, 0.9, 0.7), abs=1e-14)
    assert float(cdf(cop, 0.3, 0.6)) == pytest.approx(0.3 + 0.6 - 1 + float(cdf(base, 0.7, 0.4)), abs=1e-14)


@pytest.mark.parametrize("bad", [0.0, 1.0, np.nan])
def test_density_rejects_boundary(bad):
    with pytest.raises(ValueError):
        logdensity(ParametricCopula("clayton", 2.0), bad, 0.5)


# ---------------------------------------------------------------- MLE

def test_mle_recovers_clayton():
    x = sample(ParametricCopula("clayton", 3.0), 5000, make_rng(10))
    fit = fit_mle("clayton", x)
    assert abs(fit.param - 3.0) < 0.3


def test_mle_gaussian_on_independent_data():
    x = make_rng(11).uniform(size=(3000, 2))
    assert abs(fit_mle("gaussian", x).param) < 0.05


@pytest.mark.parametrize("family", FAMILIES)
def test_mle_beats_tau_inversion_seed(family):
    x = sample(ParametricCopula("gumbel", 1.8), 2000, make_rng(12))
    fit = fit_mle(family, x)
    seed = ParametricCopula(family, tau_to_param(family, kendall_tau(x)))
    assert loglik(fit, x) >= loglik(seed, x) - 1e-9


def test_mle_rotated_and_negative_frank():
    r = make_rng(13)
    x = sample(ParametricCopula("gumbel", 2.0, rotated=True), 3000, r)
    fit = fit_mle("gumbel", x, rotated=True)
    assert fit.rotated and abs(fit.param - 2.0) < 0.15
    y = sample(ParametricCopula("frank", -4.0), 3000, r)
    assert abs(fit_mle("frank", y).param + 4.0) < 0.5


def test_mle_input_checks():
    with pytest.raises(ValueError):
        fit_mle("clayton", make_rng(0).uniform(size=(5, 2)))
    x = make_rng(0).uniform(size=(20, 2))
    x[0, 0] = 1.0
    with pytest.raises(ValueError):
        fit_mle("clayton", x)
