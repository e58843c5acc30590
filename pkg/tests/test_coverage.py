import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from emfexposure import NetworkParams, UserModel, normalized_noise, validate, with_density_ratio
from emfexposure.coverage import CoverageQuery, coverage_probability, eta_sweep_coverage, lt_interference_noise
from emfexposure.monte_carlo import coverage_mc, pick_interferers, realize, trial_rng

P = validate(NetworkParams())
MODELS = list(UserModel)

# analytic coverage at gamma = 1e-3, 1e-1, 100, frozen
FROZEN = {
    "ppp": (0.59086, 0.030392, 9.8655e-05),
    "mcp1": (0.59086, 0.030392, 9.8655e-05),
    "mcp2": (0.99554, 0.67690, 0.0031320),
}


def cov(gamma, model, params=P):
    return coverage_probability(CoverageQuery(gamma, model, validate(params, model)))


@pytest.mark.parametrize("model", MODELS)
def test_frozen_values(model):
    got = [cov(g, model) for g in (1e-3, 1e-1, 100.0)]
    assert got == pytest.approx(FROZEN[model.value], rel=1e-4)


@pytest.mark.parametrize("model", MODELS)
def test_limits_in_gamma(model):
    assert cov(1e-6, model) > 0.99
    assert cov(1e6, model) < 1e-5


@pytest.mark.parametrize("model", MODELS)
def test_nonincreasing_in_gamma(model):
    c = np.array([cov(g, model) for g in np.geomspace(1e-6, 1e6, 25)])
    assert np.all((c >= 0) & (c <= 1))
    assert np.all(np.diff(c) <= 1e-15)


def test_query_rejects_nonpositive_gamma():
    for g in (0.0, -1.0, math.nan):
        with pytest.raises(ValueError):
            CoverageQuery(g, "ppp", P)


@pytest.mark.parametrize("model", MODELS)
def test_lt_in_unit_interval_and_nonincreasing(model):
    Q = validate(P, model)
    s = np.concatenate([[0.0], np.geomspace(1e2, 1e9, 40)])
    v = lt_interference_noise(s, Q, model)
    assert v[0] == 1.0
    assert np.all((v > 0) & (v <= 1))
    assert np.all(np.diff(v) <= 1e-15)
    with pytest.raises(ValueError):
        lt_interference_noise(-1.0, Q, model)


@pytest.mark.parametrize("model", MODELS)
def test_no_interferers_leaves_noise(model):
    Q = validate(P.replace(lambda_b=1e-300, lambda_c=1e-300), model)
    s = np.geomspace(1e2, 1e10, 9)
    assert np.allclose(lt_interference_noise(s, Q, model), np.exp(-s * normalized_noise(Q)), rtol=1e-12, atol=0)


def test_ppp_and_mcp1_share_the_interferer_law():
    for g in np.geomspace(1e-4, 1e3, 8):
        assert cov(g, "ppp") == pytest.approx(cov(g, "mcp1"), rel=1e-12)


@pytest.mark.parametrize("model", MODELS)
@given(ratio=st.floats(1e-2, 1e6))
def test_independent_of_user_density(model, ratio):
    a = cov(0.1, model, with_density_ratio(P, model, ratio))
    assert a == pytest.approx(cov(0.1, model), rel=1e-12)


def test_single_point_grid():
    sw = eta_sweep_coverage(P, "ppp", [0.5])
    assert sw.argmax == 0.5 and not sw.interior_argmax
    with pytest.raises(ValueError):
        eta_sweep_coverage(P, "ppp", [])
    with pytest.raises(ValueError):
        eta_sweep_coverage(P, "ppp", [0.4, 0.2])


def test_sweep_is_bit_exact():
    assert eta_sweep_coverage(P, "mcp2").points == eta_sweep_coverage(P, "mcp2").points


# --- Monte Carlo oracles ----------------------------------------------------------------


def empirical_lt(s, model, n, seed):
    """E[exp(-s (I + sigma^2))] at the tagged BS, fading averaged out."""
    Q = validate(P, model)
    acc = np.zeros_like(s)
    for i in range(n):
        rng = trial_rng(seed, i)
        real = realize(Q, model, "active", rng, sampling="plain", window_radius=5000.0)
        tagged = real.bs.points[real.observer_serving_idx]
        idx = pick_interferers(real, rng)
        g = real.tx_power[idx] * np.hypot(*(real.user_xy[idx] - tagged).T) ** (-Q.alpha)
        acc += np.exp(-np.sum(np.log1p(s[:, None] * g), axis=1))
    return acc / n * np.exp(-s * normalized_noise(Q))


@pytest.mark.slow
@pytest.mark.parametrize("model", MODELS)
def test_lt_against_mc(model):
    Q = validate(P, model)
    levels = (0.9, 0.7, 0.5)
    s = np.array([math.exp(optimize.brentq(lambda ls: lt_interference_noise(math.exp(ls), Q, model) - lv, 0, 40))
                  for lv in levels])
    mc = empirical_lt(s, model, 3000, 17)
    rel = np.abs(mc / lt_interference_noise(s, Q, model) - 1)
    print(model.value, "rel:", np.round(rel, 4))
    assert np.all(rel <= 0.02)


@pytest.mark.slow
@pytest.mark.parametrize("model", MODELS)
def test_coverage_against_mc(model):
    Q = validate(P, model)
    etas = (0.2, 0.4, 0.6, 0.8, 1.0)
    an = np.array([c for _, c in eta_sweep_coverage(Q, model, etas).points])
    est = coverage_mc(Q, model, etas, 10_000, master_seed=3)
    print(model.value, "analytic", np.round(an, 4), "mc", np.round(est.coverage, 4))
    assert np.all(np.abs(an - est.coverage) <= 0.03)
