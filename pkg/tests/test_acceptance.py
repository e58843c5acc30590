"""Acceptance suite: one or more PASS/FAIL lines per criterion.

Heavy Monte Carlo runs are cached per session so later criteria reuse them.
Run with ``pytest tests/test_acceptance.py -v``; the verdicts are repeated in
the terminal summary.
"""

import time
from functools import lru_cache

import numpy as np
import pytest
from scipy import integrate

from emfexposure import NetworkParams, ObserverKind, UserModel, validate, with_density_ratio
from emfexposure.coverage import CoverageQuery, coverage_probability, eta_sweep_coverage
from emfexposure.ei_distribution import ei_cdf
from emfexposure.exposure_laplace import (lt_ei_active, lt_ei_passive, lt_wb_active, lt_wb_passive, lt_wu_mcp,
                                          lt_wu_passive_ppp)
from emfexposure.exposure_moments import mean_ei
from emfexposure.gil_pelaez import CfHandle, cdf
from emfexposure.monte_carlo import coverage_mc, run
from emfexposure.point_process import (conditional_cluster_distance_pdf, contact_distance_pdf,
                                       interferer_link_distance_pdf)
from emfexposure.power_control import tx_power_pdf

P = validate(NetworkParams())
CELLS = [(m, o) for m in UserModel for o in ObserverKind]
RATIOS = (1e2, 1e4)
MC_TRIALS = 10_000
ETAS = (0.2, 0.4, 0.6, 0.8, 1.0)


def cell_id(c):
    return f"{c[0].value}-{c[1].value}"


@lru_cache(maxsize=None)
def mc_means(model, observer, ratio):
    Q = validate(with_density_ratio(P, model, ratio), model)
    t0 = time.perf_counter()
    res = run(Q, model, observer, MC_TRIALS, master_seed=2024)
    return Q, res.means, time.perf_counter() - t0


# --- 1 ------------------------------------------------------------------------------------


SYNTHETIC = {
    "exponential": (lambda t: 1 / (1 - 1j * t), lambda w: 1 - np.exp(-w), np.linspace(0.05, 6.0, 50)),
    "erlang2": (lambda t: 1 / (1 - 1j * t) ** 2, lambda w: 1 - np.exp(-w) * (1 + w), np.linspace(0.05, 6.0, 50)),
    # the grid stays off the jump at 1.5
    "point_mass_mixture": (lambda t: 0.4 * np.exp(1.5j * t) + 0.6 / (1 - 1j * t),
                           lambda w: 0.4 * (w >= 1.5) + 0.6 * (1 - np.exp(-w)),
                           np.concatenate([np.linspace(0.05, 1.4, 25), np.linspace(1.6, 6.0, 25)])),
}


@pytest.mark.parametrize("name", sorted(SYNTHETIC))
def test_c1_gil_pelaez_synthetic(name, verdict):
    phi, F, w = SYNTHETIC[name]
    t0 = time.perf_counter()
    got = cdf(CfHandle(phi), w)
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(got - F(w))))
    ok = verdict(1, name, err <= 1e-5 and elapsed < 1.0 and w.size == 50,
                 f"max err {err:.2e} (<= 1e-5), {elapsed:.2f} s (< 1 s)")
    assert ok


# --- 2 ------------------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("ratio", RATIOS)
@pytest.mark.parametrize("cell", CELLS, ids=cell_id)
def test_c2_means_against_mc(cell, ratio, verdict):
    model, observer = cell
    Q, m, elapsed = mc_means(model, observer, ratio)
    an = mean_ei(Q, model, observer).total
    tol = 0.05 if (observer is ObserverKind.ACTIVE and model is not UserModel.PPP) else 0.03
    rel = m.total / an - 1
    ok = verdict(2, f"{cell_id(cell)} ratio {ratio:g}", abs(rel) <= tol and elapsed < 300,
                 f"analytic {an:.5g} mc {m.total:.5g} +- {m.ci['ei_total']:.2g} rel {rel:+.4f} "
                 f"(tol {tol}), {elapsed:.0f} s (< 300 s)")
    assert ok


# --- 3 ------------------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("observer", list(ObserverKind))
def test_c3_cdf_against_mc(observer, verdict):
    res = run(P, "ppp", observer, MC_TRIALS, master_seed=31, sampling="thinned")
    emp = res.distributions["ei_total"]
    w = emp.quantile(np.linspace(0.025, 0.975, 20))
    an = ei_cdf(w, P, "ppp", observer)
    sup = float(np.max(np.abs(an - emp.cdf(w))))
    ok = verdict(3, f"ppp {observer.value}", sup <= 0.03, f"sup-norm {sup:.4f} (<= 0.03)")
    assert ok


# --- 4 ------------------------------------------------------------------------------------


def _first_crossing(ratios, a, b):
    """Ratio of the unique sign change of a - b, or None."""
    above = a > b
    flips = np.flatnonzero(np.diff(above.astype(int)) != 0)
    if len(flips) != 1:
        return None
    return float(f"{ratios[flips[0] + 1]:.3g}")


def test_c4_crossovers(verdict):
    Q = P.replace(eta=0.4)
    ratios = np.logspace(0, 8, 161)
    rep = [mean_ei(validate(with_density_ratio(Q, "ppp", r)), "ppp", "active") for r in ratios]
    ul_u = np.array([r.ei_ul_u for r in rep])
    bs = np.array([r.ei_bs for r in rep])
    tr = np.array([r.ei_ul_tr for r in rep])
    shape_ok = bool(np.all(np.diff(ul_u) > 0) and np.ptp(bs) == 0 and np.ptp(tr) == 0)
    x_bs = _first_crossing(ratios, ul_u, bs)
    x_tr = _first_crossing(ratios, ul_u, tr)
    ok_bs = verdict(4, "ul_u vs bs", shape_ok and x_bs is not None and 1e1 <= x_bs <= 1e4,
                    f"crossing at ratio {x_bs} (window 1e1..1e4)")
    ok_tr = verdict(4, "ul_u vs ul_tr", shape_ok and x_tr is not None and 1e4 <= x_tr <= 1e7,
                    f"crossing at ratio {x_tr} (window 1e4..1e7)")
    assert ok_bs and ok_tr


# --- 5 ------------------------------------------------------------------------------------


def test_c5_ten_percent(verdict):
    Q = P.replace(eta=0.4)
    grid = np.logspace(0, 2, 41)
    passive = [mean_ei(validate(with_density_ratio(Q, "ppp", r))).percent_ul_u for r in grid]
    ok_p = verdict(5, "passive", max(passive) > 0.10,
                   f"max percent_ul_u for ratio <= 1e2 is {max(passive):.3f} (> 0.10)")
    window = np.logspace(3, 5, 41)
    active = [mean_ei(validate(with_density_ratio(Q, "ppp", r)), "ppp", "active").percent_ul_u for r in window]
    ok_a = verdict(5, "active", max(active) > 0.10,
                   f"max percent_ul_u for ratio in 1e3..1e5 is {max(active):.4f} (> 0.10)")
    assert ok_p and ok_a


# --- 6 ------------------------------------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("model", ["ppp", "mcp2"])
def test_c6_coverage_against_mc(model, verdict):
    Q = validate(P, model)
    an = np.array([c for _, c in eta_sweep_coverage(Q, model, ETAS).points])
    est = coverage_mc(Q, model, ETAS, MC_TRIALS, master_seed=6)
    gap = float(np.max(np.abs(an - est.coverage)))
    ok = verdict(6, f"{model} analytic vs mc", gap <= 0.03,
                 f"analytic {np.round(an, 4).tolist()} mc {np.round(est.coverage, 4).tolist()} "
                 f"max gap {gap:.4f} (<= 0.03)")
    assert ok


@pytest.mark.parametrize("model", ["ppp", "mcp2"])
def test_c6_interior_argmax(model, verdict):
    sw = eta_sweep_coverage(validate(P, model), model, (0.1, *ETAS))
    ok = verdict(6, f"{model} interior argmax", sw.interior_argmax,
                 f"coverage {[(e, round(c, 5)) for e, c in sw.points]} argmax eta {sw.argmax}")
    assert ok


@pytest.mark.parametrize("model", list(UserModel))
def test_c6_independent_of_user_density(model, verdict):
    a = coverage_probability(CoverageQuery(P.gamma, model, validate(with_density_ratio(P, model, 10.0), model)))
    b = coverage_probability(CoverageQuery(P.gamma, model, validate(with_density_ratio(P, model, 1e4), model)))
    ok = verdict(6, f"{model.value} density invariance", abs(a - b) <= 1e-12,
                 f"ratio 10: {a:.10g}, ratio 1e4: {b:.10g}")
    assert ok


# --- 7 ------------------------------------------------------------------------------------


def _transforms():
    Qs = {m: validate(P, m) for m in UserModel}
    return {
        "W_b": (lambda s: lt_wb_passive(s, P), 1e4),
        "W_u ppp": (lambda s: lt_wu_passive_ppp(s, P), 1e5),
        "W_b active": (lambda s: lt_wb_active(s, 300.0, P), 1e4),
        "W_u mcp1": (lambda s: lt_wu_mcp(s, Qs[UserModel.MCP1], 1), 1e5),
        "W_u mcp2": (lambda s: lt_wu_mcp(s, Qs[UserModel.MCP2], 2), 1e6),
        "W_u mcp1 active": (lambda s: lt_wu_mcp(s, Qs[UserModel.MCP1], 1, "active"), 1e5),
        "W_u mcp2 active": (lambda s: lt_wu_mcp(s, Qs[UserModel.MCP2], 2, "active"), 1e6),
        "EI_p ppp": (lambda s: lt_ei_passive(s, P), 1e6),
        "EI_p mcp1": (lambda s: lt_ei_passive(s, Qs[UserModel.MCP1], "mcp1"), 1e6),
        "EI_p mcp2": (lambda s: lt_ei_passive(s, Qs[UserModel.MCP2], "mcp2"), 1e5),
        "EI_a ppp": (lambda s: lt_ei_active(s, 300.0, P), 1e3),
        "EI_a mcp2": (lambda s: lt_ei_active(s, 30.0, Qs[UserModel.MCP2], "mcp2"), 1e3),
    }


def test_c7_laplace_invariants(verdict):
    rng = np.random.default_rng(7)
    bad = []
    for name, (L, scale) in _transforms().items():
        s = np.geomspace(1e-3, 1e3, 41) * scale
        v = np.asarray(L(s))
        z = scale * np.exp(rng.uniform(-7, 7, 25)) * np.exp(1j * rng.uniform(-1.5, 1.5, 25))
        a, b = np.asarray(L(z)), np.asarray(L(np.conj(z)))
        ok = (abs(complex(L(0.0)) - 1) <= 1e-14 and np.all(np.abs(v.imag) < 1e-12)
              and np.all((v.real > 0) & (v.real <= 1)) and np.all(np.diff(v.real) <= 1e-15)
              and np.allclose(b, np.conj(a), rtol=1e-10, atol=1e-300))
        if not ok:
            bad.append(name)
    ok = verdict(7, "laplace transforms", not bad,
                 f"{len(_transforms())} transforms: L(0)=1, decay on the real axis, conjugate symmetry"
                 + (f"; failing {bad}" if bad else ""))
    assert ok


def test_c7_pdf_normalisation(verdict):
    lam, rc = P.lambda_b, P.r_c
    checks = {
        "contact": integrate.quad(contact_distance_pdf, 0, np.inf, args=(lam,), epsabs=1e-13, epsrel=1e-12)[0],
        "interferer link": integrate.quad(interferer_link_distance_pdf, 0, 700.0, args=(700.0, lam),
                                          epsabs=1e-13, epsrel=1e-12)[0],
    }
    for r1 in (0.0, 40.0, 150.0):
        lo, hi = max(0.0, r1 - rc), r1 + rc
        checks[f"cluster r1={r1:g}"] = integrate.quad(conditional_cluster_distance_pdf, lo, hi, args=(r1, rc),
                                                      points=[abs(rc - r1)] if r1 else None,
                                                      epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    d = tx_power_pdf(P)
    checks["tx power"] = integrate.quad(d.continuous_density, 0, P.p_max, epsabs=1e-13, epsrel=1e-12,
                                        limit=200)[0] + d.atom_at_pmax
    worst = max(abs(v - 1) for v in checks.values())
    ok = verdict(7, "pdf normalisation", worst <= 1e-8, f"worst |integral - 1| = {worst:.1e} over {sorted(checks)}")
    assert ok


def test_c7_cdf_outputs(verdict):
    bad = []
    for model in UserModel:
        Q = validate(P, model)
        mu = mean_ei(Q, model).total
        F = ei_cdf(mu * np.geomspace(1e-3, 30, 20), Q, model)
        if not (np.all((F >= 0) & (F <= 1)) and np.all(np.diff(F) >= 0)):
            bad.append(model.value)
    F = ei_cdf(np.geomspace(1e-5, 1.2e-3, 12), P, "ppp", "active")
    if not (np.all((F >= 0) & (F <= 1)) and np.all(np.diff(F) >= 0)):
        bad.append("ppp active")
    ok = verdict(7, "cdf outputs", not bad, "in [0, 1] and nondecreasing" + (f"; failing {bad}" if bad else ""))
    assert ok


def test_c7_determinism(verdict):
    a = run(P, "mcp1", "active", 9, master_seed=99, workers=1, sampling="thinned")
    b = run(P, "mcp1", "active", 9, master_seed=99, workers=3, sampling="thinned")
    c = run(P, "mcp1", "active", 9, master_seed=99, workers=1, sampling="thinned")
    ok = verdict(7, "determinism", np.array_equal(a.faded, b.faded) and np.array_equal(a.faded, c.faded)
                 and np.array_equal(a.conditional, b.conditional), "fixed seed, 1 vs 3 workers, bit-identical")
    assert ok


# --- 8 ------------------------------------------------------------------------------------


@pytest.mark.slow
def test_c8_scenario_ordering(verdict):
    Q1, m1, _ = mc_means(UserModel.MCP1, ObserverKind.PASSIVE, 1e2)
    Q2, m2, _ = mc_means(UserModel.MCP2, ObserverKind.PASSIVE, 1e2)
    a1, a2 = mean_ei(Q1, "mcp1").total, mean_ei(Q2, "mcp2").total
    ok_a = verdict(8, "analytic", a2 > a1, f"scenario 2 {a2:.4g} > scenario 1 {a1:.4g}")
    ok_m = verdict(8, "monte carlo", m2.total > m1.total, f"scenario 2 {m2.total:.4g} > scenario 1 {m1.total:.4g}")
    assert ok_a and ok_m
