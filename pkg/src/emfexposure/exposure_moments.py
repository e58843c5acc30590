"""Mean exposure and its split into components.

Every r^-beta and r^(2-beta) integral starts at d_min, so the familiar
1/(2(beta-2)) factors appear as d_min^(2-beta)/(2(beta-2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .core_types import NetworkParams, ObserverKind, UserModel, cutoff_radius
from .exposure_laplace import INTRA_VARIANTS, serving_distance_rule
from .power_control import mean_tx_power_cluster, mean_tx_power_ppp, tx_power

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class MeanReport:
    """Mean EI components in W/kg.  ``ci`` optionally holds 95% half-widths."""

    ei_bs: float
    ei_ul_u: float
    ei_ul_tr: float = 0.0
    total: float = field(init=False)
    ci: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "total", self.ei_bs + self.ei_ul_u + self.ei_ul_tr)

    @property
    def percent_ul_u(self):
        return self.ei_ul_u / self.total if self.total > 0 else 0.0


def component_percentages(report: MeanReport) -> dict:
    """Each component as a fraction of the total."""
    if not report.total > 0:
        raise ZeroDivisionError("percentages undefined for a zero total")
    return {k: getattr(report, k) / report.total for k in ("ei_bs", "ei_ul_u", "ei_ul_tr")}


def _plane_factor(params):
    """int_{d_min}^inf 2 pi z^(1-beta) dz / (4 pi)."""
    return params.d_min ** (2 - params.beta) / (2 * (params.beta - 2))


def _ell(r, params):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(r >= params.d_min, np.maximum(r, params.d_min) ** (-params.beta), 0.0)


def literal_intra_count(m):
    """Printed count of other active users in an active user's cluster."""
    if m == 0:
        return 0.0
    e = math.exp(-m + 1.0 / m)
    return e / m - e + math.exp(-m)


def _lens_area(s, r_c):
    s = min(s, 2 * r_c)
    return 2 * r_c**2 * math.acos(s / (2 * r_c)) - 0.5 * s * math.sqrt(max(4 * r_c**2 - s * s, 0.0))


def palm_cluster_gain(params: NetworkParams) -> float:
    """E[l(|c + U|)] for c and U independent and uniform in B(0, r_c).

    This is the mean path gain from the observer to a member of its own
    cluster.  |c + U| has density 2 pi s A(s) / (pi r_c^2)^2 with A the
    lens area of two discs at centre distance s.
    """
    rc, d, b = params.r_c, params.d_min, params.beta
    if d >= 2 * rc:
        return 0.0
    norm = (math.pi * rc**2) ** 2

    def f(s):
        return s ** (-b) * 2 * math.pi * s * _lens_area(s, rc) / norm

    pts = [x for x in (10 * d, 0.1 * rc, rc) if d < x < 2 * rc]
    val, _ = integrate.quad(f, d, 2 * rc, points=pts or None, epsabs=0, epsrel=1e-11, limit=400)
    return val


def centre_bs_gain(params: NetworkParams) -> float:
    """E[l(R)] for R with density 2r/r_c^2 on [0, r_c]."""
    rc, d, b = params.r_c, params.d_min, params.beta
    if d >= rc:
        return 0.0
    return 2.0 / (rc**2 * (b - 2)) * (d ** (2 - b) - rc ** (2 - b))


def _rayleigh_expect(fn, params):
    """E[fn(R)] for R the PPP contact distance, with breaks at d_min and r0."""
    lam = params.lambda_b
    u_pts = [math.pi * lam * x * x for x in (params.d_min, cutoff_radius(params)) if math.isfinite(x)]

    def g(u):
        return fn(math.sqrt(u / (math.pi * lam))) * math.exp(-u)

    edges = sorted({0.0, 50.0, *[u for u in u_pts if u < 50.0]})
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(g, a, b, epsabs=0, epsrel=1e-11, limit=400)
        total += v
    return total


def _bs_plane_mean(params):
    return params.sar_dl * params.rho_b * params.G_b * params.lambda_b * _plane_factor(params)


def mean_ei_passive_ppp(params: NetworkParams) -> MeanReport:
    ei_bs = _bs_plane_mean(params)
    ei_ul_u = params.sar_dl * params.lambda_u * params.p_a * mean_tx_power_ppp(params) * _plane_factor(params)
    return MeanReport(ei_bs, ei_ul_u)


def _active_bs_ppp(params):
    """Mean BS exposure given the observer is served by its nearest BS."""
    rg = params.rho_b * params.G_b
    d, b, lam = params.d_min, params.beta, params.lambda_b

    def f(r):
        near = r ** (-b) if r >= d else 0.0
        rest = 2 * math.pi * lam * max(r, d) ** (2 - b) / (b - 2)
        return near + rest

    return params.sar_dl * rg / FOUR_PI * _rayleigh_expect(f, params)


def mean_ei_active_ppp(params: NetworkParams) -> MeanReport:
    p_bar = mean_tx_power_ppp(params)
    ei_ul_u = params.sar_dl * params.lambda_u * params.p_a * p_bar * _plane_factor(params)
    return MeanReport(_active_bs_ppp(params), ei_ul_u, params.sar_ul * p_bar)


def _cluster_power(params, scenario):
    return mean_tx_power_ppp(params) if scenario == 1 else mean_tx_power_cluster(params)


def _cluster_users_mean(params, scenario, intra_count):
    """Mean user exposure from other clusters plus the observer's own."""
    m = params.mean_cluster_size
    p_bar = _cluster_power(params, scenario)
    inter = params.lambda_c * m * p_bar * _plane_factor(params)
    intra = intra_count * p_bar * palm_cluster_gain(params) / FOUR_PI
    return params.sar_dl * (inter + intra)


def mean_ei_passive_mcp(params: NetworkParams, scenario: int) -> MeanReport:
    """Passive observer inside a Matern cluster.

    In scenario 2 the observer's own cluster sits on a base station, which
    adds a BS at distance uniform in the disc to the plain BS field.
    """
    if scenario not in (1, 2):
        raise ValueError("scenario must be 1 or 2")
    ei_bs = _bs_plane_mean(params)
    if scenario == 2:
        ei_bs += params.sar_dl * params.rho_b * params.G_b * centre_bs_gain(params) / FOUR_PI
    ei_ul_u = _cluster_users_mean(params, scenario, params.mean_cluster_size)
    return MeanReport(ei_bs, ei_ul_u)


def mean_ei_active_mcp(params: NetworkParams, scenario: int, intra: str = "palm") -> MeanReport:
    """Active observer inside a Matern cluster.

    ``intra="palm"`` counts m other active members in the observer's
    cluster; ``"literal"`` uses :func:`literal_intra_count`.
    """
    if scenario not in (1, 2):
        raise ValueError("scenario must be 1 or 2")
    if intra not in INTRA_VARIANTS:
        raise ValueError(f"intra must be one of {INTRA_VARIANTS}")
    m = params.mean_cluster_size
    count = m if intra == "palm" else literal_intra_count(m)
    ei_ul_u = _cluster_users_mean(params, scenario, count)
    if scenario == 1:
        return MeanReport(_active_bs_ppp(params), ei_ul_u, params.sar_ul * mean_tx_power_ppp(params))
    rg = params.rho_b * params.G_b
    ei_bs = _bs_plane_mean(params) + params.sar_dl * rg * centre_bs_gain(params) / FOUR_PI
    return MeanReport(ei_bs, ei_ul_u, params.sar_ul * mean_tx_power_cluster(params))


def mean_ei(params: NetworkParams, model=UserModel.PPP, observer=ObserverKind.PASSIVE, intra="palm") -> MeanReport:
    """Dispatch to the mean for one model/observer cell."""
    model = UserModel.parse(model)
    observer = ObserverKind.parse(observer)
    if model is UserModel.PPP:
        return mean_ei_active_ppp(params) if observer is ObserverKind.ACTIVE else mean_ei_passive_ppp(params)
    scenario = 1 if model is UserModel.MCP1 else 2
    if observer is ObserverKind.ACTIVE:
        return mean_ei_active_mcp(params, scenario, intra)
    return mean_ei_passive_mcp(params, scenario)


def mean_self_exposure_check(params: NetworkParams, model=UserModel.PPP) -> float:
    """E[SAR_ul p(R_u)] from the serving-distance rule, a cross-check on the
    closed forms above."""
    r, w = serving_distance_rule(params, model)
    return params.sar_ul * float(tx_power(r, params) @ w)
