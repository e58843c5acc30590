"""CDF and quantiles of the exposure index via Gil-Pelaez inversion.

For an active observer EI = a(R) + Y where a(R) = SAR_ul p(R) is the own
uplink at serving distance R.  a(R) can be far larger than Y, so the CDF is
computed as E[F_Y(w - a(R) | R)] with an R-rule refined where w - a(R) is
comparable to the size of Y.
"""

from __future__ import annotations

import math

import numpy as np

from .core_types import CDF_QUAD, NetworkParams, ObserverKind, QuadratureSpec, UserModel, cutoff_radius
from .exposure_laplace import lt_ei_active, lt_ei_passive, serving_distance_rule
from .exposure_moments import mean_ei
from .gil_pelaez import CfHandle, cdf, cdf_conditioned, find_bracket, quantile
from .power_control import tx_power
from .quadrature import gauss_legendre_panels

_STEPS = np.array([0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 1e4])


def ei_cf(params: NetworkParams, model=UserModel.PPP, observer=ObserverKind.PASSIVE, intra="palm") -> CfHandle:
    """Characteristic function of EI.  Active observers are mixed over the
    serving distance inside the t-integral."""
    model = UserModel.parse(model)
    observer = ObserverKind.parse(observer)
    mu = mean_ei(params, model, observer, intra).total
    if observer is ObserverKind.PASSIVE:
        return CfHandle(lambda t: lt_ei_passive(-1j * np.asarray(t), params, model), mean=mu)
    r, w = serving_distance_rule(params, model)

    def ev(t):
        s = -1j * np.asarray(t, dtype=float)[:, None]
        return lt_ei_active(s, r[None, :], params, model, intra) @ w

    return CfHandle(ev, mean=mu)


class ActiveCdf:
    """F(w) for an active observer, conditioned on the serving distance."""

    def __init__(self, params: NetworkParams, model=UserModel.PPP, intra="palm", n=8):
        self.params = params
        self.model = UserModel.parse(model)
        self.intra = intra
        self.n = n
        rep = mean_ei(params, self.model, ObserverKind.ACTIVE, intra)
        self.mean = rep.total
        self.scale = rep.ei_bs + rep.ei_ul_u
        self.r0 = cutoff_radius(params)
        self._fixed = serving_distance_rule(params, self.model, n=16)

    def shift(self, r):
        return self.params.sar_ul * tx_power(r, self.params)

    def family(self, t, r):
        return lt_ei_active(-1j * t, r, self.params, self.model, self.intra, include_self=False)

    def laplace(self, s, r):
        return lt_ei_active(s, r, self.params, self.model, self.intra, include_self=False)

    def _shift_inverse(self, v):
        P = self.params
        return (v / (P.sar_ul * P.rho_u)) ** (1.0 / (P.alpha * P.eta))

    def rule(self, w):
        P = self.params
        if P.eta == 0:
            return self._fixed
        v = w - self.scale * _STEPS
        v = v[(v > 0) & (v < P.sar_ul * P.p_max)]
        radii = self._shift_inverse(v)
        if self.model is UserModel.MCP2:
            rc = P.r_c
            edges = {0.0, rc, *(b for b in (P.d_min, self.r0, 0.01 * rc, 0.1 * rc, *radii) if 0 < b < rc)}
            r, wr = gauss_legendre_panels(np.array(sorted(edges)), self.n)
            return r, wr * 2 * r / rc**2
        to_u = lambda x: math.pi * P.lambda_b * x * x
        u_max = 60.0
        edges = {0.0, u_max, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}
        for b in (P.d_min, self.r0, *radii):
            if math.isfinite(b) and 0 < to_u(b) < u_max:
                edges.add(to_u(b))
        u, wu = gauss_legendre_panels(np.array(sorted(edges)), self.n)
        return np.sqrt(u / (math.pi * P.lambda_b)), wu * np.exp(-u)

    def __call__(self, w, quad: QuadratureSpec = CDF_QUAD):
        return cdf_conditioned(self.family, w=w, quad=quad, shift=self.shift, rule=self.rule,
                               laplace=self.laplace, scale=self.scale)


def ei_cdf(w, params: NetworkParams, model=UserModel.PPP, observer=ObserverKind.PASSIVE, *,
           intra="palm", quad: QuadratureSpec = CDF_QUAD, cf: CfHandle | None = None):
    """P(EI <= w) for scalar or array w (W/kg)."""
    if cf is None and ObserverKind.parse(observer) is ObserverKind.ACTIVE:
        return ActiveCdf(params, model, intra)(w, quad)
    cf = cf if cf is not None else ei_cf(params, model, observer, intra)
    return cdf(cf, w, quad)


def ei_quantile(q, params: NetworkParams, model=UserModel.PPP, observer=ObserverKind.PASSIVE, *,
                intra="palm", quad: QuadratureSpec = CDF_QUAD, cf: CfHandle | None = None, rel_width=1e-4):
    """q-quantile of EI, bracketed outward from the mean."""
    if cf is None and ObserverKind.parse(observer) is ObserverKind.ACTIVE:
        act = ActiveCdf(params, model, intra)
        F, start = (lambda x: act(x, quad)), act.mean
    else:
        cf = cf if cf is not None else ei_cf(params, model, observer, intra)
        F, start = (lambda x: cdf(cf, x, quad)), cf.mean

    bracket = find_bracket(F, q, start, factor=2.0)
    return quantile(F, q, bracket, rel_width)
