"""Laplace transforms of the exposure components.

All transforms accept scalar or array ``s`` (complex allowed, Re s >= 0 or
purely imaginary) and return values of the broadcast shape.  Exposure is
only collected from sources at distance >= d_min, so every radial
integral starts there (or at the serving distance when that is larger).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_types import DEFAULT_QUAD, NetworkParams, ObserverKind, QuadratureSpec, UserModel, cutoff_radius
from .kernels import disc_kernel, shot_exponent
from .power_control import compact_power_rule, mean_tx_power_cluster, tx_power, tx_power_pdf
from .quadrature import gauss_legendre_panels

FOUR_PI = 4.0 * math.pi
INTRA_VARIANTS = ("palm", "literal")
_MCP_BLOCK = 8192  # (s, power) pairs per kernel call


def _as_complex(s):
    return np.asarray(s, dtype=complex)


def _out(x, *inputs):
    x = np.asarray(x)
    if all(np.ndim(i) == 0 for i in inputs):
        return complex(x.reshape(()))
    return x


def path_gain(r, params):
    """Exposure path gain r^-beta, zero inside d_min."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        g = np.where(r >= params.d_min, np.maximum(r, params.d_min) ** (-params.beta), 0.0)
    return g


# --- PPP building blocks ----------------------------------------------------


def log_lt_wb_passive(s, params: NetworkParams):
    c = _as_complex(s) * params.rho_b * params.G_b / FOUR_PI
    return -2 * math.pi * params.lambda_b * shot_exponent(c, params.d_min, params.beta)


def lt_wb_passive(s, params: NetworkParams):
    """L_{W_b}(s) for the full PPP of base stations."""
    return _out(np.exp(log_lt_wb_passive(s, params)), s)


def log_lt_wu_passive_ppp(s, params: NetworkParams):
    s = _as_complex(s)
    dens = params.lambda_u * params.p_a
    if dens == 0:
        return np.zeros(s.shape, dtype=complex)
    law = tx_power_pdf(params)
    c = s[..., None] * law.nodes / FOUR_PI
    expo = shot_exponent(c, params.d_min, params.beta) @ law.weights
    return -2 * math.pi * dens * expo


def lt_wu_passive_ppp(s, params: NetworkParams):
    """L_{W_u}(s) for PPP users with independent power marks."""
    return _out(np.exp(log_lt_wu_passive_ppp(s, params)), s)


def log_lt_wb_active(s, r_u, params: NetworkParams):
    s, r_u = np.broadcast_arrays(_as_complex(s), np.asarray(r_u, dtype=float))
    c = s * params.rho_b * params.G_b / FOUR_PI
    r_lo = np.maximum(r_u, params.d_min)
    return -2 * math.pi * params.lambda_b * shot_exponent(c, r_lo, params.beta)


def lt_wb_active(s, r_u, params: NetworkParams):
    """L of the non-serving BS field given the serving BS at distance r_u.

    The other base stations form a PPP outside the disc of radius r_u.
    """
    return _out(np.exp(log_lt_wb_active(s, r_u, params)), s, r_u)


# --- clustered users ---------------------------------------------------------


def _cluster_power_nodes(params, scenario):
    if scenario == 1:
        return compact_power_rule(params)
    return np.array([mean_tx_power_cluster(params)]), np.array([1.0])


def log_lt_wu_mcp(s, params: NetworkParams, scenario: int, observer=ObserverKind.PASSIVE, intra="palm"):
    """log L_{W_u} for Matern-cluster users seen from a member of a cluster.

    Users of one cluster share a power.  Scenario 1 draws it from the PPP
    contact-distance law; scenario 2 uses the mean in-cluster power.  The
    observer's own cluster (Palm cluster) has its centre uniform in
    B(0, r_c).  ``intra="palm"`` counts the other active members of that
    cluster as Poisson(m); ``"literal"`` uses the (n-1)-member form.
    """
    if scenario not in (1, 2):
        raise ValueError("scenario must be 1 or 2")
    if intra not in INTRA_VARIANTS:
        raise ValueError(f"intra must be one of {INTRA_VARIANTS}")
    observer = ObserverKind.parse(observer)
    s = _as_complex(s)
    shape = s.shape
    s = s.ravel()
    m = params.mean_cluster_size
    if m == 0:
        return np.zeros(shape, dtype=complex)
    kernel = disc_kernel(params.r_c, params.d_min, params.beta)
    p_nodes, p_w = _cluster_power_nodes(params, scenario)
    step = max(1, _MCP_BLOCK // p_nodes.size)
    out = np.empty(s.size, dtype=complex)
    for i in range(0, s.size, step):
        out[i : i + step] = _log_lt_wu_mcp_block(s[i : i + step], params, kernel, p_nodes, p_w, m, observer, intra)
    return out.reshape(shape)


def _log_lt_wu_mcp_block(s, params, kernel, p_nodes, p_w, m, observer, intra):
    c = s[:, None] * p_nodes[None, :] / FOUR_PI
    G = kernel(c.ravel()).reshape(s.size, p_nodes.size, kernel.r1.size)
    # 1 - E_p exp(-m G), computed without cancellation for tiny G
    miss = np.einsum("spj,p->sj", -np.expm1(-m * G), p_w)
    inter = 2 * math.pi * params.lambda_c * (miss @ kernel.w_area)

    wi = kernel.w_area[kernel.inner] * 2.0 / params.r_c**2
    Gi = G[:, :, kernel.inner]
    if observer is ObserverKind.ACTIVE and intra == "literal":
        em = math.exp(-m)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = (np.exp(-m * Gi) - em) / ((1.0 - Gi) * -math.expm1(-m))
        term = np.where(np.abs(1.0 - Gi) < 1e-300, m * em / -math.expm1(-m), term)
    else:
        term = np.exp(-m * Gi)
    palm = np.einsum("spj,p->sj", term, p_w) @ wi
    return np.log(palm) - inter


def lt_wu_mcp(s, params: NetworkParams, scenario: int, observer=ObserverKind.PASSIVE, intra="palm"):
    return _out(np.exp(log_lt_wu_mcp(s, params, scenario, observer, intra)), s)


# --- serving distance laws ---------------------------------------------------


def serving_distance_rule(params: NetworkParams, model: UserModel, n=16):
    """Quadrature (r, w) for the observer's serving distance.

    Rayleigh for PPP and MCP1, uniform-in-disc for MCP2.  Panels break at
    d_min and at the power cutoff r0 where the integrands have kinks.
    """
    model = UserModel.parse(model)
    r0 = cutoff_radius(params)
    d = params.d_min
    if model is UserModel.MCP2:
        rc = params.r_c
        edges = {0.0, rc}
        for b in (d, r0, 0.01 * rc, 0.1 * rc):
            if 0 < b < rc:
                edges.add(b)
        r, w = gauss_legendre_panels(np.array(sorted(edges)), n)
        return r, w * 2 * r / rc**2
    lam = params.lambda_b
    to_u = lambda x: math.pi * lam * x * x
    u_max = 60.0
    edges = {0.0, u_max, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}
    for b in (d, r0):
        if math.isfinite(b) and 0 < to_u(b) < u_max:
            edges.add(to_u(b))
    u, w = gauss_legendre_panels(np.array(sorted(edges)), n)
    return np.sqrt(u / (math.pi * lam)), w * np.exp(-u)


def _centre_bs_factor(s, r, params):
    x = _as_complex(s) * params.rho_b * params.G_b * path_gain(r, params) / FOUR_PI
    return 1.0 / (1.0 + x)


# --- exposure index ------------------------------------------------------------


def _log_lt_wu_model(s, params, model, observer, intra):
    if model is UserModel.PPP:
        return log_lt_wu_passive_ppp(s, params)
    scenario = 1 if model is UserModel.MCP1 else 2
    return log_lt_wu_mcp(s, params, scenario, observer, intra)


def log_lt_ei_passive_parts(s, params: NetworkParams, model: UserModel):
    """(log L_{W_b}(s SAR_dl), log L_{W_u}(s SAR_dl)) for a passive observer."""
    model = UserModel.parse(model)
    x = _as_complex(s) * params.sar_dl
    return log_lt_wb_passive(x, params), _log_lt_wu_model(x, params, model, ObserverKind.PASSIVE, "palm")


def lt_ei_passive(s, params: NetworkParams, model: UserModel = UserModel.PPP, r_u=None):
    """L_{EI_p}(s), treating the BS and user fields as independent.

    For MCP2 the observer's cluster is centred at a base station at
    distance ``r_u``; with ``r_u=None`` that distance is averaged over
    the uniform-in-disc law.
    """
    model = UserModel.parse(model)
    s_arr = _as_complex(s)
    lb, lu = log_lt_ei_passive_parts(s_arr, params, model)
    base = np.exp(lb + lu)
    if model is UserModel.MCP2:
        x = s_arr * params.sar_dl
        if r_u is None:
            r, w = serving_distance_rule(params, model)
            base = base * (_centre_bs_factor(x[..., None], r, params) @ w)
        else:
            base = base * _centre_bs_factor(x, r_u, params)
    return _out(base, s, *(() if r_u is None else (r_u,)))


def lt_ei_active(s, r_u, params: NetworkParams, model: UserModel = UserModel.PPP, intra="palm",
                 include_self=True):
    """L_{EI_a}(s) conditioned on the serving distance ``r_u``.

    Product of the serving BS, the other BSs, the other users and the
    observer's own uplink.  In MCP2 the serving BS is the cluster centre
    and the other BSs are an unconstrained PPP.  ``include_self=False``
    drops the deterministic own-uplink factor.
    """
    model = UserModel.parse(model)
    s_arr, r_arr = np.broadcast_arrays(_as_complex(s), np.asarray(r_u, dtype=float))
    x = s_arr * params.sar_dl
    if model is UserModel.MCP2:
        lb = log_lt_wb_passive(x, params)
    else:
        lb = log_lt_wb_active(x, r_arr, params)
    # user term depends on s only; evaluate on unique s values
    flat = s_arr.reshape(-1)
    uniq, inv = np.unique(flat, return_inverse=True)
    lu = _log_lt_wu_model(uniq * params.sar_dl, params, model, ObserverKind.ACTIVE, intra)[inv].reshape(s_arr.shape)
    self_tx = -s_arr * params.sar_ul * tx_power(r_arr, params) if include_self else 0.0
    val = np.exp(lb + lu + self_tx) * _centre_bs_factor(x, r_arr, params)
    return _out(val, s, r_u)


@dataclass(frozen=True)
class LaplaceSpec:
    """Selects one transform; ``evaluate(s, params)`` dispatches to it."""

    model: UserModel = UserModel.PPP
    observer: ObserverKind = ObserverKind.PASSIVE
    component: str = "EI_total"  # W_b, W_u, W_b_active, W_u_active, EI_total
    r_u: float | None = None
    quad: QuadratureSpec = DEFAULT_QUAD
    intra: str = "palm"

    def __post_init__(self):
        active = ObserverKind.parse(self.observer) is ObserverKind.ACTIVE
        needs_r = active and not (self.component == "W_u_active")
        if needs_r and self.r_u is None:
            raise ValueError("active-observer transforms are conditioned on r_u")
        if not active and self.r_u is not None and UserModel.parse(self.model) is not UserModel.MCP2:
            raise ValueError("r_u only applies to active observers or MCP2")

    def evaluate(self, s, params):
        model = UserModel.parse(self.model)
        obs = ObserverKind.parse(self.observer)
        if self.component == "W_b":
            return lt_wb_passive(s, params)
        if self.component == "W_b_active":
            return lt_wb_active(s, self.r_u, params)
        if self.component in ("W_u", "W_u_active"):
            if model is UserModel.PPP:
                return lt_wu_passive_ppp(s, params)
            kind = ObserverKind.ACTIVE if self.component == "W_u_active" else ObserverKind.PASSIVE
            return lt_wu_mcp(s, params, 1 if model is UserModel.MCP1 else 2, kind, self.intra)
        if self.component == "EI_total":
            if obs is ObserverKind.ACTIVE:
                return lt_ei_active(s, self.r_u, params, model, self.intra)
            return lt_ei_passive(s, params, model, self.r_u)
        raise ValueError(f"unknown component {self.component!r}")
