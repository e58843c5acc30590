"""Uplink coverage probability at the serving base station.

Interferers are one active user per foreign cell.  For nearest-BS
association their positions are approximated by an inhomogeneous PPP of
density lambda_b (1 - exp(-pi lambda_b x^2)) around the tagged BS, each
with a link distance that is Rayleigh truncated to [0, x].  Swapping the
order of integration turns the double integral into an average over an
untruncated Rayleigh link distance R of a shot-noise exponent starting at R.
With clusters centred at base stations every other BS hosts one
interferer, placed at the BS location, with link distance uniform in the
cluster disc.

The receive gain G_b applies to the useful signal only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_types import NetworkParams, UserModel, normalized_noise
from .exposure_laplace import serving_distance_rule
from .kernels import full_plane_constant, shot_exponent
from .power_control import tx_power


@dataclass(frozen=True)
class CoverageQuery:
    gamma: float
    model: UserModel
    params: NetworkParams

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "model", UserModel.parse(self.model))


def _link_rule(params, model, n):
    model = UserModel.parse(model)
    if model is UserModel.MCP2:
        return serving_distance_rule(params, model, n)
    # interferer link distances are plain contact distances; d_min plays no role
    return serving_distance_rule(params.replace(d_min=params.r_c * 1e-6), UserModel.PPP, n)


def log_lt_interference(s, params: NetworkParams, model=UserModel.PPP, n=16):
    """log L_I(s) without the noise factor, for real s >= 0."""
    model = UserModel.parse(model)
    s = np.asarray(s, dtype=float)
    r, w = _link_rule(params, model, n)
    p = tx_power(r, params)
    if model is UserModel.MCP2:
        k = full_plane_constant(params.alpha)
        return -2 * math.pi * params.lambda_b * k * ((s[..., None] * p) ** (2.0 / params.alpha) @ w)
    expo = shot_exponent(s[..., None] * p, r, params.alpha).real
    return -2 * math.pi * params.lambda_b * (expo @ w)


def lt_interference_noise(s, params: NetworkParams, model=UserModel.PPP, n=16):
    """L_{I + sigma^2}(s) for real s >= 0 (scalar or array)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    val = np.exp(-s * normalized_noise(params) + log_lt_interference(s, params, model, n))
    return float(val) if val.ndim == 0 else val


def coverage_probability(query: CoverageQuery, n=24) -> float:
    """P(SINR > gamma) averaged over the reference user's link distance."""
    P = query.params
    r, w = serving_distance_rule(P, query.model, n)
    s = query.gamma * r**P.alpha / (P.G_b * tx_power(r, P))
    return float(lt_interference_noise(s, P, query.model, n) @ w)


@dataclass(frozen=True)
class EtaSweep:
    points: list  # (eta, coverage) pairs in grid order

    @property
    def argmax(self):
        return max(self.points, key=lambda pc: pc[1])[0]

    @property
    def interior_argmax(self):
        etas = [e for e, _ in self.points]
        return len(etas) > 2 and etas[0] < self.argmax < etas[-1]


def eta_sweep_coverage(params: NetworkParams, model=UserModel.PPP, eta_grid=(0.2, 0.4, 0.6, 0.8, 1.0),
                       gamma=None) -> EtaSweep:
    grid = [float(e) for e in eta_grid]
    if not grid:
        raise ValueError("eta_grid must be nonempty")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("eta_grid must be ascending")
    g = params.gamma if gamma is None else gamma
    pts = [(e, coverage_probability(CoverageQuery(g, model, params.replace(eta=e)))) for e in grid]
    return EtaSweep(pts)
