"""Truncated path-loss inversion: p = min(p_max, rho_u r^(alpha eta))."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .core_types import NetworkParams, cutoff_radius
from .quadrature import gauss_legendre_panels


def tx_power(r, params: NetworkParams):
    """Uplink transmit power at serving distance ``r`` (scalar or array)."""
    r = np.asarray(r, dtype=float)
    if params.eta == 0:
        out = np.full(r.shape, params.rho_u)
    else:
        with np.errstate(over="ignore"):
            out = np.minimum(params.p_max, params.rho_u * r ** (params.alpha * params.eta))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TxPowerDistribution:
    """Mixed law of the transmit power of a typical user.

    Continuous part on (0, p_max) plus an atom at p_max.  ``nodes`` and
    ``weights`` form a quadrature rule for expectations over the whole law
    (the atom is the last node when present).
    """

    params: NetworkParams
    atom_at_pmax: float
    nodes: np.ndarray
    weights: np.ndarray

    def continuous_density(self, p):
        p = np.asarray(p, dtype=float)
        P = self.params
        if P.eta == 0:
            return np.zeros_like(p)
        k = 2.0 / (P.alpha * P.eta)
        lam = P.lambda_b
        inside = (p > 0) & (p < P.p_max)
        pc = np.where(inside, p, 1.0)
        dens = (2 * math.pi * lam / (P.alpha * P.eta * P.rho_u**k)) * pc ** (k - 1) * np.exp(
            -math.pi * lam * (pc / P.rho_u) ** k
        )
        return np.where(inside, dens, 0.0)

    def expect(self, fn):
        """E[fn(p)] using the quadrature rule; fn must broadcast."""
        return np.tensordot(fn(self.nodes), self.weights, axes=([-1], [0]))

    @property
    def mean(self):
        return float(self.nodes @ self.weights)


def _contact_rule(lam, r_hi=math.inf, n=8, coarse=False):
    """Quadrature for the Rayleigh contact distance restricted to r < r_hi.

    Works in u = pi lam r^2 (exponential law) on geometric panels so that
    power laws in r near zero integrate accurately.
    """
    u_hi = min(math.pi * lam * r_hi**2, 60.0)
    if coarse:
        edges = [0.0, 1e-4, 1e-2, 0.1, 0.4, 1.0, 2.5, 6.0, 15.0, 60.0]
    else:
        edges = [0.0] + [10.0**k for k in range(-10, 2)] + [2.0, 4.0, 8.0, 16.0, 32.0, 60.0]
    edges = [e for e in edges if e < u_hi] + [u_hi]
    u, w = gauss_legendre_panels(np.array(edges), n)
    w = w * np.exp(-u)
    r = np.sqrt(u / (math.pi * lam))
    return r, w


@lru_cache(maxsize=256)
def tx_power_pdf(params: NetworkParams) -> TxPowerDistribution:
    """Transmit power law induced by the PPP contact distance."""
    if params.eta == 0:
        return TxPowerDistribution(params, 0.0, np.array([params.rho_u]), np.array([1.0]))
    r0 = cutoff_radius(params)
    atom = math.exp(-math.pi * params.lambda_b * r0**2)
    r, w = _contact_rule(params.lambda_b, r0, n=12)
    nodes = tx_power(r, params)
    if atom > 0:
        nodes = np.append(nodes, params.p_max)
        w = np.append(w, atom)
    return TxPowerDistribution(params, atom, nodes, w)


@lru_cache(maxsize=256)
def compact_power_rule(params: NetworkParams, n=6):
    """Short quadrature rule for E[h(p)] over the PPP power law.

    Used where h itself is expensive (cluster transforms); n = 6 keeps
    transform errors near 2e-6 at the defaults.
    """
    if params.eta == 0:
        return np.array([params.rho_u]), np.array([1.0])
    r0 = cutoff_radius(params)
    atom = math.exp(-math.pi * params.lambda_b * r0**2)
    r, w = _contact_rule(params.lambda_b, r0, n=n, coarse=True)
    nodes = tx_power(r, params)
    if atom > 0:
        nodes = np.append(nodes, params.p_max)
        w = np.append(w, atom)
    return nodes, w


def mean_tx_power_ppp(params: NetworkParams) -> float:
    """Mean power of a user served by its nearest PPP base station."""
    if params.eta == 0:
        return params.rho_u
    lam = params.lambda_b
    r0 = cutoff_radius(params)
    a = params.alpha * params.eta

    # integrate over u = pi lam r^2 where the Rayleigh law is Exp(1)
    def f(u):
        r = math.sqrt(u / (math.pi * lam))
        return params.rho_u * r**a * math.exp(-u)

    u0 = math.pi * lam * r0**2
    if u0 > 700:
        body, _ = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
        return body
    body, _ = integrate.quad(f, 0, u0, epsabs=0, epsrel=1e-12, limit=200)
    return body + params.p_max * math.exp(-u0)


def mean_tx_power_cluster(params: NetworkParams) -> float:
    """Mean power of a user uniformly placed in a disc of radius r_c
    around its serving base station."""
    if params.eta == 0:
        return params.rho_u
    r0 = cutoff_radius(params)
    rc = params.r_c

    def f(z):
        return float(tx_power(z, params)) * 2 * z / rc**2

    points = [r0] if r0 < rc else None
    val, _ = integrate.quad(f, 0, rc, points=points, epsabs=0, epsrel=1e-12, limit=200)
    return val


def cluster_power_rule(params: NetworkParams, n=24):
    """Quadrature rule for the power of a user uniform in B(0, r_c)."""
    rc = params.r_c
    r0 = cutoff_radius(params)
    edges = [0.0, rc * 1e-3, rc * 1e-2, rc * 0.1, rc]
    if r0 < rc:
        edges = sorted(set(edges + [r0]))
    r, w = gauss_legendre_panels(np.array(edges), n)
    return tx_power(r, params), w * 2 * r / rc**2
