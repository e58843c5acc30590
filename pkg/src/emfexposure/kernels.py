"""Radial shot-noise kernels used by every PGFL in the package.

With path loss l(z) = z^-beta cut off below a minimum distance d, the PGFL
exponent of a Rayleigh-faded PPP shot noise is

    Phi_d(c) = int_d^inf [1 - 1/(1 + c z^-beta)] z dz = d^2 psi(c d^-beta)

and psi(k) = 1/(beta-2) int_0^1 k / (1 + k v^(beta/(beta-2))) dv after the
substitution v = (z/d)^(2-beta).  The finite v-range makes psi cheap to
tabulate.  For clustered users the analogous quantity is the disc kernel
``G(c, r1)``, the average of c l / (1 + c l) over a uniform point in a disc
of radius r_c whose centre is r1 away from the observer.

Both are evaluated along rays kappa = tau exp(i theta).  Each ray is
tabulated once as a cubic spline of log(F/kappa) against log(tau), which
is smooth and has simple asymptotes at both ends.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .point_process import conditional_cluster_distance_pdf
from .quadrature import gauss_legendre_panels

_DIRECT_LIMIT = 512  # below this many points skip the table
_CHUNK = 1 << 22


def _ray_key(kappa):
    """Common argument of all nonzero kappa, or None if they differ."""
    ang = np.angle(kappa)
    if ang.size == 0:
        return None
    lo, hi = ang.min(), ang.max()
    if hi - lo > 1e-12:
        return None
    return round(float(ang.flat[0]), 12)


def _chunked(fn, x, width):
    """Apply fn to slices of x so that len(slice) * width stays bounded."""
    step = max(1, _CHUNK // max(width, 1))
    if len(x) <= step:
        return fn(x)
    return np.concatenate([fn(x[i : i + step]) for i in range(0, len(x), step)])


# --- psi -------------------------------------------------------------------


@lru_cache(maxsize=16)
def _psi_rule(beta):
    q = beta / (beta - 2.0)
    per_decade = max(4, int(math.ceil(q)))
    edges = np.concatenate([[0.0], np.geomspace(1e-20, 1.0, 20 * per_decade + 1)])
    v, w = gauss_legendre_panels(edges, 16)
    return v**q, w / (beta - 2.0)


def psi_direct(kappa, beta):
    """psi by composite Gauss-Legendre; kappa any complex array off the negative axis."""
    kappa = np.asarray(kappa, dtype=complex)
    vq, w = _psi_rule(beta)
    flat = kappa.ravel()

    def block(k):
        k = k[:, None]
        return (k / (1.0 + k * vq)) @ w

    return _chunked(block, flat, vq.size).reshape(kappa.shape)


class _RayTable:
    """Cubic spline of log(F(kappa)/kappa) along one ray in the kappa plane.

    ``direct`` maps kappa of shape (n,) to values of shape (n, m).  Below
    ``lo`` the two-term series ``c1 k - c2 k^2`` is used; above ``hi`` the
    direct rule is called.
    """

    def __init__(self, direct, theta, lo, hi, per_decade, series):
        self.direct = direct
        self.lo, self.hi = lo, hi
        self.series = series  # (c1, c2) arrays of shape (m,)
        n = int(math.ceil(math.log10(hi / lo) * per_decade)) + 1
        x = np.linspace(math.log(lo), math.log(hi), n)
        rot = np.exp(1j * theta)
        kap = np.exp(x) * rot
        vals = np.atleast_2d(direct(kap).T).T  # (n, m)
        self.zero = np.all(vals == 0, axis=0)
        safe = np.where(self.zero, 1.0, vals)
        h = np.log(safe / kap[:, None])
        h = h.real + 1j * np.unwrap(h.imag, axis=0)
        self.m = vals.shape[1]
        self.spline = CubicSpline(x, np.concatenate([h.real, h.imag], axis=1))

    def __call__(self, kappa):
        kappa = np.asarray(kappa, dtype=complex).ravel()
        tau = np.abs(kappa)
        out = np.zeros((kappa.size, self.m), dtype=complex)
        mid = (tau >= self.lo) & (tau <= self.hi)
        if mid.any():
            hh = self.spline(np.log(tau[mid]))
            h = hh[:, : self.m] + 1j * hh[:, self.m :]
            out[mid] = kappa[mid, None] * np.exp(h)
        small = (tau < self.lo) & (tau > 0)
        if small.any():
            k = kappa[small, None]
            c1, c2 = self.series
            out[small] = c1 * k - c2 * k * k
        big = tau > self.hi
        if big.any():
            out[big] = np.atleast_2d(self.direct(kappa[big]).T).T
        out[:, self.zero] = 0.0
        return out


@lru_cache(maxsize=32)
def _psi_table(beta, theta):
    c1 = np.array([1.0 / (beta - 2.0)])
    c2 = np.array([1.0 / (2.0 * beta - 2.0)])
    return _RayTable(lambda k: psi_direct(k, beta), theta, 1e-10, 1e18, 64, (c1, c2))


def psi(kappa, beta):
    """Normalised shot-noise kernel psi(kappa) for complex kappa (Re >= 0 side).

    Dispatches to a cached ray table when many points share one argument.
    """
    kappa = np.asarray(kappa, dtype=complex)
    out = np.zeros(kappa.shape, dtype=complex)
    nz = kappa != 0
    if not nz.any():
        return out
    k = kappa[nz]
    key = _ray_key(k) if k.size > _DIRECT_LIMIT else None
    if key is None:
        out[nz] = psi_direct(k, beta)
    else:
        out[nz] = _psi_table(beta, key)(k)[:, 0]
    return out


def shot_exponent(c, r_lo, beta):
    """int_{r_lo}^inf [1 - 1/(1 + c z^-beta)] z dz, broadcast over c and r_lo."""
    c, r_lo = np.broadcast_arrays(np.asarray(c, dtype=complex), np.asarray(r_lo, dtype=float))
    return r_lo**2 * psi(c * r_lo ** (-beta), beta)


@lru_cache(maxsize=8)
def full_plane_constant(alpha):
    """K with int_0^inf [1 - 1/(1 + c x^-alpha)] x dx = K c^(2/alpha) for c > 0."""
    # scale invariance: substitute x = c^(1/alpha) y; evaluate via psi at one point
    # int_0^1 y/(y^alpha+1) dy + psi(1)
    y, w = gauss_legendre_panels(np.linspace(0, 1, 9), 16)
    head = float(np.sum(w * y / (y**alpha + 1)))
    return head + float(psi_direct(np.array([1.0 + 0j]), alpha)[0].real)


# --- disc kernel for clusters ----------------------------------------------


def _disc_rule(r1, r_c, d, beta, n=8, ratio=1.5):
    """Nodes/weights in r2 for E[h(|U|)] restricted to |U| >= d."""
    if r1 > 1e6 * r_c:
        # disc is a point at this range
        return np.array([r1]), np.array([1.0])
    nodes, weights = [], []
    if r1 < r_c and r_c - r1 > d:
        k = max(1, int(math.ceil(math.log((r_c - r1) / d) / math.log(ratio))))
        edges = np.geomspace(d, r_c - r1, k + 1)
        r, w = gauss_legendre_panels(edges, n)
        nodes.append(r)
        weights.append(w * 2 * r / r_c**2)
    a, b = abs(r_c - r1), r_c + r1
    if r1 > 0 and b > d and b > a:
        lo = max(a, d)
        k = max(1, int(math.ceil(math.log(b / lo) / math.log(ratio))))
        r_edges = np.geomspace(lo, b, k + 1)
        th_edges = np.arccos(np.clip(1.0 - 2.0 * (r_edges - a) / (b - a), -1.0, 1.0))
        th, wt = gauss_legendre_panels(th_edges, n)
        r = a + 0.5 * (b - a) * (1.0 - np.cos(th))
        dr = 0.5 * (b - a) * np.sin(th) * wt
        nodes.append(r)
        weights.append(conditional_cluster_distance_pdf(r, r1, r_c) * dr)
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


@lru_cache(maxsize=8)
def cluster_r1_rule(r_c, d, beta):
    """Nodes over the distance r1 of a cluster centre.

    Returns (r1, w_area, inner) where ``sum w_area g(r1)`` approximates
    int_0^inf g(r1) r1 dr1 for g decaying like r1^-beta, and ``inner``
    flags nodes with r1 < r_c.
    """
    cuts = sorted({0.0, 0.5 * r_c, r_c, 1.5 * r_c, 2.0 * r_c} | ({r_c - d, r_c + d} if r_c > 2 * d else set()))
    r_in, w_in = gauss_legendre_panels(np.array(cuts), 16)
    mid_edges = np.geomspace(2 * r_c, 10 * r_c, 5)
    r_mid, w_mid = gauss_legendre_panels(mid_edges, 8)
    # tail r1 = R v^(-1/(beta-2)), r1 dr1 = R^2 v^(-q) dv / (beta-2)
    R = 10.0 * r_c
    q = beta / (beta - 2.0)
    v_edges = np.concatenate([[0.0], np.geomspace(1e-9, 1.0, 10)])
    v, wv = gauss_legendre_panels(v_edges, 8)
    r_tail = R * v ** (-1.0 / (beta - 2.0))
    w_tail = wv * R**2 * v ** (-q) / (beta - 2.0)
    r1 = np.concatenate([r_in, r_mid, r_tail])
    w = np.concatenate([w_in * r_in, w_mid * r_mid, w_tail])
    return r1, w, r1 < r_c


class DiscKernel:
    """G(c, r1_j) on the fixed r1 rule of :func:`cluster_r1_rule`."""

    def __init__(self, r_c, d, beta):
        self.r_c, self.d, self.beta = r_c, d, beta
        self.r1, self.w_area, self.inner = cluster_r1_rule(r_c, d, beta)
        rules = [_disc_rule(x, r_c, d, beta) for x in self.r1]
        width = max(len(r) for r, _ in rules)
        self.ell = np.zeros((len(rules), width))
        self.wt = np.zeros((len(rules), width))
        for j, (r, w) in enumerate(rules):
            self.ell[j, : len(r)] = r ** (-beta)
            self.wt[j, : len(r)] = w
        self.m1 = np.sum(self.wt * self.ell, axis=1)
        self.m2 = np.sum(self.wt * self.ell**2, axis=1)
        self._tables = {}

    def direct(self, c):
        """G for c of shape (n,) -> (n, n_r1)."""
        c = np.asarray(c, dtype=complex).ravel()

        def block(cc):
            x = cc[:, None, None] * self.ell[None]
            return np.sum(self.wt[None] * x / (1.0 + x), axis=2)

        return _chunked(block, c, self.ell.size)

    def __call__(self, c):
        c = np.asarray(c, dtype=complex).ravel()
        out = np.zeros((c.size, len(self.r1)), dtype=complex)
        nz = c != 0
        if not nz.any():
            return out
        cc = c[nz]
        key = _ray_key(cc) if cc.size > 8 else None
        if key is None:
            out[nz] = self.direct(cc)
            return out
        table = self._tables.get(key)
        if table is None:
            lo = 1e-10 * self.d**self.beta
            table = _RayTable(self.direct, key, lo, 1e16, 48, (self.m1, self.m2))
            self._tables[key] = table
        out[nz] = table(cc)
        return out


@lru_cache(maxsize=8)
def disc_kernel(r_c, d, beta):
    return DiscKernel(r_c, d, beta)
