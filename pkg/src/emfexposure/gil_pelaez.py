"""CDF inversion of nonnegative random variables from characteristic functions.

    F(w) = 1/2 - (1/pi) int_0^inf Im(exp(-j t w) phi(t)) / t dt

The t-axis is cut into Gauss-Kronrod panels no longer than one
oscillation period of exp(-j t w) and no wider than a quarter decade.
Panels are refined adaptively.  The upper limit doubles until either
|phi| has decayed below tolerance or the integrand is oscillating fast
enough for a two-term integration-by-parts tail, whose error is estimated
by comparing two truncation points.  Output values are grouped by octave of
w so that low and high w values do not share one panel layout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core_types import CDF_QUAD, QuadratureSpec
from .quadrature import QuadratureError, gauss_legendre_panels, gk15_nodes, gk15_reduce

log = logging.getLogger(__name__)

_OSC_PERIODS = 256.0  # w*T needed before the asymptotic tail is trusted
_GEOM_STEP = 10.0**0.25
_MEMO_LIMIT = 500_000  # panels
_CHUNK = 4096  # t values per evaluator call


class BracketError(ValueError):
    """The bracket passed to :func:`quantile` does not straddle q."""


@dataclass
class CfHandle:
    """Characteristic function phi(t) = L(-j t) of a nonnegative variable.

    ``scale`` is a t-scale where phi departs from 1 (estimated if None);
    ``mean`` feeds the small-t series patch (estimated if None).
    Values on quadrature panels are memoised per handle.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    scale: float | None = None
    mean: float | None = None
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        parts = [np.asarray(self.evaluator(flat[i : i + _CHUNK]), dtype=complex) for i in range(0, flat.size, _CHUNK)]
        out = np.concatenate(parts) if parts else np.empty(0, complex)
        return out.reshape(t.shape)

    def on_panels(self, a, b):
        """phi at the GK15 nodes of panels [a_i, b_i], memoised per panel."""
        memo = self._memo
        keys = list(zip(a.tolist(), b.tolist()))
        missing = [i for i, k in enumerate(keys) if k not in memo]
        if missing:
            idx = np.array(missing)
            vals = self(gk15_nodes(a[idx], b[idx]))
            if len(memo) + len(missing) > _MEMO_LIMIT:
                memo.clear()
            memo.update(zip([keys[i] for i in missing], vals))
            if len(missing) == len(keys):
                return vals
        return np.array([memo[k] for k in keys])


def decay_scale(cf: CfHandle) -> float:
    """Power of two t where |1 - phi(t)| first reaches 1/2."""
    if cf.scale is not None:
        return cf.scale

    def far(t):
        return abs(1.0 - cf(np.array([t]))[0]) >= 0.5

    t = 1.0
    if far(t):
        for _ in range(2000):
            if not far(t / 2):
                break
            t /= 2
    else:
        for _ in range(2000):
            t *= 2
            if far(t):
                break
        else:
            raise QuadratureError("characteristic function never departs from 1")
    cf.scale = t
    return t


def _breaks(a, b, width):
    """Panel edges on [a, b]: geometric steps capped at ``width``."""
    out = [a]
    t = a
    # geometric part until the cap binds
    switch = width / (_GEOM_STEP - 1.0)
    while t < min(b, switch):
        t = min(t * _GEOM_STEP, b, switch) if t * _GEOM_STEP < switch else min(switch, b)
        out.append(t)
    if t < b:
        n = int(math.ceil((b - t) / width * (1 - 1e-12)))
        out.extend(np.linspace(t, b, n + 1)[1:].tolist())
    return np.array(out)


class _Single:
    """One CF as a single-column source."""

    def __init__(self, cf):
        self.cf = cf

    def panels(self, a, b):
        return self.cf.on_panels(a, b)[..., None]

    def points(self, t):
        return self.cf(t)[:, None]

    def subset(self, cols):
        return self


class _Family:
    """Columns chi(t, r_k) of a CF family, evaluated together."""

    def __init__(self, family, r):
        self.family = family
        self.r = np.asarray(r, dtype=float)

    def points(self, t):
        t = np.asarray(t, dtype=float).ravel()
        step = max(1, _CHUNK * 16 // max(self.r.size, 1))
        parts = [np.asarray(self.family(t[i : i + step, None], self.r[None, :]), dtype=complex)
                 for i in range(0, t.size, step)]
        return np.concatenate(parts).reshape(t.size, self.r.size)

    def panels(self, a, b):
        t = gk15_nodes(a, b)
        return self.points(t).reshape(*t.shape, self.r.size)

    def subset(self, cols):
        return _Family(self.family, self.r[cols])


_PAIR_BLOCK = 2_000_000  # pair * node values held at once


def _integrate(src, a, b, x, col, tol, max_panels):
    """Adaptive GK15 of Im(exp(-j t x_k) phi_{col_k}(t))/t over panels [a_i, b_i].

    Returns (integral per pair, error estimate).
    """
    total = np.zeros(x.size)
    err_total = 0.0
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    n_start = a.size
    for _ in range(60):
        res = np.empty((x.size, a.size))
        perr = np.empty(a.size)
        step = max(1, _PAIR_BLOCK // (15 * x.size))
        for i in range(0, a.size, step):
            aa, bb = a[i : i + step], b[i : i + step]
            t = gk15_nodes(aa, bb)
            phi = np.moveaxis(src.panels(aa, bb)[:, :, col], -1, 0)
            xt = x[:, None, None] * t[None]
            vals = (phi.imag * np.cos(xt) - phi.real * np.sin(xt)) / t[None]
            r, e = gk15_reduce(vals, aa, bb)
            res[:, i : i + step] = r
            perr[i : i + step] = e.max(axis=0)
        budget = tol / max(n_start, a.size)
        good = perr <= budget
        total += res[:, good].sum(axis=1)
        err_total += perr[good].sum()
        if good.all():
            return total, err_total
        a_bad, b_bad = a[~good], b[~good]
        if a.size + a_bad.size > max_panels or np.any(b_bad - a_bad < 1e-12 * b_bad):
            total += res[:, ~good].sum(axis=1)
            err_total += perr[~good].sum()
            return total, err_total
        mid = 0.5 * (a_bad + b_bad)
        a = np.concatenate([a_bad, mid])
        b = np.concatenate([mid, b_bad])
        order = np.argsort(a)
        a, b = a[order], b[order]
    total += res[:, ~good].sum(axis=1)
    return total, err_total + perr[~good].sum()


def _tail(src, T, x, col):
    """Asymptotic tail of int_T^inf Im(e^{-jtx} phi(t))/t dt.

    phi is treated as locally A e^{j theta' t}; two integration-by-parts
    terms of the 1/t amplitude are kept.
    """
    delta = min(1e-4 / x.max(), 1e-4 * T)
    ph = src.points(np.array([T - delta, T, T + delta]))[:, col]
    with np.errstate(divide="ignore", invalid="ignore"):
        theta_dot = ((ph[2] - ph[0]) / (2 * delta) / ph[1]).imag
        nu = theta_dot - x
        q = np.exp(-1j * T * x) * ph[1] / T
        out = (q * (1j / nu + 1.0 / (nu * nu * T))).imag
    return np.where(np.isfinite(out), out, 0.0)


def _group_integral(src, x, col, ts, quad, ts_hi=None):
    """Gil-Pelaez integral for targets x that share one octave.

    ``ts`` sets the start of the t-range and ``ts_hi`` (default ``ts``) the
    truncation cap.
    """
    x_hi = x.max()
    x_lo = x.min()
    period = 2 * math.pi / 2.0 ** math.ceil(math.log2(x_hi))  # one period of e^{-j t x_hi} or less
    tol = math.pi * quad.abs_tol
    t_lo = quad.t_min * ts
    cap = quad.truncation_t_max * (ts if ts_hi is None else ts_hi)
    tail_tol = tol * 1e-2
    used = np.unique(col)

    T = 2.0 * ts
    edges = _breaks(t_lo, T, period)
    I, qerr = _integrate(src, edges[:-1], edges[1:], x, col, tol / 4, quad.max_subdivisions)
    prev = est = None
    while True:
        probe = np.abs(src.points(np.array([T, 1.13 * T, 1.29 * T]))[:, used])
        if probe.max() <= tail_tol:
            return I, qerr
        if T * x_lo >= _OSC_PERIODS:
            est = I + _tail(src, T, x, col)
            if prev is not None:
                terr = float(np.max(np.abs(est - prev)))
                if qerr + terr <= tol:
                    return est, qerr + terr
            prev = est
        if 2 * T > cap:
            bound = float(np.max(np.abs(est - prev))) if prev is not None else float(probe.max())
            raise QuadratureError(
                "Gil-Pelaez integral did not converge before truncation limit",
                estimate=0.5 - (I / math.pi),
                error_bound=(qerr + bound) / math.pi,
            )
        edges = _breaks(T, 2 * T, period)
        dI, derr = _integrate(src, edges[:-1], edges[1:], x, col, tol / 8, quad.max_subdivisions)
        I = I + dI
        qerr += derr
        T *= 2


def _invert_pairs(src, x, col, mu, ts, quad, ts_hi=None):
    """F_col(x) for every pair, unclamped."""
    out = np.empty(x.size)
    t_lo = quad.t_min * ts
    octave = np.ceil(np.log2(x)).astype(int)
    for k in np.unique(octave):
        sel = octave == k
        used, local = np.unique(col[sel], return_inverse=True)
        I, _ = _group_integral(src.subset(used), x[sel], local, ts, quad, ts_hi)
        I = I + (mu[col[sel]] - x[sel]) * t_lo  # small-t series
        out[sel] = 0.5 - I / math.pi
    return out


def _clamp(out, w, quad):
    """Clip to [0, 1] and take the running max along sorted w.

    Neither step can move an estimate away from a true CDF, so the error
    bound is kept while the output is a valid CDF on the grid.
    """
    residual = np.maximum(out - 1.0, 0.0) + np.maximum(-out, 0.0)
    if residual.max(initial=0.0) > quad.abs_tol:
        log.debug("CDF clamped; largest overshoot %.3g", residual.max())
    out = np.clip(out, 0.0, 1.0)
    order = np.argsort(w, kind="stable")
    out[order] = np.maximum.accumulate(out[order])
    return out


def cdf(cf: CfHandle, w, quad: QuadratureSpec = CDF_QUAD):
    """CDF at w > 0 (scalar or array), clamped to [0, 1]."""
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(~(w_arr > 0)):
        raise ValueError("w must be positive")
    ts = decay_scale(cf)
    t_lo = quad.t_min * ts
    mu = cf.mean if cf.mean is not None else cf(np.array([t_lo]))[0].imag / t_lo
    flat = w_arr.ravel()
    out = _invert_pairs(_Single(cf), flat, np.zeros(flat.size, int), np.array([mu]), ts, quad)
    out = _clamp(out, w_arr.ravel(), quad).reshape(w_arr.shape)
    return float(out[0]) if np.ndim(w) == 0 else out


def mixture_cf(cf_family, nodes, weights, scale=None, mean=None):
    """CF of a variable whose law is mixed over r with a discrete rule."""
    r = np.asarray(nodes, dtype=float)
    wr = np.asarray(weights, dtype=float)

    def ev(t):
        t = np.asarray(t, dtype=float)
        return np.asarray(cf_family(t[:, None], r[None, :])) @ wr

    return CfHandle(ev, scale=scale, mean=mean)


def _family_scales(src):
    """Powers of two t where the first and the last column of the family
    reach |1 - phi| = 1/2."""

    def dev(t):
        return np.abs(1.0 - src.points(np.array([t])))[0]

    def first(test):
        t = 1.0
        if test(dev(t)):
            while t > 1e-300 and test(dev(t / 2)):
                t /= 2
            return t
        while not test(dev(t)):
            t *= 2
            if t > 1e300:
                raise QuadratureError("characteristic function never departs from 1")
        return t

    return first(lambda d: d.max() >= 0.5), first(lambda d: d.min() >= 0.5)


def cdf_conditioned(cf_family, weight_pdf=None, w=None, quad: QuadratureSpec = CDF_QUAD, *,
                    support=None, nodes=None, weights=None, n=16, shift=None, rule=None,
                    laplace=None, scale=None):
    """CDF of X where X | R=r has CF ``cf_family(t, r)`` and R has ``weight_pdf``.

    The r-law is given by ``weight_pdf`` with ``support`` (finite panel
    edges), by an explicit rule ``nodes``/``weights``, or by ``rule(w)``
    returning a rule adapted to each w.

    Without ``shift`` the r-average is moved inside the t-integral (Fubini),
    so one inversion of the mixed CF replaces an r-integral of inversions.

    With ``shift``, X = shift(R) + Y_R where ``cf_family`` is the CF of Y_r
    alone and Y_r >= 0.  Then F(w) = E[F_Y(w - shift(R) | R)], and pairs
    with w <= shift(r) contribute nothing.  This avoids inverting a CF that
    oscillates at the frequency of a large deterministic shift.

    ``laplace(s, r)`` (real s > 0) with a typical size ``scale`` of Y lets
    pairs be skipped when the Chernoff bound min_s e^{sx} L(s, r) shows
    their contribution is below the absolute tolerance.
    """
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(~(w_arr > 0)):
        raise ValueError("w must be positive")
    if rule is None:
        if nodes is None:
            if weight_pdf is None or support is None:
                raise ValueError("need weight_pdf with support, nodes and weights, or rule")
            r, wr = gauss_legendre_panels(np.asarray(support, dtype=float), n)
            wr = wr * weight_pdf(r)
        else:
            r, wr = np.asarray(nodes, float), np.asarray(weights, float)
        if shift is None:
            return cdf(mixture_cf(cf_family, r, wr), w, quad)

        def rule(_):
            return r, wr

    elif shift is None:
        raise ValueError("a per-w rule needs a shift")

    flat = w_arr.ravel()
    owner, rs, ws, xs = [], [], [], []
    for i, wi in enumerate(flat):
        r, wr = rule(wi)
        r, wr = np.asarray(r, float), np.asarray(wr, float)
        x = wi - np.asarray(shift(r), float)
        keep = (x > 0) & (wr != 0)
        owner.append(np.full(int(keep.sum()), i))
        rs.append(r[keep])
        ws.append(wr[keep])
        xs.append(x[keep])
    owner, rs, ws, xs = (np.concatenate(v) for v in (owner, rs, ws, xs))
    out = np.zeros(flat.size)
    if laplace is not None and rs.size:
        cols, col = np.unique(rs, return_inverse=True)
        sk = np.exp2(np.arange(13)) / scale
        logL = np.log(np.maximum(np.real(laplace(sk[:, None], cols[None, :])), 1e-300))
        bound = np.exp(np.minimum(np.min(sk[:, None] * xs[None, :] + logL[:, col], axis=0), 0.0))
        keep = ws * bound > quad.abs_tol * 1e-2
        owner, rs, ws, xs = owner[keep], rs[keep], ws[keep], xs[keep]
    if rs.size:
        cols, col = np.unique(rs, return_inverse=True)
        src = _Family(cf_family, cols)
        ts, ts_hi = _family_scales(src)
        t_lo = quad.t_min * ts
        mu = src.points(np.array([t_lo]))[0].imag / t_lo
        Fy = np.clip(_invert_pairs(src, xs, col, mu, ts, quad, ts_hi), 0.0, 1.0)
        np.add.at(out, owner, ws * Fy)
    out = _clamp(out, w_arr.ravel(), quad).reshape(w_arr.shape)
    return float(out[0]) if np.ndim(w) == 0 else out


def quantile(cdf_fn, q, bracket, rel_width=1e-4):
    """Bisection for cdf_fn(w) = q inside ``bracket``."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise BracketError("bracket must satisfy 0 < lo < hi")
    f_lo, f_hi = cdf_fn(lo), cdf_fn(hi)
    if not f_lo < q < f_hi:
        raise BracketError(f"cdf({lo:g})={f_lo:.6g}, cdf({hi:g})={f_hi:.6g} do not straddle {q}")
    while (hi - lo) > rel_width * hi:
        mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
        if cdf_fn(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_bracket(cdf_fn, q, start, factor=4.0, max_steps=60):
    """Expand geometrically from ``start`` until [lo, hi] straddles q."""
    lo = hi = float(start)
    f = cdf_fn(lo)
    steps = 0
    if f < q:
        while f < q and steps < max_steps:
            lo, hi = hi, hi * factor
            f = cdf_fn(hi)
            steps += 1
    else:
        while f >= q and steps < max_steps:
            hi, lo = lo, lo / factor
            f = cdf_fn(lo)
            steps += 1
    if steps == max_steps:
        raise BracketError("could not bracket the quantile")
    return lo, hi
