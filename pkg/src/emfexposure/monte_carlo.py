"""Monte Carlo ground truth for exposure and SINR.

A realization samples base stations and users on a disc around the
observer at the origin.  ``sampling`` selects one of three modes:

``"plain"``
    Every point of the window, exact in law.
``"thinned"``
    Far-field users are subsampled (below).  Means stay exact; the law of
    EI changes only through the far field, which carries a tiny, nearly
    deterministic share.  This is the mode for distributions.
``"importance"``
    Tuned for unbiased means rather than for joint laws:

* Near-field importance sampling.  Inside a disc holding about NEAR_COUNT
  points the counts keep their Poisson law but positions are drawn from the
  defensive mixture (1 - THETA) uniform + THETA g, with g proportional to
  max(r, d_min)^-beta in area.  Each such point carries its likelihood
  ratio p/q, and sums over points are weighted pointwise (Campbell).  For a
  sparse BS field most of the mean comes from rare BSs within a few metres,
  so without this the mean is barely estimable.
* Users associate with, and clusters sit on, an independent plain copy of
  the BS field; only the exposure sum over BSs uses the importance-sampled
  copy.  A user's power therefore has its true law.
* Far-field thinning.  Users in geometric shells are subsampled to about
  SHELL_BUDGET per shell and carry a Horvitz-Thompson weight 1/q.

Distributions (CDFs, quantiles) are only available from the first two
modes.

Sources closer than d_min are excluded from exposure sums, matching the
lower limit of the analytic integrals.  Sources beyond the window are
replaced by their mean exposure, a constant: at the default window that
constant is small next to the mean EI but comparable to its median, while
its own fluctuation is below one percent.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .core_types import ExposureBreakdown, NetworkParams, ObserverKind, UserModel, normalized_noise, validate
from .exposure_moments import MeanReport
from .point_process import PointSet, uniform_in_annulus, uniform_in_disc
from .power_control import mean_tx_power_cluster, mean_tx_power_ppp, tx_power

THETA = 0.8
NEAR_COUNT = 16.0  # expected points in the importance-sampled disc
SHELL_BUDGET = 1000
COVERAGE_WINDOW = 5000.0
FOUR_PI = 4.0 * math.pi
Z95 = 1.959963984540054


# --- near-field proposal -----------------------------------------------------


def _g_masses(R, d, beta):
    if R <= d:
        return R * R * d ** (-beta) / 2, 0.0
    return d ** (2 - beta) / 2, (d ** (2 - beta) - R ** (2 - beta)) / (beta - 2)


def _g_radius(n, R, d, beta, rng):
    """Radii with density proportional to r max(r, d)^-beta on [0, R]."""
    a1, a2 = _g_masses(R, d, beta)
    u = rng.random(n)
    inner = rng.random(n) < a1 / (a1 + a2)
    r = np.empty(n)
    r[inner] = min(R, d) * np.sqrt(u[inner])
    if a2 > 0:
        lo, hi = d ** (2 - beta), R ** (2 - beta)
        r[~inner] = (lo - u[~inner] * (lo - hi)) ** (1.0 / (2 - beta))
    return r


def _g_areal(r, R, d, beta):
    a1, a2 = _g_masses(R, d, beta)
    return np.where(r <= R, np.maximum(r, d) ** (-beta) / (2 * math.pi * (a1 + a2)), 0.0)


def _mixture_points(n, center, R_base, R_g, params, rng):
    """n points whose target law is uniform in B(center, R_base).

    Returns (xy, likelihood ratios).
    """
    d, beta = params.d_min, params.beta
    from_g = rng.random(n) < THETA
    xy = np.asarray(center, float) + uniform_in_disc(n, R_base, rng)
    k = int(from_g.sum())
    if k:
        r = _g_radius(k, R_g, d, beta, rng)
        th = rng.uniform(0, 2 * math.pi, k)
        xy[from_g] = np.column_stack([r * np.cos(th), r * np.sin(th)])
    inside = np.hypot(*(xy - center).T) < R_base
    p = np.where(inside, 1.0 / (math.pi * R_base**2), 0.0)
    q = (1 - THETA) * p + THETA * _g_areal(np.hypot(*xy.T), R_g, d, beta)
    return xy, p / q


def _near_radius(density, params):
    return max(math.sqrt(NEAR_COUNT / (math.pi * density)), 2.0 * params.d_min)


def _shells(r_in, r_out):
    edges = [r_in]
    while edges[-1] < r_out:
        edges.append(min(2 * edges[-1], r_out))
    return np.array(edges)


# --- realizations ---------------------------------------------------------------


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled network around an observer at the origin.

    ``user_weight`` is the thinning weight of each retained user and
    ``user_lr`` its importance ratio.  ``exposure_bs`` (with ratios
    ``exposure_lr``) replaces ``bs`` in BS exposure sums when set.
    """

    params: NetworkParams
    model: UserModel
    observer: ObserverKind
    bs: PointSet
    user_xy: np.ndarray
    serving_idx: np.ndarray
    serving_dist: np.ndarray
    tx_power: np.ndarray
    active: np.ndarray
    user_weight: np.ndarray
    cluster_id: np.ndarray
    observer_serving_idx: int | None = None
    observer_serving_dist: float | None = None
    palm_center: np.ndarray | None = None
    user_lr: np.ndarray | None = None
    exposure_bs: np.ndarray | None = None
    exposure_lr: np.ndarray | None = None
    beyond_window: tuple = (0.0, 0.0)  # mean (ei_bs, ei_ul_u) from outside the window

    @property
    def thinned(self):
        return bool(np.any(self.user_weight != 1.0))

    def exposure_sources(self):
        """(distances, likelihood ratios) of the BSs seen by the observer."""
        if self.exposure_bs is None:
            return self.bs.radii, np.ones(len(self.bs.points))
        return np.hypot(*self.exposure_bs.T), self.exposure_lr


def _sample_bs(P, W, rng, vr):
    """Returns (xy, per-point likelihood ratios)."""
    if not vr:
        xy = uniform_in_disc(rng.poisson(P.lambda_b * math.pi * W**2), W, rng)
        return xy, np.ones(len(xy))
    Rn = min(W, _near_radius(P.lambda_b, P))
    near, lr = _mixture_points(rng.poisson(P.lambda_b * math.pi * Rn**2), np.zeros(2), Rn, Rn, P, rng)
    far = uniform_in_annulus(rng.poisson(P.lambda_b * math.pi * (W**2 - Rn**2)), Rn, W, rng)
    return np.vstack([near, far]), np.concatenate([lr, np.ones(len(far))])


def _ppp_users(P, W, rng, thin, vr):
    """Returns (xy, thinning weight, per-point likelihood ratio)."""
    lam = P.lambda_u
    if lam == 0:
        return np.empty((0, 2)), np.empty(0), np.empty(0)
    if not thin:
        xy = uniform_in_disc(rng.poisson(lam * math.pi * W**2), W, rng)
        return xy, np.ones(len(xy)), np.ones(len(xy))
    Rn = min(W, _near_radius(lam, P))
    n_near = rng.poisson(lam * math.pi * Rn**2)
    if vr:
        near, lr = _mixture_points(n_near, np.zeros(2), Rn, Rn, P, rng)
    else:
        near, lr = uniform_in_disc(n_near, Rn, rng), np.ones(n_near)
    parts, weights = [near], [np.ones(len(near))]
    edges = _shells(Rn, W)
    for a, b in zip(edges[:-1], edges[1:]):
        expected = lam * math.pi * (b * b - a * a)
        q = min(1.0, SHELL_BUDGET / expected)
        pts = uniform_in_annulus(rng.poisson(expected * q), a, b, rng)
        parts.append(pts)
        weights.append(np.full(len(pts), 1.0 / q))
    xy = np.vstack(parts)
    return xy, np.concatenate(weights), np.concatenate([lr, np.ones(len(xy) - len(lr))])


def _cluster_users(P, centers, W, rng, thin, vr):
    """Users of every cluster.

    Returns (xy, thinning weight, cluster id, per-point likelihood ratio).
    """
    lam = P.lambda_cu
    m_full = lam * math.pi * P.r_c**2
    n_c = len(centers)
    if lam == 0 or n_c == 0:
        return np.empty((0, 2)), np.empty(0), np.empty(0, int), np.empty(0)
    dist = np.hypot(*centers.T)
    q = np.ones(n_c)
    Rn = _near_radius(lam, P) if thin else 0.0
    if thin:
        edges = _shells(max(Rn + P.r_c, 4 * P.r_c), W + P.r_c)
        rate = P.lambda_c * m_full
        for a, b in zip(edges[:-1], edges[1:]):
            sel = (dist >= a) & (dist < b)
            q[sel] = min(1.0, SHELL_BUDGET / (rate * math.pi * (b * b - a * a)))
    counts = rng.poisson(m_full * q)
    ids = np.repeat(np.arange(n_c), counts)
    xy = centers[ids] + uniform_in_disc(len(ids), P.r_c, rng)
    wts = 1.0 / q[ids]
    if vr:
        keep = np.hypot(*xy.T) >= Rn
        xy, wts, ids = xy[keep], wts[keep], ids[keep]
        parts, pw, pid, plr = [xy], [wts], [ids], [np.ones(len(xy))]
        for i in np.flatnonzero(dist < P.r_c + Rn):
            pts, lr = _mixture_points(rng.poisson(lam * math.pi * Rn**2), np.zeros(2), Rn, Rn, P, rng)
            inside = np.hypot(*(pts - centers[i]).T) < P.r_c
            parts.append(pts[inside])
            pw.append(np.ones(int(inside.sum())))
            pid.append(np.full(int(inside.sum()), i))
            plr.append(lr[inside])
        xy, wts, ids = np.vstack(parts), np.concatenate(pw), np.concatenate(pid)
        lrs = np.concatenate(plr)
    else:
        lrs = np.ones(len(xy))
    inside_w = np.hypot(*xy.T) <= W
    return xy[inside_w], wts[inside_w], ids[inside_w], lrs[inside_w]


SAMPLING_MODES = ("plain", "thinned", "importance")


def realize(params: NetworkParams, model=UserModel.PPP, observer=ObserverKind.PASSIVE, rng=None, *,
            sampling="importance", window_radius=None) -> NetworkRealization:
    """Sample one network with the observer at the origin."""
    P = params if params.window_radius is not None else validate(params, model)
    model = UserModel.parse(model)
    observer = ObserverKind.parse(observer)
    rng = rng if rng is not None else np.random.default_rng()
    W = float(window_radius or P.window_radius)
    if sampling not in SAMPLING_MODES:
        raise ValueError(f"sampling must be one of {SAMPLING_MODES}")
    vr = sampling == "importance"
    thin = sampling != "plain"
    bs = _sample_bs(P, W, rng, False)[0]
    exp_bs = exp_lr = None
    if vr:
        exp_bs, exp_lr = _sample_bs(P, W, rng, True)
    palm = None
    if model is UserModel.PPP:
        xy, uw, u_lr = _ppp_users(P, W, rng, thin, vr)
        cid = np.full(len(xy), -1)
    else:
        if model is UserModel.MCP2:
            palm = uniform_in_disc(1, P.r_c, rng)
            bs = np.vstack([bs, palm])
            centers = bs
            if vr:
                # the observer's own cluster-centre BS, importance sampled
                c, lr = _mixture_points(1, np.zeros(2), P.r_c, P.r_c, P, rng)
                exp_bs, exp_lr = np.vstack([exp_bs, c]), np.concatenate([exp_lr, lr])
        else:
            palm = uniform_in_disc(1, P.r_c, rng)
            others = uniform_in_disc(rng.poisson(P.lambda_c * math.pi * (W + P.r_c) ** 2), W + P.r_c, rng)
            centers = np.vstack([others, palm])
        xy, uw, cid, u_lr = _cluster_users(P, centers, W, rng, thin, vr)
        palm = palm[0]
    active = rng.random(len(xy)) < P.p_a
    obs_idx = obs_dist = None
    if model is UserModel.MCP2:
        serving = cid.copy()
        dist = np.hypot(*(xy - bs[serving]).T) if len(xy) else np.empty(0)
        if observer is ObserverKind.ACTIVE:
            obs_idx, obs_dist = len(bs) - 1, float(np.hypot(*palm))
    else:
        if len(bs) == 0 and (len(xy) or observer is ObserverKind.ACTIVE):
            raise RuntimeError("no base station in the window")
        dist, serving = np.empty(0), np.empty(0, int)
        if len(bs):
            tree = cKDTree(bs)
            if len(xy):
                dist, serving = tree.query(xy)
            if observer is ObserverKind.ACTIVE:
                dd, ii = tree.query(np.zeros(2))
                obs_idx, obs_dist = int(ii), float(dd)
    return NetworkRealization(
        params=P, model=model, observer=observer, bs=PointSet(bs, W), user_xy=xy,
        serving_idx=np.asarray(serving, int), serving_dist=np.asarray(dist, float),
        tx_power=np.asarray(tx_power(dist, P), float).reshape(-1), active=active, user_weight=uw,
        cluster_id=cid, observer_serving_idx=obs_idx, observer_serving_dist=obs_dist,
        palm_center=palm, user_lr=u_lr, exposure_bs=exp_bs, exposure_lr=exp_lr,
        beyond_window=beyond_window_mean(P, model, W),
    )


# --- measurements ------------------------------------------------------------------


def _gain(r, d, beta):
    with np.errstate(divide="ignore"):
        return np.where(r >= d, np.maximum(r, d) ** (-beta), 0.0)


@lru_cache(maxsize=32)
def beyond_window_mean(params: NetworkParams, model, window_radius):
    """Mean (ei_bs, ei_ul_u) from sources farther than ``window_radius``."""
    P = params
    model = UserModel.parse(model)
    tail = 2 * math.pi * window_radius ** (2 - P.beta) / (P.beta - 2) / FOUR_PI
    bs = P.sar_dl * P.rho_b * P.G_b * P.lambda_b * tail
    if model is UserModel.PPP:
        flux = P.lambda_u * P.p_a * mean_tx_power_ppp(P)
    else:
        p_bar = mean_tx_power_ppp(P) if model is UserModel.MCP1 else mean_tx_power_cluster(P)
        flux = P.lambda_c * P.mean_cluster_size * p_bar
    return bs, P.sar_dl * flux * tail


def measure_ei(real: NetworkRealization, observer=None, rng=None, *, fading=True) -> ExposureBreakdown:
    """Exposure at the origin.  ``fading=False`` sets every H to its mean,
    giving E[EI | positions]."""
    P = real.params
    observer = real.observer if observer is None else ObserverKind.parse(observer)
    if observer is ObserverKind.ACTIVE and real.observer_serving_dist is None:
        raise ValueError("realization has no active observer")
    rng = rng if rng is not None else np.random.default_rng()
    gb = _gain(real.exposure_sources()[0], P.d_min, P.beta)
    act = real.active
    gu = _gain(np.hypot(*real.user_xy[act].T), P.d_min, P.beta) * real.tx_power[act] * real.user_weight[act]
    if fading:
        gb = gb * rng.exponential(size=gb.size)
        gu = gu * rng.exponential(size=gu.size)
    w_b = P.rho_b * P.G_b * gb.sum() / FOUR_PI
    w_u = gu.sum() / FOUR_PI
    tr = P.sar_ul * float(tx_power(real.observer_serving_dist, P)) if observer is ObserverKind.ACTIVE else 0.0
    far_b, far_u = real.beyond_window
    return ExposureBreakdown(P.sar_dl * w_b + far_b, P.sar_dl * w_u + far_u, tr)


def mean_ei_given_positions(real: NetworkRealization) -> ExposureBreakdown:
    """E[EI | positions] with each point scaled by its own likelihood ratio.

    Averaging over trials gives unbiased means of every component.
    """
    P = real.params
    u_lr = real.user_lr if real.user_lr is not None else np.ones(len(real.user_xy))
    radii, b_lr = real.exposure_sources()
    gb = _gain(radii, P.d_min, P.beta) @ b_lr
    act = real.active
    gu = _gain(np.hypot(*real.user_xy[act].T), P.d_min, P.beta) * real.tx_power[act] * real.user_weight[act]
    w_b = P.rho_b * P.G_b * gb / FOUR_PI
    w_u = float(gu @ u_lr[act]) / FOUR_PI
    tr = 0.0
    if real.observer is ObserverKind.ACTIVE:
        tr = P.sar_ul * float(tx_power(real.observer_serving_dist, P))
    far_b, far_u = real.beyond_window
    return ExposureBreakdown(P.sar_dl * w_b + far_b, P.sar_dl * w_u + far_u, tr)


def pick_interferers(real: NetworkRealization, rng):
    """One active user per foreign cell, uniform within the cell."""
    act = np.flatnonzero(real.active)
    act = act[real.serving_idx[act] != real.observer_serving_idx]
    perm = act[rng.permutation(len(act))]
    _, first = np.unique(real.serving_idx[perm], return_index=True)
    return perm[first]


def sinr_over_eta(real: NetworkRealization, rng, etas):
    """Uplink SINR at the tagged BS for several eta with shared fading."""
    if real.observer_serving_dist is None:
        raise ValueError("SINR needs an active observer")
    if real.thinned:
        raise ValueError("SINR needs an unthinned realization")
    P = real.params
    tagged = real.bs.points[real.observer_serving_idx]
    idx = pick_interferers(real, rng)
    D = np.hypot(*(real.user_xy[idx] - tagged).T)
    h0 = rng.exponential()
    h = rng.exponential(size=idx.size)
    noise = normalized_noise(P)
    R = real.observer_serving_dist
    out = []
    for eta in np.atleast_1d(etas):
        Q = P.replace(eta=float(eta))
        signal = P.G_b * tx_power(R, Q) * h0 * R ** (-P.alpha)
        interference = float(np.sum(tx_power(real.serving_dist[idx], Q) * h * D ** (-P.alpha)))
        out.append(signal / (noise + interference))
    return np.array(out)


def measure_sinr(real: NetworkRealization, rng=None) -> float:
    rng = rng if rng is not None else np.random.default_rng()
    return float(sinr_over_eta(real, rng, [real.params.eta])[0])


# --- aggregation ---------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sample sorted ascending; cdf(x) = rank / n."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.sort(np.asarray(self.values, dtype=float).ravel()))

    @property
    def count(self):
        return self.values.size

    def cdf(self, x):
        out = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.count
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        k = np.ceil(q * self.count - 1e-9).astype(int) - 1
        out = self.values[np.clip(k, 0, self.count - 1)]
        return float(out) if out.ndim == 0 else out

    def mean(self):
        return float(self.values.mean())

    def mean_ci(self):
        """95% normal-approximation half-width of the mean."""
        if self.count < 2:
            return math.inf
        return Z95 * float(self.values.std(ddof=1)) / math.sqrt(self.count)

    def cdf_ci(self, x):
        F = self.cdf(x)
        return Z95 * np.sqrt(F * (1 - F) / self.count)

    def quantile_ci(self, q):
        """Half-width in value of the q-quantile, via the CDF band."""
        h = Z95 * math.sqrt(q * (1 - q) / self.count)
        lo, hi = self.quantile(max(q - h, 0.0)), self.quantile(min(q + h, 1.0))
        return 0.5 * (hi - lo)


COMPONENTS = ("ei_bs", "ei_ul_u", "ei_ul_tr", "ei_total")


@dataclass
class MCResult:
    """Per-trial measurements.  ``faded`` holds EI with fresh fading;
    ``conditional`` the fading-averaged components used for means."""

    params: NetworkParams
    model: UserModel
    observer: ObserverKind
    n_trials: int
    master_seed: int
    sampling: str
    faded: np.ndarray  # (n, 4)
    conditional: np.ndarray  # (n, 3)
    sinr: np.ndarray | None = None

    @property
    def distributions(self) -> dict:
        if self.sampling == "importance":
            raise ValueError("distributions need plain or thinned sampling")
        return {c: EmpiricalDistribution(self.faded[:, k]) for k, c in enumerate(COMPONENTS)}

    @property
    def means(self) -> MeanReport:
        cols = [EmpiricalDistribution(self.conditional[:, k]) for k in range(3)]
        total = EmpiricalDistribution(self.conditional.sum(axis=1))
        ci = {c: d.mean_ci() for c, d in zip(COMPONENTS, [*cols, total])}
        return MeanReport(*(d.mean() for d in cols), ci=ci)

    @property
    def sinr_distribution(self):
        return None if self.sinr is None else EmpiricalDistribution(self.sinr)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "observer", *COMPONENTS, "sinr_db"])
            for i in range(self.n_trials):
                s = "" if self.sinr is None else repr(float(10 * np.log10(self.sinr[i])))
                w.writerow([i, self.observer.value, *(repr(float(x)) for x in self.faded[i]), s])


def trial_rng(master_seed, i):
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(i,)))


def _run_chunk(args):
    params, model, observer, seed, indices, sampling, with_sinr = args
    out = []
    for i in indices:
        rng = trial_rng(seed, i)
        real = realize(params, model, observer, rng, sampling=sampling)
        rb = mean_ei_given_positions(real)
        fd = measure_ei(real, rng=rng)
        s = math.nan
        if with_sinr:
            sreal = realize(params, model, ObserverKind.ACTIVE, rng, sampling="plain",
                            window_radius=min(COVERAGE_WINDOW, params.window_radius))
            s = measure_sinr(sreal, rng)
        out.append(((fd.ei_bs, fd.ei_ul_u, fd.ei_ul_tr, fd.total), (rb.ei_bs, rb.ei_ul_u, rb.ei_ul_tr), s))
    return out


def worker_count(workers=None):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("EMF_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


def _map_trials(fn, make_args, n_trials, workers):
    n_w = worker_count(workers)
    n_chunks = min(n_trials, max(1, 4 * n_w))
    chunks = [c.tolist() for c in np.array_split(np.arange(n_trials), n_chunks)]
    if n_w == 1:
        parts = [fn(make_args(c)) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=n_w) as pool:
            parts = list(pool.map(fn, [make_args(c) for c in chunks]))
    return [row for part in parts for row in part]


def run(params: NetworkParams, model=UserModel.PPP, observer=ObserverKind.PASSIVE, n_trials=10_000,
        master_seed=0, *, workers=None, sampling="importance", sinr=False) -> MCResult:
    """Independent trials; trial i draws from the stream (master_seed, i)."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    model = UserModel.parse(model)
    observer = ObserverKind.parse(observer)
    if sinr and observer is not ObserverKind.ACTIVE:
        raise ValueError("SINR is measured for active observers")
    P = validate(params, model)
    rows = _map_trials(_run_chunk, lambda c: (P, model, observer, master_seed, c, sampling, sinr),
                       n_trials, workers)
    faded = np.array([r[0] for r in rows])
    cond = np.array([r[1] for r in rows])
    s = np.array([r[2] for r in rows]) if sinr else None
    return MCResult(P, model, observer, n_trials, master_seed, sampling, faded, cond, s)


# --- coverage oracle --------------------------------------------------------------


def _coverage_chunk(args):
    params, model, seed, indices, etas, window = args
    out = []
    for i in indices:
        rng = trial_rng(seed, i)
        real = realize(params, model, ObserverKind.ACTIVE, rng, sampling="plain", window_radius=window)
        out.append(sinr_over_eta(real, rng, etas))
    return out


@dataclass(frozen=True)
class CoverageEstimate:
    etas: np.ndarray
    gamma: float
    sinr: np.ndarray  # (n_trials, n_eta)

    @property
    def coverage(self):
        return (self.sinr > self.gamma).mean(axis=0)

    @property
    def ci(self):
        p = self.coverage
        return Z95 * np.sqrt(p * (1 - p) / self.sinr.shape[0])


def coverage_mc(params: NetworkParams, model=UserModel.PPP, etas=(0.2, 0.4, 0.6, 0.8, 1.0), n_trials=10_000,
                master_seed=0, *, gamma=None, window_radius=COVERAGE_WINDOW, workers=None) -> CoverageEstimate:
    """Empirical P(SINR > gamma) per eta; realizations are shared across eta."""
    model = UserModel.parse(model)
    P = validate(params, model)
    etas = np.asarray(etas, dtype=float)
    rows = _map_trials(_coverage_chunk, lambda c: (P, model, master_seed, c, etas, window_radius), n_trials, workers)
    return CoverageEstimate(etas, P.gamma if gamma is None else gamma, np.array(rows))


def other_active_count_mc(params: NetworkParams, n_users=1_000_000, rng=None):
    """Mean number of other active users in the cluster of a uniformly
    chosen active user (the Palm count)."""
    rng = rng if rng is not None else np.random.default_rng()
    m_full = params.lambda_cu * math.pi * params.r_c**2
    total, picked = 0.0, 0
    while picked < n_users:
        sizes = rng.binomial(rng.poisson(m_full, size=100_000), params.p_a)
        # a uniformly chosen active user lands in cluster i with probability ~ size_i
        total += float(np.sum(sizes * np.maximum(sizes - 1, 0)))
        picked += int(sizes.sum())
    return total / picked
