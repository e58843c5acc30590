"""Small-window Monte Carlo estimates of Laplace transforms.

Fading is integrated out per realization (a product of 1/(1 + x g)), and
the field beyond the window enters through its mean, exp(-x E[far]).  The
samplers here are deliberately independent of the package's own.
"""

import math

import numpy as np
from scipy.spatial import cKDTree

from emfexposure.power_control import mean_tx_power_cluster, mean_tx_power_ppp, tx_power

FOUR_PI = 4 * math.pi


def disc(n, radius, rng, center=(0.0, 0.0)):
    r = radius * np.sqrt(rng.random(n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)]) + np.asarray(center)


def annulus(n, r_in, r_out, rng):
    r = np.sqrt(rng.uniform(r_in**2, r_out**2, n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def gain(xy, P):
    r = np.hypot(*np.atleast_2d(xy).T)
    return np.where(r >= P.d_min, np.maximum(r, P.d_min) ** -P.beta, 0.0)


def far_mean(density_times_mark, R, P):
    """Mean of sum mark * r^-beta over a PPP outside radius R."""
    return density_times_mark * 2 * math.pi * R ** (2 - P.beta) / (P.beta - 2)


def cond_lt(x, terms):
    """prod over terms of 1/(1 + x t) for each x in the grid."""
    return np.exp(-np.log1p(np.outer(x, terms)).sum(axis=1))


class Oracle:
    """Draws networks around an observer at the origin.

    ``model`` in {"ppp", "mcp1", "mcp2"}; user marks are p(serving distance)
    per user.  ``r_u`` conditions the observer's serving BS to that distance.
    """

    def __init__(self, P, model="ppp", r_bs=8000.0, r_users=2000.0):
        self.P, self.model = P, model
        self.r_bs, self.r_users = r_bs, r_users

    def bs_field(self, rng, r_u=None):
        P = self.P
        if r_u is None:
            return disc(rng.poisson(P.lambda_b * math.pi * self.r_bs**2), self.r_bs, rng)
        n = rng.poisson(P.lambda_b * math.pi * (self.r_bs**2 - r_u**2))
        return annulus(n, r_u, self.r_bs, rng)

    def users(self, rng, bs, palm_center=None):
        """(user xy, powers).  MCP2 centres are the BSs themselves."""
        P, Ru = self.P, self.r_users
        if self.model == "ppp":
            xy = disc(rng.poisson(P.lambda_u * P.p_a * math.pi * Ru**2), Ru, rng)
            d = cKDTree(bs).query(xy)[0] if len(xy) else np.empty(0)
            return xy, tx_power(d, P)
        m = P.lambda_cu * P.p_a * math.pi * P.r_c**2
        if self.model == "mcp1":
            cen = disc(rng.poisson(P.lambda_c * math.pi * (Ru + P.r_c) ** 2), Ru + P.r_c, rng)
        else:
            cen = bs[np.hypot(*bs.T) < Ru + P.r_c]
        if palm_center is not None:
            cen = np.vstack([cen, palm_center])
        k = rng.poisson(m, len(cen))
        owner = np.repeat(np.arange(len(cen)), k)
        xy = cen[owner] + disc(owner.size, P.r_c, rng)
        if self.model == "mcp1":
            d = cKDTree(bs).query(xy)[0] if len(xy) else np.empty(0)
        else:
            d = np.hypot(*(xy - cen[owner]).T)
        return xy, tx_power(d, P)

    def user_far(self):
        P = self.P
        if self.model == "ppp":
            return far_mean(P.lambda_u * P.p_a * mean_tx_power_ppp(P), self.r_users, P) / FOUR_PI
        p_bar = mean_tx_power_ppp(P) if self.model == "mcp1" else mean_tx_power_cluster(P)
        m = P.lambda_cu * P.p_a * math.pi * P.r_c**2
        return far_mean(P.lambda_c * m * p_bar, self.r_users, P) / FOUR_PI

    def bs_far(self):
        P = self.P
        return far_mean(P.lambda_b * P.rho_b * P.G_b, self.r_bs, P) / FOUR_PI

    def lt(self, x, n, rng, parts=("bs", "users"), r_u=None, observer="passive"):
        """E[exp(-x (W_b + W_u))] for the selected parts (x has W units^-1).

        ``observer="active"`` adds the observer's serving BS to W_b; for
        MCP2 that BS is the Palm cluster centre.
        """
        P = self.P
        x = np.asarray(x, dtype=float)
        acc = np.zeros(x.size)
        kb = P.rho_b * P.G_b / FOUR_PI
        for _ in range(n):
            palm = disc(1, P.r_c, rng) if self.model != "ppp" else None
            if self.model == "mcp2":
                bs = self.bs_field(rng)
                bs_all = np.vstack([bs, palm])
                serving = palm
            else:
                bs = self.bs_field(rng, r_u)
                serving = None
                if r_u is not None:
                    t = rng.uniform(0, 2 * np.pi)
                    serving = np.array([[r_u * math.cos(t), r_u * math.sin(t)]])
                bs_all = bs if serving is None else np.vstack([bs, serving])
            terms = []
            if "bs" in parts:
                terms.append(kb * gain(bs, P))
                if serving is not None and (observer == "active" or self.model == "mcp2"):
                    terms.append(kb * gain(serving, P))
            if "users" in parts:
                xy, p = self.users(rng, bs_all, palm)
                terms.append(p * gain(xy, P) / FOUR_PI)
            acc += cond_lt(x, np.concatenate(terms))
        far = (self.bs_far() if "bs" in parts else 0.0) + (self.user_far() if "users" in parts else 0.0)
        return acc / n * np.exp(-x * far)
