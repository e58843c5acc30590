"""Point process samplers on a disc window and their distance laws."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # shape (n, 2), metres
    window_radius: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def radii(self):
        return np.hypot(self.points[:, 0], self.points[:, 1])


@dataclass(frozen=True)
class ClusteredPointSet:
    centers: PointSet
    offspring: list = field(default_factory=list)  # one (k_i, 2) array per centre
    palm_cluster_index: int | None = None
    r_c: float = 0.0

    @property
    def users(self):
        if not self.offspring:
            return np.empty((0, 2))
        return np.concatenate(self.offspring)

    @property
    def cluster_ids(self):
        return np.repeat(np.arange(len(self.offspring)), [len(o) for o in self.offspring])


def uniform_in_annulus(n, r_in, r_out, rng):
    r = np.sqrt(rng.uniform(r_in**2, r_out**2, size=n))
    theta = rng.uniform(0, 2 * np.pi, size=n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def uniform_in_disc(n, radius, rng):
    return uniform_in_annulus(n, 0.0, radius, rng)


def sample_ppp(density, window_radius, rng) -> PointSet:
    """Homogeneous PPP on the disc of radius ``window_radius``."""
    if density < 0:
        raise ValueError("density must be nonnegative")
    n = rng.poisson(density * math.pi * window_radius**2)
    return PointSet(uniform_in_disc(n, window_radius, rng), window_radius)


def _offspring(centers, lambda_cu, r_c, rng):
    mean = lambda_cu * math.pi * r_c**2
    counts = rng.poisson(mean, size=len(centers))
    out = []
    for c, k in zip(centers, counts):
        out.append(c + uniform_in_disc(k, r_c, rng))
    return out


def sample_mcp(lambda_c, lambda_cu, r_c, window_radius, rng, palm=False) -> ClusteredPointSet:
    """Matern cluster process; with ``palm`` one extra cluster covers the origin.

    The extra cluster is appended last and its index stored in
    ``palm_cluster_index``.
    """
    parents = sample_ppp(lambda_c, window_radius, rng).points
    palm_index = None
    if palm:
        parents = np.vstack([parents, uniform_in_disc(1, r_c, rng)])
        palm_index = len(parents) - 1
    offspring = _offspring(parents, lambda_cu, r_c, rng)
    return ClusteredPointSet(PointSet(parents, window_radius + r_c), offspring, palm_index, r_c)


def thin(points: PointSet, p_a, rng) -> PointSet:
    """Independent thinning with retention probability ``p_a``."""
    if not 0 <= p_a <= 1:
        raise ValueError("p_a must lie in [0, 1]")
    keep = rng.random(len(points)) < p_a
    return PointSet(points.points[keep], points.window_radius)


def contact_distance_pdf(r, lam):
    """Rayleigh density of the distance to the nearest PPP point."""
    r = np.asarray(r, dtype=float)
    out = np.where(r >= 0, 2 * math.pi * lam * r * np.exp(-math.pi * lam * r**2), 0.0)
    return out if out.ndim else float(out)


def conditional_cluster_distance_pdf(r2, r1, r_c):
    """Density of |U| for U uniform in a disc of radius r_c centred at distance r1."""
    r2 = np.asarray(r2, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    r2, r1 = np.broadcast_arrays(r2, r1)
    out = np.zeros(r2.shape)
    inner = (r1 < r_c) & (r2 >= 0) & (r2 <= r_c - r1)
    out = np.where(inner, 2 * r2 / r_c**2, out)
    lo = np.abs(r_c - r1)
    ring = (r2 > lo) & (r2 < r1 + r_c) & (r1 > 0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cosarg = (r2**2 + r1**2 - r_c**2) / (2 * r2 * r1)
    ang = np.arccos(np.clip(np.where(ring, cosarg, 0.0), -1.0, 1.0))
    out = np.where(ring, 2 * r2 * ang / (math.pi * r_c**2), out)
    return out if out.ndim else float(out)


def interferer_link_distance_pdf(r, D, lam):
    """Serving distance of an interferer seen at distance D from the tagged BS."""
    if np.any(np.asarray(D) <= 0):
        raise ValueError("D must be positive")
    r = np.asarray(r, dtype=float)
    norm = -np.expm1(-math.pi * lam * np.asarray(D, dtype=float) ** 2)
    inside = (r >= 0) & (r <= D)
    out = np.where(inside, 2 * math.pi * lam * r * np.exp(-math.pi * lam * r**2) / norm, 0.0)
    return out if out.ndim else float(out)


def write_points_csv(path, bs: PointSet | None = None, users=None, cluster_ids=None, centers=None):
    """Dump points as CSV with columns kind,x_m,y_m,cluster_id."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "x_m", "y_m", "cluster_id"])
        if bs is not None:
            for x, y in bs.points:
                w.writerow(["bs", repr(float(x)), repr(float(y)), ""])
        if centers is not None:
            for i, (x, y) in enumerate(np.asarray(centers).reshape(-1, 2)):
                w.writerow(["center", repr(float(x)), repr(float(y)), i])
        if users is not None:
            users = np.asarray(users).reshape(-1, 2)
            ids = cluster_ids if cluster_ids is not None else [""] * len(users)
            for (x, y), c in zip(users, ids):
                w.writerow(["user", repr(float(x)), repr(float(y)), "" if c == "" or c < 0 else int(c)])
