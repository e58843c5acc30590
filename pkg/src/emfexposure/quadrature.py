"""Fixed quadrature rules shared by the transform and inversion code."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """A numerical integral missed its tolerance.

    ``estimate`` is the value reached and ``error_bound`` the estimated
    absolute error.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_panels(edges, n):
    """Composite n-point Gauss-Legendre nodes and weights over panel edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(n)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def geometric_edges(lo, hi, per_decade):
    """Panel edges from lo to hi (both > 0) spaced evenly in log."""
    n = max(1, int(np.ceil(np.log10(hi / lo) * per_decade)))
    return np.geomspace(lo, hi, n + 1)


# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
GK_GAUSS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae
GK_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def gk15_nodes(a, b):
    """Kronrod abscissae for panels [a_i, b_i]; shape (n_panels, 15)."""
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    return 0.5 * (a + b) + 0.5 * (b - a) * GK_NODES


def gk15_reduce(values, a, b):
    """Kronrod integral and QUADPACK-style error for each panel.

    ``values`` has shape (..., n_panels, 15); the rule acts on the last axis.
    """
    half = 0.5 * (np.asarray(b, float) - np.asarray(a, float))
    resk = values @ GK_KRONROD
    resg = values @ GK_GAUSS
    mean = resk / 2.0
    resasc = np.abs(values - mean[..., None]) @ GK_KRONROD
    resabs = np.abs(values) @ GK_KRONROD
    err = np.abs(resk - resg) * half
    resasc = resasc * half
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    err = np.maximum(err, 50 * np.finfo(float).eps * resabs * half)
    return resk * half, err
