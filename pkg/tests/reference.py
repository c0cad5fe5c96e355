"""Naive reference implementations used as independent oracles.

Everything is written as plain double loops over Python scalars with exact
summation, deliberately sharing no code path with the package's vectorized
estimators. `None` marks degenerate values (the package uses NaN).
"""

import math

import numpy as np

WEIGHT_FLOOR = 1e-12
VARIANCE_FLOOR = 1e-8


def kernel_scalar(kind, z):
    az = abs(z)
    if az > 1.0:
        return 0.0
    if kind == "epanechnikov":
        return 0.75 * (1.0 - z * z)
    if kind == "uniform":
        return 0.5
    if kind == "triangular":
        return 1.0 - az
    raise ValueError(kind)


def density_ref(x_obs, points, b, kind="epanechnikov"):
    n = len(x_obs)
    return [
        math.fsum(kernel_scalar(kind, (p - xi) / b) for xi in x_obs) / (n * b)
        for p in points
    ]


def nw_ref(x_obs, y_obs, points, b, kind="epanechnikov"):
    out = []
    for p in points:
        weights = [kernel_scalar(kind, (p - xi) / b) for xi in x_obs]
        mass = math.fsum(weights)
        if mass < WEIGHT_FLOOR:
            out.append(None)
        else:
            out.append(math.fsum(w * y for w, y in zip(weights, y_obs)) / mass)
    return out


def jackknife_ref(x_obs, y_obs, points, b, kind="epanechnikov"):
    narrow = nw_ref(x_obs, y_obs, points, b, kind)
    wide = nw_ref(x_obs, y_obs, points, math.sqrt(2.0) * b, kind)
    return [
        None if (a is None or c is None) else 2.0 * a - c
        for a, c in zip(narrow, wide)
    ]


def residuals_ref(x_obs, y_obs, b, kind="epanechnikov"):
    fitted = jackknife_ref(x_obs, y_obs, x_obs, b, kind)
    return [None if f is None else y - f for y, f in zip(y_obs, fitted)]


def variance_ref(x_obs, y_obs, points, h, b, kind="epanechnikov"):
    res = residuals_ref(x_obs, y_obs, b, kind)
    kept_x = [x for x, r in zip(x_obs, res) if r is not None]
    kept_r2 = [r * r for r in res if r is not None]
    return nw_ref(kept_x, kept_r2, points, h, kind)


def v4_ref(x_obs, y_obs, lo, hi, b, h, kind="epanechnikov"):
    res = residuals_ref(x_obs, y_obs, b, kind)
    kept_x = [x for x, r in zip(x_obs, res) if r is not None]
    kept_r2 = [r * r for r in res if r is not None]
    fourths = []
    for x, r in zip(x_obs, res):
        if not lo <= x <= hi or r is None:
            continue
        s2 = nw_ref(kept_x, kept_r2, [x], h, kind)[0]
        if s2 is None or s2 < VARIANCE_FLOOR:
            continue
        fourths.append((r / math.sqrt(s2)) ** 4)
    if not fourths:
        return None
    return math.fsum(fourths) / len(fourths) - 1.0


def max_abs_normal_quantile_mc(n_points, tau, draws=10**6, seed=0, chunk=200_000):
    """Empirical upper-tau quantile of max |xi| over n_points iid normals."""
    rng = np.random.default_rng(seed)
    maxima = np.empty(draws)
    filled = 0
    while filled < draws:
        take = min(chunk, draws - filled)
        block = rng.standard_normal((take, n_points))
        maxima[filled : filled + take] = np.abs(block).max(axis=1)
        filled += take
    return float(np.quantile(maxima, 1.0 - tau))


def matches(value, ref, rtol=1e-12):
    """Compare a package value (NaN for degenerate) to a reference (None)."""
    if ref is None:
        return math.isnan(value)
    if math.isnan(value):
        return False
    return abs(value - ref) <= rtol * max(1.0, abs(ref))
