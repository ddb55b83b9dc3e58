"""Scalar maximisation shared by the Fisher and likelihood searches."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar


def _safe(f, x):
    v = float(f(np.float64(x)))
    return v if math.isfinite(v) else -math.inf


def grid_then_refine(f, lo: float, hi: float, pitch: float, tol: float = 1e-12):
    """Dense scan of ``f`` followed by bounded Brent refinement around the best node.

    ``f`` must accept an array for the scan; non-finite values count as
    ``-inf``. Returns ``(x, f(x))``, with ``x = nan`` when ``f`` is nowhere
    finite. Ties go to the smallest ``x``.
    """
    n = max(3, int(math.ceil((hi - lo) / pitch)) + 1)
    xs = np.linspace(lo, hi, n)
    vals = np.asarray(f(xs), dtype=float)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    if not np.any(np.isfinite(vals)):
        return math.nan, math.nan
    i = int(np.argmax(vals))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, n - 1)])
    res = minimize_scalar(
        lambda t: -_safe(f, t), bounds=(a, b), method="bounded", options={"xatol": tol, "maxiter": 500}
    )
    x, fx = float(res.x), _safe(f, res.x)
    if fx > vals[i]:
        return x, fx
    return float(xs[i]), float(vals[i])
