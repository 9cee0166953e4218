"""Closed-form ordinary least squares shared by the trend, decay and scaling fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_stderr: float
    r: float
    r2: float
    p_value: float
    n: int
    degenerate: bool = False


def ols(x, y) -> LineFit:
    """Fit ``y = intercept + slope * x`` by least squares.

    The p-value is two-sided for the null ``slope == 0`` using the t
    distribution with ``n - 2`` degrees of freedom.  When ``y`` has zero
    variance the fit is flagged ``degenerate`` with ``r2 = 0`` and ``p = 1``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n != y.size:
        raise ValueError("x and y differ in length")
    if n < 3:
        raise ValueError(f"need at least 3 points for a line fit, got {n}")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0:
        raise ValueError("zero variance in x")
    sxy = float(dx @ dy)
    slope = sxy / sxx
    intercept = ym - slope * xm
    dof = n - 2
    if syy == 0.0:
        return LineFit(slope, intercept, 0.0, 0.0, 0.0, 1.0, n, degenerate=True)

    resid = dy - slope * dx
    sse = max(float(resid @ resid), 0.0)
    r = float(np.clip(sxy / np.sqrt(sxx * syy), -1.0, 1.0))
    r2 = r * r
    stderr = np.sqrt(sse / dof / sxx)
    if stderr == 0.0:
        p = 0.0
    else:
        p = float(2.0 * stats.t.sf(abs(slope / stderr), dof))
    return LineFit(slope, intercept, float(stderr), r, r2, min(max(p, 0.0), 1.0), n)
