"""Empirical CCDFs and discrete power-law tail fits.

The fitted exponent ``mu`` is that of the probability mass function,
``P(X = x) = x**-mu / zeta(mu, x_min)`` for integer ``x >= x_min``, so the
survival function ``P(X >= x) = zeta(mu, x) / zeta(mu, x_min)`` decays like
``x**-(mu - 1)``.  :func:`moment_stability` can read an exponent in either
convention.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

MU_BOUNDS = (1.01, 6.0)
GOLDEN_TOL = 1e-6
MIN_TAIL = 10

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _as_counts(values) -> np.ndarray:
    x = np.asarray(values)
    if x.size == 0:
        raise ValueError("empty input")
    if x.dtype.kind == "f":
        if not np.all(np.isfinite(x)) or np.any(x != np.round(x)):
            raise ValueError("values must be positive integers")
    elif x.dtype.kind not in "iu":
        raise ValueError("values must be positive integers")
    x = x.astype(np.int64)
    if np.any(x < 1):
        raise ValueError("values must be positive integers")
    return x


def ccdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values and the empirical fraction strictly greater than each."""
    x = _as_counts(values)
    xs, counts = np.unique(x, return_counts=True)
    greater = x.size - np.cumsum(counts)
    return xs, greater / x.size


def survival(x, mu: float, x_min: int) -> np.ndarray:
    """Model ``P(X >= x)`` for the discrete power law."""
    return zeta(mu, np.asarray(x, dtype=float)) / zeta(mu, float(x_min))


def log_likelihood(mu: float, sum_log: float, n: int, x_min: int) -> float:
    return float(-mu * sum_log - n * np.log(zeta(mu, float(x_min))))


def golden_section_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    """Argmax of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    # the bracket can collapse onto an endpoint when f is monotone
    best = (a + b) / 2
    for cand in (lo, hi):
        if f(cand) > f(best):
            best = cand
    return best


def _mle(sum_log: float, n: int, x_min: int) -> tuple[float, float]:
    def f(mu):
        return log_likelihood(mu, sum_log, n, x_min)

    mu = golden_section_max(f, *MU_BOUNDS)
    return mu, f(mu)


def _stderr(mu: float, n: int, x_min: int) -> float:
    """Inverse root of the Fisher information, n * Var(log X) under the fitted model."""
    h = 1e-3
    lo = max(mu - h, 1.0 + 1e-9)
    hi = lo + 2 * h
    mid = lo + h
    lz = np.log(zeta(np.array([lo, mid, hi]), float(x_min)))
    var = (lz[0] - 2 * lz[1] + lz[2]) / h**2
    if not var > 0:
        return float("nan")
    return float(1.0 / np.sqrt(n * var))


def ks_distance(tail: np.ndarray, mu: float, x_min: int) -> float:
    """Sup-distance between empirical and model CDFs of a sorted integer tail."""
    xs, counts = np.unique(tail, return_counts=True)
    n = tail.size
    cdf_emp = np.cumsum(counts) / n
    surv_emp = 1.0 - np.concatenate(([0.0], cdf_emp[:-1]))
    surv_fit = survival(xs, mu, x_min)
    cdf_fit = 1.0 - survival(xs + 1, mu, x_min)
    return float(max(np.max(np.abs(cdf_emp - cdf_fit)), np.max(np.abs(surv_emp - surv_fit))))


@dataclass(frozen=True)
class TailFit:
    mu: float
    mu_stderr: float
    x_min: int
    log_likelihood: float
    n_tail: int
    ks_distance: float
    n_total: int

    @property
    def ccdf_exponent(self) -> float:
        return self.mu - 1.0


def _fit_at(xs_sorted: np.ndarray, suffix_log: np.ndarray, start: int, x_min: int) -> TailFit:
    n = xs_sorted.size - start
    s = float(suffix_log[start])
    mu, ll = _mle(s, n, x_min)
    mu = float(mu)
    tail = xs_sorted[start:]
    return TailFit(mu, _stderr(mu, n, x_min), int(x_min), ll, int(n),
                   ks_distance(tail, mu, x_min), int(xs_sorted.size))


def fit_tail(values, x_min: int | None = None) -> TailFit:
    """Discrete power-law MLE; without ``x_min``, pick the cutoff minimising KS distance.

    Candidate cutoffs are the distinct observed values leaving at least ten
    observations, with at least two distinct values, in the tail.  Ties in KS
    distance go to the smaller cutoff.
    """
    x = np.sort(_as_counts(values))
    if x[0] == x[-1]:
        raise ValueError("degenerate support: all values identical")
    logs = np.log(x)
    suffix_log = np.concatenate((np.cumsum(logs[::-1])[::-1], [0.0]))

    if x_min is not None:
        start = int(np.searchsorted(x, x_min, side="left"))
        n_tail = x.size - start
        if n_tail < MIN_TAIL:
            raise ValueError(f"insufficient tail sample: {n_tail} values >= {x_min}, need {MIN_TAIL}")
        if x[start] == x[-1]:
            raise ValueError(f"degenerate support: all values >= {x_min} are identical")
        return _fit_at(x, suffix_log, start, int(x_min))

    uniq, first = np.unique(x, return_index=True)
    best: TailFit | None = None
    for xm, start in zip(uniq, first):
        if x.size - start < MIN_TAIL or x[start] == x[-1]:
            break
        fit = _fit_at(x, suffix_log, int(start), int(xm))
        if best is None or fit.ks_distance < best.ks_distance:
            best = fit
    if best is None:
        raise ValueError(f"insufficient tail sample: no cutoff leaves {MIN_TAIL} values")
    return best


@dataclass(frozen=True)
class MomentReport:
    mu: float
    convention: str
    finite: dict

    def describe(self) -> str:
        if self.convention == "pmf":
            law = "P(X = x) ~ x^-mu, moment k finite iff mu > k + 1"
        else:
            law = "P(X > x) ~ x^-mu, moment k finite iff mu > k"
        parts = [f"moment {k}: {'finite' if ok else 'infinite'}" for k, ok in self.finite.items()]
        return f"mu = {self.mu:.4g} under {law}; " + ", ".join(parts)


def moment_stability(fit: TailFit | float, convention: str = "pmf") -> MomentReport:
    """Which of the first two moments exist, for an exponent read in ``convention``.

    ``"pmf"`` is the convention of :func:`fit_tail`; ``"ccdf"`` reads the
    exponent of the survival function instead.
    """
    mu = fit.mu if isinstance(fit, TailFit) else float(fit)
    if convention == "pmf":
        shift = 1.0
    elif convention == "ccdf":
        shift = 0.0
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return MomentReport(mu, convention, {k: bool(mu > k + shift) for k in (1, 2)})
