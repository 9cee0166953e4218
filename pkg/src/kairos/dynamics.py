"""Shock-response stacks, power-law relaxation fits and productivity scaling.

Offsets are whole days relative to a hackathon's start date.  A repository's
creation day is the day of its earliest observed event.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._stats import ols
from .ingest import Hackathon, RepoEvent

DEFAULT_WINDOW = (-100, 700)
PUSH_TYPES = frozenset({"PushEvent"})
LABELS = ("exogenous-critical", "sub-critical", "indeterminate")


@dataclass(frozen=True, eq=False)
class StackedSeries:
    offsets: np.ndarray
    values: np.ndarray
    n_stacked: int
    normalization: str = "none"
    aggregate: str = "sum"

    def __post_init__(self):
        if self.n_stacked < 1:
            raise ValueError("a stacked series needs at least one hackathon")
        if np.any(np.diff(self.offsets) <= 0):
            raise ValueError("offsets must be strictly increasing")

    def value_at(self, offset: int) -> float:
        i = int(offset - self.offsets[0])
        return float(self.values[i])


def _repo_days(events: Iterable[RepoEvent]) -> dict[str, list[int]]:
    """Day ordinals of each repository's events, deduplicated by event id."""
    seen = set()
    days: dict[str, list[int]] = defaultdict(list)
    for e in events:
        key = (e.repo_name, e.event_id)
        if key in seen:
            continue
        seen.add(key)
        days[e.repo_name].append(e.created_at.toordinal())
    return days


def _hackathon_repos(h: Hackathon, mapping: Mapping[str, Sequence[RepoEvent]]) -> dict[str, list[int]]:
    return _repo_days(e for pid in h.project_ids for e in mapping.get(pid, ()))


def repo_creation_days(events: Iterable[RepoEvent]) -> dict[str, int]:
    """Earliest event day ordinal per repository."""
    return {r: min(d) for r, d in _repo_days(events).items()}


def _check_mapping(mapping) -> None:
    if not any(len(v) for v in mapping.values()):
        raise ValueError("empty project -> events mapping: nothing to stack")


def _finish(offsets, total, n, normalization, aggregate) -> StackedSeries:
    if aggregate == "mean":
        total = total / n
    elif aggregate != "sum":
        raise ValueError(f"unknown aggregate {aggregate!r}")
    return StackedSeries(offsets, total, n, normalization, aggregate)


def stack_repo_creations(hackathons: Sequence[Hackathon], mapping: Mapping[str, Sequence[RepoEvent]],
                         window: tuple[int, int] = DEFAULT_WINDOW, aggregate: str = "sum") -> StackedSeries:
    """Daily repository creations relative to each hackathon start, stacked over hackathons.

    Only hackathons with at least one linked repository contribute.
    """
    _check_mapping(mapping)
    lo, hi = window
    offsets = np.arange(lo, hi + 1)
    total = np.zeros(offsets.size)
    n = 0
    for h in hackathons:
        repos = _hackathon_repos(h, mapping)
        if not repos:
            continue
        n += 1
        start = h.start_date.toordinal()
        off = np.array([min(d) - start for d in repos.values()])
        off = off[(off >= lo) & (off <= hi)]
        total += np.bincount(off - lo, minlength=offsets.size)
    if n == 0:
        raise ValueError("no hackathon has a linked repository with events")
    return _finish(offsets, total, n, "none", aggregate)


def stack_event_activity(hackathons: Sequence[Hackathon], mapping: Mapping[str, Sequence[RepoEvent]],
                         peak_window_days: int = 3, window: tuple[int, int] = DEFAULT_WINDOW,
                         normalization: str = "per-peak", aggregate: str = "mean") -> StackedSeries:
    """Daily event counts of hackathon-born repositories, stacked over hackathons.

    A repository counts when created no later than ``peak_window_days`` after
    the start; a hackathon counts when its own daily peak (earliest if tied)
    falls within ``peak_window_days`` of the start.  With ``per-peak``
    normalization each hackathon's series is divided by its peak value.
    """
    _check_mapping(mapping)
    if normalization not in ("per-peak", "none"):
        raise ValueError(f"unknown normalization {normalization!r}")
    lo, hi = window
    offsets = np.arange(lo, hi + 1)
    total = np.zeros(offsets.size)
    n = 0
    for h in hackathons:
        start = h.start_date.toordinal()
        days = [d for ds in _hackathon_repos(h, mapping).values() if min(ds) - start <= peak_window_days
                for d in ds]
        off = np.asarray(days, dtype=np.int64) - start
        off = off[(off >= lo) & (off <= hi)]
        if off.size == 0:
            continue
        counts = np.bincount(off - lo, minlength=offsets.size).astype(float)
        peak = int(np.argmax(counts))
        if abs(offsets[peak]) > peak_window_days:
            continue
        if normalization == "per-peak":
            counts /= counts[peak]
        total += counts
        n += 1
    if n == 0:
        raise ValueError(f"no hackathon passes the filters: repositories created within {peak_window_days} "
                         f"days of the start and an activity peak within +-{peak_window_days} days of the start")
    return _finish(offsets, total, n, normalization, aggregate)


# --------------------------------------------------------------------------
# relaxation fit


@dataclass(frozen=True)
class LogBin:
    lo: float
    hi: float
    tau: float  # fitted abscissa, days after t_c
    value: float  # mean series value over the integer days in the bin
    n_days: int


@dataclass(frozen=True)
class RelaxationFit:
    alpha: float
    alpha_stderr: float
    t_c: int
    fit_window: tuple[int, int]
    r: float
    p_value: float
    intercept: float
    n_bins: int
    bins: tuple[LogBin, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "alpha_stderr": self.alpha_stderr, "t_c": self.t_c,
                "fit_window": list(self.fit_window), "r": self.r, "p_value": self.p_value,
                "intercept": self.intercept, "n_bins": self.n_bins}


def _log_bins(tau: np.ndarray, vals: np.ndarray, bins_per_decade: int):
    edges = 10 ** (np.arange(0, np.ceil(np.log10(tau[-1] + 1) * bins_per_decade) + 1) / bins_per_decade)
    idx = np.searchsorted(edges, tau, side="right") - 1
    out = []
    for b in np.unique(idx):
        sel = idx == b
        out.append((edges[b], edges[b + 1], tau[sel], float(vals[sel].mean())))
    return out


def fit_relaxation(series: StackedSeries, window: tuple[int, int] | None = None,
                   bins_per_decade: int = 10, t_c: int | None = None, max_iter: int = 50) -> RelaxationFit:
    """Fit ``A ~ (t - t_c)**-alpha`` on log-binned points of the post-peak decay.

    ``t_c`` defaults to the argmax of the series and the window to
    ``[t_c + 1, last offset]``.  Each bin's abscissa is the ``tau`` whose power
    equals the bin's mean of ``tau**-alpha``, iterated with the fitted alpha,
    so an exact power law is fitted without binning bias.
    """
    offs = np.asarray(series.offsets)
    vals = np.asarray(series.values, dtype=float)
    if t_c is None:
        t_c = int(offs[int(np.argmax(vals))])
    if window is None:
        window = (t_c + 1, int(offs[-1]))
    t_min, t_max = int(window[0]), int(window[1])
    if t_min - t_c <= 0:
        raise ValueError(f"fit window starts at {t_min}, not after t_c = {t_c}: nonpositive t - t_c")
    if t_max < t_min:
        raise ValueError("empty fit window")
    sel = (offs >= t_min) & (offs <= t_max)
    tau = (offs[sel] - t_c).astype(float)
    raw = [b for b in _log_bins(tau, vals[sel], bins_per_decade) if b[3] > 0]
    if len(raw) < 10:
        raise ValueError(f"only {len(raw)} usable log bins in the fit window, need 10")
    y = np.log([b[3] for b in raw])
    # start from the geometric-mean abscissa, then iterate to self-consistency
    xs = np.log([np.exp(np.log(b[2]).mean()) for b in raw])
    fit = ols(xs, y)
    for _ in range(max_iter):
        a = -fit.slope
        if abs(a) < 1e-12:
            break
        new = np.array([-np.log(np.mean(b[2] ** -a)) / a for b in raw])
        fit_new = ols(new, y)
        done = np.max(np.abs(new - xs)) < 1e-12
        xs, fit = new, fit_new
        if done:
            break
    bins = tuple(LogBin(float(b[0]), float(b[1]), float(np.exp(x)), b[3], int(b[2].size))
                 for b, x in zip(raw, xs))
    return RelaxationFit(float(-fit.slope), float(fit.slope_stderr), int(t_c), (t_min, t_max),
                         float(fit.r), float(fit.p_value), float(fit.intercept), len(raw), bins)


@dataclass(frozen=True)
class CascadeClass:
    label: str
    theta_ref: float
    alpha: float
    margin: float
    note: str = ""


def classify_alpha(alpha: float, stderr: float, theta: float = 0.40, margin_sigmas: float = 2.0) -> CascadeClass:
    margin = margin_sigmas * stderr
    if alpha + margin < 1:
        label = "exogenous-critical"
    elif alpha - margin > 1:
        label = "sub-critical"
    else:
        label = "indeterminate"
    note = ""
    if label == "exogenous-critical" and alpha > 1 - theta:
        note = (f"alpha = {alpha:.4g} exceeds 1 - theta = {1 - theta:.2f}: "
                "possible mixing of exogenous-critical and sub-critical responses")
    elif label == "sub-critical" and alpha < 1 + theta:
        note = (f"alpha = {alpha:.4g} is below 1 + theta = {1 + theta:.2f}: "
                "possible mixing of exogenous-critical and sub-critical responses")
    return CascadeClass(label, theta, alpha, margin, note)


def classify_cascade(fit: RelaxationFit, theta: float = 0.40, margin_sigmas: float = 2.0) -> CascadeClass:
    """Label a decay as critical (alpha below 1), sub-critical (above 1) or indeterminate."""
    return classify_alpha(fit.alpha, fit.alpha_stderr, theta, margin_sigmas)


# --------------------------------------------------------------------------
# productivity scaling


@dataclass(frozen=True)
class ScalingFit:
    beta: float
    beta_stderr: float
    intercept: float
    r2: float
    n_windows: int
    window_days: int

    def to_dict(self) -> dict:
        return {"beta": self.beta, "beta_stderr": self.beta_stderr, "intercept": self.intercept,
                "r2": self.r2, "n_windows": self.n_windows, "window_days": self.window_days}


def scaling_windows(mapping: Mapping[str, Sequence[RepoEvent]], window_days: int = 5) -> np.ndarray:
    """``(c, R)`` per (repository, window): distinct pushers and commits.

    Windows tile the calendar (day ordinal // window_days), so results do not
    depend on where a repository's history starts.  Commits are push payload
    sizes, or one per push when the size is unknown.  Rows are sorted.
    """
    if window_days < 1:
        raise ValueError("window_days must be >= 1")
    seen = set()
    actors: dict[tuple[str, int], set[str]] = defaultdict(set)
    commits: dict[tuple[str, int], int] = defaultdict(int)
    for evs in mapping.values():
        for e in evs:
            if e.event_type not in PUSH_TYPES or (e.repo_name, e.event_id) in seen:
                continue
            seen.add((e.repo_name, e.event_id))
            key = (e.repo_name, e.created_at.toordinal() // window_days)
            actors[key].add(e.actor_id)
            commits[key] += 1 if e.commits is None else e.commits
    rows = sorted((len(actors[k]), commits[k]) for k in actors if commits[k] >= 1)
    return np.array(rows, dtype=float).reshape(-1, 2)


def fit_scaling_pairs(pairs: np.ndarray, window_days: int = 5) -> ScalingFit:
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    pairs = pairs[(pairs[:, 0] >= 1) & (pairs[:, 1] >= 1)]
    if pairs.shape[0] == 0:
        raise ValueError("no qualifying windows with c >= 1 and R >= 1")
    if pairs.shape[0] < 3 or np.all(pairs[:, 0] == pairs[0, 0]):
        raise ValueError("scaling fit needs at least 3 windows with differing contributor counts")
    f = ols(np.log(pairs[:, 0]), np.log(pairs[:, 1]))
    return ScalingFit(float(f.slope), float(f.slope_stderr), float(f.intercept), float(f.r2),
                      int(pairs.shape[0]), int(window_days))


def fit_productivity_scaling(mapping: Mapping[str, Sequence[RepoEvent]], window_days: int = 5) -> ScalingFit:
    """Least-squares ``log R = beta log c + const`` over all repository windows."""
    return fit_scaling_pairs(scaling_windows(mapping, window_days), window_days)


# --------------------------------------------------------------------------
# output


def write_series_csv(path, series: StackedSeries) -> None:
    from ._io import write_csv

    write_csv(path, ["offset", "value", "n_stacked"],
              ([int(o), float(v), series.n_stacked] for o, v in zip(series.offsets, series.values)))


def read_series_csv(path, normalization: str = "none", aggregate: str = "sum") -> StackedSeries:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return StackedSeries(data[:, 0].astype(np.int64), data[:, 1], int(data[0, 2]), normalization, aggregate)


def write_bins_csv(path, fit: RelaxationFit) -> None:
    from ._io import write_csv

    write_csv(path, ["bin_lo", "bin_hi", "tau", "value", "n_days", "fitted"],
              ([b.lo, b.hi, b.tau, b.value, b.n_days, float(np.exp(fit.intercept) * b.tau ** -fit.alpha)]
               for b in fit.bins))


def write_scaling_csv(path, pairs: np.ndarray) -> None:
    from ._io import write_csv

    write_csv(path, ["c", "R"], ([int(c), int(r)] for c, r in pairs))
