"""Newcomer ratios, their dependence on hackathon size, and weekly growth."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from datetime import date, timedelta
from itertools import groupby
from typing import Sequence

import numpy as np

from ._stats import ols
from .ingest import Hackathon


@dataclass(frozen=True, eq=False)
class NewcomerStats:
    hackathon_ids: tuple[str, ...]
    start_dates: tuple[date, ...]
    sizes: np.ndarray
    n_new: np.ndarray
    ratios: np.ndarray
    median: float
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    n_excluded_empty: int = 0

    def ratio_of(self, hackathon_id: str) -> float:
        return float(self.ratios[self.hackathon_ids.index(hackathon_id)])


def newcomer_ratios(hackathons: Sequence[Hackathon], hist_bins: int = 10) -> NewcomerStats:
    """Share of each hackathon's participants never seen at an earlier hackathon.

    Hackathons are ordered by (start_date, id).  Hackathons on the same date
    do not count each other's participants as prior.  Hackathons without
    participants are left out and counted in ``n_excluded_empty``.
    """
    ordered = sorted(hackathons, key=lambda h: (h.start_date, h.id))
    seen: set[str] = set()
    ids, dates, sizes, new = [], [], [], []
    empty = 0
    for _, group in groupby(ordered, key=lambda h: h.start_date):
        arrivals: set[str] = set()
        for h in group:
            people = set(h.participant_ids)
            if not people:
                empty += 1
                continue
            ids.append(h.id)
            dates.append(h.start_date)
            sizes.append(len(people))
            new.append(len(people - seen))
            arrivals |= people
        seen |= arrivals
    if empty:
        warnings.warn(f"{empty} hackathon(s) without participants excluded from newcomer ratios", stacklevel=2)
    sizes_a = np.array(sizes, dtype=np.int64)
    new_a = np.array(new, dtype=np.int64)
    ratios = new_a / sizes_a if sizes else np.zeros(0)
    counts, edges = np.histogram(ratios, bins=hist_bins, range=(0.0, 1.0))
    median = float(np.median(ratios)) if sizes else float("nan")
    return NewcomerStats(tuple(ids), tuple(dates), sizes_a, new_a, ratios, median, counts, edges, empty)


@dataclass(frozen=True)
class SizeBin:
    lo: float
    hi: float
    n: int
    mean_size: float
    mean_ratio: float
    stderr: float


def ratio_vs_size(stats: NewcomerStats, bins_per_decade: int = 5) -> list[SizeBin]:
    """Mean newcomer ratio in logarithmic bins of hackathon size; empty bins are omitted."""
    if stats.sizes.size == 0:
        return []
    top = np.log10(stats.sizes.max())
    edges = 10 ** (np.arange(0, np.floor(top * bins_per_decade) + 2) / bins_per_decade)
    idx = np.searchsorted(edges, stats.sizes, side="right") - 1
    out = []
    for b in np.unique(idx):
        sel = idx == b
        r = stats.ratios[sel]
        se = float(r.std(ddof=1) / np.sqrt(r.size)) if r.size > 1 else float("nan")
        out.append(SizeBin(float(edges[b]), float(edges[b + 1]), int(r.size), float(stats.sizes[sel].mean()),
                           float(r.mean()), se))
    return out


@dataclass(frozen=True, eq=False)
class GrowthStats:
    week_starts: tuple[date, ...]
    counts: np.ndarray
    slope: float
    intercept: float
    r2: float
    relative_rate: float
    log_r2: float
    nonlinear: bool

    def to_dict(self) -> dict:
        return {"first_week": self.week_starts[0].isoformat(), "n_weeks": len(self.week_starts),
                "slope_per_week": self.slope, "intercept": self.intercept, "r2": self.r2,
                "relative_rate": self.relative_rate, "log_r2": self.log_r2, "nonlinear_warning": self.nonlinear,
                "weekly_counts": self.counts.tolist()}


def growth_rate(hackathons: Sequence[Hackathon], min_weeks: int = 8) -> GrowthStats:
    """OLS of weekly hackathon counts on week index; relative rate = slope / mean count.

    Weeks start on Mondays and run contiguously from the first to the last
    start date.  ``nonlinear`` flags a better straight-line fit to log-counts.
    """
    if not hackathons:
        raise ValueError("no hackathons: growth span too short")
    mondays = [h.start_date - timedelta(days=h.start_date.weekday()) for h in hackathons]
    first = min(mondays)
    idx = np.array([(m - first).days // 7 for m in mondays])
    n_weeks = int(idx.max()) + 1
    if n_weeks < min_weeks:
        raise ValueError(f"growth span too short: {n_weeks} weeks, need {min_weeks}")
    counts = np.bincount(idx, minlength=n_weeks)
    x = np.arange(n_weeks, dtype=float)
    lin = ols(x, counts.astype(float))
    pos = counts > 0
    log_r2 = ols(x[pos], np.log(counts[pos])).r2 if pos.sum() >= 3 and np.ptp(x[pos]) > 0 else 0.0
    rel = lin.slope / counts.mean()
    nonlinear = bool(log_r2 > lin.r2)
    if nonlinear:
        warnings.warn("weekly counts look exponential: log-count R^2 exceeds linear R^2", stacklevel=2)
    weeks = tuple(first + timedelta(weeks=k) for k in range(n_weeks))
    return GrowthStats(weeks, counts, float(lin.slope), float(lin.intercept), float(lin.r2), float(rel),
                       float(log_r2), nonlinear)


def write_ratios_csv(path, stats: NewcomerStats) -> None:
    from ._io import write_csv

    write_csv(path, ["hackathon_id", "start_date", "size", "n_new", "ratio"],
              ([h, d.isoformat(), int(s), int(n), float(r)]
               for h, d, s, n, r in zip(stats.hackathon_ids, stats.start_dates, stats.sizes, stats.n_new,
                                        stats.ratios)))


def write_size_curve_csv(path, curve: Sequence[SizeBin]) -> None:
    from ._io import write_csv

    write_csv(path, ["size_lo", "size_hi", "n_hackathons", "mean_size", "mean_ratio", "stderr"],
              ([b.lo, b.hi, b.n, b.mean_size, b.mean_ratio, b.stderr] for b in curve))
