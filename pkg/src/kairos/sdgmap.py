"""SDG tagging of hackathon texts with keyword dictionaries.

Patterns are matched as whole token sequences after lowercasing and replacing
punctuation with spaces; there is no stemming.  Each distinct
(SDG, dictionary, pattern) hit counts once per hackathon, however often the
pattern occurs and however many times a dictionary lists it.
"""
from __future__ import annotations

import csv
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._stats import ols
from .ingest import Hackathon

N_SDG = 17
SDGS = tuple(range(1, N_SDG + 1))

_NON_WORD = re.compile(r"[^\w]+|_", re.UNICODE)
# never produced by tokenize(); keeps phrases from spanning two text fields
_FIELD_BREAK = "\x00"


def tokenize(text: str) -> list[str]:
    return _NON_WORD.sub(" ", text.lower()).split()


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: Mapping[int, tuple[str, ...]]

    def __post_init__(self):
        clean = {}
        for sdg, patterns in self.entries.items():
            sdg = int(sdg)
            if sdg not in SDGS:
                raise ValueError(f"lexicon {self.name!r}: SDG index {sdg} outside 1..17")
            normed = []
            for pat in patterns:
                toks = tokenize(pat)
                if not toks:
                    raise ValueError(f"lexicon {self.name!r}: empty pattern for SDG {sdg}")
                normed.append(" ".join(toks))
            clean[sdg] = tuple(dict.fromkeys(normed))
        object.__setattr__(self, "entries", clean)


def load_lexicons(path) -> list[Lexicon]:
    """Read a ``dictionary,sdg,pattern`` CSV into one Lexicon per dictionary."""
    grouped: dict[str, dict[int, list[str]]] = defaultdict(lambda: defaultdict(list))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"dictionary", "sdg", "pattern"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: lexicon CSV lacks columns {sorted(missing)}")
        for row in reader:
            grouped[row["dictionary"].strip()][int(row["sdg"])].append(row["pattern"])
    return [Lexicon(name, {k: tuple(v) for k, v in entries.items()}) for name, entries in sorted(grouped.items())]


def demo_lexicons() -> list[Lexicon]:
    """Small bundled keyword list used by the synthetic corpus and the demos."""
    with resources.as_file(resources.files("kairos") / "data" / "demo_lexicon.csv") as p:
        return load_lexicons(p)


@dataclass(frozen=True)
class CorrectionVector:
    weights: tuple[float, ...] = (1.0,) * N_SDG

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != N_SDG:
            raise ValueError(f"correction vector needs {N_SDG} weights, got {len(w)}")
        if not all(x > 0 and np.isfinite(x) for x in w):
            raise ValueError("correction weights must be positive and finite")
        object.__setattr__(self, "weights", w)

    def __getitem__(self, sdg: int) -> float:
        return self.weights[sdg - 1]

    def scaled(self, factor: float) -> "CorrectionVector":
        return CorrectionVector(tuple(w * factor for w in self.weights))

    @classmethod
    def from_file(cls, path) -> "CorrectionVector":
        """CSV with ``sdg,weight`` rows; SDGs not listed keep weight 1."""
        w = [1.0] * N_SDG
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                w[int(row["sdg"]) - 1] = float(row["weight"])
        return cls(tuple(w))


@dataclass(frozen=True)
class SdgTagSet:
    hackathon_id: str
    raw: tuple[int, ...]
    corrected: tuple[float, ...]
    aligned: tuple[bool, ...]
    matches: tuple[tuple[int, str, str], ...] = field(default=())

    @property
    def aligned_sdgs(self) -> tuple[int, ...]:
        return tuple(s for s, a in zip(SDGS, self.aligned) if a)

    @property
    def is_related(self) -> bool:
        return any(self.aligned)


def _find_phrases(tokens: Sequence[str], patterns: set[str], max_len: int) -> set[str]:
    hits = set()
    n = len(tokens)
    for i in range(n):
        if tokens[i] == _FIELD_BREAK:
            continue
        for k in range(1, min(max_len, n - i) + 1):
            if tokens[i + k - 1] == _FIELD_BREAK:
                break
            cand = " ".join(tokens[i:i + k])
            if cand in patterns:
                hits.add(cand)
    return hits


def hackathon_tokens(h: Hackathon) -> list[str]:
    fields = [h.theme_text, *h.tags, h.criteria_text]
    out: list[str] = []
    for text in fields:
        if out:
            out.append(_FIELD_BREAK)
        out.extend(tokenize(text or ""))
    return out


def tag_hackathon(h: Hackathon, lexicons: Sequence[Lexicon],
                  cv: CorrectionVector | None = None, threshold: float = 0.0) -> SdgTagSet:
    """Tag one hackathon; an SDG is aligned when its corrected score exceeds ``threshold``."""
    if not lexicons:
        raise ValueError("no lexicons given: nothing to match against")
    cv = cv or CorrectionVector()
    tokens = hackathon_tokens(h)
    matches: set[tuple[int, str, str]] = set()
    for lex in lexicons:
        pats = {p for ps in lex.entries.values() for p in ps}
        if not pats or not tokens:
            continue
        max_len = max(p.count(" ") + 1 for p in pats)
        found = _find_phrases(tokens, pats, max_len)
        for sdg, ps in lex.entries.items():
            for p in ps:
                if p in found:
                    matches.add((sdg, lex.name, p))
    raw = [0] * N_SDG
    for sdg, _, _ in matches:
        raw[sdg - 1] += 1
    corrected = tuple(r * cv[s] for s, r in zip(SDGS, raw))
    aligned = tuple(c > threshold for c in corrected)
    return SdgTagSet(h.id, tuple(raw), corrected, aligned, tuple(sorted(matches)))


def tag_all(hackathons: Iterable[Hackathon], lexicons: Sequence[Lexicon],
            cv: CorrectionVector | None = None, threshold: float = 0.0) -> list[SdgTagSet]:
    return [tag_hackathon(h, lexicons, cv, threshold) for h in hackathons]


# --------------------------------------------------------------------------
# coverage over time


@dataclass(frozen=True)
class YearCoverage:
    year: int
    n_hackathons: int
    n_related: int
    percent: float
    # share of all (hackathon, SDG) alignments that fall on each SDG; sums to 1
    shares: tuple[float, ...]


def _shares(counter: Counter) -> tuple[float, ...]:
    total = sum(counter.values())
    if total == 0:
        return (0.0,) * N_SDG
    return tuple(counter[s] / total for s in SDGS)


def coverage_by_year(hackathons: Sequence[Hackathon], tags: Sequence[SdgTagSet]) -> list[YearCoverage]:
    by_id = {t.hackathon_id: t for t in tags}
    years: dict[int, list[SdgTagSet]] = defaultdict(list)
    for h in hackathons:
        years[h.start_date.year].append(by_id[h.id])
    out = []
    for year in sorted(years):
        ts = years[year]
        related = sum(t.is_related for t in ts)
        mentions = Counter(s for t in ts for s in t.aligned_sdgs)
        out.append(YearCoverage(year, len(ts), related, 100.0 * related / len(ts), _shares(mentions)))
    return out


def bulk_shares(tags: Sequence[SdgTagSet]) -> tuple[float, ...]:
    """Per-SDG share of alignments pooled over all years."""
    return _shares(Counter(s for t in tags for s in t.aligned_sdgs))


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    r2: float
    p_value: float
    slope_stderr: float
    n: int
    degenerate: bool = False


def fit_trend(percentages: Sequence[float], x: Sequence[float] | None = None) -> TrendFit:
    """OLS of yearly percentages on the year index (0, 1, ...) unless ``x`` is given."""
    y = np.asarray(percentages, dtype=float)
    if y.size < 3:
        raise ValueError(f"trend fit needs at least 3 yearly points, got {y.size}")
    xs = np.arange(y.size, dtype=float) if x is None else np.asarray(x, dtype=float)
    f = ols(xs, y)
    return TrendFit(f.slope, f.intercept, f.r2, f.p_value, f.slope_stderr, f.n, f.degenerate)


def write_tags_csv(path, tags: Iterable[SdgTagSet]) -> None:
    from ._io import write_csv

    write_csv(path, ["hackathon_id", "sdg", "raw", "corrected", "aligned"],
              ([t.hackathon_id, s, t.raw[s - 1], t.corrected[s - 1], t.aligned[s - 1]]
               for t in tags for s in SDGS if t.raw[s - 1] > 0))


def read_tags_csv(path, hackathon_ids: Iterable[str]) -> list[SdgTagSet]:
    """Rebuild tag sets (without match provenance) for the given hackathons."""
    raw: dict[str, list[int]] = defaultdict(lambda: [0] * N_SDG)
    corr: dict[str, list[float]] = defaultdict(lambda: [0.0] * N_SDG)
    al: dict[str, list[bool]] = defaultdict(lambda: [False] * N_SDG)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            s = int(row["sdg"]) - 1
            hid = row["hackathon_id"]
            raw[hid][s] = int(row["raw"])
            corr[hid][s] = float(row["corrected"])
            al[hid][s] = row["aligned"] == "true"
    return [SdgTagSet(h, tuple(raw[h]), tuple(corr[h]), tuple(al[h])) for h in hackathon_ids]


def write_coverage_csv(path, coverage: Iterable[YearCoverage]) -> None:
    from ._io import write_csv

    write_csv(path, ["year", "n_hackathons", "n_related", "percent"] + [f"share_sdg{s}" for s in SDGS],
              ([c.year, c.n_hackathons, c.n_related, c.percent, *c.shares] for c in coverage))
