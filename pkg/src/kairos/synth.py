"""Synthetic ecosystems with planted exponents, tags and newcomer structure.

Every random draw comes from a Philox (counter-based) generator keyed by
``(seed, stream, index...)``, so each synthetic hackathon can be generated
independently and in any order with identical results.
"""
from __future__ import annotations

import gzip
import json
from dataclasses import asdict, dataclass, field, replace
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import zeta

from .ingest import Dataset, Hackathon, Participant, Project, RepoEvent, write_clean_dataset, write_event_stream
from .sdgmap import demo_lexicons

# stream ids for the per-purpose generators
(_S_ACTIVITY, _S_REPOS, _S_PARTICIPATION, _S_TEXT, _S_TECH, _S_SCALING, _S_NEWCOMERS, _S_ASSIGN,
 _S_ARCHIVE) = range(9)

GENERAL_TECH = ("css", "javascript", "html", "python", "java")
SDG_TECH = {
    3: ("tensorflow", "react-native"),
    4: ("react", "firebase"),
    7: ("arduino", "raspberry-pi"),
    13: ("r", "leaflet"),
    14: ("flutter", "dart"),
}
_FILLER = "hack build team demo app weekend prize mentors judges code students local".split()


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_hackathons: int = 200
    alpha_planted: float = 0.8
    mu_planted: float = 2.37
    x_min_planted: int = 1
    beta_planted: float = 4 / 3
    n_participants: int = 5000
    noise: str = "poisson"
    # expected events on day 1 after the start; day 0 gets ``peak_boost`` times that
    activity_scale: float = 40.0
    peak_boost: float = 3.0
    # expected repo creations on day 1 after the start
    repos_scale: float = 2.0
    horizon_days: int = 700
    first_start: date = date(2013, 1, 7)
    start_spacing_days: int = 7
    sdg_fraction: float = 0.3
    # repos created this many days after the start count as hackathon-born; their
    # creation events are part of the planted activity cascade
    born_window_days: int = 3
    # calendar window of the productivity-scaling plant
    scaling_window_days: int = 5

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.n_hackathons < 1:
            raise ValueError("n_hackathons must be positive")
        if not 0.3 < self.alpha_planted < 2.0:
            raise ValueError("alpha_planted must lie in (0.3, 2)")
        if not 1.5 < self.mu_planted < 4.0:
            raise ValueError("mu_planted must lie in (1.5, 4)")
        if self.x_min_planted < 1:
            raise ValueError("x_min_planted must be >= 1")
        if self.beta_planted <= 0:
            raise ValueError("beta_planted must be positive")
        if self.noise not in ("poisson", "none"):
            raise ValueError("noise must be 'poisson' or 'none'")
        if self.scaling_window_days < 1:
            raise ValueError("scaling_window_days must be >= 1")
        if self.born_window_days < 0:
            raise ValueError("born_window_days must be >= 0")
        if self.horizon_days < 10 or self.activity_scale <= 0 or self.peak_boost < 1:
            raise ValueError("horizon_days >= 10, activity_scale > 0 and peak_boost >= 1 required")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["first_start"] = self.first_start.isoformat()
        return d


def _rng(spec_or_seed, stream: int, *index: int) -> np.random.Generator:
    seed = spec_or_seed.seed if isinstance(spec_or_seed, SynthSpec) else int(spec_or_seed)
    ss = np.random.SeedSequence(seed, spawn_key=(stream, *index))
    return np.random.Generator(np.random.Philox(ss))


def _start(spec: SynthSpec, i: int) -> date:
    return spec.first_start + timedelta(days=i * spec.start_spacing_days)


def _at(day: date, k: int) -> datetime:
    return datetime.combine(day, time(0), tzinfo=timezone.utc) + timedelta(seconds=k)


# --------------------------------------------------------------------------
# relaxation cascades


def decay_mean(spec: SynthSpec, scale: float) -> np.ndarray:
    """Expected daily counts for offsets 0..horizon with the peak at offset 0."""
    t = np.arange(spec.horizon_days + 1, dtype=float)
    mean = np.empty_like(t)
    mean[0] = scale * spec.peak_boost
    mean[1:] = scale * t[1:] ** (-spec.alpha_planted)
    return mean


def _draw(spec: SynthSpec, mean: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if spec.noise == "poisson":
        return rng.poisson(mean).astype(float)
    return mean.copy()


def relaxation_counts(spec: SynthSpec) -> np.ndarray:
    """Daily activity, one row per hackathon, columns are offsets 0..horizon."""
    mean = decay_mean(spec, spec.activity_scale)
    return np.vstack([_draw(spec, mean, _rng(spec, _S_ACTIVITY, i)) for i in range(spec.n_hackathons)])


def repo_creation_counts(spec: SynthSpec) -> np.ndarray:
    mean = decay_mean(spec, spec.repos_scale)
    return np.vstack([_draw(spec, mean, _rng(spec, _S_REPOS, i)) for i in range(spec.n_hackathons)])


def _authors_for(n_push: int, beta: float) -> int:
    c = 1
    while round(c ** beta) < n_push:
        c += 1
    return c


def _events_for(spec: SynthSpec, i: int, activity: np.ndarray, creations: np.ndarray
                ) -> tuple[list[RepoEvent], list[str]]:
    """Events of hackathon ``i``: a core repo carrying the activity cascade plus late repos."""
    start = _start(spec, i)
    owner = f"synth-h{i:04d}"
    core = f"{owner}/core"
    repos = [core]
    events = []
    acts = np.rint(activity).astype(np.int64)
    made = np.rint(creations).astype(np.int64)
    made[0] = max(made[0] - 1, 0)  # the core repo is one of the day-0 creations
    born = slice(0, spec.born_window_days + 1)
    acts[born] = np.maximum(acts[born] - made[born], 0)
    # pushes in each calendar window are spread over c authors carrying
    # round(c**beta) commits, the smallest c whose commit count covers the pushes
    grid = spec.scaling_window_days
    days = np.flatnonzero(acts)
    keys = (start.toordinal() + days) // grid
    for key in np.unique(keys):
        in_win = days[keys == key]
        n_push = int(acts[in_win].sum())
        c = _authors_for(n_push, spec.beta_planted)
        extra = int(round(c ** spec.beta_planted)) - n_push
        j = 0
        for t in in_win:
            day = start + timedelta(days=int(t))
            for k in range(acts[t]):
                size = 1 + extra // n_push + (j < extra % n_push)
                events.append(RepoEvent(f"{i:04d}a{t:04d}-{k:05d}", "PushEvent", core, f"u{i}-{j % c}",
                                        _at(day, 43200 + k), True, int(size)))
                j += 1
    for t in np.flatnonzero(made):
        day = start + timedelta(days=int(t))
        for k in range(made[t]):
            name = f"{owner}/r{t:04d}-{k:03d}"
            repos.append(name)
            events.append(RepoEvent(f"{i:04d}c{t:04d}-{k:05d}", "CreateEvent", name, f"u{i}-c",
                                    _at(day, 3600 + k), True, None))
    events.sort(key=lambda e: (e.created_at, e.event_id))
    return events, repos


def gen_relaxation_events(spec: SynthSpec) -> list[RepoEvent]:
    """Event stream ordered by (hackathon, time) with the planted decay."""
    act = relaxation_counts(spec)
    rep = repo_creation_counts(spec)
    out: list[RepoEvent] = []
    for i in range(spec.n_hackathons):
        out.extend(_events_for(spec, i, act[i], rep[i])[0])
    return out


# --------------------------------------------------------------------------
# heavy-tailed participation


def sample_discrete_power_law(n: int, mu: float, x_min: int, rng: np.random.Generator,
                              table_size: int = 100_000) -> np.ndarray:
    """Inverse-CDF draws from ``P(X = x) = x**-mu / zeta(mu, x_min)``, ``x >= x_min``.

    The survival function is tabulated on ``x_min .. x_min + table_size``; the
    rare draws beyond the table are solved by bisection on the Hurwitz zeta.
    """
    if mu <= 1:
        raise ValueError("mu must exceed 1")
    norm = zeta(mu, x_min)
    xs = np.arange(x_min, x_min + table_size + 1, dtype=float)
    surv = zeta(mu, xs) / norm  # P(X >= x), decreasing, surv[0] == 1
    # strictly inside (0, 1)
    u = (rng.integers(0, 2**53, size=n) + 0.5) / 2**53
    # X = largest x with P(X >= x) > u  ->  count of table entries above u
    k = np.searchsorted(-surv, -u, side="left")
    out = (x_min + k - 1).astype(np.int64)
    for j in np.flatnonzero(k >= surv.size):
        lo = x_min + table_size
        hi = lo * 2
        while zeta(mu, hi) / norm > u[j]:
            lo, hi = hi, hi * 2
        # invariant: S(lo) > u >= S(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if zeta(mu, mid) / norm > u[j]:
                lo = mid
            else:
                hi = mid
        out[j] = lo
    return out


def gen_participation_counts(spec: SynthSpec, n: int | None = None) -> np.ndarray:
    n = spec.n_participants if n is None else n
    return sample_discrete_power_law(n, spec.mu_planted, spec.x_min_planted,
                                     _rng(spec, _S_PARTICIPATION))


# --------------------------------------------------------------------------
# productivity scaling


def gen_scaling_events(spec: SynthSpec, n_repos: int = 40, windows_per_repo: int = 25,
                       window_days: int = 5, c_max: int = 50) -> tuple[dict[str, list[RepoEvent]], np.ndarray]:
    """Push activity where each window with ``c`` contributors carries ``c**beta`` commits.

    Windows sit on the calendar grid used by the scaling fit (day ordinal //
    window_days).  Returns the project -> events mapping and the planted
    ``(c, R)`` pairs.
    """
    grid0 = (date(2016, 1, 1).toordinal() // window_days + 1) * window_days
    mapping: dict[str, list[RepoEvent]] = {}
    planted = []
    for r in range(n_repos):
        rng = _rng(spec, _S_SCALING, r)
        repo = f"synth-scale/r{r:03d}"
        evs = []
        for w in range(windows_per_repo):
            c = int(rng.integers(1, c_max + 1))
            mean = c ** spec.beta_planted
            commits = int(rng.poisson(mean)) if spec.noise == "poisson" else int(round(mean))
            if commits < 1:
                continue
            pushers = min(c, commits)
            sizes = np.ones(pushers, dtype=np.int64)
            extra = commits - pushers
            if extra:
                sizes += rng.multinomial(extra, np.full(pushers, 1.0 / pushers))
            day0 = date.fromordinal(grid0 + (r * windows_per_repo + w) * window_days)
            for k in range(pushers):
                day = day0 + timedelta(days=int(rng.integers(0, window_days)))
                evs.append(RepoEvent(f"s{r:03d}-{w:03d}-{k:03d}", "PushEvent", repo, f"dev{r}-{k}",
                                     _at(day, 3600 + k), True, int(sizes[k])))
            planted.append((pushers, commits))
        evs.sort(key=lambda e: (e.created_at, e.event_id))
        mapping[f"scale-p{r:03d}"] = evs
    return mapping, np.array(planted, dtype=float).reshape(-1, 2)


# --------------------------------------------------------------------------
# newcomer schedules


def gen_newcomer_hackathons(schedule: Sequence[tuple[int, int]], seed: int = 0,
                            first_start: date = date(2014, 3, 1)) -> list[Hackathon]:
    """Hackathons whose ``(size, n_new)`` pairs are planted exactly.

    Returning participants are drawn from everyone seen at earlier dates; each
    hackathon has its own start date.
    """
    seen: list[str] = []
    out = []
    for i, (size, n_new) in enumerate(schedule):
        if not 0 <= n_new <= size or size < 1:
            raise ValueError(f"hackathon {i}: need 0 <= n_new <= size and size >= 1")
        n_old = size - n_new
        if n_old > len(seen):
            raise ValueError(f"hackathon {i}: {n_old} returning participants but only {len(seen)} seen")
        rng = _rng(seed, _S_NEWCOMERS, i)
        old = [seen[j] for j in sorted(rng.choice(len(seen), size=n_old, replace=False))] if n_old else []
        new = [f"n{i:04d}-{k:04d}" for k in range(n_new)]
        people = new + old
        out.append(Hackathon(f"H{i:04d}", first_start + timedelta(days=7 * i), participant_ids=tuple(people)))
        seen.extend(new)
    return out


# --------------------------------------------------------------------------
# full corpus


@dataclass
class SynthCorpus:
    spec: SynthSpec
    dataset: Dataset
    events: list[RepoEvent]
    truth: dict = field(default_factory=dict)


def _theme(spec: SynthSpec, i: int, phrases_by_sdg: dict[int, list[str]]) -> tuple[str, tuple[int, ...]]:
    rng = _rng(spec, _S_TEXT, i)
    words = [str(w) for w in rng.choice(_FILLER, size=int(rng.integers(4, 9)))]
    sdgs: tuple[int, ...] = ()
    if rng.random() < spec.sdg_fraction:
        k = int(rng.integers(1, 3))
        sdgs = tuple(sorted(int(s) for s in rng.choice(sorted(phrases_by_sdg), size=k, replace=False)))
        for s in sdgs:
            opts = phrases_by_sdg[s]
            words.insert(int(rng.integers(0, len(words) + 1)), opts[int(rng.integers(0, len(opts)))])
    return " ".join(words), sdgs


def generate_corpus(spec: SynthSpec) -> SynthCorpus:
    """Hackathons, projects, participants and events with every law planted."""
    phrases: dict[int, list[str]] = {}
    for lex in demo_lexicons():
        for s, ps in lex.entries.items():
            phrases.setdefault(s, []).extend(p for p in ps if p not in phrases.get(s, []))

    act = relaxation_counts(spec)
    rep = repo_creation_counts(spec)
    hackathons, projects, events = [], [], []
    planted_sdgs = {}
    project_ids_by_hack: list[list[str]] = []
    for i in range(spec.n_hackathons):
        hid = f"H{i:04d}"
        theme, sdgs = _theme(spec, i, phrases)
        planted_sdgs[hid] = list(sdgs)
        evs, repos = _events_for(spec, i, act[i], rep[i])
        events.extend(evs)
        trng = _rng(spec, _S_TECH, i)
        pids = []
        for j, repo in enumerate(repos):
            techs = [t for t in GENERAL_TECH if trng.random() < 0.5]
            for s in sdgs:
                techs.extend(t for t in SDG_TECH.get(s, ()) if trng.random() < 0.6)
            pid = f"P{i:04d}-{j:03d}"
            pids.append(pid)
            projects.append(Project(pid, hid, f"https://github.com/{repo}", tuple(techs), ()))
        project_ids_by_hack.append(pids)
        hackathons.append(Hackathon(hid, _start(spec, i), theme, (), "", tuple(pids)))

    # each participant attends X distinct hackathons, clipped to the corpus size
    drawn = gen_participation_counts(spec)
    counts = np.minimum(drawn, spec.n_hackathons)
    arng = _rng(spec, _S_ASSIGN)
    members: dict[str, list[str]] = {}
    for q, x in enumerate(counts):
        qid = f"Q{q:05d}"
        for h in sorted(arng.choice(spec.n_hackathons, size=int(x), replace=False)):
            pids = project_ids_by_hack[h]
            members.setdefault(pids[int(arng.integers(0, len(pids)))], []).append(qid)
    projects = [Project(p.id, p.hackathon_id, p.repo_url, p.technologies, tuple(members.get(p.id, ())))
                for p in projects]
    people: dict[str, set[str]] = {}
    attended: dict[str, list[str]] = {}
    for p in projects:
        for qid in p.member_ids:
            people.setdefault(p.hackathon_id, set()).add(qid)
            attended.setdefault(qid, []).append(p.hackathon_id)
    hackathons = [replace(h, participant_ids=tuple(sorted(people.get(h.id, ())))) for h in hackathons]
    participants = [Participant(f"Q{q:05d}", tuple(sorted(attended.get(f"Q{q:05d}", ()))))
                    for q in range(len(counts))]

    truth = {
        "spec": spec.to_dict(),
        "alpha": spec.alpha_planted,
        "mu": spec.mu_planted,
        "x_min": spec.x_min_planted,
        "beta": spec.beta_planted,
        "n_clipped_participation": int(np.sum(drawn > spec.n_hackathons)),
        "planted_sdgs": planted_sdgs,
    }
    return SynthCorpus(spec, Dataset(hackathons, projects, participants), events, truth)


# --------------------------------------------------------------------------
# archive-shaped shards for throughput work

_ARCHIVE_TYPES = ("PushEvent", "PushEvent", "PushEvent", "CreateEvent", "WatchEvent", "IssuesEvent",
                  "PullRequestEvent", "IssueCommentEvent", "ForkEvent", "DeleteEvent")
_WORDS = ("fix update add remove refactor test docs readme build config api client server bug feature "
          "merge branch release version bump deps lint style typo handler parser model view route").split()


def _hex(rng: np.random.Generator, n: int = 40) -> str:
    return rng.bytes(n // 2).hex()


def _sentence(rng: np.random.Generator, lo: int, hi: int) -> str:
    return " ".join(_WORDS[int(k)] for k in rng.integers(0, len(_WORDS), int(rng.integers(lo, hi))))


def archive_event(rng: np.random.Generator, k: int, when: datetime) -> dict:
    """One event with the full public-archive envelope (actor, repo, payload, org)."""
    kind = _ARCHIVE_TYPES[int(rng.integers(0, len(_ARCHIVE_TYPES)))]
    uid = int(rng.integers(1, 10**8))
    login = f"user{uid % 500000}"
    rid = int(rng.integers(1, 10**9))
    repo = f"{login}/{_WORDS[rid % len(_WORDS)]}-{rid % 9973}"
    api = "https://api.github.com"
    if kind == "PushEvent":
        n = int(rng.integers(1, 5))
        commits = [{"sha": _hex(rng), "author": {"email": f"{_hex(rng, 16)}@users.noreply.github.com",
                                                 "name": login},
                    "message": _sentence(rng, 3, 14), "distinct": True,
                    "url": f"{api}/repos/{repo}/commits/{_hex(rng)}"} for _ in range(n)]
        payload = {"repository_id": rid, "push_id": int(rng.integers(1, 10**10)), "size": n, "distinct_size": n,
                   "ref": "refs/heads/main", "head": _hex(rng), "before": _hex(rng), "commits": commits}
    elif kind in ("IssuesEvent", "PullRequestEvent", "IssueCommentEvent"):
        num = int(rng.integers(1, 3000))
        payload = {"action": "opened", "number": num,
                   "issue": {"url": f"{api}/repos/{repo}/issues/{num}", "id": int(rng.integers(1, 10**9)),
                             "node_id": _hex(rng, 24), "title": _sentence(rng, 3, 9),
                             "user": {"login": login, "id": uid, "type": "User", "site_admin": False},
                             "labels": [], "state": "open", "locked": False, "comments": int(rng.integers(0, 9)),
                             "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
                             "body": _sentence(rng, 10, 60)}}
    elif kind in ("CreateEvent", "DeleteEvent"):
        payload = {"ref": "main", "ref_type": "branch" if rng.random() < 0.5 else "repository",
                   "master_branch": "main", "description": _sentence(rng, 2, 8), "pusher_type": "user"}
    else:
        payload = {"action": "started"} if kind == "WatchEvent" else {"forkee": {"id": int(rng.integers(1, 10**9)),
                                                                                 "full_name": f"x{uid}/{repo}"}}
    obj = {"id": str(30_000_000_000 + k), "type": kind,
           "actor": {"id": uid, "login": login, "display_login": login, "gravatar_id": "",
                     "url": f"{api}/users/{login}", "avatar_url": f"https://avatars.githubusercontent.com/u/{uid}?"},
           "repo": {"id": rid, "name": repo, "url": f"{api}/repos/{repo}"},
           "payload": payload, "public": True, "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ")}
    if rng.random() < 0.2:
        obj["org"] = {"id": rid % 100000, "login": f"org{rid % 100000}", "gravatar_id": "",
                      "url": f"{api}/orgs/org{rid % 100000}",
                      "avatar_url": f"https://avatars.githubusercontent.com/u/{rid % 100000}?"}
    return obj


def write_archive_shard(path, n_events: int, seed: int = 0, hour: datetime | None = None) -> int:
    """Write an hourly-archive-like gzip NDJSON shard; returns its compressed size in bytes."""
    rng = _rng(seed, _S_ARCHIVE)
    hour = hour or datetime(2015, 1, 1, 15, tzinfo=timezone.utc)
    with open(path, "wb") as raw, gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
        for k in range(n_events):
            when = hour + timedelta(seconds=int(3600 * k / n_events))
            gz.write(json.dumps(archive_event(rng, k, when), separators=(",", ":")).encode() + b"\n")
    return Path(path).stat().st_size


def write_corpus(corpus: SynthCorpus, directory, archive: bool = True) -> None:
    """Write the ingest table layout; events go to an NDJSON archive shard or events.csv."""
    from ._io import write_json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_clean_dataset(directory, corpus.dataset, () if archive else corpus.events)
    if archive:
        (directory / "events.csv").unlink()
        (directory / "events").mkdir(exist_ok=True)
        write_event_stream(corpus.events, directory / "events" / "synth-0.json.gz")
    write_json(directory / "truth.json", corpus.truth)


def load_truth(directory) -> dict:
    with open(Path(directory) / "truth.json", encoding="utf-8") as fh:
        return json.load(fh)
