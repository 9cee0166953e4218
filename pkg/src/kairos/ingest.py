"""Ecosystem records, GitHub-Archive event parsing, quality control and repo linkage.

Event files are newline-delimited JSON, one event object per line, optionally
gzip-compressed (detected from the magic bytes, not the file name).  Metadata
tables are CSV files or JSON arrays with these columns:

    hackathons    id, start_date, theme_text, tags, criteria_text
    projects      id, hackathon_id, repo_url, technologies, member_ids
    participants  id

In CSV, list-valued columns (tags, technologies, member_ids) are joined with
``;``.  The participants table is optional; when absent it is derived from
project members.
"""
from __future__ import annotations

import csv
import gzip
import io
import json
import logging
import os
import re
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import date, datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

LIST_SEP = ";"
DEFAULT_EXCLUDED_YEARS = (2009, 2022)
_GZIP_MAGIC = b"\x1f\x8b"


class EventSchemaError(ValueError):
    """A single event line does not follow the archive schema."""


# --------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class RepoEvent:
    event_id: str
    event_type: str
    repo_name: str
    actor_id: str
    created_at: datetime
    public: bool = True
    # payload.size of a PushEvent; None when the payload carries no size
    commits: int | None = None

    @property
    def day(self) -> date:
        return self.created_at.date()

    def to_json(self) -> dict:
        """Archive-shaped dict holding only the retained fields."""
        obj = {
            "id": self.event_id,
            "type": self.event_type,
            "actor": {"id": self.actor_id},
            "repo": {"name": self.repo_name},
            "public": self.public,
            "created_at": format_timestamp(self.created_at),
        }
        if self.commits is not None:
            obj["payload"] = {"size": self.commits}
        return obj

    @classmethod
    def from_json(cls, obj) -> "RepoEvent":
        if not isinstance(obj, dict):
            raise EventSchemaError("event is not a JSON object")
        try:
            event_id = obj["id"]
            event_type = obj["type"]
            repo = obj["repo"]
            actor = obj["actor"]
            created = obj["created_at"]
        except KeyError as exc:
            raise EventSchemaError(f"missing field {exc.args[0]!r}") from None
        if not isinstance(event_type, str) or not event_type:
            raise EventSchemaError("empty event type")
        if event_id is None or event_id == "":
            raise EventSchemaError("empty event id")
        if not isinstance(repo, dict) or not isinstance(repo.get("name"), str):
            raise EventSchemaError("repo.name missing")
        if not isinstance(actor, dict):
            raise EventSchemaError("actor is not an object")
        actor_id = actor.get("id", actor.get("login"))
        if actor_id is None:
            raise EventSchemaError("actor.id missing")
        public = obj.get("public", True)
        if not isinstance(public, bool):
            raise EventSchemaError("public is not a boolean")
        if not isinstance(created, str):
            raise EventSchemaError("created_at is not a string")
        try:
            created_at = parse_timestamp(created)
        except ValueError as exc:
            raise EventSchemaError(str(exc)) from None

        commits = None
        payload = obj.get("payload")
        if isinstance(payload, dict):
            size = payload.get("size")
            if isinstance(size, int) and not isinstance(size, bool) and size >= 0:
                commits = size
        return cls(str(event_id), event_type, repo["name"], str(actor_id),
                   created_at, public, commits)


@dataclass(frozen=True)
class Hackathon:
    id: str
    start_date: date
    theme_text: str = ""
    tags: tuple[str, ...] = ()
    criteria_text: str = ""
    project_ids: tuple[str, ...] = ()
    participant_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class Project:
    id: str
    hackathon_id: str | None
    repo_url: str | None = None
    technologies: tuple[str, ...] = ()
    member_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class Participant:
    id: str
    hackathon_ids: tuple[str, ...] = ()


@dataclass
class Dataset:
    hackathons: list[Hackathon]
    projects: list[Project]
    participants: list[Participant]

    def hackathon_by_id(self) -> dict[str, Hackathon]:
        return {h.id: h for h in self.hackathons}

    def project_by_id(self) -> dict[str, Project]:
        return {p.id: p for p in self.projects}


# --------------------------------------------------------------------------
# timestamps


_TS_RE = re.compile(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{1,6})?Z\Z")


def parse_timestamp(text: str) -> datetime:
    """Parse a strict ``YYYY-MM-DDTHH:MM:SS[.ffffff]Z`` timestamp to aware UTC."""
    if not _TS_RE.match(text):
        raise ValueError(f"not an ISO-8601 Z timestamp: {text!r}")
    body = text[:-1]
    if len(body) > 19:
        # fromisoformat on 3.10 wants exactly 3 or 6 fraction digits
        body = body[:20] + body[20:].ljust(6, "0")
    return datetime.fromisoformat(body).replace(tzinfo=timezone.utc)


def format_timestamp(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_date(text) -> date:
    """Calendar date from a date or datetime string; naive datetimes are UTC."""
    if isinstance(text, datetime):
        dt = text
    elif isinstance(text, date):
        return text
    else:
        s = str(text).strip()
        if len(s) == 10:
            return date.fromisoformat(s)
        if s.endswith("Z"):
            s = s[:-1] + "+00:00"
        dt = datetime.fromisoformat(s.replace(" ", "T", 1))
    if dt.tzinfo is None:
        return dt.date()
    return dt.astimezone(timezone.utc).date()


# --------------------------------------------------------------------------
# event streams


@dataclass(frozen=True)
class SkippedLine:
    line_no: int
    reason: str
    source: str = ""


@dataclass
class ParseResult:
    events: list[RepoEvent]
    skipped: list[SkippedLine] = field(default_factory=list)

    @property
    def n_skipped(self) -> int:
        return len(self.skipped)


def _open_binary(source) -> tuple[IO[bytes], list]:
    """Return a binary handle (transparently gunzipped) and the handles we must close."""
    to_close: list = []
    if isinstance(source, (bytes, bytearray)):
        fh: IO[bytes] = io.BytesIO(source)
    elif isinstance(source, (str, os.PathLike)):
        fh = open(source, "rb")
        to_close.append(fh)
    else:
        fh = source
    if not hasattr(fh, "peek"):
        fh = io.BufferedReader(fh)  # type: ignore[arg-type]
    if fh.peek(2)[:2] == _GZIP_MAGIC:  # type: ignore[attr-defined]
        fh = gzip.GzipFile(fileobj=fh, mode="rb")
        to_close.insert(0, fh)
    return fh, to_close


def iter_events(source, skipped: list[SkippedLine] | None = None,
                source_name: str = "") -> Iterator[RepoEvent]:
    """Stream events from newline-delimited JSON, one record at a time.

    Malformed lines are appended to ``skipped`` (when given) and never stop the
    stream.  Blank lines are ignored.  I/O errors propagate.
    """
    fh, to_close = _open_binary(source)
    loads = json.loads
    from_json = RepoEvent.from_json
    try:
        for line_no, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                yield from_json(loads(raw))
            except (ValueError, TypeError, AttributeError) as exc:
                if skipped is not None:
                    reason = exc.__class__.__name__ + ": " + str(exc)[:200]
                    skipped.append(SkippedLine(line_no, reason, source_name))
    finally:
        for h in to_close:
            h.close()


def parse_event_stream(source, source_name: str = "") -> ParseResult:
    skipped: list[SkippedLine] = []
    events = list(iter_events(source, skipped, source_name))
    if skipped:
        log.warning("%s: skipped %d malformed event lines", source_name or "stream", len(skipped))
    return ParseResult(events, skipped)


def _parse_path(path: str) -> ParseResult:
    return parse_event_stream(path, source_name=str(path))


def parse_event_files(paths: Sequence, workers: int = 1) -> ParseResult:
    """Parse hourly shards, possibly in parallel; output keeps the input path order."""
    paths = [str(p) for p in paths]
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_parse_path, paths))
    else:
        parts = [_parse_path(p) for p in paths]
    out = ParseResult([], [])
    for part in parts:
        out.events.extend(part.events)
        out.skipped.extend(part.skipped)
    return out


def write_event_stream(events: Iterable[RepoEvent], path, compress: bool | None = None) -> None:
    """Write events as newline-delimited JSON; gzip output carries a zero mtime."""
    path = Path(path)
    if compress is None:
        compress = path.suffix == ".gz"
    lines = (json.dumps(e.to_json(), separators=(",", ":")) + "\n" for e in events)
    if compress:
        with open(path, "wb") as raw, gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
            for line in lines:
                gz.write(line.encode())
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(lines)


# --------------------------------------------------------------------------
# quality control


@dataclass(frozen=True)
class QcStage:
    name: str
    entity: str
    before: int
    excluded: int
    after: int


@dataclass
class QcReport:
    stages: list[QcStage]
    totals_before: dict[str, int]
    totals_after: dict[str, int]
    excluded_years: tuple[int, ...]
    unresolved_member_refs: int = 0

    def count(self, name: str) -> int:
        for st in self.stages:
            if st.name == name:
                return st.excluded
        raise KeyError(name)

    def exclusions(self) -> dict[str, int]:
        return {st.name: st.excluded for st in self.stages}

    def residual(self, entity: str, reported_after: int) -> int:
        """Reported retained count minus ours, for reconciling against a published tally."""
        return reported_after - self.totals_after[entity]

    def to_dict(self) -> dict:
        return {
            "excluded_years": list(self.excluded_years),
            "totals_before": dict(self.totals_before),
            "totals_after": dict(self.totals_after),
            "stages": [asdict(s) for s in self.stages],
            "unresolved_member_refs": self.unresolved_member_refs,
        }


QC_STAGES = (
    "projects_without_hackathon",
    "projects_unresolved_hackathon",
    "hackathons_without_projects",
    "participants_without_projects",
    "projects_incomplete_year",
    "hackathons_incomplete_year",
    "participants_incomplete_year",
)


def apply_quality_control(raw: Dataset, excluded_years: Iterable[int] = DEFAULT_EXCLUDED_YEARS
                          ) -> tuple[Dataset, QcReport]:
    """Run the linkage quality control in its fixed order.

    1. drop projects with no hackathon submission
    2. drop projects whose hackathon has no metadata
    3. drop hackathons left without projects
    4. drop participants who are members of no retained project
    5. drop projects of hackathons starting in ``excluded_years``, then the
       hackathons and participants this leaves empty

    Hackathon ``project_ids``/``participant_ids`` and participant
    ``hackathon_ids`` are re-derived from the retained projects.
    """
    excluded_years = tuple(sorted(set(int(y) for y in excluded_years)))
    stages: list[QcStage] = []

    def record(name, entity, before, after):
        stages.append(QcStage(name, entity, before, before - after, after))

    hackathons = {h.id: h for h in raw.hackathons}
    participants = {p.id: p for p in raw.participants}
    totals_before = {"hackathons": len(hackathons), "projects": len(raw.projects),
                     "participants": len(participants)}

    projects = list(raw.projects)
    n = len(projects)
    projects = [p for p in projects if p.hackathon_id]
    record(QC_STAGES[0], "projects", n, len(projects))

    n = len(projects)
    projects = [p for p in projects if p.hackathon_id in hackathons]
    record(QC_STAGES[1], "projects", n, len(projects))

    def prune_hackathons(name):
        used = {p.hackathon_id for p in projects}
        n = len(hackathons)
        for hid in [hid for hid in hackathons if hid not in used]:
            del hackathons[hid]
        record(name, "hackathons", n, len(hackathons))

    def prune_participants(name):
        members = {m for p in projects for m in p.member_ids}
        n = len(participants)
        for pid in [pid for pid in participants if pid not in members]:
            del participants[pid]
        record(name, "participants", n, len(participants))

    prune_hackathons(QC_STAGES[2])
    prune_participants(QC_STAGES[3])

    n = len(projects)
    projects = [p for p in projects if hackathons[p.hackathon_id].start_date.year not in excluded_years]
    record(QC_STAGES[4], "projects", n, len(projects))
    prune_hackathons(QC_STAGES[5])
    prune_participants(QC_STAGES[6])

    # re-derive the links from retained projects
    unresolved = 0
    by_hack_projects: dict[str, list[str]] = defaultdict(list)
    by_hack_people: dict[str, dict[str, None]] = defaultdict(dict)
    by_person: dict[str, dict[str, None]] = defaultdict(dict)
    clean_projects = []
    for p in projects:
        members = tuple(m for m in p.member_ids if m in participants)
        unresolved += len(p.member_ids) - len(members)
        if members != p.member_ids:
            p = replace(p, member_ids=members)
        clean_projects.append(p)
        by_hack_projects[p.hackathon_id].append(p.id)
        for m in members:
            by_hack_people[p.hackathon_id][m] = None
            by_person[m][p.hackathon_id] = None

    clean_hackathons = [
        replace(h, project_ids=tuple(by_hack_projects[h.id]),
                participant_ids=tuple(by_hack_people[h.id]))
        for h in raw.hackathons if h.id in hackathons
    ]
    clean_participants = [
        replace(p, hackathon_ids=tuple(by_person[p.id]))
        for p in raw.participants if p.id in participants
    ]
    clean = Dataset(clean_hackathons, clean_projects, clean_participants)
    totals_after = {"hackathons": len(clean_hackathons), "projects": len(clean_projects),
                    "participants": len(clean_participants)}
    report = QcReport(stages, totals_before, totals_after, excluded_years, unresolved)
    return clean, report


# --------------------------------------------------------------------------
# repository linkage

_URL_RE = re.compile(
    r"^(?:(?:https?|git|ssh)://)?(?:[^@/]+@)?(?:www\.)?github\.com[:/]+([^/\s]+)/([^/\s?#]+)",
    re.IGNORECASE,
)
_SLUG_RE = re.compile(r"^[A-Za-z0-9_.-]+/[A-Za-z0-9_.-]+$")


def normalize_repo_url(url: str | None) -> str | None:
    """Map a repository locator to lowercase ``owner/repo``; None if unusable."""
    if not url:
        return None
    s = url.strip()
    m = _URL_RE.match(s)
    if m:
        owner, repo = m.group(1), m.group(2)
    elif _SLUG_RE.match(s.rstrip("/")):
        owner, repo = s.rstrip("/").split("/")
    else:
        return None
    repo = repo.rstrip("/")
    if repo.lower().endswith(".git"):
        repo = repo[:-4]
    if not owner or not repo:
        return None
    return f"{owner}/{repo}".lower()


@dataclass
class LinkResult:
    events_by_project: dict[str, list[RepoEvent]]
    n_projects: int
    n_with_locator: int
    n_linked: int

    @property
    def locator_fraction(self) -> float:
        return self.n_with_locator / self.n_projects if self.n_projects else 0.0

    @property
    def linked_fraction(self) -> float:
        """Share of projects with a locator whose repository produced events."""
        return self.n_linked / self.n_with_locator if self.n_with_locator else 0.0

    def summary(self) -> dict:
        return {
            "n_projects": self.n_projects,
            "n_with_locator": self.n_with_locator,
            "n_linked": self.n_linked,
            "locator_fraction": self.locator_fraction,
            "linked_fraction": self.linked_fraction,
        }


def link_repos(projects: Iterable[Project], events: Iterable[RepoEvent]) -> LinkResult:
    by_repo: dict[str, list[RepoEvent]] = defaultdict(list)
    for ev in events:
        by_repo[ev.repo_name.lower()].append(ev)
    mapping: dict[str, list[RepoEvent]] = {}
    n = n_loc = n_linked = 0
    for p in projects:
        n += 1
        key = normalize_repo_url(p.repo_url)
        if key is None:
            mapping[p.id] = []
            continue
        n_loc += 1
        evs = list(by_repo.get(key, ()))
        n_linked += bool(evs)
        mapping[p.id] = evs
    return LinkResult(mapping, n, n_loc, n_linked)


# --------------------------------------------------------------------------
# tables on disk


def _split(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(str(v).strip() for v in value if str(v).strip())
    return tuple(s.strip() for s in str(value).split(LIST_SEP) if s.strip())


def _join(values: Iterable[str]) -> str:
    return LIST_SEP.join(values)


def _read_rows(directory: Path, stem: str) -> list[dict] | None:
    csv_path = directory / f"{stem}.csv"
    json_path = directory / f"{stem}.json"
    if csv_path.exists():
        with open(csv_path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    if json_path.exists():
        with open(json_path, encoding="utf-8") as fh:
            rows = json.load(fh)
        if not isinstance(rows, list):
            raise ValueError(f"{json_path} must hold a JSON array")
        return rows
    return None


def _opt(value) -> str | None:
    if value is None:
        return None
    s = str(value).strip()
    return s or None


def hackathon_from_row(row: dict) -> Hackathon:
    hid = _opt(row.get("id"))
    if hid is None:
        raise ValueError(f"hackathon row without id: {row!r}")
    try:
        start = parse_date(row["start_date"])
    except (KeyError, ValueError, TypeError):
        raise ValueError(f"hackathon {hid}: unparseable start_date {row.get('start_date')!r}") from None
    return Hackathon(hid, start, str(row.get("theme_text") or ""), _split(row.get("tags")),
                     str(row.get("criteria_text") or ""),
                     _split(row.get("project_ids")), _split(row.get("participant_ids")))


def project_from_row(row: dict) -> Project:
    pid = _opt(row.get("id"))
    if pid is None:
        raise ValueError(f"project row without id: {row!r}")
    return Project(pid, _opt(row.get("hackathon_id")), _opt(row.get("repo_url")),
                   _split(row.get("technologies")), _split(row.get("member_ids")))


def load_metadata(directory) -> Dataset:
    """Load hackathons, projects and participants from CSV or JSON tables."""
    directory = Path(directory)
    h_rows = _read_rows(directory, "hackathons")
    p_rows = _read_rows(directory, "projects")
    if h_rows is None or p_rows is None:
        raise FileNotFoundError(f"{directory}: need hackathons.csv|json and projects.csv|json")
    hackathons = [hackathon_from_row(r) for r in h_rows]
    seen: set[str] = set()
    for h in hackathons:
        if h.id in seen:
            raise ValueError(f"duplicate hackathon id {h.id!r}")
        seen.add(h.id)
    projects = [project_from_row(r) for r in p_rows]

    q_rows = _read_rows(directory, "participants")
    if q_rows is None:
        ids = dict.fromkeys(m for p in projects for m in p.member_ids)
        participants = [Participant(pid) for pid in ids]
    else:
        participants = []
        seen = set()
        for r in q_rows:
            pid = _opt(r.get("id"))
            if pid is None or pid in seen:
                continue
            seen.add(pid)
            participants.append(Participant(pid))
    return Dataset(hackathons, projects, participants)


EVENT_SUFFIXES = (".json", ".json.gz", ".ndjson", ".ndjson.gz", ".jsonl", ".jsonl.gz")
_METADATA_STEMS = {"hackathons", "projects", "participants"}
# JSON files a corpus or output directory may hold besides event shards
_BUNDLE_STEMS = {"manifest", "truth", "qc_report", "error"}


def find_event_files(directory) -> list[Path]:
    """Event shards, sorted by name.

    When ``directory/events`` exists only that subdirectory is searched;
    otherwise the top level is, skipping metadata and bundle JSON files.
    """
    directory = Path(directory)
    found = []
    sub = directory / "events"
    for d in ([sub] if sub.is_dir() else [directory]):
        for p in d.iterdir():
            name = p.name
            stem = name.split(".")[0]
            if p.is_file() and name.endswith(EVENT_SUFFIXES) and stem not in _METADATA_STEMS | _BUNDLE_STEMS:
                found.append(p)
    return sorted(found, key=lambda p: str(p))


def write_clean_dataset(directory, data: Dataset, events: Sequence[RepoEvent] = (),
                        report: QcReport | None = None) -> None:
    from ._io import write_csv, write_json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_csv(directory / "hackathons.csv",
              ["id", "start_date", "theme_text", "tags", "criteria_text", "project_ids", "participant_ids"],
              ([h.id, h.start_date.isoformat(), h.theme_text, _join(h.tags), h.criteria_text,
                _join(h.project_ids), _join(h.participant_ids)] for h in data.hackathons))
    write_csv(directory / "projects.csv",
              ["id", "hackathon_id", "repo_url", "technologies", "member_ids"],
              ([p.id, p.hackathon_id or "", p.repo_url or "", _join(p.technologies), _join(p.member_ids)]
               for p in data.projects))
    write_csv(directory / "participants.csv", ["id", "hackathon_ids", "n_hackathons"],
              ([p.id, _join(p.hackathon_ids), len(p.hackathon_ids)] for p in data.participants))
    write_events_csv(directory / "events.csv", events)
    if report is not None:
        write_json(directory / "qc_report.json", report.to_dict())


EVENT_COLUMNS = ["event_id", "event_type", "repo_name", "actor_id", "created_at", "public", "commits"]


def write_events_csv(path, events: Iterable[RepoEvent]) -> None:
    from ._io import write_csv

    write_csv(path, EVENT_COLUMNS,
              ([e.event_id, e.event_type, e.repo_name, e.actor_id, format_timestamp(e.created_at),
                "true" if e.public else "false", "" if e.commits is None else e.commits]
               for e in events))


def read_events_csv(path) -> list[RepoEvent]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            commits = row.get("commits")
            out.append(RepoEvent(row["event_id"], row["event_type"], row["repo_name"], row["actor_id"],
                                 parse_timestamp(row["created_at"]), row.get("public", "true") == "true",
                                 int(commits) if commits else None))
    return out


def read_clean_dataset(directory) -> Dataset:
    """Inverse of :func:`write_clean_dataset` for the metadata tables."""
    directory = Path(directory)
    for stem in ("hackathons", "projects", "participants"):
        if not (directory / f"{stem}.csv").exists():
            raise FileNotFoundError(f"missing {stem}.csv in {directory}")
    with open(directory / "hackathons.csv", newline="", encoding="utf-8") as fh:
        hackathons = [hackathon_from_row(r) for r in csv.DictReader(fh)]
    with open(directory / "projects.csv", newline="", encoding="utf-8") as fh:
        projects = [project_from_row(r) for r in csv.DictReader(fh)]
    with open(directory / "participants.csv", newline="", encoding="utf-8") as fh:
        participants = [Participant(r["id"], _split(r.get("hackathon_ids"))) for r in csv.DictReader(fh)]
    return Dataset(hackathons, projects, participants)
