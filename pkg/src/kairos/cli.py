"""``kairos``: ingest -> tag -> analyze -> report from the command line.

Every subcommand reads the outputs of earlier stages from the output
directory, so stages can be re-run one at a time.  Settings come from an INI
file (section ``[kairos]``) and are overridden by flags.
"""
from __future__ import annotations

import argparse
import configparser
import sys
import warnings
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._io import read_json, sha256_file, write_csv, write_json

# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    out: str = "kairos-out"
    input: str = ""
    lexicon: str = ""
    correction_vector: str = ""
    excluded_years: str = "2009,2022"
    threshold: float = 0.0
    min_prevalence: float = 0.001
    peak_window_days: int = 3
    stack_window: str = "-100,700"
    fit_window: str = ""
    bins_per_decade: int = 10
    theta: float = 0.40
    margin_sigmas: float = 2.0
    window_days: int = 5
    xmin: int = 0
    counts: str = ""
    normalize: str = "none"
    threads: int = 1

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(int(y) for y in self.excluded_years.replace(" ", "").split(",") if y)

    @staticmethod
    def _pair(text: str) -> tuple[int, int] | None:
        if not text.strip():
            return None
        lo, hi = (int(v) for v in text.split(","))
        return lo, hi

    @property
    def stack_range(self) -> tuple[int, int]:
        return self._pair(self.stack_window)

    @property
    def fit_range(self) -> tuple[int, int] | None:
        return self._pair(self.fit_window)

    def validate(self) -> None:
        checks = [
            (self.threshold >= 0, "threshold must be >= 0"),
            (0 <= self.min_prevalence <= 1, "min_prevalence must lie in [0, 1]"),
            (self.peak_window_days >= 0, "peak_window_days must be >= 0"),
            (self.window_days >= 1, "window_days must be >= 1"),
            (self.bins_per_decade >= 1, "bins_per_decade must be >= 1"),
            (0 < self.theta < 1, "theta must lie in (0, 1)"),
            (self.margin_sigmas >= 0, "margin_sigmas must be >= 0"),
            (self.xmin >= 0, "xmin must be >= 0 (0 selects it by KS distance)"),
            (self.threads >= 1, "threads must be >= 1"),
            (self.normalize in ("none", "zscore"), "normalize must be none or zscore"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        lo, hi = self.stack_range
        if lo > 0 or hi < 1:
            raise ValueError("stack_window must include offsets 0 and 1")
        self.years
        self.fit_range
        for name in ("lexicon", "correction_vector", "counts"):
            p = getattr(self, name)
            if p and not Path(p).is_file():
                raise FileNotFoundError(f"{name} file not found: {p}")


_KNOBS = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def _cast(name: str, value):
    return _CASTS[str(_KNOBS[name])](value)


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    if not Path(path).is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path, encoding="utf-8")
    if not cp.has_section("kairos"):
        raise ValueError(f"{path}: missing [kairos] section")
    out = {}
    for key, value in cp.items("kairos"):
        key = key.replace("-", "_")
        if key not in _KNOBS:
            raise ValueError(f"{path}: unknown config key {key!r}")
        out[key] = _cast(key, value)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = load_config(getattr(args, "config", None))
    for name in _KNOBS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# errors and bookkeeping


class StageError(Exception):
    def __init__(self, module: str, stage: str, message: str):
        super().__init__(f"[{module}:{stage}] {message}")
        self.module, self.stage, self.message = module, stage, message


@contextmanager
def stage(module: str, name: str):
    try:
        yield
    except StageError:
        raise
    except (ValueError, OSError, KeyError, RuntimeError, IndexError) as exc:
        raise StageError(module, name, f"{type(exc).__name__}: {exc}") from exc


class Tracker:
    """Input files read and output files written by one invocation."""

    def __init__(self, out: Path):
        self.out = out
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []

    def read(self, path) -> Path:
        path = Path(path)
        if path.is_file():
            self.inputs[path.as_posix()] = sha256_file(path)
        return path

    def wrote(self, *names: str) -> None:
        for n in names:
            if n not in self.outputs:
                self.outputs.append(n)


def require(out: Path, name: str, producer: str, module: str) -> Path:
    p = out / name
    if not p.is_file():
        raise StageError(module, "inputs", f"missing required file {name} in {out} (produced by `kairos {producer}`)")
    return p


# ---------------------------------------------------------------------------
# stages


def do_ingest(cfg: RunConfig, tr: Tracker) -> None:
    from .ingest import (apply_quality_control, find_event_files, link_repos, load_metadata,
                         normalize_repo_url, parse_event_files, write_clean_dataset)

    src = Path(cfg.input)
    with stage("ingest", "load_metadata"):
        if not src.is_dir():
            raise FileNotFoundError(f"input directory not found: {src}")
        if not any(src.iterdir()):
            raise FileNotFoundError(f"input directory is empty: {src}")
        raw = load_metadata(src)
        for stem in ("hackathons", "projects", "participants"):
            for ext in (".csv", ".json"):
                tr.read(src / f"{stem}{ext}")
    with stage("ingest", "parse_events"):
        paths = find_event_files(src)
        for p in paths:
            tr.read(p)
        parsed = parse_event_files(paths, workers=cfg.threads)
    with stage("ingest", "quality_control"):
        clean, report = apply_quality_control(raw, cfg.years)
    with stage("ingest", "link_repos"):
        link = link_repos(clean.projects, parsed.events)
        wanted = {normalize_repo_url(p.repo_url) for p in clean.projects} - {None}
        events = [e for e in parsed.events if e.repo_name.lower() in wanted]
    with stage("ingest", "write"):
        write_clean_dataset(tr.out, clean, events, report)
        qc = report.to_dict()
        qc["linkage"] = link.summary()
        qc["parse"] = {
            "n_files": len(paths),
            "n_events": len(parsed.events),
            "n_skipped": parsed.n_skipped,
            "skipped": [{"source": Path(s.source).name, "line": s.line_no, "reason": s.reason}
                        for s in parsed.skipped[:100]],
            "n_events_linked": len(events),
        }
        write_json(tr.out / "qc_report.json", qc)
    tr.wrote("hackathons.csv", "projects.csv", "participants.csv", "events.csv", "qc_report.json")


def _dataset(cfg, tr, module):
    from .ingest import read_clean_dataset

    for name in ("hackathons.csv", "projects.csv", "participants.csv"):
        tr.read(require(tr.out, name, "ingest", module))
    with stage(module, "read_dataset"):
        return read_clean_dataset(tr.out)


def _mapping(cfg, tr, module):
    from .ingest import link_repos, read_events_csv

    data = _dataset(cfg, tr, module)
    path = tr.read(require(tr.out, "events.csv", "ingest", module))
    with stage(module, "link_repos"):
        return data, link_repos(data.projects, read_events_csv(path)).events_by_project


def do_tag(cfg: RunConfig, tr: Tracker) -> None:
    from .sdgmap import (SDGS, CorrectionVector, bulk_shares, coverage_by_year, demo_lexicons, fit_trend,
                         load_lexicons, tag_all, write_coverage_csv, write_tags_csv)

    data = _dataset(cfg, tr, "sdgmap")
    with stage("sdgmap", "load_lexicons"):
        lexicons = load_lexicons(tr.read(cfg.lexicon)) if cfg.lexicon else demo_lexicons()
        cv = CorrectionVector.from_file(tr.read(cfg.correction_vector)) if cfg.correction_vector else None
    with stage("sdgmap", "tag_hackathon"):
        tags = tag_all(data.hackathons, lexicons, cv, cfg.threshold)
    with stage("sdgmap", "coverage_by_year"):
        cov = coverage_by_year(data.hackathons, tags)
    with stage("sdgmap", "fit_trend"):
        trend = {"years": [c.year for c in cov], "percent": [c.percent for c in cov],
                 "n_hackathons": len(tags), "n_related": sum(t.is_related for t in tags),
                 "bulk_shares": {str(s): v for s, v in zip(SDGS, bulk_shares(tags))}}
        trend["percent_related"] = 100.0 * trend["n_related"] / len(tags) if tags else 0.0
        if len(cov) >= 3:
            trend["fit"] = asdict(fit_trend([c.percent for c in cov]))
        else:
            trend["fit"] = None
            trend["fit_skipped"] = f"{len(cov)} yearly points, need 3"
    with stage("sdgmap", "write"):
        write_tags_csv(tr.out / "tags.csv", tags)
        write_coverage_csv(tr.out / "coverage_by_year.csv", cov)
        write_json(tr.out / "trend.json", trend)
    tr.wrote("tags.csv", "coverage_by_year.csv", "trend.json")


SERIES_FILES = {
    "repos": ("stacked_series_repos.csv", "none", "sum"),
    "repos_mean": ("stacked_series_repos_mean.csv", "none", "mean"),
    "events": ("stacked_series_events.csv", "per-peak", "mean"),
}


def do_stack(cfg: RunConfig, tr: Tracker) -> None:
    from .dynamics import stack_event_activity, stack_repo_creations, write_series_csv

    data, mapping = _mapping(cfg, tr, "dynamics")
    with stage("dynamics", "stack_repo_creations"):
        rs = stack_repo_creations(data.hackathons, mapping, cfg.stack_range)
        rm = stack_repo_creations(data.hackathons, mapping, cfg.stack_range, aggregate="mean")
    with stage("dynamics", "stack_event_activity"):
        ev = stack_event_activity(data.hackathons, mapping, cfg.peak_window_days, cfg.stack_range)
    with stage("dynamics", "write"):
        for key, series in (("repos", rs), ("repos_mean", rm), ("events", ev)):
            write_series_csv(tr.out / SERIES_FILES[key][0], series)
            tr.wrote(SERIES_FILES[key][0])


def do_fit_decay(cfg: RunConfig, tr: Tracker) -> None:
    from .dynamics import classify_cascade, fit_relaxation, read_series_csv, write_bins_csv

    result = {}
    for key in ("repos", "events"):
        name, norm, agg = SERIES_FILES[key]
        path = tr.read(require(tr.out, name, "stack", "dynamics"))
        with stage("dynamics", f"fit_relaxation[{key}]"):
            series = read_series_csv(path, norm, agg)
            fit = fit_relaxation(series, cfg.fit_range, cfg.bins_per_decade)
            cls = classify_cascade(fit, cfg.theta, cfg.margin_sigmas)
        result[key] = {**fit.to_dict(), "n_stacked": series.n_stacked,
                       "classification": {"label": cls.label, "theta_ref": cls.theta_ref,
                                          "margin": cls.margin, "note": cls.note}}
        write_bins_csv(tr.out / f"relaxation_bins_{key}.csv", fit)
        tr.wrote(f"relaxation_bins_{key}.csv")
    write_json(tr.out / "relaxation_fit.json", result)
    tr.wrote("relaxation_fit.json")


def _read_counts(path: Path) -> np.ndarray:
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: no counts")
    header = rows[0]
    if all(c.strip().lstrip("-").isdigit() for c in header):
        col, body = 0, rows
    else:
        names = [h.strip() for h in header]
        for cand in ("n_hackathons", "count", "x"):
            if cand in names:
                col = names.index(cand)
                break
        else:
            if len(names) != 1:
                raise ValueError(f"{path}: no n_hackathons/count/x column")
            col = 0
        body = rows[1:]
    vals = np.array([int(r[col]) for r in body if r and r[col].strip()], dtype=np.int64)
    return vals[vals > 0]


def do_fit_tail(cfg: RunConfig, tr: Tracker) -> None:
    from .tails import ccdf, fit_tail, moment_stability

    if cfg.counts:
        path = tr.read(cfg.counts)
    else:
        path = tr.read(require(tr.out, "participants.csv", "ingest", "tails"))
    with stage("tails", "read_counts"):
        counts = _read_counts(path)
    with stage("tails", "fit_tail"):
        fit = fit_tail(counts, cfg.xmin or None)
    xs, ps = ccdf(counts)
    write_csv(tr.out / "ccdf.csv", ["x", "p"], ([int(x), float(p)] for x, p in zip(xs, ps)))
    out = asdict(fit)
    out["x_min_selected"] = "fixed" if cfg.xmin else "ks"
    out["convention"] = "P(X = x) = x^-mu / zeta(mu, x_min); log_likelihood is the signed natural-log value"
    out["moments"] = {conv: {"finite": {str(k): v for k, v in rep.finite.items()}, "describe": rep.describe()}
                      for conv in ("pmf", "ccdf") for rep in [moment_stability(fit, conv)]}
    write_json(tr.out / "tail_fit.json", out)
    tr.wrote("ccdf.csv", "tail_fit.json")


def do_fit_scaling(cfg: RunConfig, tr: Tracker) -> None:
    from .dynamics import fit_scaling_pairs, scaling_windows

    _, mapping = _mapping(cfg, tr, "dynamics")
    with stage("dynamics", "fit_productivity_scaling"):
        pairs = scaling_windows(mapping, cfg.window_days)
        fit = fit_scaling_pairs(pairs, cfg.window_days)
    write_json(tr.out / "scaling_fit.json", fit.to_dict())
    tally = Counter((int(c), int(r)) for c, r in pairs)
    write_csv(tr.out / "scaling_windows.csv", ["c", "R", "n_windows"],
              ([c, r, n] for (c, r), n in sorted(tally.items())))
    tr.wrote("scaling_fit.json", "scaling_windows.csv")


def do_community(cfg: RunConfig, tr: Tracker) -> None:
    from .community import growth_rate, newcomer_ratios, ratio_vs_size, write_ratios_csv, write_size_curve_csv

    data = _dataset(cfg, tr, "community")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with stage("community", "newcomer_ratios"):
            stats = newcomer_ratios(data.hackathons)
            curve = ratio_vs_size(stats)
        with stage("community", "growth_rate"):
            growth = growth_rate(data.hackathons)
    write_ratios_csv(tr.out / "newcomer_ratios.csv", stats)
    write_size_curve_csv(tr.out / "ratio_vs_size.csv", curve)
    summary = {
        "newcomers": {"median_ratio": stats.median, "n_hackathons": len(stats.hackathon_ids),
                      "n_excluded_empty": stats.n_excluded_empty,
                      "histogram": {"edges": stats.hist_edges.tolist(), "counts": stats.hist_counts.tolist()},
                      "n_new_total": int(stats.n_new.sum())},
        "growth": growth.to_dict(),
        "warnings": [str(w.message) for w in caught],
    }
    write_json(tr.out / "growth.json", summary)
    tr.wrote("newcomer_ratios.csv", "ratio_vs_size.csv", "growth.json")


def do_enrich(cfg: RunConfig, tr: Tracker) -> None:
    from .enrichment import build_matrix, cluster, write_dendrograms, write_matrix_csv
    from .sdgmap import read_tags_csv

    data = _dataset(cfg, tr, "enrichment")
    tags_path = tr.read(require(tr.out, "tags.csv", "tag", "enrichment"))
    with stage("enrichment", "build_matrix"):
        tags = read_tags_csv(tags_path, [h.id for h in data.hackathons])
        m = build_matrix(data.hackathons, tags, data.projects, cfg.min_prevalence)
    with stage("enrichment", "cluster"):
        rows = cluster(m, "rows", cfg.normalize)
        cols = cluster(m, "cols", cfg.normalize)
    write_matrix_csv(tr.out / "enrichment.csv", m)
    write_dendrograms(tr.out, rows, cols)
    tr.wrote("enrichment.csv", "dendrogram.json", "leaf_order.txt")


REPORT_INPUTS = [
    ("qc_report.json", "ingest"), ("trend.json", "tag"), ("relaxation_fit.json", "fit-decay"),
    ("tail_fit.json", "fit-tail"), ("scaling_fit.json", "fit-scaling"), ("growth.json", "community"),
    ("enrichment.csv", "enrich"),
]


def report_rows(out: Path) -> list[list]:
    """``[quantity, value, stderr, source]`` rows drawn verbatim from the stage outputs."""
    import csv

    qc = read_json(out / "qc_report.json")
    trend = read_json(out / "trend.json")
    rel = read_json(out / "relaxation_fit.json")
    tail = read_json(out / "tail_fit.json")
    sc = read_json(out / "scaling_fit.json")
    gr = read_json(out / "growth.json")
    with open(out / "enrichment.csv", newline="", encoding="utf-8") as fh:
        cells = [float(r["percent"]) for r in csv.DictReader(fh)]
    rows = [[f"qc.{k}", v, "", "qc_report.json"] for k, v in
            ((s["name"], s["excluded"]) for s in qc["stages"])]
    rows += [[f"retained.{k}", v, "", "qc_report.json"] for k, v in qc["totals_after"].items()]
    rows += [["linkage.locator_fraction", qc["linkage"]["locator_fraction"], "", "qc_report.json"],
             ["linkage.linked_fraction", qc["linkage"]["linked_fraction"], "", "qc_report.json"],
             ["sdg.percent_related", trend["percent_related"], "", "trend.json"]]
    if trend["fit"] is not None:
        rows += [["sdg.trend_slope", trend["fit"]["slope"], trend["fit"]["slope_stderr"], "trend.json"],
                 ["sdg.trend_r2", trend["fit"]["r2"], "", "trend.json"],
                 ["sdg.trend_p", trend["fit"]["p_value"], "", "trend.json"]]
    for key in ("repos", "events"):
        f = rel[key]
        rows += [[f"alpha_{key}", f["alpha"], f["alpha_stderr"], "relaxation_fit.json"],
                 [f"alpha_{key}.r", f["r"], "", "relaxation_fit.json"],
                 [f"alpha_{key}.class", f["classification"]["label"], "", "relaxation_fit.json"]]
    rows += [["mu", tail["mu"], tail["mu_stderr"], "tail_fit.json"],
             ["x_min", tail["x_min"], "", "tail_fit.json"],
             ["tail.log_likelihood", tail["log_likelihood"], "", "tail_fit.json"],
             ["beta", sc["beta"], sc["beta_stderr"], "scaling_fit.json"],
             ["newcomer.median_ratio", gr["newcomers"]["median_ratio"], "", "growth.json"],
             ["growth.relative_rate", gr["growth"]["relative_rate"], "", "growth.json"],
             ["enrichment.max_percent", max(cells) if cells else 0.0, "", "enrichment.csv"]]
    return rows


def do_report(cfg: RunConfig, tr: Tracker) -> None:
    from ._io import fmt_num

    for name, producer in REPORT_INPUTS:
        tr.read(require(tr.out, name, producer, "report"))
    with stage("report", "aggregate"):
        rows = report_rows(tr.out)
    write_csv(tr.out / "report_summary.csv", ["quantity", "value", "stderr", "source"], rows)
    lines = ["# kairos report", "", "| quantity | value | stderr | source |", "|---|---|---|---|"]
    lines += [f"| {q} | {fmt_num(v)} | {fmt_num(e)} | {s} |" for q, v, e, s in rows]
    notes = read_json(tr.out / "relaxation_fit.json")
    extra = [notes[k]["classification"]["note"] for k in ("repos", "events") if notes[k]["classification"]["note"]]
    if extra:
        lines += ["", "## notes", ""] + [f"- {n}" for n in extra]
    (tr.out / "report.md").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    tr.wrote("report_summary.csv", "report.md")


PIPELINE = [do_ingest, do_tag, do_stack, do_fit_decay, do_fit_tail, do_fit_scaling, do_community, do_enrich,
            do_report]


def do_run(cfg: RunConfig, tr: Tracker) -> None:
    for step in PIPELINE:
        step(cfg, tr)


def do_synth(args: argparse.Namespace) -> int:
    from .synth import SynthSpec, generate_corpus, write_corpus

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        spec = SynthSpec(seed=args.seed, n_hackathons=args.n_hackathons, alpha_planted=args.alpha,
                         mu_planted=args.mu, x_min_planted=args.xmin_planted, beta_planted=args.beta,
                         n_participants=args.n_participants, noise=args.noise)
        write_corpus(generate_corpus(spec), out, archive=not args.events_csv)
    except ValueError as exc:
        return _fail(out, StageError("synth", "spec", str(exc)))
    _manifest(out, "synth", {"spec": spec.to_dict(), "events_csv": args.events_csv}, {},
              sorted(p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()
                     and p.name != "manifest.json"))
    return 0


# ---------------------------------------------------------------------------
# entry point


def _manifest(out: Path, command: str, config: dict, inputs: dict, outputs: list[str]) -> None:
    write_json(out / "manifest.json", {
        "software": "kairos",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": dict(sorted(inputs.items())),
        "outputs": {n: sha256_file(out / n) for n in outputs if (out / n).is_file()},
        "created_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    })


def _fail(out: Path, err: StageError) -> int:
    print(f"kairos: error in {err.module} ({err.stage}): {err.message}", file=sys.stderr)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", {"module": err.module, "stage": err.stage, "message": err.message})
    except OSError:
        pass
    return 2


COMMANDS = {
    "ingest": do_ingest, "tag": do_tag, "stack": do_stack, "fit-decay": do_fit_decay, "fit-tail": do_fit_tail,
    "fit-scaling": do_fit_scaling, "community": do_community, "enrich": do_enrich, "report": do_report,
    "run": do_run,
}

_HELP = {
    "ingest": "quality-control metadata, parse event shards, link repositories",
    "tag": "tag hackathons with SDGs and tabulate coverage per year",
    "stack": "stack repo creations and activity around hackathon start days",
    "fit-decay": "fit power-law relaxation to the stacked series",
    "fit-tail": "fit a discrete power law to participation counts",
    "fit-scaling": "fit commits against committers in fixed windows",
    "community": "newcomer ratios and weekly growth",
    "enrich": "technology x SDG matrix and its clustering",
    "report": "collect stage outputs into report.md",
    "run": "every stage in order",
}


def _knob_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("settings (override the config file)")
    g.add_argument("-o", "--out", help="output directory (default kairos-out)")
    g.add_argument("--config", help="INI file with a [kairos] section")
    g.add_argument("--threads", type=int, help="worker cap for parallel parsing")
    g.add_argument("--lexicon", help="dictionary,sdg,pattern CSV (default: bundled demo lexicon)")
    g.add_argument("--correction-vector", dest="correction_vector", help="sdg,weight CSV")
    g.add_argument("--excluded-years", dest="excluded_years", help="comma-separated, default 2009,2022")
    g.add_argument("--threshold", type=float, help="alignment threshold on corrected scores")
    g.add_argument("--min-prevalence", dest="min_prevalence", type=float)
    g.add_argument("--peak-window-days", dest="peak_window_days", type=int)
    g.add_argument("--stack-window", dest="stack_window", help="LO,HI offsets, default -100,700")
    g.add_argument("--fit-window", dest="fit_window", help="T_MIN,T_MAX offsets for the decay fit")
    g.add_argument("--bins-per-decade", dest="bins_per_decade", type=int)
    g.add_argument("--theta", type=float)
    g.add_argument("--margin-sigmas", dest="margin_sigmas", type=float)
    g.add_argument("--window-days", dest="window_days", type=int)
    g.add_argument("--xmin", type=int, help="fix the tail cutoff instead of selecting it")
    g.add_argument("--counts", help="CSV of positive counts for fit-tail")
    g.add_argument("--normalize", choices=["none", "zscore"], help="row normalization before clustering")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kairos", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kairos {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    knobs = _knob_parser()
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[knobs], help=_HELP[name])
        if name in ("ingest", "run"):
            sp.add_argument("input", help="directory with metadata tables and event shards")
    sp = sub.add_parser("synth", help="write a synthetic corpus with planted laws")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha", type=float, default=0.8)
    sp.add_argument("--mu", type=float, default=2.37)
    sp.add_argument("--xmin", dest="xmin_planted", type=int, default=1)
    sp.add_argument("--beta", type=float, default=4 / 3)
    sp.add_argument("--n-hackathons", dest="n_hackathons", type=int, default=200)
    sp.add_argument("--n-participants", dest="n_participants", type=int, default=5000)
    sp.add_argument("--noise", choices=["poisson", "none"], default="poisson")
    sp.add_argument("--events-csv", dest="events_csv", action="store_true",
                    help="write events.csv instead of a gzip NDJSON shard")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth":
        return do_synth(args)
    out = Path(args.out or "kairos-out")
    try:
        with stage("cli", "config"):
            cfg = resolve_config(args)
            out = Path(cfg.out)
            out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").unlink(missing_ok=True)
        tr = Tracker(out)
        if args.config:
            tr.read(args.config)
        COMMANDS[args.command](cfg, tr)
    except StageError as err:
        return _fail(out, err)
    echo = asdict(cfg)
    echo.pop("out")
    _manifest(out, args.command, echo, tr.inputs, tr.outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
