import random
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kairos.dynamics import (
    StackedSeries,
    classify_alpha,
    classify_cascade,
    fit_productivity_scaling,
    fit_relaxation,
    fit_scaling_pairs,
    read_series_csv,
    repo_creation_days,
    scaling_windows,
    stack_event_activity,
    stack_repo_creations,
    write_bins_csv,
    write_series_csv,
)
from kairos.ingest import Hackathon, RepoEvent
from kairos.synth import SynthSpec, gen_scaling_events

D0 = date(2018, 6, 1)
_ids = iter(range(10**9))


def ev(repo, day, actor="a", kind="PushEvent", size=None, sec=0):
    ts = datetime.combine(day, datetime.min.time(), tzinfo=timezone.utc) + timedelta(seconds=sec)
    return RepoEvent(str(next(_ids)), kind, repo, actor, ts, True, size)


def hack(hid, start, pids):
    return Hackathon(hid, start, project_ids=tuple(pids))


# -- stacking ----------------------------------------------------------------


def test_three_repos_on_start_day():
    h = hack("h", D0, ["p1", "p2", "p3"])
    m = {f"p{k}": [ev(f"o/r{k}", D0), ev(f"o/r{k}", D0 + timedelta(days=9))] for k in (1, 2, 3)}
    s = stack_repo_creations([h], m)
    assert s.value_at(0) == 3 and s.values.sum() == 3 and s.n_stacked == 1
    assert s.offsets[0] == -100 and s.offsets[-1] == 700


def test_empty_mapping_is_error():
    with pytest.raises(ValueError, match="empty"):
        stack_repo_creations([hack("h", D0, ["p"])], {})
    with pytest.raises(ValueError, match="empty"):
        stack_event_activity([hack("h", D0, ["p"])], {"p": []})


def planted_hackathons(seed, n=10):
    rng = random.Random(seed)
    hs, m, truth = [], {}, []
    for i in range(n):
        start = D0 + timedelta(days=rng.randint(0, 400))
        pids = []
        offs = []
        for j in range(rng.randint(1, 6)):
            pid = f"p{i}-{j}"
            pids.append(pid)
            first = rng.randint(-120, 720)
            offs.append(first)
            repo = f"o{i}/r{j}"
            m[pid] = [ev(repo, start + timedelta(days=first + rng.randint(0, 30)), sec=s) for s in range(3)]
            m[pid].append(ev(repo, start + timedelta(days=first)))
        hs.append(hack(f"h{i}", start, pids))
        truth.append(offs)
    return hs, m, truth


@pytest.mark.parametrize("seed", range(5))
def test_creation_stack_matches_brute_force(seed):
    hs, m, truth = planted_hackathons(seed)
    s = stack_repo_creations(hs, m)
    expected = {}
    for offs in truth:
        for o in offs:
            if -100 <= o <= 700:
                expected[o] = expected.get(o, 0) + 1
    for o, v in zip(s.offsets, s.values):
        assert v == expected.get(int(o), 0)
    mean = stack_repo_creations(hs, m, aggregate="mean")
    assert np.allclose(mean.values * len(hs), s.values)


def test_repo_creation_day_is_earliest_event():
    evs = [ev("o/a", D0 + timedelta(days=3)), ev("o/a", D0), ev("o/b", D0 + timedelta(days=1))]
    assert repo_creation_days(evs) == {"o/a": D0.toordinal(), "o/b": D0.toordinal() + 1}


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_stacking_is_additive(seed):
    hs, m, _ = planted_hackathons(seed, n=8)
    a, b = hs[:3], hs[3:]
    whole = stack_repo_creations(hs, m)
    assert np.array_equal(whole.values, stack_repo_creations(a, m).values + stack_repo_creations(b, m).values)
    try:
        acts = [stack_event_activity(x, m, normalization="none", aggregate="sum") for x in (hs, a, b)]
    except ValueError:
        return
    assert np.array_equal(acts[0].values, acts[1].values + acts[2].values)


def test_activity_single_day():
    h = hack("h", D0, ["p"])
    s = stack_event_activity([h], {"p": [ev("o/r", D0, sec=k) for k in range(7)]})
    assert s.value_at(0) == 1.0 and s.values.sum() == 1.0


def brute_force_activity(hs, m, pwd=3, lo=-100, hi=700):
    rows = []
    for h in hs:
        repos = {}
        for pid in h.project_ids:
            for e in m.get(pid, ()):
                repos.setdefault(e.repo_name, []).append((e.day - h.start_date).days)
        row = [0.0] * (hi - lo + 1)
        for offs in repos.values():
            if min(offs) > pwd:
                continue
            for o in offs:
                if lo <= o <= hi:
                    row[o - lo] += 1
        if max(row) == 0:
            continue
        peak = row.index(max(row))
        if abs(peak + lo) > pwd:
            continue
        rows.append([v / row[peak] for v in row])
    return np.mean(rows, axis=0), len(rows)


def test_late_repo_excluded_from_activity():
    h = hack("h", D0, ["p1", "p2"])
    m = {
        "p1": [ev("o/early", D0 + timedelta(days=d), sec=k) for d, n in ((0, 6), (1, 3), (4, 2)) for k in range(n)],
        "p2": [ev("o/late", D0 + timedelta(days=5), sec=k) for k in range(20)],
    }
    s = stack_event_activity([h], m)
    ref, n = brute_force_activity([h], m)
    assert n == 1 and np.allclose(s.values, ref)
    assert s.value_at(5) == 0 and s.value_at(0) == 1 and s.value_at(1) == 0.5


@pytest.mark.parametrize("seed", range(4))
def test_activity_matches_brute_force(seed):
    rng = random.Random(seed)
    hs, m = [], {}
    for i in range(10):
        start = D0 + timedelta(days=rng.randint(0, 300))
        pids = []
        for j in range(3):
            pid = f"p{i}-{j}"
            pids.append(pid)
            born = rng.choice([-2, 0, 1, 2, 3, 4, 8])
            peak = rng.choice([0, 0, 1, 5])
            m[pid] = [ev(f"o{i}/r{j}", start + timedelta(days=born), sec=0)]
            m[pid] += [ev(f"o{i}/r{j}", start + timedelta(days=max(born, peak)), sec=k + 1)
                       for k in range(rng.randint(0, 6))]
            m[pid] += [ev(f"o{i}/r{j}", start + timedelta(days=rng.randint(born, 600)), sec=99)
                       for _ in range(rng.randint(0, 8))]
        hs.append(hack(f"h{i}", start, pids))
    ref, n = brute_force_activity(hs, m)
    if n == 0:
        with pytest.raises(ValueError, match="peak"):
            stack_event_activity(hs, m)
        return
    s = stack_event_activity(hs, m)
    assert s.n_stacked == n and np.allclose(s.values, ref)


def test_filter_error_names_both_filters():
    h = hack("h", D0, ["p"])
    m = {"p": [ev("o/r", D0 + timedelta(days=10), sec=k) for k in range(4)]}
    with pytest.raises(ValueError) as exc:
        stack_event_activity([h], m)
    msg = str(exc.value)
    assert "created within 3 days" in msg and "peak within" in msg


def test_per_peak_scale_invariance():
    hs, m = [], {}
    for i in range(4):
        start = D0 + timedelta(days=30 * i)
        counts = {0: 10 + i, 1: 4, 2: 3, 9: 1 + i, 40: 2}
        m[f"p{i}"] = [ev(f"o/r{i}", start + timedelta(days=d), sec=k) for d, n in counts.items() for k in range(n)]
        hs.append(hack(f"h{i}", start, [f"p{i}"]))
    base = stack_event_activity(hs, m)
    m3 = dict(m)
    m3["p2"] = [ev(e.repo_name, e.day, sec=k) for e in m["p2"] for k in range(3)]
    assert np.allclose(stack_event_activity(hs, m3).values, base.values)


def test_series_invariants():
    with pytest.raises(ValueError):
        StackedSeries(np.array([0, 2, 1]), np.zeros(3), 1)
    with pytest.raises(ValueError):
        StackedSeries(np.array([0, 1]), np.zeros(2), 0)


# -- relaxation fit ----------------------------------------------------------


def power_series(alpha, c=1000.0, horizon=500, peak=None):
    t = np.arange(0, horizon + 1, dtype=float)
    v = np.empty_like(t)
    v[1:] = c * t[1:] ** -alpha
    v[0] = peak if peak is not None else 3 * c
    return StackedSeries(np.arange(horizon + 1), v, 1)


def test_noiseless_decay():
    f = fit_relaxation(power_series(0.8), t_c=0)
    assert f.alpha == pytest.approx(0.8, abs=0.01)
    assert f.r == pytest.approx(-1, abs=1e-9) and f.p_value < 1e-6
    assert f.fit_window == (1, 500) and f.t_c == 0


def test_default_tc_is_argmax_and_window_starts_after_it():
    f = fit_relaxation(power_series(0.8))
    assert f.t_c == 0 and f.fit_window[0] == 1


@pytest.mark.parametrize("alpha", [0.6, 0.8, 1.0, 1.2])
def test_planted_alpha_within_two_stderr(alpha):
    f = fit_relaxation(power_series(alpha, horizon=700))
    assert abs(f.alpha - alpha) <= 2 * f.alpha_stderr + 1e-9
    assert abs(f.alpha - alpha) < 1e-6


def test_binning_bias_removed_by_abscissa_iteration():
    # with midpoint-style abscissas wide bins bend the log-log line; the fit is exact here
    f = fit_relaxation(power_series(1.2, horizon=5000), bins_per_decade=5)
    assert f.alpha == pytest.approx(1.2, abs=1e-9)
    for b in f.bins:
        assert b.lo <= b.tau < b.hi


def test_fit_errors():
    with pytest.raises(ValueError, match="nonpositive"):
        fit_relaxation(power_series(0.8), window=(0, 400), t_c=0)
    with pytest.raises(ValueError, match="usable log bins"):
        fit_relaxation(power_series(0.8, horizon=8))
    s = power_series(0.8)
    v = s.values.copy()
    v[10:] = 0
    with pytest.raises(ValueError, match="usable"):
        fit_relaxation(StackedSeries(s.offsets, v, 1))


def test_fit_bins_are_plot_ready(tmp_path):
    f = fit_relaxation(power_series(0.9))
    write_bins_csv(tmp_path / "bins.csv", f)
    data = np.loadtxt(tmp_path / "bins.csv", delimiter=",", skiprows=1)
    assert data.shape == (f.n_bins, 6)
    assert np.allclose(data[:, 3], data[:, 5], rtol=1e-6)


def test_series_csv_round_trip(tmp_path):
    s = power_series(0.7)
    write_series_csv(tmp_path / "s.csv", s)
    back = read_series_csv(tmp_path / "s.csv")
    assert np.array_equal(back.offsets, s.offsets)
    assert np.allclose(back.values, s.values, rtol=1e-8)
    assert (tmp_path / "s.csv").read_bytes().count(b"\r") == 0


# -- classification ------------------------------------------------------------


@pytest.mark.parametrize("alpha,se,label", [
    (0.60, 0.01, "exogenous-critical"),
    (1.40, 0.01, "sub-critical"),
    (0.876, 0.003, "exogenous-critical"),
    (1.0, 0.0, "indeterminate"),
    (0.99, 0.01, "indeterminate"),
    (1.03, 0.01, "sub-critical"),
])
def test_classify(alpha, se, label):
    c = classify_alpha(alpha, se)
    assert c.label == label and c.theta_ref == 0.40


def test_mixing_note():
    c = classify_alpha(0.876, 0.003)
    assert "1 - theta = 0.60" in c.note
    assert classify_alpha(0.55, 0.01).note == ""


def test_classify_cascade_uses_fit():
    f = fit_relaxation(power_series(1.4, horizon=700))
    assert classify_cascade(f).label == "sub-critical"


# -- productivity scaling ------------------------------------------------------


def brute_force_windows(mapping, w):
    cells = {}
    seen = set()
    for evs in mapping.values():
        for e in evs:
            if e.event_type != "PushEvent" or (e.repo_name, e.event_id) in seen:
                continue
            seen.add((e.repo_name, e.event_id))
            k = (e.repo_name, e.day.toordinal() // w)
            a, r = cells.get(k, (set(), 0))
            cells[k] = (a | {e.actor_id}, r + (1 if e.commits is None else e.commits))
    return sorted((len(a), r) for a, r in cells.values() if r >= 1)


def test_r_equals_c_gives_beta_one():
    m = {}
    for c in range(1, 8):
        m[f"p{c}"] = [ev(f"o/r{c}", D0, actor=f"a{k}", size=1) for k in range(c)]
    f = fit_productivity_scaling(m)
    assert f.beta == pytest.approx(1.0) and f.r2 == pytest.approx(1.0)


def test_rounded_four_thirds_recovered():
    c = np.arange(1, 51, dtype=float)
    r = np.round(c ** (4 / 3))
    f = fit_scaling_pairs(np.column_stack([c, r]))
    oracle = np.polyfit(np.log(c), np.log(r), 1)[0]
    assert f.beta == pytest.approx(oracle, rel=1e-10)
    assert abs(f.beta - 1.33) <= 0.03


@pytest.mark.parametrize("noise,tol", [("none", 0.03), ("poisson", 0.10)])
def test_generated_scaling_recovered(noise, tol):
    mapping, planted = gen_scaling_events(SynthSpec(seed=0, noise=noise))
    assert np.array_equal(scaling_windows(mapping), np.array(sorted(map(tuple, planted))))
    assert abs(fit_productivity_scaling(mapping).beta - 4 / 3) <= tol


def test_scaling_matches_brute_force_and_is_invariant():
    rng = random.Random(0)
    m = {}
    for r in range(6):
        m[f"p{r}"] = [ev(f"o/r{r}", D0 + timedelta(days=rng.randint(0, 60)), actor=f"a{rng.randint(0, 5)}",
                         size=rng.choice([None, 0, 1, 3]), kind=rng.choice(["PushEvent", "PushEvent", "WatchEvent"]))
                      for _ in range(80)]
    pairs = scaling_windows(m, 5)
    assert pairs.tolist() == [list(map(float, p)) for p in brute_force_windows(m, 5)]
    relabeled = {f"x{k}": [RepoEvent(e.event_id, e.event_type, "z/" + e.repo_name[::-1], e.actor_id,
                                     e.created_at, e.public, e.commits) for e in reversed(v)]
                 for k, v in enumerate(reversed(list(m.values())))}
    assert fit_productivity_scaling(relabeled) == fit_productivity_scaling(m)


def test_scaling_errors():
    with pytest.raises(ValueError, match="no qualifying"):
        fit_productivity_scaling({"p": [ev("o/r", D0, kind="WatchEvent")]})
    with pytest.raises(ValueError):
        fit_productivity_scaling({"p": [ev("o/r", D0)]}, window_days=0)
