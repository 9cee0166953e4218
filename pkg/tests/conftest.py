import random
from datetime import date, timedelta

import pytest

from kairos.ingest import Dataset, Hackathon, Participant, Project


def random_raw_dataset(seed: int, n_records: int = 500) -> Dataset:
    """Messy raw corpus: dangling hackathon refs, empty hackathons, stray people, edge years."""
    rng = random.Random(seed)
    n_h = max(2, n_records // 5)
    n_q = max(2, n_records // 4)
    n_p = n_records - n_h - n_q
    years = [2009, 2012, 2015, 2018, 2021, 2022]
    hackathons = [
        Hackathon(f"h{i:03d}", date(rng.choice(years), 1, 1) + timedelta(days=rng.randrange(365)))
        for i in range(n_h)
    ]
    participants = [Participant(f"u{i:03d}") for i in range(n_q)]
    projects = []
    for i in range(n_p):
        r = rng.random()
        if r < 0.08:
            hid = None
        elif r < 0.14:
            hid = f"ghost{rng.randrange(5)}"
        else:
            hid = f"h{rng.randrange(n_h):03d}"
        k = rng.randrange(0, 4)
        members = tuple(sorted({f"u{rng.randrange(n_q + 10):03d}" for _ in range(k)}))
        projects.append(Project(f"p{i:04d}", hid, None, (), members))
    rng.shuffle(projects)
    return Dataset(hackathons, projects, participants)


@pytest.fixture
def raw_factory():
    return random_raw_dataset


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config._acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
