# coding: utf-8

# # Cleaning hackathon metadata and linking repositories
#
# A raw scrape has dangling references: projects pointing at unknown
# hackathons, hackathons nobody submitted to, people who never joined a
# project.  Quality control removes them rule by rule and keeps a tally.

# In[1]:

from datetime import date

from kairos.ingest import Dataset, Hackathon, Participant, Project, apply_quality_control, link_repos
from kairos.synth import SynthSpec, generate_corpus

raw = Dataset(
    hackathons=[Hackathon("H1", date(2016, 3, 5), "city jam"),
                Hackathon("H2", date(2016, 4, 1), "empty jam"),
                Hackathon("H3", date(2009, 6, 1), "too early")],
    projects=[Project("P1", "H1", "https://github.com/a/b", ("python",), ("Q1", "Q2")),
              Project("P2", "H9", None, (), ("Q3",)),
              Project("P3", "H3", None, (), ("Q4",))],
    participants=[Participant(q) for q in ("Q1", "Q2", "Q3", "Q4", "Q5")],
)
clean, report = apply_quality_control(raw)
for name, n in report.exclusions().items():
    print(f"{name:32s} {n}")
print("kept:", report.totals_after)

# Running the filter twice changes nothing.

# In[2]:

again, report2 = apply_quality_control(clean)
print("second pass excludes", sum(report2.exclusions().values()), "records")

# # Repository linkage
#
# Project repo URLs are normalized (scheme, case, ``.git``, trailing paths) and
# matched against event-stream repo names.

# In[3]:

corpus = generate_corpus(SynthSpec(seed=1, n_hackathons=30, n_participants=600))
link = link_repos(corpus.dataset.projects, corpus.events)
n_linked = sum(1 for ev in link.events_by_project.values() if ev)
print(f"{n_linked} of {len(corpus.dataset.projects)} projects have events")
