# coding: utf-8

# # Who is new at each hackathon?
#
# The newcomer ratio is the share of participants never seen at an earlier
# hackathon.  The first hackathon is all newcomers.

# In[1]:

from kairos.community import growth_rate, newcomer_ratios, ratio_vs_size
from kairos.synth import SynthSpec, gen_newcomer_hackathons, generate_corpus

schedule = [(10, 10), (8, 3), (12, 12), (5, 0)]
stats = newcomer_ratios(gen_newcomer_hackathons(schedule, seed=0))
print(list(zip(stats.hackathon_ids, stats.n_new.tolist(), stats.ratios.round(3).tolist())))

# # On a larger corpus

# In[2]:

corpus = generate_corpus(SynthSpec(seed=0))
stats = newcomer_ratios(corpus.dataset.hackathons)
print(f"median ratio {stats.median:.3f}")
for b in ratio_vs_size(stats):
    print(f"size {b.lo:6.1f}-{b.hi:6.1f}: n = {b.n:3d}, mean ratio = {b.mean_ratio:.3f}")

# # Weekly growth
#
# The synthetic corpus runs one hackathon a week, which is flat.  A schedule
# that adds one event per week every month shows a positive slope.

# In[3]:

from datetime import date, timedelta

from kairos.ingest import Hackathon

monday = date(2016, 1, 4)
growing = [Hackathon(f"G{w}-{k}", monday + timedelta(weeks=w)) for w in range(52) for k in range(1 + w // 4)]
print(f"flat corpus slope: {growth_rate(corpus.dataset.hackathons).slope:.3f}")
g = growth_rate(growing)
print(f"{g.slope:.3f} hackathons/week per week, relative rate {g.relative_rate:.4f}")
