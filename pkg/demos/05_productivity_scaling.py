# coding: utf-8

# # Superlinear productivity
#
# In each 5-day window of a repository, c counts distinct committers and R
# the commits pushed.  Teams that are twice as large push more than twice as
# much when R ~ c^beta with beta > 1.

# In[1]:

from kairos.dynamics import fit_productivity_scaling, scaling_windows
from kairos.synth import SynthSpec, gen_scaling_events

for noise in ("none", "poisson"):
    mapping = gen_scaling_events(SynthSpec(seed=0, noise=noise))[0]
    fit = fit_productivity_scaling(mapping)
    print(f"{noise:8s} beta = {fit.beta:.3f} +- {fit.beta_stderr:.3f} over {fit.n_windows} windows")

# In[2]:

rows = scaling_windows(mapping)
print("largest teams (c, R):", [tuple(int(v) for v in r) for r in rows[-5:]])
