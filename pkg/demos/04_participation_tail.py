# coding: utf-8

# # Heavy-tailed participation
#
# How many hackathons does a person attend?  A discrete power law
# P(X = x) ~ x^-mu for x >= x_min, with x_min chosen by Kolmogorov-Smirnov
# distance and mu by maximum likelihood.

# In[1]:

from kairos.synth import SynthSpec, gen_participation_counts
from kairos.tails import ccdf, fit_tail, moment_stability

counts = gen_participation_counts(SynthSpec(seed=0, mu_planted=2.37, x_min_planted=4), n=100_000)
fit = fit_tail(counts)
print(f"mu = {fit.mu:.3f} +- {fit.mu_stderr:.3f}, x_min = {fit.x_min}, tail n = {fit.n_tail}, KS = {fit.ks_distance:.4f}")

# In[2]:

xs, p = ccdf(counts)
for x, q in list(zip(xs, p))[:8]:
    print(f"P(X > {x}) = {q:.4f}")

# The exponent describes the mass function.  Read as a survival exponent it
# would imply different finite moments, so both readings are shown.

# In[3]:

print(moment_stability(fit, "pmf").describe())
print(moment_stability(fit, "ccdf").describe())
