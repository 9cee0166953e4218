# coding: utf-8

# # Which technologies go with which goals?
#
# Cell (t, s) is the percentage of hackathons aligned with SDG s in which some
# project used technology t.  Rows and columns are then ordered by complete
# linkage clustering.

# In[1]:

import numpy as np

from kairos.enrichment import build_matrix, cluster, complete_linkage
from kairos.sdgmap import demo_lexicons, tag_all
from kairos.synth import SynthSpec, generate_corpus

corpus = generate_corpus(SynthSpec(seed=0))
tags = tag_all(corpus.dataset.hackathons, demo_lexicons())
m = build_matrix(corpus.dataset.hackathons, tags, corpus.dataset.projects)
print(m.cells.shape, "technologies x SDGs")
print("row order:", cluster(m, "rows").leaf_order[:10])
print("column order:", cluster(m, "cols", normalize="zscore").leaf_order)

# # A tree small enough to check by hand

# In[2]:

pts = np.array([[0, 0], [1, 0], [5, 0], [5, 3]], float)
for merge in complete_linkage(pts, "ABCD").merges:
    print(merge)
