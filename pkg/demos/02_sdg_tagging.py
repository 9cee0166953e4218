# coding: utf-8

# # Keyword tagging against the 17 SDGs
#
# Each dictionary contributes at most one hit per SDG, however many of its
# patterns match.  Corrected counts are weighted per SDG; an SDG is aligned
# when its corrected count exceeds the threshold.

# In[1]:

from datetime import date

from kairos.ingest import Hackathon
from kairos.sdgmap import CorrectionVector, Lexicon, coverage_by_year, tag_all, tag_hackathon

lexicons = [
    Lexicon("alpha", {3: ("mental health", "wellbeing"), 13: ("climate",)}),
    Lexicon("beta", {3: ("health",), 7: ("solar energy",)}),
]
h = Hackathon("H1", date(2019, 5, 4), "Health and wellbeing hack: tools for mental health, and a little climate data",
              tags=("health",))
tags = tag_hackathon(h, lexicons)
print("matches:", tags.matches)
print("aligned SDGs:", tags.aligned_sdgs)

# Multiplying every correction weight by the same factor rescales the counts
# but, with a zero threshold, never moves an SDG across it.

# In[2]:

cv = CorrectionVector(tuple(0.2 + 0.1 * k for k in range(17)))
print(tag_hackathon(h, lexicons, cv).aligned_sdgs, tag_hackathon(h, lexicons, cv.scaled(10)).aligned_sdgs)

# # Coverage per year

# In[3]:

hs = [Hackathon(f"H{i}", date(2015 + i % 4, 1, 1), "climate sprint" if i % 3 == 0 else "game jam")
      for i in range(40)]
for row in coverage_by_year(hs, tag_all(hs, lexicons)):
    print(row.year, row.n_hackathons, f"{row.percent:.1f}%")
