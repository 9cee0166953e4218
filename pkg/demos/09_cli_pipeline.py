# coding: utf-8

# # The whole pipeline from the command line
#
# ``kairos synth`` writes a corpus with known answers; ``kairos run`` chains
# every stage and leaves a report bundle.  The same calls work from a shell.

# In[1]:

import json
import tempfile
from pathlib import Path

from kairos.cli import main

work = Path(tempfile.mkdtemp())
main(["synth", "-o", str(work / "corpus"), "--seed", "0", "--alpha", "0.8"])
main(["run", str(work / "corpus"), "-o", str(work / "out")])
print(sorted(p.name for p in (work / "out").iterdir()))

# In[2]:

print((work / "out" / "report.md").read_text())
print("planted:", {k: v for k, v in json.loads((work / "corpus" / "truth.json").read_text()).items()
                   if k in ("alpha", "mu", "beta")})
