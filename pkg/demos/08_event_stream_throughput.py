# coding: utf-8

# # Parsing archive shards
#
# Hourly archive files are gzip-compressed newline-delimited JSON.  The parser
# streams them line by line, keeps only the fields the analyses need and
# records malformed lines instead of failing.

# In[1]:

import tempfile
import time
from pathlib import Path

from kairos.ingest import parse_event_files
from kairos.synth import write_archive_shard

tmp = Path(tempfile.mkdtemp())
size = write_archive_shard(tmp / "2015-01-01-15.json.gz", 20_000)
t = time.perf_counter()
res = parse_event_files([tmp / "2015-01-01-15.json.gz"])
dt = time.perf_counter() - t
print(f"{len(res.events)} events, {res.n_skipped} skipped, {size / 1e6 / dt * 60:.0f} MB/min compressed")
print(res.events[0])
