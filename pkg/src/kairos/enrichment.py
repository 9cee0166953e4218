"""SDG x technology usage matrix and its complete-linkage ordering."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .ingest import Hackathon, Project
from .sdgmap import SDGS, SdgTagSet


def normalize_tech(tag: str) -> str:
    return tag.strip().lower()


@dataclass(frozen=True, eq=False)
class EnrichmentMatrix:
    technologies: tuple[str, ...]
    sdgs: tuple[int, ...]
    # percent of SDG-s hackathons with a project using technology t; rows follow ``technologies``
    cells: np.ndarray
    n_hackathons_per_sdg: tuple[int, ...]
    prevalence: tuple[float, ...] = field(default=())

    def cell(self, tech: str, sdg: int) -> float:
        return float(self.cells[self.technologies.index(tech), self.sdgs.index(sdg)])


def build_matrix(hackathons: Sequence[Hackathon], tags: Sequence[SdgTagSet], projects: Sequence[Project],
                 min_prevalence: float = 0.001) -> EnrichmentMatrix:
    """Percent of each SDG's hackathons where some project uses each technology.

    A technology counts once per hackathon however many projects use it.  Rows
    are technologies present in at least ``min_prevalence`` of all
    hackathons, sorted by name.
    """
    if not 0 <= min_prevalence <= 1:
        raise ValueError("min_prevalence must be a fraction in [0, 1]")
    by_hack: dict[str, set[str]] = {h.id: set() for h in hackathons}
    for p in projects:
        if p.hackathon_id in by_hack:
            by_hack[p.hackathon_id].update(t for t in map(normalize_tech, p.technologies) if t)
    aligned = {t.hackathon_id: t.aligned_sdgs for t in tags}
    tagged = [h.id for h in hackathons if aligned.get(h.id)]
    if not tagged:
        raise ValueError("no SDG-tagged hackathons: enrichment matrix undefined")

    n_all = len(by_hack)
    usage: dict[str, int] = {}
    for techs in by_hack.values():
        for t in techs:
            usage[t] = usage.get(t, 0) + 1
    keep = sorted(t for t, n in usage.items() if n / n_all >= min_prevalence)
    row = {t: i for i, t in enumerate(keep)}
    hits = np.zeros((len(keep), len(SDGS)))
    n_sdg = np.zeros(len(SDGS), dtype=np.int64)
    for hid in tagged:
        for s in aligned[hid]:
            n_sdg[s - 1] += 1
            for t in by_hack[hid]:
                if t in row:
                    hits[row[t], s - 1] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        cells = np.where(n_sdg > 0, 100.0 * hits / np.maximum(n_sdg, 1), 0.0)
    return EnrichmentMatrix(tuple(keep), SDGS, cells, tuple(int(n) for n in n_sdg),
                            tuple(usage[t] / n_all for t in keep))


# --------------------------------------------------------------------------
# complete linkage


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree over ``labels``; node ``k < n`` is leaf ``labels[k]``, node ``n + j`` is merge ``j``."""

    labels: tuple
    merges: tuple[Merge, ...]
    leaf_order: tuple

    def to_dict(self) -> dict:
        return {"labels": list(self.labels),
                "merges": [{"left": m.left, "right": m.right, "height": m.height, "size": m.size}
                           for m in self.merges],
                "leaf_order": list(self.leaf_order)}


def _prepare(data: np.ndarray, normalize: str) -> np.ndarray:
    if normalize == "none":
        return data
    if normalize == "zscore":
        mu = data.mean(axis=1, keepdims=True)
        sd = data.std(axis=1, keepdims=True)
        return np.divide(data - mu, sd, out=np.zeros_like(data), where=sd > 0)
    raise ValueError(f"unknown normalization {normalize!r}")


def complete_linkage(points: np.ndarray, labels: Sequence[Hashable]) -> Dendrogram:
    """Agglomerative clustering with Euclidean distance and complete linkage.

    Among equally close pairs the one whose smallest member labels sort first
    is merged, so the tree does not depend on input order.
    """
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be unique")
    order = sorted(range(len(labels)), key=lambda i: labels[i])
    pts = np.asarray(points, dtype=float)[order]
    labs = tuple(labels[i] for i in order)
    n = len(labs)
    if n == 0:
        raise ValueError("nothing to cluster")
    if n == 1:
        return Dendrogram(labs, (), labs)

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    # leaves are indexed in label order, so a cluster's rank is its smallest leaf index
    node = list(range(n))
    rank = list(range(n))
    size = [1] * n
    active = np.ones(n, dtype=bool)
    merges = []
    children: dict[int, tuple[int, int]] = {}
    for j in range(n - 1):
        sub = np.where(active[:, None] & active[None, :], dist, np.inf)
        best = sub.min()
        cand = np.argwhere(sub == best)
        cand = cand[cand[:, 0] < cand[:, 1]]
        a, b = min(((int(p), int(q)) for p, q in cand), key=lambda pq: sorted((rank[pq[0]], rank[pq[1]])))
        if rank[b] < rank[a]:
            a, b = b, a
        new_id = n + j
        merges.append(Merge(node[a], node[b], float(best), size[a] + size[b]))
        if merges[-1].height < (merges[-2].height if j else -np.inf):
            raise RuntimeError("complete-linkage heights decreased; distance matrix is inconsistent")
        children[new_id] = (node[a], node[b])
        dist[a, :] = np.maximum(dist[a, :], dist[b, :])
        dist[:, a] = dist[a, :]
        dist[a, a] = np.inf
        active[b] = False
        node[a], size[a], rank[a] = new_id, size[a] + size[b], min(rank[a], rank[b])

    leaf_order = []
    stack = [n + len(merges) - 1]
    while stack:
        k = stack.pop()
        if k < n:
            leaf_order.append(labs[k])
        else:
            left, right = children[k]
            stack.extend((right, left))
    return Dendrogram(labs, tuple(merges), tuple(leaf_order))


def cluster(matrix: EnrichmentMatrix, axis: str = "rows", normalize: str = "none") -> Dendrogram:
    """Cluster technologies (``rows``) or SDGs (``cols``) of an enrichment matrix."""
    if axis == "rows":
        data, labels = matrix.cells, matrix.technologies
    elif axis == "cols":
        data, labels = matrix.cells.T, matrix.sdgs
    else:
        raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")
    return complete_linkage(_prepare(np.asarray(data, dtype=float), normalize), labels)


def write_matrix_csv(path, matrix: EnrichmentMatrix) -> None:
    from ._io import write_csv

    write_csv(path, ["technology", "sdg", "percent"],
              ([t, s, float(matrix.cells[i, j])] for i, t in enumerate(matrix.technologies)
               for j, s in enumerate(matrix.sdgs)))


def write_dendrograms(directory, rows: Dendrogram, cols: Dendrogram) -> None:
    from pathlib import Path

    from ._io import write_json

    directory = Path(directory)
    write_json(directory / "dendrogram.json", {"rows": rows.to_dict(), "cols": cols.to_dict()})
    lines = [f"row\t{x}" for x in rows.leaf_order] + [f"col\t{x}" for x in cols.leaf_order]
    (directory / "leaf_order.txt").write_text("".join(line + "\n" for line in lines), encoding="utf-8",
                                               newline="\n")
