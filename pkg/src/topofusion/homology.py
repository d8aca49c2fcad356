"""Vietoris-Rips persistence up to homology dimension 1.

A simplex enters the filtration at its maximum pairwise distance, and only
simplices with filtration value <= epsilon exist. Simplices are ordered by
(filtration value, dimension, lexicographic vertex tuple), which makes the
pairing deterministic when edge lengths coincide.

H0 comes from a union-find sweep over edges sorted by length: each merging
edge kills the younger component (birth 0, death = edge length) and every
surviving component is an essential class with death = +inf. H1 comes from
GF(2) column reduction of the triangle boundary matrix alone; reducing the
dimension-2 block in isolation yields exactly the (edge, triangle) pairs of
the full reduction, so the edge block never needs to be reduced (the
union-find sweep already plays that role). Columns are kept as Python-int
bitmasks indexed by edge order, so one column addition is a single big-int
XOR and the pivot is ``bit_length() - 1``.

1-cycles alive at epsilon are capped with death = epsilon rather than +inf:
within a threshold-capped complex they may simply never fill in. Pairs with
birth == death are dropped everywhere.

``brute_force_persistence`` is the validation oracle: it enumerates every
simplex of dimension <= 2, builds the full dense boundary matrix, and runs
the textbook left-to-right reduction with no shortcuts.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DataError, TooLarge
from .fileio import atomic_write_text, fmt
from .ingest import PointCloud

_BRUTE_FORCE_MAX_POINTS = 14


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative distances with zero diagonal."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
            raise DataError(f"distance matrix must be square and nonempty, got {d.shape}")
        if not np.all(np.isfinite(d)) or d.min() < 0.0:
            raise DataError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0.0) or not np.array_equal(d, d.T):
            raise DataError("distance matrix must be symmetric with zero diagonal")
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class RipsConfig:
    """Distance threshold for the filtration; homology capped at dimension 1."""

    epsilon: float
    max_dim: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ValueError(f"epsilon must be a positive finite real, got {self.epsilon}")
        if self.max_dim != 1:
            raise ValueError("only homology up to dimension 1 is supported")


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs for one homology dimension.

    Deaths may be +inf (essential classes); points are stored sorted by
    (birth, death) so equal diagrams serialize identically.
    """

    dim: int
    points: np.ndarray

    def __post_init__(self):
        if self.dim not in (0, 1):
            raise ValueError(f"dim must be 0 or 1, got {self.dim}")
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if pts.size and (np.any(np.isnan(pts)) or np.any(pts[:, 0] < 0.0) or np.any(np.isinf(pts[:, 0]))):
            raise DataError("births must be finite and nonnegative")
        if pts.size and np.any(pts[:, 1] < pts[:, 0]):
            raise DataError("every death must be >= its birth")
        if self.dim == 0 and pts.size and np.any(pts[:, 0] != 0.0):
            raise DataError("dimension-0 births must all be 0 for a Rips filtration")
        pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def diagrams_equal(a: PersistenceDiagram, b: PersistenceDiagram) -> bool:
    """Exact multiset equality (points are stored canonically sorted)."""
    return a.dim == b.dim and a.points.shape == b.points.shape and bool(
        np.array_equal(a.points, b.points)
    )


def pairwise_distances(pc: PointCloud) -> DistanceMatrix:
    """Euclidean distances, computed once per unordered pair and mirrored."""
    n = len(pc)
    if n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(pc.points)))


def _sorted_edges(d: np.ndarray, epsilon: float):
    """Edges (i < j) with length <= epsilon, ordered by (length, i, j)."""
    i, j = np.triu_indices(d.shape[0], k=1)
    w = d[i, j]
    keep = w <= epsilon
    i, j, w = i[keep], j[keep], w[keep]
    order = np.lexsort((j, i, w))
    return i[order], j[order], w[order]


def _h0_union_find(n: int, ei: np.ndarray, ej: np.ndarray, ew: np.ndarray):
    """Kruskal sweep; returns finite deaths, #components, and per-edge merge flags."""
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]  # path halving
            x = parent[x]
        return x

    deaths = []
    merged = np.zeros(ei.shape[0], dtype=bool)
    components = n
    for k in range(ei.shape[0]):
        ra, rb = find(int(ei[k])), find(int(ej[k]))
        if ra != rb:
            parent[rb] = ra
            deaths.append(float(ew[k]))
            merged[k] = True
            components -= 1
    return deaths, components, merged


def _triangles(d: np.ndarray, epsilon: float):
    """All (i < j < k) with every side <= epsilon, ordered by (filtration, i, j, k).

    Materializes an n^3 boolean tensor; fine for the desk-scale clouds this
    library targets (point counts in the low hundreds).
    """
    n = d.shape[0]
    adj = (d <= epsilon) & ~np.eye(n, dtype=bool)
    idx = np.arange(n)
    increasing = (idx[:, None, None] < idx[None, :, None]) & (idx[None, :, None] < idx[None, None, :])
    ti, tj, tk = np.nonzero(adj[:, :, None] & adj[:, None, :] & adj[None, :, :] & increasing)
    filt = np.maximum(np.maximum(d[ti, tj], d[ti, tk]), d[tj, tk])
    order = np.lexsort((tk, tj, ti, filt))
    return ti[order], tj[order], tk[order], filt[order]


def rips_persistence(dm: DistanceMatrix, cfg: RipsConfig) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Compute the dimension-0 and dimension-1 persistence diagrams."""
    n = dm.n
    eps = float(cfg.epsilon)
    ei, ej, ew = _sorted_edges(dm.d, eps)
    h0_deaths, n_components, merged = _h0_union_find(n, ei, ej, ew)

    h0_points = [(0.0, dth) for dth in h0_deaths if dth > 0.0]
    h0_points += [(0.0, np.inf)] * n_components

    # Row index of each edge in filtration order, for the boundary bitmasks.
    m = ei.shape[0]
    edge_id = np.full((n, n), -1, dtype=np.int64)
    edge_id[ei, ej] = np.arange(m)
    edge_id[ej, ei] = np.arange(m)

    ti, tj, tk, tfilt = _triangles(dm.d, eps)
    ea, eb, ec = edge_id[ti, tj], edge_id[ti, tk], edge_id[tj, tk]

    low_to_col: dict[int, int] = {}
    h1_points = []
    for t in range(ti.shape[0]):
        col = (1 << int(ea[t])) | (1 << int(eb[t])) | (1 << int(ec[t]))
        while col:
            low = col.bit_length() - 1
            prev = low_to_col.get(low)
            if prev is None:
                low_to_col[low] = col
                birth, death = float(ew[low]), float(tfilt[t])
                if birth < death:
                    h1_points.append((birth, death))
                break
            col ^= prev

    # Cycle-creating edges never killed by a triangle stay alive to epsilon.
    positive = np.nonzero(~merged)[0]
    for e in positive:
        if int(e) not in low_to_col and float(ew[e]) < eps:
            h1_points.append((float(ew[e]), eps))

    return (
        PersistenceDiagram(0, np.array(h0_points, dtype=np.float64).reshape(-1, 2)),
        PersistenceDiagram(1, np.array(h1_points, dtype=np.float64).reshape(-1, 2)),
    )


def brute_force_persistence(dm: DistanceMatrix, cfg: RipsConfig) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Full dense GF(2) reduction over every simplex of dimension <= 2.

    Ground-truth oracle; guarded to small inputs because it enumerates all
    simplices and reduces a dense matrix.
    """
    n = dm.n
    if n > _BRUTE_FORCE_MAX_POINTS:
        raise TooLarge(f"brute-force oracle supports at most {_BRUTE_FORCE_MAX_POINTS} points, got {n}")
    eps = float(cfg.epsilon)
    d = dm.d

    simplices: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (v,)) for v in range(n)]
    for i, j in combinations(range(n), 2):
        if d[i, j] <= eps:
            simplices.append((float(d[i, j]), 1, (i, j)))
    for i, j, k in combinations(range(n), 3):
        filt = max(d[i, j], d[i, k], d[j, k])
        if filt <= eps:
            simplices.append((float(filt), 2, (i, j, k)))
    simplices.sort(key=lambda s: (s[0], s[1], s[2]))
    index = {verts: pos for pos, (_, _, verts) in enumerate(simplices)}

    s = len(simplices)
    matrix = np.zeros((s, s), dtype=bool)
    for pos, (_, dim, verts) in enumerate(simplices):
        if dim == 0:
            continue
        for face in combinations(verts, dim):
            matrix[index[face], pos] = True

    low_of: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    for j in range(s):
        col = matrix[:, j]
        while True:
            rows = np.nonzero(col)[0]
            if rows.size == 0:
                break
            low = int(rows[-1])
            k = low_of.get(low)
            if k is None:
                low_of[low] = j
                pairs.append((low, j))
                break
            col ^= matrix[:, k]

    paired = {i for i, _ in pairs} | {j for _, j in pairs}
    h0_points, h1_points = [], []
    for i, j in pairs:
        birth, death = simplices[i][0], simplices[j][0]
        if birth == death:
            continue
        (h0_points if simplices[i][1] == 0 else h1_points).append((birth, death))
    for pos, (filt, dim, _) in enumerate(simplices):
        if pos in paired:
            continue
        if dim == 0:
            h0_points.append((0.0, np.inf))
        elif dim == 1 and filt < eps:
            h1_points.append((filt, eps))

    return (
        PersistenceDiagram(0, np.array(h0_points, dtype=np.float64).reshape(-1, 2)),
        PersistenceDiagram(1, np.array(h1_points, dtype=np.float64).reshape(-1, 2)),
    )


# ---------------------------------------------------------------------------
# PD file format: CSV with header dim,birth,death; +inf rendered as "inf".

def write_pd_csv(pd: PersistenceDiagram, path: str | Path) -> None:
    lines = ["dim,birth,death"]
    for birth, death in pd.points:
        lines.append(f"{pd.dim},{fmt(birth)},{fmt(death)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_pd_csv(path: str | Path, dim: int | None = None) -> PersistenceDiagram:
    """Read a PD CSV; ``dim`` is the fallback for files with no rows."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["dim", "birth", "death"]:
            raise DataError(f"{path}: expected header 'dim,birth,death'")
        rows = [(int(r[0]), float(r[1]), float(r[2])) for r in reader if r]
    dims = {r[0] for r in rows}
    if len(dims) > 1:
        raise DataError(f"{path}: mixed dimensions {sorted(dims)} in one file")
    if dims:
        file_dim = dims.pop()
        if dim is not None and dim != file_dim:
            raise DataError(f"{path}: contains dim {file_dim}, expected {dim}")
        dim = file_dim
    elif dim is None:
        raise DataError(f"{path}: empty diagram, pass dim explicitly")
    return PersistenceDiagram(dim, np.array([(b, d) for _, b, d in rows], dtype=np.float64).reshape(-1, 2))
