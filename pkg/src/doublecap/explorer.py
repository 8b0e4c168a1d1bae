"""Search for large orthogonality-avoiding sets on discretized spheres.

The sphere is replaced by a weighted point cloud; two points are joined
when they are within ``delta`` of orthogonal. An independent set in that
graph is a discretized orthogonality-avoiding set and its total weight
estimates its measure. Results are evidence to compare against the
double-cap volume, nothing more.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import capgeom, hilbert
from ._anneal import anneal_chunk, conflict_counts
from .hilbert import RandomStream
from .montecarlo import derive_seed

BRUTE_FORCE_LIMIT = 40
GRAPH_BLOCK = 1024
ANNEAL_CHUNK = 1 << 18
DEFAULT_BUDGET = 1_000_000
LATTICE_CASES = (("real", 2), ("real", 3), ("complex", 2))


@dataclass(frozen=True, eq=False)
class SpherePointCloud:
    kind: str
    dim: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.kind not in ("real", "complex"):
            raise ValueError(f"kind must be 'real' or 'complex', got {self.kind!r}")
        dtype = float if self.kind == "real" else np.complex128
        pts = np.array(self.points, dtype=dtype)
        w = np.array(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"points must be an (M, {self.dim}) array")
        if w.shape != (pts.shape[0],):
            raise ValueError("one weight per point required")
        if np.any(np.abs(np.linalg.norm(pts, axis=1) - 1) > hilbert.NORM_TOL):
            raise ValueError("points must be unit vectors")
        if np.any(w < 0) or abs(math.fsum(w) - 1) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @classmethod
    def sample(cls, kind: str, dim: int, M: int, rng: RandomStream) -> SpherePointCloud:
        """``M`` rotation-invariant random points with weight ``1/M`` each."""
        if kind == "real":
            pts = hilbert.uniform_sphere_points(dim, M, rng)
        elif kind == "complex":
            pts = hilbert.haar_random_states(dim, M, rng)
        else:
            raise ValueError(f"kind must be 'real' or 'complex', got {kind!r}")
        return cls(kind, dim, pts, np.full(M, 1.0 / M))

    @classmethod
    def circle(cls, M: int, offset: float = 0.0) -> SpherePointCloud:
        """``M`` equally spaced points on the unit circle, shifted by ``offset`` spacings."""
        t = 2 * math.pi * (np.arange(M) + offset) / M
        return cls("real", 2, np.column_stack([np.cos(t), np.sin(t)]), np.full(M, 1.0 / M))

    @classmethod
    def lattice(cls, kind: str, dim: int, M: int, rng: RandomStream) -> SpherePointCloud:
        """Low-discrepancy cloud under a random rotation.

        Available for the circle, ``S^2``, and qubit states (through the
        Bloch sphere). Random clouds have local density fluctuations at the
        scale of the edge band that a search can exploit; a lattice keeps
        those at the level of one point.
        """
        if (kind, dim) == ("real", 2):
            return cls.circle(M, offset=float(rng.generator.random()))
        if (kind, dim) not in (("real", 3), ("complex", 2)):
            raise ValueError(f"no lattice for kind={kind!r}, dim={dim}")
        q, r = np.linalg.qr(rng.generator.standard_normal((3, 3)))
        q = q * np.sign(np.diag(r))
        pts = fibonacci_sphere(M) @ q.T
        if kind == "complex":
            theta = np.arccos(np.clip(pts[:, 2], -1, 1))
            phi = np.arctan2(pts[:, 1], pts[:, 0])
            pts = np.column_stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        return cls(kind, dim, pts, np.full(M, 1.0 / M))

    def overlaps(self, rows=None, cols=None) -> np.ndarray:
        """``|<x_i|x_j>|`` for the requested rows and columns."""
        a = self.points if rows is None else self.points[rows]
        b = self.points if cols is None else self.points[cols]
        return np.abs(a.conj() @ b.T)


@dataclass(frozen=True, eq=False)
class OrthogonalityGraph:
    """Adjacency in compressed-row form; ``weights`` are vertex weights.

    ``cloud`` is ``None`` for graphs given directly by their edges.
    """

    cloud: SpherePointCloud | None
    delta: float | None
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edges(self) -> list[tuple[int, int]]:
        out = []
        for v in range(self.size):
            out.extend((v, int(u)) for u in self.neighbors(v) if u > v)
        return out

    @classmethod
    def from_edges(cls, M: int, edges, weights=None) -> OrthogonalityGraph:
        w = np.full(M, 1.0 / M) if weights is None else np.asarray(weights, dtype=float)
        adj = [set() for _ in range(M)]
        for i, j in edges:
            if i == j:
                raise ValueError("self-loops are not allowed")
            adj[i].add(j)
            adj[j].add(i)
        return cls(None, None, *_csr(adj), w)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Deterministic, nearly uniform points on ``S^2``."""
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z * z)
    phi = math.pi * (3 - math.sqrt(5)) * np.arange(count)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def make_cloud(kind: str, dim: int, M: int, rng: RandomStream, cloud: str = "auto") -> SpherePointCloud:
    """``cloud``: ``"random"``, ``"lattice"``, or ``"auto"`` (lattice where one exists)."""
    if cloud == "auto":
        cloud = "lattice" if (kind, dim) in LATTICE_CASES else "random"
    if cloud == "lattice":
        return SpherePointCloud.lattice(kind, dim, M, rng)
    if cloud == "random":
        return SpherePointCloud.sample(kind, dim, M, rng)
    raise ValueError(f"cloud must be 'auto', 'random' or 'lattice', got {cloud!r}")


def _csr(adj) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(len(adj) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.array([u for a in adj for u in sorted(a)], dtype=np.int64)
    return indptr, indices


def edge_threshold(delta: float) -> float:
    return math.sin(delta)


def build_graph(cloud: SpherePointCloud, delta: float, threads: int = 1) -> OrthogonalityGraph:
    """Join every pair with overlap at most ``sin(delta)``, by exhaustive scan."""
    if not 0 < delta < math.pi / 4:
        raise ValueError(f"delta must be in (0, pi/4), got {delta!r}")
    thr = edge_threshold(delta)
    M = cloud.size
    starts = list(range(0, M, GRAPH_BLOCK))

    def block(start):
        rows = np.arange(start, min(start + GRAPH_BLOCK, M))
        hit = cloud.overlaps(rows) <= thr
        hit[np.arange(rows.size), rows] = False
        r, c = np.nonzero(hit)
        return np.bincount(r, minlength=rows.size), c

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(s) for s in starts]
    indptr = np.zeros(M + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.concatenate([p[0] for p in parts]))
    indices = np.concatenate([p[1] for p in parts]).astype(np.int64)
    return OrthogonalityGraph(cloud, delta, indptr, indices, cloud.weights)


@dataclass(frozen=True)
class CandidateSet:
    members: tuple[int, ...]
    density: float
    feasible: bool


def is_independent(graph: OrthogonalityGraph, members) -> bool:
    """Full pair re-scan of ``members``.

    For cloud-backed graphs the overlaps are recomputed from the points
    rather than read from the stored adjacency.
    """
    idx = np.asarray(sorted(members), dtype=np.int64)
    if idx.size < 2:
        return True
    if graph.cloud is not None:
        sub = graph.cloud.overlaps(idx, idx)
        np.fill_diagonal(sub, np.inf)
        return not bool(np.any(sub <= edge_threshold(graph.delta)))
    inside = np.zeros(graph.size, dtype=bool)
    inside[idx] = True
    return not any(inside[graph.neighbors(v)].any() for v in idx)


def make_candidate(graph: OrthogonalityGraph, members) -> CandidateSet:
    members = tuple(sorted(int(m) for m in members))
    density = math.fsum(graph.weights[list(members)]) if members else 0.0
    return CandidateSet(members, density, is_independent(graph, members))


def _default_axis(graph: OrthogonalityGraph) -> np.ndarray:
    axis = np.zeros(graph.cloud.dim, dtype=graph.cloud.points.dtype)
    axis[0] = 1
    return axis


def double_cap_seed(graph: OrthogonalityGraph, axis=None) -> CandidateSet:
    """Points within ``pi/4 - delta/2`` of the axis line.

    Any two such points are less than ``pi/2 - delta`` apart (as lines, or
    in Fubini-Study distance for complex states), so their overlap exceeds
    ``sin(delta)`` and the set has no edge.
    """
    if graph.cloud is None:
        raise ValueError("double_cap_seed needs a cloud-backed graph")
    a = _default_axis(graph) if axis is None else np.asarray(axis)
    a = a / np.linalg.norm(a)
    proj = np.abs(graph.cloud.points @ a.conj())
    members = np.flatnonzero(proj > math.cos(math.pi / 4 - graph.delta / 2))
    return make_candidate(graph, members)


def greedy_search(graph: OrthogonalityGraph, initial: CandidateSet | None = None) -> CandidateSet:
    """Grow an independent set: heaviest free vertex first, fewest free neighbors on ties.

    Starting from ``initial`` (if given) it only ever adds vertices, so the
    result contains ``initial``.
    """
    M = graph.size
    w = graph.weights
    free = np.ones(M, dtype=bool)
    chosen = []

    def take(v):
        chosen.append(int(v))
        free[v] = False
        free[graph.neighbors(v)] = False

    if initial is not None:
        if not initial.feasible:
            raise ValueError("initial set is not independent")
        for v in initial.members:
            take(v)
    deg = np.array([np.count_nonzero(free[graph.neighbors(v)]) for v in range(M)])
    while free.any():
        cand = np.flatnonzero(free)
        # lexsort: last key is primary
        v = cand[np.lexsort((cand, deg[cand], -w[cand]))[0]]
        gone = np.concatenate(([v], graph.neighbors(v)[free[graph.neighbors(v)]]))
        take(v)
        np.subtract.at(deg, np.concatenate([graph.neighbors(u) for u in gone]), 1)
    return make_candidate(graph, chosen)


@dataclass(frozen=True)
class AnnealConfig:
    moves: int = DEFAULT_BUDGET
    t_start: float = 1.0
    t_end: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.moves < 1:
            raise ValueError("moves must be positive")
        if not 0 < self.t_end <= self.t_start:
            raise ValueError("need 0 < t_end <= t_start")


def anneal_search(
    graph: OrthogonalityGraph,
    config: AnnealConfig = AnnealConfig(),
    initial: CandidateSet | None = None,
) -> CandidateSet:
    """Simulated annealing over independent sets with add, drop and swap moves.

    Independence is a hard constraint: a swap inserts a vertex and evicts
    all its neighbors in the set. Temperatures fall geometrically from
    ``t_start`` to ``t_end`` in units of the mean vertex weight. The best
    set visited is returned, so the result is never worse than ``initial``.
    """
    M = graph.size
    if M == 0:
        return CandidateSet((), 0.0, True)
    mean_w = float(np.mean(graph.weights))
    scaled = graph.weights / mean_w if mean_w > 0 else np.ones(M)
    in_set = np.zeros(M, dtype=np.uint8)
    if initial is not None:
        if not initial.feasible:
            raise ValueError("initial set is not independent")
        in_set[list(initial.members)] = 1
    conflicts = conflict_counts(graph.indptr, graph.indices, in_set)
    best_set = in_set.copy()
    current = float(np.sum(scaled[in_set.astype(bool)]))
    best = current
    gen = RandomStream(config.seed).generator
    done = 0
    while done < config.moves:
        n = min(ANNEAL_CHUNK, config.moves - done)
        verts = gen.integers(0, M, size=n, dtype=np.int64)
        uniforms = gen.random(n)
        current, best = anneal_chunk(
            graph.indptr, graph.indices, scaled, in_set, conflicts, best_set,
            verts, uniforms, done, config.moves, config.t_start, config.t_end,
            current, best,
        )
        done += n
    return make_candidate(graph, np.flatnonzero(best_set))


def _byte_tables(weights: np.ndarray) -> list[list[float]]:
    tables = []
    for base in range(0, weights.size, 8):
        chunk = weights[base : base + 8]
        table = [0.0] * 256
        for mask in range(1, 256):
            low = (mask & -mask).bit_length() - 1
            table[mask] = table[mask & (mask - 1)] + (chunk[low] if low < chunk.size else 0.0)
        tables.append(table)
    return tables


def brute_force_max_independent(graph: OrthogonalityGraph) -> CandidateSet:
    """Exact maximum-weight independent set by branch and bound (``M <= 40``).

    Branches on the vertex of highest remaining degree; vertices with no
    remaining neighbor are taken outright; a branch is cut when its weight
    plus all remaining candidate weight cannot beat the incumbent.
    """
    M = graph.size
    if M > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_LIMIT} vertices, got {M}")
    w = [float(x) for x in graph.weights]
    nbr = [0] * M
    for v in range(M):
        for u in graph.neighbors(v):
            nbr[v] |= 1 << int(u)
    tables = _byte_tables(graph.weights)

    def mask_weight(mask):
        total, i = 0.0, 0
        while mask:
            total += tables[i][mask & 0xFF]
            mask >>= 8
            i += 1
        return total

    best_w = -1.0
    best_mask = 0

    def solve(cand, cur_w, chosen):
        nonlocal best_w, best_mask
        # take vertices isolated within cand
        iso = 0
        rest = cand
        top_v, top_deg = -1, -1
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            deg = (nbr[v] & cand).bit_count()
            if deg == 0:
                iso |= low
            elif deg > top_deg:
                top_v, top_deg = v, deg
        if iso:
            cur_w += mask_weight(iso)
            chosen |= iso
            cand &= ~iso
        if cand == 0:
            if cur_w > best_w + 1e-15:
                best_w, best_mask = cur_w, chosen
            return
        if cur_w + mask_weight(cand) <= best_w + 1e-15:
            return
        bit = 1 << top_v
        solve(cand & ~nbr[top_v] & ~bit, cur_w + w[top_v], chosen | bit)
        solve(cand & ~bit, cur_w, chosen)

    solve((1 << M) - 1, 0.0, 0)
    members = [v for v in range(M) if best_mask >> v & 1]
    return make_candidate(graph, members)


@dataclass
class SearchReport:
    kind: str
    dim: int
    M: int
    delta_radians: float
    seed: int
    best_density: float
    target_volume: float
    seed_density: float
    greedy_density: float
    iterations: int
    elapsed_seconds: float
    feasible: bool
    best: CandidateSet = field(repr=False)

    @property
    def gap(self) -> float:
        return self.target_volume - self.best_density

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "M": self.M,
            "delta_radians": self.delta_radians,
            "seed": self.seed,
            "best_density": self.best_density,
            "target_volume": self.target_volume,
            "gap": self.gap,
            "feasible": self.feasible,
            "iterations": self.iterations,
            "elapsed_seconds": self.elapsed_seconds if timing else None,
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)


def target_volume(kind: str, dim: int) -> float:
    if kind == "real":
        return capgeom.real_cap_volume(dim)
    return capgeom.complex_cap_volume_closed(dim)


def explore(
    kind: str,
    dim: int,
    M: int,
    delta: float,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    threads: int = 1,
    cloud: str = "auto",
) -> SearchReport:
    """Discretize, build the graph, seed with a shrunk double cap, extend greedily, anneal."""
    if M < 2:
        raise ValueError("M must be >= 2")
    if budget < 1:
        raise ValueError("budget must be positive")
    started = time.perf_counter()
    points = make_cloud(kind, dim, M, RandomStream(seed, 0), cloud)
    graph = build_graph(points, delta, threads)
    cap = double_cap_seed(graph)
    grown = greedy_search(graph, cap)
    plain = greedy_search(graph)
    start = max(grown, plain, key=lambda c: c.density)
    best = anneal_search(graph, AnnealConfig(moves=budget, seed=derive_seed(seed, 1)), start)
    return SearchReport(
        kind=kind,
        dim=dim,
        M=M,
        delta_radians=delta,
        seed=seed,
        best_density=best.density,
        target_volume=target_volume(kind, dim),
        seed_density=cap.density,
        greedy_density=start.density,
        iterations=budget,
        elapsed_seconds=time.perf_counter() - started,
        feasible=best.feasible and is_independent(graph, best.members),
        best=best,
    )


def delta_ladder(
    cloud: SpherePointCloud,
    deltas,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> list[tuple[float, CandidateSet]]:
    """Best sets for decreasing ``delta`` on one cloud, each warm-started from the last.

    Shrinking ``delta`` only removes edges, so the previous best stays
    independent and the densities are non-decreasing down the ladder.
    """
    out = []
    prev = None
    for i, delta in enumerate(sorted(deltas, reverse=True)):
        graph = build_graph(cloud, delta)
        start = greedy_search(graph, double_cap_seed(graph))
        if prev is not None:
            carried = make_candidate(graph, prev.members)
            start = max(start, greedy_search(graph, carried), key=lambda c: c.density)
        prev = anneal_search(graph, AnnealConfig(moves=budget, seed=derive_seed(seed, i)), start)
        out.append((delta, prev))
    return out
