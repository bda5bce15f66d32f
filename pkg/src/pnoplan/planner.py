"""PRM* variant with the enlarged connection radius, plus a roadmap spanner.

The roadmap grows incrementally: sample i is connected to every earlier
vertex within radius r_i = gamma * (ln i / i)^(1/d) (r-disc mode) or to its
k(i) nearest earlier vertices (k-nearest mode), keeping only collision-free
local segments.  Growth is deterministic given (seed, scene, params,
target_n) and independent of how many grow() calls reach a given size.

k(n) includes the ln(n) factor: k(n) = ceil(k_const * e * (1 + 1/d) * ln n).
The occupancy argument needs the expected neighbor count E[N] =
2^d (1 + 1/d) ln n, so a k(n) without ln n could not dominate e * E[N].
"""

from __future__ import annotations

import copy
import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .cspace import Scene, free_volume, is_free, sample_free_batch, segments_free
from .errors import InvalidQueryError
from .geometry import unit_ball_volume
from .rng import substream

MODE_RDISC = "r-disc"
MODE_KNEAREST = "k-nearest"

# Exact brute-force neighbor scans below this size, k-d tree above.
BRUTE_FORCE_LIMIT = 2000
_TREE_REBUILD_LAG = 512
_SAMPLE_QUEUE_BLOCK = 1024


class GammaPno(NamedTuple):
    """Connection-radius constant and the strict lower bound it clears."""

    value: float
    lower_bound: float


def gamma_pno(d: int, free_vol: float) -> GammaPno:
    """Connection-radius constant for the enlarged-radius PRM* variant.

    The strict requirement is gamma > 4*((1 + 1/d) * free_vol / V_d)^(1/d);
    the returned value multiplies the bound by 1.001 to honor strictness.
    """
    if free_vol <= 0:
        raise ValueError(f"free volume must be > 0, got {free_vol}")
    bound = 4.0 * ((1.0 + 1.0 / d) * free_vol / unit_ball_volume(d)) ** (1.0 / d)
    return GammaPno(1.001 * bound, bound)


@dataclass(frozen=True)
class PlannerParams:
    """Planner configuration; ``collision_step`` is the user resolution."""

    gamma: float
    collision_step: float
    seed: int
    mode: str = MODE_RDISC
    k_constant: float | None = None  # defaults to 2^d at use

    def __post_init__(self):
        if self.mode not in (MODE_RDISC, MODE_KNEAREST):
            raise ValueError(f"mode must be {MODE_RDISC!r} or {MODE_KNEAREST!r}, got {self.mode!r}")
        if self.collision_step <= 0:
            raise ValueError("collision_step must be > 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")

    def k_const(self, d: int) -> float:
        return float(2**d) if self.k_constant is None else float(self.k_constant)


def connection_radius(params: PlannerParams, n: int, d: int) -> float:
    """r_n = gamma * (ln n / n)^(1/d); natural logarithm, n >= 2."""
    if n < 2:
        raise ValueError(f"connection radius needs n >= 2, got {n} (ln 1 = 0 degenerates it)")
    return params.gamma * (math.log(n) / n) ** (1.0 / d)


class KCount(NamedTuple):
    k: int
    clamped: bool


def k_neighbors(params: PlannerParams, n: int, d: int) -> KCount:
    """k(n) = ceil(k_const * e * (1 + 1/d) * ln n), clamped to n - 1."""
    if n < 2:
        raise ValueError(f"k(n) needs n >= 2, got {n}")
    raw = math.ceil(params.k_const(d) * math.e * (1.0 + 1.0 / d) * math.log(n))
    if raw > n - 1:
        return KCount(n - 1, True)
    return KCount(raw, False)


class _NeighborIndex:
    """Exact nearest-neighbor queries over a growing point buffer.

    Brute-force scans below BRUTE_FORCE_LIMIT points; above it, a k-d tree
    over a prefix (rebuilt lazily) plus a brute-force tail.  Both backends
    return identical neighbor sets; the tree is an accelerator, not an
    approximation.
    """

    def __init__(self, buffer: np.ndarray):
        self._buf = buffer
        self._tree = None
        self._tree_size = 0

    def _refresh_tree(self, count: int):
        if count < BRUTE_FORCE_LIMIT:
            return
        if self._tree is None or count - self._tree_size >= _TREE_REBUILD_LAG:
            self._tree = cKDTree(self._buf[:count])
            self._tree_size = count

    def within_radius(self, q: np.ndarray, r: float, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices (ascending) and distances of points within r of q."""
        self._refresh_tree(count)
        if self._tree is None or count < BRUTE_FORCE_LIMIT:
            diff = self._buf[:count] - q
            d2 = np.einsum("nd,nd->n", diff, diff)
            idx = np.flatnonzero(d2 <= r * r)
            return idx, np.sqrt(d2[idx])
        head = np.array(self._tree.query_ball_point(q, r), dtype=np.int64)
        tail = self._buf[self._tree_size : count]
        diff = tail - q
        d2 = np.einsum("nd,nd->n", diff, diff)
        tail_idx = np.flatnonzero(d2 <= r * r) + self._tree_size
        idx = np.concatenate([np.sort(head), tail_idx]).astype(np.int64)
        dists = np.linalg.norm(self._buf[idx] - q, axis=1)
        return idx, dists

    def nearest(self, q: np.ndarray, k: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the k nearest points, ordered by (dist, index)."""
        k = min(k, count)
        if k == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        self._refresh_tree(count)
        if self._tree is None or count < BRUTE_FORCE_LIMIT:
            diff = self._buf[:count] - q
            d2 = np.einsum("nd,nd->n", diff, diff)
            idx = np.argsort(d2, kind="stable")[:k]
            return idx.astype(np.int64), np.sqrt(d2[idx])
        # Candidates: k nearest in the tree prefix plus the whole tail.
        kk = min(k, self._tree_size)
        td, ti = self._tree.query(q, k=kk)
        td = np.atleast_1d(td)
        ti = np.atleast_1d(ti).astype(np.int64)
        tail = self._buf[self._tree_size : count]
        diff = tail - q
        tail_d = np.sqrt(np.einsum("nd,nd->n", diff, diff))
        tail_i = np.arange(self._tree_size, count, dtype=np.int64)
        cand_d = np.concatenate([td, tail_d])
        cand_i = np.concatenate([ti, tail_i])
        order = np.lexsort((cand_i, cand_d))[:k]
        return cand_i[order], cand_d[order]


class Roadmap:
    """Weighted undirected roadmap over free configurations.

    Owns the sample stream derived from its seed; edge weights are the exact
    Euclidean endpoint distances.
    """

    def __init__(self, d: int, seed: int):
        self.d = int(d)
        self.seed = int(seed)
        self.n = 0
        self._cap = 256
        self._pts = np.empty((self._cap, self.d))
        self._edge_u: list[np.ndarray] = []
        self._edge_v: list[np.ndarray] = []
        self._edge_w: list[np.ndarray] = []
        self._rng = substream(seed)
        self._sample_queue: list[np.ndarray] = []
        self._queue_pos = 0
        self._nn = _NeighborIndex(self._pts)
        self._csr_cache = None
        self.k_clamped_last = False

    # -- vertices ----------------------------------------------------------

    @property
    def points(self) -> np.ndarray:
        """View of the current vertex coordinates, shape (n, d)."""
        return self._pts[: self.n]

    def _ensure_capacity(self, n: int):
        if n <= self._cap:
            return
        while self._cap < n:
            self._cap *= 2
        new = np.empty((self._cap, self.d))
        new[: self.n] = self._pts[: self.n]
        self._pts = new
        self._nn = _NeighborIndex(self._pts)

    def _next_free_sample(self, scene: Scene) -> np.ndarray:
        # Samples are pulled from fixed-size rejection blocks so that the
        # stream is identical no matter how growth is split across calls.
        while self._queue_pos >= len(self._sample_queue):
            pts, _ = sample_free_batch(scene, self._rng, _SAMPLE_QUEUE_BLOCK)
            self._sample_queue = list(pts)
            self._queue_pos = 0
        q = self._sample_queue[self._queue_pos]
        self._queue_pos += 1
        return q

    # -- edges ---------------------------------------------------------------

    def _add_edges(self, u: int, vs: np.ndarray, ws: np.ndarray):
        if vs.size == 0:
            return
        self._edge_u.append(np.full(vs.size, u, dtype=np.int64))
        self._edge_v.append(vs.astype(np.int64))
        self._edge_w.append(ws.astype(float))
        self._csr_cache = None

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Undirected edge arrays (u, v, w) with u > v by construction."""
        if not self._edge_u:
            z = np.empty(0, dtype=np.int64)
            return z, z.copy(), np.empty(0)
        return (
            np.concatenate(self._edge_u),
            np.concatenate(self._edge_v),
            np.concatenate(self._edge_w),
        )

    @property
    def edge_count(self) -> int:
        return sum(a.size for a in self._edge_u)

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR adjacency (indptr, indices, weights)."""
        if self._csr_cache is None:
            u, v, w = self.edges()
            self._csr_cache = build_csr(self.n, u, v, w)
        return self._csr_cache

    def replace_edges(self, u: np.ndarray, v: np.ndarray, w: np.ndarray):
        self._edge_u = [np.asarray(u, dtype=np.int64)]
        self._edge_v = [np.asarray(v, dtype=np.int64)]
        self._edge_w = [np.asarray(w, dtype=float)]
        self._csr_cache = None

    def copy_with_edges(self, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> "Roadmap":
        other = Roadmap(self.d, self.seed)
        other.n = self.n
        other._cap = self._cap
        other._pts = self._pts.copy()
        other._nn = _NeighborIndex(other._pts)
        other._rng = copy.deepcopy(self._rng)
        other._sample_queue = [p.copy() for p in self._sample_queue]
        other._queue_pos = self._queue_pos
        other.replace_edges(u, v, w)
        return other


def build_csr(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray):
    """Symmetric CSR from undirected edge arrays."""
    uu = np.concatenate([u, v])
    vv = np.concatenate([v, u])
    ww = np.concatenate([w, w])
    order = np.lexsort((vv, uu))
    uu, vv, ww = uu[order], vv[order], ww[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, uu + 1, 1)
    return np.cumsum(indptr), vv, ww


def _effective_step(params: PlannerParams, r_n: float | None) -> float:
    # beta_n/4 = r_n/16 under the default lambda = 1/2 tiling.
    if r_n is None:
        return params.collision_step
    return min(r_n / 16.0, params.collision_step)


def _validate_params(scene: Scene, params: PlannerParams):
    if params.mode == MODE_RDISC:
        bound = gamma_pno(scene.d, free_volume(scene)).lower_bound
        if not params.gamma > bound:
            raise ValueError(
                f"gamma={params.gamma:.6g} must strictly exceed the connection "
                f"bound {bound:.6g} for this scene"
            )
    else:
        if params.k_const(scene.d) < 2**scene.d:
            raise ValueError(
                f"k_constant must be >= 2^d = {2**scene.d} in k-nearest mode"
            )


def grow(roadmap: Roadmap, scene: Scene, params: PlannerParams, target_n: int) -> Roadmap:
    """Grow the roadmap to ``target_n`` free samples.

    Each new sample is connected to all earlier vertices within the current
    connection radius (r-disc) or to its k(i) nearest earlier vertices
    (k-nearest) whose local segments pass the collision check.  Growing to a
    size already reached is a no-op.
    """
    if scene.d != roadmap.d:
        raise ValueError(f"scene dimension {scene.d} != roadmap dimension {roadmap.d}")
    if target_n < roadmap.n:
        raise ValueError(f"target_n={target_n} is below the current size {roadmap.n}")
    _validate_params(scene, params)
    roadmap._ensure_capacity(target_n)
    rdisc = params.mode == MODE_RDISC
    while roadmap.n < target_n:
        q = roadmap._next_free_sample(scene)
        i = roadmap.n + 1  # vertex count after insertion
        prev = roadmap.n
        roadmap._pts[prev] = q
        roadmap.n = i
        roadmap._csr_cache = None
        if prev == 0 or i < 2:
            continue
        if rdisc:
            r_i = connection_radius(params, i, scene.d)
            idx, dists = roadmap._nn.within_radius(q, r_i, prev)
            step = _effective_step(params, r_i)
        else:
            kc = k_neighbors(params, i, scene.d)
            roadmap.k_clamped_last = kc.clamped
            idx, dists = roadmap._nn.nearest(q, kc.k, prev)
            step = _effective_step(params, None)
        if idx.size == 0:
            continue
        ok = segments_free(scene, np.broadcast_to(q, (idx.size, scene.d)),
                           roadmap._pts[idx], step)
        roadmap._add_edges(prev, idx[ok], dists[ok])
    return roadmap


@dataclass
class QueryResult:
    """Shortest roadmap path answering one query."""

    path: np.ndarray
    path_indices: list[int]
    length: float
    solved: bool
    start: np.ndarray = field(default_factory=lambda: np.empty(0))
    goal: np.ndarray = field(default_factory=lambda: np.empty(0))


def query(
    roadmap: Roadmap,
    scene: Scene,
    params: PlannerParams,
    start,
    goal,
) -> QueryResult:
    """Attach start/goal with the connection rule and run shortest path.

    Start and goal become temporary vertices n and n+1; ties in the search
    are broken toward lower vertex indices, so results are deterministic.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if not is_free(scene, start) or not is_free(scene, goal):
        raise InvalidQueryError("start or goal configuration is in collision")
    if np.array_equal(start, goal):
        return QueryResult(np.vstack([start]), [], 0.0, True, start, goal)

    n = roadmap.n
    if n == 0:
        direct = _try_direct(scene, params, start, goal, None)
        return direct if direct is not None else _unsolved(start, goal)

    if params.mode == MODE_RDISC:
        r_n = connection_radius(params, max(n, 2), scene.d)
        step = _effective_step(params, r_n)
        s_idx, s_d = roadmap._nn.within_radius(start, r_n, n)
        g_idx, g_d = roadmap._nn.within_radius(goal, r_n, n)
        direct_ok = float(np.linalg.norm(goal - start)) <= r_n
    else:
        kc = k_neighbors(params, max(n, 2), scene.d)
        step = _effective_step(params, None)
        s_idx, s_d = roadmap._nn.nearest(start, kc.k, n)
        g_idx, g_d = roadmap._nn.nearest(goal, kc.k, n)
        direct_ok = True
    if s_idx.size:
        ok = segments_free(scene, np.broadcast_to(start, (s_idx.size, scene.d)),
                           roadmap.points[s_idx], step)
        s_idx, s_d = s_idx[ok], s_d[ok]
    if g_idx.size:
        ok = segments_free(scene, np.broadcast_to(goal, (g_idx.size, scene.d)),
                           roadmap.points[g_idx], step)
        g_idx, g_d = g_idx[ok], g_d[ok]

    u, v, w = roadmap.edges()
    extra_u = [np.full(s_idx.size, n, dtype=np.int64), np.full(g_idx.size, n + 1, dtype=np.int64)]
    extra_v = [s_idx, g_idx]
    extra_w = [s_d, g_d]
    if direct_ok and segments_free(scene, start[None], goal[None], step)[0]:
        extra_u.append(np.array([n + 1], dtype=np.int64))
        extra_v.append(np.array([n], dtype=np.int64))
        extra_w.append(np.array([float(np.linalg.norm(goal - start))]))
    u = np.concatenate([u, *extra_u])
    v = np.concatenate([v, *extra_v])
    w = np.concatenate([w, *extra_w])
    indptr, indices, weights = build_csr(n + 2, u, v, w)
    dist, pred = kernels.dijkstra_csr(indptr, indices, weights, n + 2, n, n + 1)
    if not np.isfinite(dist[n + 1]):
        return _unsolved(start, goal)
    chain = [n + 1]
    while chain[-1] != n:
        chain.append(int(pred[chain[-1]]))
    chain.reverse()
    coords = np.vstack(
        [start]
        + [roadmap.points[i] for i in chain[1:-1]]
        + [goal]
    )
    return QueryResult(coords, chain, float(dist[n + 1]), True, start, goal)


def _try_direct(scene, params, start, goal, r_n):
    step = _effective_step(params, r_n)
    if segments_free(scene, start[None], goal[None], step)[0]:
        length = float(np.linalg.norm(goal - start))
        if r_n is None or length <= r_n:
            return QueryResult(np.vstack([start, goal]), [0, 1], length, True, start, goal)
    return None


def _unsolved(start, goal) -> QueryResult:
    return QueryResult(np.empty((0, start.shape[0])), [], math.inf, False, start, goal)


# ---------------------------------------------------------------------------
# sequential roadmap spanner
# ---------------------------------------------------------------------------

def spanner_filter(roadmap: Roadmap, t: float) -> Roadmap:
    """Greedy sequential spanner with stretch factor t >= 1.

    Edges are scanned in nondecreasing (weight, lower index, higher index)
    order; an edge is kept iff the distance between its endpoints in the
    spanner built so far is at least t times its weight (equality keeps the
    edge, so t = 1 reproduces the input graph).  The output satisfies
    all-pairs stretch <= t with respect to the input roadmap.
    """
    if t < 1.0:
        raise ValueError(f"stretch must be >= 1, got {t}")
    u, v, w = roadmap.edges()
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    order = np.lexsort((hi, lo, w))
    adj: dict[int, list[tuple[int, float]]] = {}
    keep = []
    for e in order:
        a, b, wt = int(lo[e]), int(hi[e]), float(w[e])
        if _spanner_distance(adj, a, b, t * wt) >= t * wt:
            keep.append(e)
            adj.setdefault(a, []).append((b, wt))
            adj.setdefault(b, []).append((a, wt))
    keep = np.array(keep, dtype=np.int64)
    return roadmap.copy_with_edges(u[keep], v[keep], w[keep])


def _spanner_distance(adj, source: int, target: int, cutoff: float) -> float:
    """Dijkstra distance in the partial spanner, abandoned beyond cutoff."""
    best = {source: 0.0}
    heap = [(0.0, source)]
    while heap:
        d0, x = heapq.heappop(heap)
        if d0 > best.get(x, math.inf):
            continue
        if x == target:
            return d0
        if d0 > cutoff:
            return math.inf
        for y, wy in adj.get(x, ()):
            nd = d0 + wy
            if nd < best.get(y, math.inf) and nd <= cutoff:
                best[y] = nd
                heapq.heappush(heap, (nd, y))
    return best.get(target, math.inf)
