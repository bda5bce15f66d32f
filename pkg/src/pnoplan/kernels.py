"""Hot numeric kernels with two interchangeable lanes.

Each kernel has a Numba ``@njit`` implementation and a pure-NumPy fallback.
The lane is chosen once at import time: set ``PNOPLAN_NUMBA=0`` in the
environment to force the NumPy lane (it is also used automatically when numba
is not importable).  Both lanes implement the same contracts; floating-point
results may differ in the last ulps because summation order differs.

``benchmarks/kernel_bench.py`` times the two lanes against each other.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("PNOPLAN_NUMBA", "1").strip().lower()
_want_numba = _env not in ("0", "false", "no", "off")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only in stripped envs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco


NUMBA_ENABLED = _want_numba and HAVE_NUMBA


# ---------------------------------------------------------------------------
# consecutive segment lengths of chained point clouds
# ---------------------------------------------------------------------------

def _seg_lengths_np(points):
    """Lengths of consecutive segments: (trials, balls, d) -> (trials, balls-1)."""
    diffs = np.diff(points, axis=1)
    return np.sqrt(np.einsum("tbd,tbd->tb", diffs, diffs))


@njit(cache=True)
def _seg_lengths_nb(points):
    t, b, d = points.shape
    out = np.empty((t, b - 1))
    for i in range(t):
        for j in range(b - 1):
            s = 0.0
            for k in range(d):
                diff = points[i, j + 1, k] - points[i, j, k]
                s += diff * diff
            out[i, j] = np.sqrt(s)
    return out


# ---------------------------------------------------------------------------
# free-space membership mask for analytic scenes
# ---------------------------------------------------------------------------

def _free_mask_np(points, lo, hi, ball_c, ball_r, box_lo, box_hi):
    """Boolean mask of points inside bounds and outside every closed obstacle."""
    ok = np.all((points >= lo) & (points <= hi), axis=1)
    for c, r in zip(ball_c, ball_r):
        diff = points - c
        ok &= np.einsum("nd,nd->n", diff, diff) > r * r
    for blo, bhi in zip(box_lo, box_hi):
        ok &= ~np.all((points >= blo) & (points <= bhi), axis=1)
    return ok


@njit(cache=True)
def _free_mask_nb(points, lo, hi, ball_c, ball_r, box_lo, box_hi):
    n, d = points.shape
    nball = ball_c.shape[0]
    nbox = box_lo.shape[0]
    out = np.empty(n, dtype=np.bool_)
    for i in range(n):
        good = True
        for k in range(d):
            x = points[i, k]
            if x < lo[k] or x > hi[k]:
                good = False
                break
        if good:
            for j in range(nball):
                s = 0.0
                for k in range(d):
                    diff = points[i, k] - ball_c[j, k]
                    s += diff * diff
                if s <= ball_r[j] * ball_r[j]:
                    good = False
                    break
        if good:
            for j in range(nbox):
                inside = True
                for k in range(d):
                    x = points[i, k]
                    if x < box_lo[j, k] or x > box_hi[j, k]:
                        inside = False
                        break
                if inside:
                    good = False
                    break
        out[i] = good
    return out


# ---------------------------------------------------------------------------
# first sample index landing in each ball of a tiling
# ---------------------------------------------------------------------------

def _first_hits_np(samples, centers, radius):
    """Index of the first sample inside each ball, -1 if never hit."""
    diff = samples[:, None, :] - centers[None, :, :]
    inside = np.einsum("nkd,nkd->nk", diff, diff) <= radius * radius
    any_hit = inside.any(axis=0)
    first = inside.argmax(axis=0).astype(np.int64)
    first[~any_hit] = -1
    return first


@njit(cache=True)
def _first_hits_nb(samples, centers, radius):
    n, d = samples.shape
    k = centers.shape[0]
    first = np.full(k, -1, dtype=np.int64)
    remaining = k
    r2 = radius * radius
    for i in range(n):
        for j in range(k):
            if first[j] >= 0:
                continue
            s = 0.0
            for t in range(d):
                diff = samples[i, t] - centers[j, t]
                s += diff * diff
            if s <= r2:
                first[j] = i
                remaining -= 1
        if remaining == 0:
            break
    return first


# ---------------------------------------------------------------------------
# per-ball occupancy counts
# ---------------------------------------------------------------------------

def _count_in_balls_np(samples, centers, radius):
    diff = samples[:, None, :] - centers[None, :, :]
    inside = np.einsum("nkd,nkd->nk", diff, diff) <= radius * radius
    return inside.sum(axis=0).astype(np.int64)


@njit(cache=True)
def _count_in_balls_nb(samples, centers, radius):
    n, d = samples.shape
    k = centers.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    r2 = radius * radius
    for i in range(n):
        for j in range(k):
            s = 0.0
            for t in range(d):
                diff = samples[i, t] - centers[j, t]
                s += diff * diff
            if s <= r2:
                counts[j] += 1
    return counts


# ---------------------------------------------------------------------------
# Dijkstra over CSR adjacency with index tie-breaking
# ---------------------------------------------------------------------------
# Ties on distance are broken toward the lower vertex index, both in heap pop
# order and in predecessor choice, so shortest-path trees are deterministic.

@njit(cache=True)
def _dijkstra_nb(indptr, indices, weights, n, source, target):
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    cap = indices.shape[0] + 1
    hd = np.empty(cap)
    hv = np.empty(cap, dtype=np.int64)
    dist[source] = 0.0
    hd[0] = 0.0
    hv[0] = source
    size = 1
    while size > 0:
        d0 = hd[0]
        u = hv[0]
        size -= 1
        hd[0] = hd[size]
        hv[0] = hv[size]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            m = i
            if left < size and (hd[left] < hd[m] or (hd[left] == hd[m] and hv[left] < hv[m])):
                m = left
            if right < size and (hd[right] < hd[m] or (hd[right] == hd[m] and hv[right] < hv[m])):
                m = right
            if m == i:
                break
            hd[i], hd[m] = hd[m], hd[i]
            hv[i], hv[m] = hv[m], hv[i]
            i = m
        if done[u] or d0 > dist[u]:
            continue
        done[u] = True
        if u == target:
            break
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            nd = d0 + weights[e]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                j = size
                hd[j] = nd
                hv[j] = v
                size += 1
                while j > 0:
                    p = (j - 1) // 2
                    if hd[p] > hd[j] or (hd[p] == hd[j] and hv[p] > hv[j]):
                        hd[p], hd[j] = hd[j], hd[p]
                        hv[p], hv[j] = hv[j], hv[p]
                        j = p
                    else:
                        break
            elif nd == dist[v] and u < pred[v]:
                pred[v] = u
    return dist, pred


def _dijkstra_np(indptr, indices, weights, n, source, target):
    import heapq

    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    dist[source] = 0.0
    heap = [(0.0, int(source))]
    while heap:
        d0, u = heapq.heappop(heap)
        if done[u] or d0 > dist[u]:
            continue
        done[u] = True
        if u == target:
            break
        sl = slice(indptr[u], indptr[u + 1])
        nbrs = indices[sl]
        nd = d0 + weights[sl]
        old = dist[nbrs]
        better = nd < old
        tie = (nd == old) & (u < pred[nbrs])
        if tie.any():
            pred[nbrs[tie]] = u
        if better.any():
            bn = nbrs[better]
            bd = nd[better]
            dist[bn] = bd
            pred[bn] = u
            for v, dv in zip(bn.tolist(), bd.tolist()):
                heapq.heappush(heap, (dv, v))
    return dist, pred


# ---------------------------------------------------------------------------
# lane selection
# ---------------------------------------------------------------------------

IMPLEMENTATIONS = {
    "seg_lengths": {"numpy": _seg_lengths_np, "numba": _seg_lengths_nb},
    "free_mask": {"numpy": _free_mask_np, "numba": _free_mask_nb},
    "first_hits": {"numpy": _first_hits_np, "numba": _first_hits_nb},
    "count_in_balls": {"numpy": _count_in_balls_np, "numba": _count_in_balls_nb},
    "dijkstra_csr": {"numpy": _dijkstra_np, "numba": _dijkstra_nb},
}

_lane = "numba" if NUMBA_ENABLED else "numpy"

seg_lengths = IMPLEMENTATIONS["seg_lengths"][_lane]
free_mask = IMPLEMENTATIONS["free_mask"][_lane]
first_hits = IMPLEMENTATIONS["first_hits"][_lane]
count_in_balls = IMPLEMENTATIONS["count_in_balls"][_lane]
dijkstra_csr = IMPLEMENTATIONS["dijkstra_csr"][_lane]


def active_lane() -> str:
    """Name of the lane selected at import time ('numba' or 'numpy')."""
    return _lane
