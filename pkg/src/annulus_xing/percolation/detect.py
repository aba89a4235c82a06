"""Arm-event detectors.

Colorings are uint8 arrays with 1 = black (open) and 0 = white. The kernels
take a caller-owned workspace so that tight loops over many colorings do
not allocate.
"""
from __future__ import annotations

import numpy as np
from numba import njit

BLACK = 1
WHITE = 0


@njit(cache=True, nogil=True)
def _one_arm(nbr, side, col, color, seen, queue):
    V = nbr.shape[0]
    for v in range(V):
        seen[v] = 0
    head = 0
    tail = 0
    for v in range(V):
        if side[v] == 1 and col[v] == color:
            seen[v] = 1
            queue[tail] = v
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        for d in range(6):
            w = nbr[v, d]
            if w < 0 or seen[w] or col[w] != color:
                continue
            if side[w] == 2:
                return True
            seen[w] = 1
            queue[tail] = w
            tail += 1
    return False


@njit(cache=True, nogil=True)
def _augment(nbr, side, col, f_int, f_edge, f_src, f_snk, parent, queue):
    # residual-graph BFS over split nodes in(v) = 2v, out(v) = 2v + 1;
    # parent[x] = -2 marks the source, -1 unvisited
    V = nbr.shape[0]
    for i in range(2 * V):
        parent[i] = -1
    head = 0
    tail = 0
    for v in range(V):
        if side[v] == 1 and col[v] == 1 and f_src[v] == 0:
            parent[2 * v] = -2
            queue[tail] = 2 * v
            tail += 1
    end = -1
    while head < tail and end < 0:
        x = queue[head]
        head += 1
        v = x >> 1
        if x & 1 == 0:
            # in(v): forward through v, or back along an edge that feeds v
            if f_int[v] == 0 and parent[x + 1] == -1:
                parent[x + 1] = x
                queue[tail] = x + 1
                tail += 1
            for d in range(6):
                u = nbr[v, d]
                if u >= 0 and f_edge[u, d ^ 1] > 0 and parent[2 * u + 1] == -1:
                    parent[2 * u + 1] = x
                    queue[tail] = 2 * u + 1
                    tail += 1
        else:
            if side[v] == 2 and f_snk[v] == 0:
                end = x
                break
            if f_int[v] == 1 and parent[x - 1] == -1:
                parent[x - 1] = x
                queue[tail] = x - 1
                tail += 1
            for d in range(6):
                w = nbr[v, d]
                if w >= 0 and col[w] == 1 and parent[2 * w] == -1:
                    parent[2 * w] = x
                    queue[tail] = 2 * w
                    tail += 1
    if end < 0:
        return False
    f_snk[end >> 1] = 1
    x = end
    while parent[x] != -2:
        p = parent[x]
        v, u = x >> 1, p >> 1
        if v == u:
            # internal edge, used forward (p = in) or backward (p = out)
            f_int[v] = 1 if (p & 1) == 0 else 0
        elif (p & 1) == 1:
            # out(u) -> in(v) forward
            for d in range(6):
                if nbr[u, d] == v:
                    f_edge[u, d] += 1
                    break
        else:
            # in(u) -> out(v): cancel flow on out(v) -> in(u)
            for d in range(6):
                if nbr[v, d] == u:
                    f_edge[v, d] -= 1
                    break
        x = p
    f_src[x >> 1] = 1
    return True


@njit(cache=True, nogil=True)
def _mono_two_arm(nbr, side, col, f_int, f_edge, f_src, f_snk, parent, queue):
    V = nbr.shape[0]
    for v in range(V):
        f_int[v] = 0
        f_src[v] = 0
        f_snk[v] = 0
        for d in range(6):
            f_edge[v, d] = 0
    flow = 0
    while flow < 2:
        if not _augment(nbr, side, col, f_int, f_edge, f_src, f_snk, parent, queue):
            return False
        flow += 1
    return True


class Workspace:
    """Scratch buffers sized for one lattice."""

    def __init__(self, V: int):
        self.seen = np.zeros(V, dtype=np.uint8)
        self.uf = np.zeros(V, dtype=np.int64)
        self.flag = np.zeros(V, dtype=np.bool_)
        self.queue = np.zeros(2 * V + 2, dtype=np.int64)
        self.parent = np.zeros(2 * V, dtype=np.int64)
        self.f_int = np.zeros(V, dtype=np.int8)
        self.f_edge = np.zeros((V, 6), dtype=np.int8)
        self.f_src = np.zeros(V, dtype=np.int8)
        self.f_snk = np.zeros(V, dtype=np.int8)


def _prep(lat, col):
    col = np.ascontiguousarray(col, dtype=np.uint8)
    if col.shape != (lat.num_vertices,):
        raise ValueError(f"coloring has length {col.size}, lattice has {lat.num_vertices} vertices")
    return col


def _color_code(color):
    if color in ("black", BLACK, True):
        return BLACK
    if color in ("white", WHITE, False):
        return WHITE
    raise ValueError(f"color must be 'black' or 'white', got {color!r}")


def detect_one_arm(lat, col, color="black", ws: Workspace | None = None) -> bool:
    """True iff a path of ``color`` sites joins the two boundary components."""
    col = _prep(lat, col)
    ws = ws or Workspace(lat.num_vertices)
    return bool(_one_arm(lat.nbr, lat.side, col, np.uint8(_color_code(color)), ws.seen, ws.queue))


def detect_poly_two_arm(lat, col, ws: Workspace | None = None) -> bool:
    """True iff both a black and a white crossing exist."""
    col = _prep(lat, col)
    ws = ws or Workspace(lat.num_vertices)
    return (bool(_one_arm(lat.nbr, lat.side, col, np.uint8(BLACK), ws.seen, ws.queue))
            and bool(_one_arm(lat.nbr, lat.side, col, np.uint8(WHITE), ws.seen, ws.queue)))


def detect_mono_two_arm(lat, col, ws: Workspace | None = None) -> bool:
    """True iff two vertex-disjoint black crossings exist.

    Unit vertex capacities via vertex splitting; augmenting stops at flow 2.
    """
    col = _prep(lat, col)
    ws = ws or Workspace(lat.num_vertices)
    return bool(_mono_two_arm(lat.nbr, lat.side, col, ws.f_int, ws.f_edge, ws.f_src,
                              ws.f_snk, ws.parent, ws.queue))


@njit(cache=True, nogil=True)
def _find(uf, v):
    while uf[v] != v:
        uf[v] = uf[uf[v]]
        v = uf[v]
    return v


@njit(cache=True, nogil=True)
def _both_arms(back, side, col, uf, flag):
    # one union-find sweep over same-colored edges; back[v] lists the
    # neighbours of v with smaller index, flag marks roots whose cluster
    # touches the inner boundary
    V = back.shape[0]
    k = back.shape[1]
    for v in range(V):
        uf[v] = v
        flag[v] = side[v] == 1
        c = col[v]
        for d in range(k):
            w = back[v, d]
            if w < 0 or col[w] != c:
                continue
            a = _find(uf, v)
            b = _find(uf, w)
            if a != b:
                if a < b:
                    uf[b] = a
                    flag[a] |= flag[b]
                else:
                    uf[a] = b
                    flag[b] |= flag[a]
    black = False
    white = False
    for v in range(V):
        if side[v] == 2 and flag[_find(uf, v)]:
            if col[v] == 1:
                black = True
            else:
                white = True
    return black, white


def back_neighbours(nbr: np.ndarray) -> np.ndarray:
    """Neighbours of each vertex with a smaller index, padded with -1."""
    V = nbr.shape[0]
    earlier = (nbr >= 0) & (nbr < np.arange(V)[:, None])
    k = max(1, int(earlier.sum(axis=1).max())) if V else 1
    out = np.full((V, k), -1, dtype=np.int32)
    order = np.argsort(~earlier, axis=1, kind="stable")
    picked = np.take_along_axis(np.where(earlier, nbr, -1), order, axis=1)[:, :k]
    out[:, : picked.shape[1]] = picked
    return out


@njit(cache=True, nogil=True)
def _events(nbr, back, side, col, out, uf, flag, f_int, f_edge, f_src, f_snk, parent, queue, want_bb):
    # out = (B, W, BB); BB is only searched when asked for and B holds
    b, w = _both_arms(back, side, col, uf, flag)
    out[0] = b
    out[1] = w
    out[2] = False
    if b and want_bb:
        out[2] = _mono_two_arm(nbr, side, col, f_int, f_edge, f_src, f_snk, parent, queue)


@njit(cache=True)
def _enumerate(nbr, back, side, bfs):
    V = nbr.shape[0]
    total = 1 << V
    res = np.zeros((total, 3), dtype=np.bool_)
    col = np.zeros(V, dtype=np.uint8)
    out = np.zeros(3, dtype=np.bool_)
    seen = np.zeros(V, dtype=np.uint8)
    uf = np.zeros(V, dtype=np.int64)
    flag = np.zeros(V, dtype=np.bool_)
    queue = np.zeros(2 * V + 2, dtype=np.int64)
    parent = np.zeros(2 * V, dtype=np.int64)
    f_int = np.zeros(V, dtype=np.int8)
    f_edge = np.zeros((V, 6), dtype=np.int8)
    f_src = np.zeros(V, dtype=np.int8)
    f_snk = np.zeros(V, dtype=np.int8)
    for m in range(total):
        for v in range(V):
            col[v] = (m >> v) & 1
        if bfs:
            res[m, 0] = _one_arm(nbr, side, col, np.uint8(1), seen, queue)
            res[m, 1] = _one_arm(nbr, side, col, np.uint8(0), seen, queue)
            res[m, 2] = _mono_two_arm(nbr, side, col, f_int, f_edge, f_src, f_snk, parent, queue)
        else:
            _events(nbr, back, side, col, out, uf, flag, f_int, f_edge, f_src, f_snk, parent, queue, True)
            res[m, 0] = out[0]
            res[m, 1] = out[1]
            res[m, 2] = out[2]
    return res


def enumerate_events(lat, method: str = "union_find"):
    """Detector outputs (B, W, BB) for all 2^V colorings.

    Row m holds the coloring whose vertex v is black iff bit v of m is set.
    ``method="bfs"`` runs the per-color flood fills and an unconditional
    max-flow; ``"union_find"`` runs the kernel used by the estimators.
    """
    if lat.num_vertices > 30:
        raise ValueError("exhaustive enumeration is limited to 30 vertices")
    if method not in ("union_find", "bfs"):
        raise ValueError(f"unknown method {method!r}")
    return _enumerate(lat.nbr, lat.back, lat.side, method == "bfs")
