"""Discretized annuli on the triangular lattice.

Vertices carry axial coordinates (x, y) standing for x + y e^{i pi/3}, so
the squared Euclidean norm is x^2 + xy + y^2. Neighbour slot ``d`` and slot
``d ^ 1`` always point in opposite directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..exceptions import DegenerateMeshError, DomainError
from .detect import back_neighbours

OFFSETS = np.array([(1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1)], dtype=np.int64)

GEOMETRIES = ("annulus", "cylinder")

# refuse meshes whose tables would not fit comfortably in memory
MAX_VERTICES = 20_000_000


def _check_size(count, tau, n):
    if count > MAX_VERTICES:
        raise DomainError(
            f"tau={tau}, n={n} needs about {count:.3g} vertices; the limit is {MAX_VERTICES}")


@dataclass(frozen=True, eq=False)
class Lattice:
    """Vertex set, 6-neighbour table and the two boundary components.

    ``nbr[v, d]`` is the index of the neighbour of v in direction d, or -1.
    ``side[v]`` is 1 on the inner boundary, 2 on the outer one, else 0.
    ``back[v]`` lists the neighbours of v with smaller index, padded with -1.
    """

    geometry: str
    tau: float
    n: int
    coords: np.ndarray
    nbr: np.ndarray
    inner_boundary: np.ndarray
    outer_boundary: np.ndarray
    side: np.ndarray
    back: np.ndarray

    @property
    def num_vertices(self) -> int:
        return len(self.coords)

    def radii(self) -> np.ndarray:
        """Euclidean norms in lattice units (annulus geometry only)."""
        x = self.coords[:, 0].astype(float)
        y = self.coords[:, 1].astype(float)
        return np.sqrt(x * x + x * y + y * y)

    def check_invariants(self) -> None:
        V = self.num_vertices
        if self.nbr.shape != (V, 6):
            raise AssertionError("neighbour table has wrong shape")
        for d in range(6):
            has = self.nbr[:, d] >= 0
            back = self.nbr[self.nbr[has, d], d ^ 1]
            if not np.array_equal(back, np.flatnonzero(has)):
                raise AssertionError(f"neighbour direction {d} is not symmetric")
        if np.intersect1d(self.inner_boundary, self.outer_boundary).size:
            raise AssertionError("boundary components overlap")
        incomplete = np.flatnonzero((self.nbr < 0).any(axis=1))
        both = np.union1d(self.inner_boundary, self.outer_boundary)
        if not np.array_equal(incomplete, both):
            raise AssertionError("boundary sets are not the vertices with a missing neighbour")
        for part in (self.inner_boundary, self.outer_boundary):
            if _count_components(self.nbr, part) != 1:
                raise AssertionError("boundary component is not connected")


def _adjacency(nbr, keep):
    V = len(nbr)
    rows = np.repeat(np.arange(V), 6)
    cols = nbr.ravel()
    ok = (cols >= 0) & keep[rows] & keep[np.where(cols >= 0, cols, 0)]
    return csr_matrix((np.ones(ok.sum(), dtype=np.int8), (rows[ok], cols[ok])), shape=(V, V))


def _components(nbr, keep):
    return connected_components(_adjacency(nbr, keep), directed=False)


def _count_components(nbr, part):
    keep = np.zeros(len(nbr), dtype=bool)
    keep[part] = True
    _, labels = _components(nbr, keep)
    return len(np.unique(labels[part]))


def _restrict(coords, nbr, keep):
    new = np.full(len(coords), -1, dtype=np.int32)
    new[keep] = np.arange(keep.sum(), dtype=np.int32)
    sub = nbr[keep]
    sub = np.where(sub >= 0, new[np.where(sub >= 0, sub, 0)], -1).astype(np.int32)
    return coords[keep], sub


def build_annulus_lattice(tau: float, n: int, strict: bool = True) -> Lattice:
    """Triangular-lattice discretization of A(1, e^{2 pi tau}) at mesh 1/n.

    Keeps the largest connected set of lattice points strictly inside the
    annulus. The vertices with a missing neighbour must split into exactly two
    connected pieces; the one of smaller mean radius is the inner boundary.
    ``strict=False`` lifts the n >= 8 floor, for tiny test lattices.
    """
    tau = float(tau)
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"tau must be positive, got {tau!r}")
    n = int(n)
    if n < (8 if strict else 1):
        raise DomainError(f"mesh n must be >= 8, got {n}")
    R = n * math.exp(2.0 * math.pi * tau)
    _check_size(math.pi * (R * R - n * n) / (math.sqrt(3.0) / 2.0), tau, n)
    r2, R2 = float(n * n), R * R
    m = int(math.ceil(2.0 * R / math.sqrt(3.0))) + 2
    xs, ys = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
    xs, ys = xs.ravel(), ys.ravel()
    norm2 = (xs * xs + xs * ys + ys * ys).astype(float)
    inside = (norm2 > r2) & (norm2 < R2)
    coords = np.stack([xs[inside], ys[inside]], axis=1).astype(np.int64)
    if len(coords) == 0:
        raise DegenerateMeshError(f"no lattice point inside the annulus at tau={tau}, n={n}")

    span = 2 * m + 3
    lookup = np.full(span * span, -1, dtype=np.int64)
    key = (coords[:, 0] + m + 1) * span + (coords[:, 1] + m + 1)
    lookup[key] = np.arange(len(coords))
    nbr = np.full((len(coords), 6), -1, dtype=np.int32)
    for d, (dx, dy) in enumerate(OFFSETS):
        k = (coords[:, 0] + dx + m + 1) * span + (coords[:, 1] + dy + m + 1)
        nbr[:, d] = lookup[k]

    _, labels = _components(nbr, np.ones(len(coords), dtype=bool))
    biggest = np.bincount(labels).argmax()
    coords, nbr = _restrict(coords, nbr, labels == biggest)

    boundary = np.flatnonzero((nbr < 0).any(axis=1))
    keep = np.zeros(len(coords), dtype=bool)
    keep[boundary] = True
    _, blab = _components(nbr, keep)
    parts = [boundary[blab[boundary] == c] for c in np.unique(blab[boundary])]
    if len(parts) != 2:
        raise DegenerateMeshError(
            f"boundary splits into {len(parts)} components at tau={tau}, n={n}; need 2")
    x = coords[:, 0].astype(float)
    y = coords[:, 1].astype(float)
    rad = np.sqrt(x * x + x * y + y * y)
    parts.sort(key=lambda p: rad[p].mean())
    return _finish("annulus", tau, n, coords, nbr, parts[0], parts[1])


def _finish(geometry, tau, n, coords, nbr, inner, outer):
    side = np.zeros(len(coords), dtype=np.uint8)
    side[inner] = 1
    side[outer] = 2
    back = back_neighbours(nbr)
    for arr in (coords, nbr, inner, outer, side, back):
        arr.setflags(write=False)
    return Lattice(geometry, tau, n, coords, nbr, inner, outer, side, back)


def cylinder_lattice(L: int, H: int, tau: float = math.nan, n: int = 0) -> Lattice:
    """Periodic strip: H rows of L sites, column index taken mod L.

    Row 0 is the inner boundary and row H-1 the outer one.
    """
    L, H = int(L), int(H)
    if L < 3 or H < 2:
        raise DegenerateMeshError(f"cylinder needs L >= 3 and H >= 2, got L={L}, H={H}")
    ys, xs = np.divmod(np.arange(L * H), L)
    coords = np.stack([xs, ys], axis=1).astype(np.int64)
    nbr = np.full((L * H, 6), -1, dtype=np.int32)
    for d, (dx, dy) in enumerate(OFFSETS):
        yy = ys + dy
        ok = (yy >= 0) & (yy < H)
        nbr[ok, d] = (yy[ok] * L + (xs[ok] + dx) % L).astype(np.int32)
    inner = np.arange(L, dtype=np.int64)
    outer = np.arange((H - 1) * L, H * L, dtype=np.int64)
    if math.isnan(tau):
        tau = (H - 1) * math.sqrt(3.0) / 2.0 / L
    return _finish("cylinder", float(tau), int(n), coords, nbr, inner, outer)


def cylinder_shape(tau: float, n: int):
    """(L, H) of the cylinder standing in for the annulus of modulus tau at mesh n.

    The circumference matches the inner circle of the round annulus,
    L = round(2 pi n); the height (H - 1) sqrt(3)/2 is the nearest to tau L.
    """
    L = int(round(2.0 * math.pi * n))
    H = int(round(2.0 * tau * L / math.sqrt(3.0))) + 1
    return L, max(H, 2)


def build_cylinder_lattice(tau: float, n: int, strict: bool = True) -> Lattice:
    """Periodic cylinder of modulus close to tau, conformally equivalent to the annulus."""
    tau = float(tau)
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"tau must be positive, got {tau!r}")
    n = int(n)
    if n < (8 if strict else 1):
        raise DomainError(f"mesh n must be >= 8, got {n}")
    L, H = cylinder_shape(tau, n)
    _check_size(L * H, tau, n)
    return cylinder_lattice(L, H, tau, n)


def build_lattice(tau: float, n: int, geometry: str = "cylinder", strict: bool = True) -> Lattice:
    if geometry == "annulus":
        return build_annulus_lattice(tau, n, strict)
    if geometry == "cylinder":
        return build_cylinder_lattice(tau, n, strict)
    raise ValueError(f"geometry must be one of {GEOMETRIES}, got {geometry!r}")
