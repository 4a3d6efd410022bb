"""Iso-level polylines on a rectangular grid and line integrals along them.

Grid convention: ``values[i, j]`` is the field at ``(a_i, b_j)`` where
``a`` runs along axis 0 and ``b`` along axis 1, both uniformly spaced between
the given bounds (inclusive).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError, NumericalError

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalarGrid2D:
    bounds_a: tuple[float, float]
    bounds_b: tuple[float, float]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise DomainError("grid values must be a 2-D array of at least 2x2")
        for lo, hi in (self.bounds_a, self.bounds_b):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DomainError("grid bounds must be finite with lower < upper")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds_a", (float(self.bounds_a[0]), float(self.bounds_a[1])))
        object.__setattr__(self, "bounds_b", (float(self.bounds_b[0]), float(self.bounds_b[1])))

    @property
    def resolution(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def a(self) -> np.ndarray:
        return np.linspace(*self.bounds_a, self.values.shape[0])

    @property
    def b(self) -> np.ndarray:
        return np.linspace(*self.bounds_b, self.values.shape[1])

    @property
    def spacing(self) -> tuple[float, float]:
        na, nb = self.values.shape
        return ((self.bounds_a[1] - self.bounds_a[0]) / (na - 1),
                (self.bounds_b[1] - self.bounds_b[0]) / (nb - 1))

    @classmethod
    def from_function(cls, f: Field, bounds_a, bounds_b, resolution) -> "ScalarGrid2D":
        na, nb = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
        a = np.linspace(*bounds_a, na)
        b = np.linspace(*bounds_b, nb)
        A, B = np.meshgrid(a, b, indexing="ij")
        return cls(tuple(bounds_a), tuple(bounds_b), f(A, B))


@dataclass(frozen=True)
class Polyline:
    """Ordered vertex chain at a fixed level; closed when first == last."""

    vertices: np.ndarray
    level: float = 0.0
    closed: bool = field(default=False, init=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise DomainError("a polyline needs at least two (a, b) vertices")
        if np.any(np.all(v[1:] == v[:-1], axis=1)):
            raise DomainError("consecutive polyline vertices must be distinct")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "closed", bool(v.shape[0] > 2 and np.all(v[0] == v[-1])))

    @property
    def length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.vertices, axis=0).T)))

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1].copy(), self.level)

    def densified(self, parts: int = 2) -> "Polyline":
        """Insert ``parts - 1`` evenly spaced collinear points in every segment."""
        v = self.vertices
        t = np.arange(parts) / parts
        pieces = v[:-1, None, :] + t[None, :, None] * (v[1:] - v[:-1])[:, None, :]
        return Polyline(np.vstack([pieces.reshape(-1, 2), v[-1:]]), self.level)


# Cell corners: c0=(i,j) c1=(i+1,j) c2=(i+1,j+1) c3=(i,j+1).
# Cell edges:   e0=c0-c1  e1=c1-c2  e2=c3-c2  e3=c0-c3.
# Each case maps to the edge pairs joined by a segment; saddles (5, 10) carry
# both resolutions, picked by the cell-centre average.
_SEGMENTS = {
    1: [(0, 3)], 2: [(0, 1)], 3: [(1, 3)], 4: [(1, 2)],
    6: [(0, 2)], 7: [(2, 3)], 8: [(2, 3)], 9: [(0, 2)],
    11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(0, 3)],
}
# (centre above level, centre not above)
_SADDLE = {
    5: ([(0, 1), (2, 3)], [(0, 3), (1, 2)]),
    10: ([(0, 3), (1, 2)], [(0, 1), (2, 3)]),
}


def _edge_ids(i, j, nb):
    """Global ids of the four edges of cells (i, j); shape (4, ncells)."""
    base = i * nb + j
    return np.stack([
        2 * base,                  # e0: axis-0 edge at (i, j)
        2 * (base + nb) + 1,       # e1: axis-1 edge at (i+1, j)
        2 * (base + 1),            # e2: axis-0 edge at (i, j+1)
        2 * base + 1,              # e3: axis-1 edge at (i, j)
    ])


def _edge_points(eids, values, level, a, b):
    nb = values.shape[1]
    base, axis = np.divmod(eids, 2)
    i, j = np.divmod(base, nb)
    i2 = i + (axis == 0)
    j2 = j + (axis == 1)
    v0 = values[i, j]
    v1 = values[i2, j2]
    t = (level - v0) / (v1 - v0)
    pa = a[i] + t * (a[i2] - a[i])
    pb = b[j] + t * (b[j2] - b[j])
    return np.column_stack([pa, pb])


def _chain(pairs: np.ndarray) -> list[list[int]]:
    """Join edge-id pairs sharing an endpoint into maximal chains."""
    touching = defaultdict(list)
    for s, (u, v) in enumerate(pairs):
        touching[u].append(s)
        touching[v].append(s)
    used = np.zeros(len(pairs), dtype=bool)

    def walk(start_seg, start_node):
        chain = [start_node]
        seg, node = start_seg, start_node
        while True:
            used[seg] = True
            u, v = pairs[seg]
            node = v if u == node else u
            chain.append(node)
            nxt = [s for s in touching[node] if not used[s]]
            if not nxt:
                return chain
            seg = nxt[0]

    chains = []
    # open chains first, starting from endpoints touched by a single segment
    for node, segs in touching.items():
        if len(segs) == 1 and not used[segs[0]]:
            chains.append(walk(segs[0], node))
    for s in range(len(pairs)):
        if not used[s]:
            chains.append(walk(s, pairs[s][0]))
    return chains


def marching_squares(grid: ScalarGrid2D, level: float) -> list[Polyline]:
    """Extract the ``level`` iso-lines of ``grid`` as polylines.

    Vertices are linear interpolants on cell edges.  Contours that leave the
    grid stay open; closed contours repeat their first vertex at the end.
    A level outside the value range yields an empty list.
    """
    values = grid.values
    level = float(level)
    if not (values.min() < level < values.max()):
        return []
    na, nb = values.shape
    above = values > level
    case = (above[:-1, :-1].astype(np.uint8)
            | above[1:, :-1] << 1
            | above[1:, 1:] << 2
            | above[:-1, 1:] << 3)
    ci, cj = np.nonzero((case != 0) & (case != 15))
    if ci.size == 0:
        return []
    cases = case[ci, cj]
    edges = _edge_ids(ci, cj, nb)

    centre_above = None
    saddle = (cases == 5) | (cases == 10)
    if saddle.any():
        centre = 0.25 * (values[ci, cj] + values[ci + 1, cj]
                         + values[ci + 1, cj + 1] + values[ci, cj + 1])
        centre_above = centre > level

    pairs = []
    for c in np.unique(cases):
        sel = cases == c
        if c in _SADDLE:
            for flag in (True, False):
                sub = sel & (centre_above == flag)
                if sub.any():
                    for e_u, e_v in _SADDLE[c][0 if flag else 1]:
                        pairs.append(np.column_stack([edges[e_u, sub], edges[e_v, sub]]))
        else:
            for e_u, e_v in _SEGMENTS[int(c)]:
                pairs.append(np.column_stack([edges[e_u, sel], edges[e_v, sel]]))
    pairs = np.concatenate(pairs)

    a, b = grid.a, grid.b
    out = []
    for chain in _chain(pairs.tolist()):
        pts = _edge_points(np.asarray(chain), values, level, a, b)
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        pts = pts[keep]
        if len(pts) >= 2:
            out.append(Polyline(pts, level))
    return out


def polyline_integral(poly: Polyline, f: Field) -> tuple[float, float]:
    """Trapezium-rule line integral of ``f`` over arclength.

    Returns ``(integral, length)``.  ``f`` is called once with the vertex
    coordinate arrays.
    """
    v = poly.vertices
    seg = np.hypot(*np.diff(v, axis=0).T)
    fv = np.broadcast_to(np.asarray(f(v[:, 0], v[:, 1]), dtype=float), (len(v),))
    if not np.all(np.isfinite(fv)):
        raise NumericalError("non-finite field value on polyline")
    return float(np.sum(0.5 * seg * (fv[1:] + fv[:-1]))), float(np.sum(seg))
