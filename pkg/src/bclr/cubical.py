"""Sublevel-set cubical persistence of 2-D grayscale frames.

Pixels are unit squares (the T-construction): a square enters the
filtration at its pixel value and every edge or vertex enters with the
first square that contains it.  Consequently sublevel sets are connected
through shared corners (8-connectivity) and their holes are 4-connected
white regions, with everything outside the frame counted as white.

PD0 comes from an elder-rule union-find sweep over pixels in increasing
order.  PD1 comes from the same sweep run on the negated frame with the
dual connectivity and a virtual, always-present outside component; each
finite dual pair (b, d) maps to the hole (-d, -b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

__all__ = ["PersistenceDiagram", "gaussian_smooth", "standardize_frame", "sublevel_pd"]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs of one homology dimension; essential classes excluded."""

    dim: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        if np.any(pts[:, 1] <= pts[:, 0]):
            raise ValueError("every diagram point needs death > birth")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def lifetimes(self) -> np.ndarray:
        return self.points[:, 1] - self.points[:, 0]

    @property
    def midlifes(self) -> np.ndarray:
        return 0.5 * (self.points[:, 1] + self.points[:, 0])

    def sorted(self) -> np.ndarray:
        """Points in lexicographic order, handy for comparisons."""
        return self.points[np.lexsort((self.points[:, 1], self.points[:, 0]))]


def _frame(frame) -> np.ndarray:
    a = np.asarray(frame, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("a frame must be a non-empty 2-D array")
    if not np.all(np.isfinite(a)):
        raise ValueError("frame contains non-finite pixels")
    return a


def gaussian_smooth(frame, sigma: float = 2.0) -> np.ndarray:
    """Separable Gaussian filter, radius ceil(4 sigma), reflecting boundaries."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    a = _frame(frame)
    return ndimage.gaussian_filter(a, sigma, mode="reflect", radius=int(math.ceil(4 * sigma)))


def standardize_frame(frame) -> np.ndarray:
    """Shift and scale pixels to mean 0 and mean square 1."""
    a = _frame(frame)
    c = a - a.mean()
    ms = np.mean(c * c)
    if ms < 1e-24:
        raise ValueError("zero-variance frame")
    return c / math.sqrt(ms)


@numba.njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@numba.njit(cache=True)
def _elder_sweep(vals, rows, cols, conn8, outside):
    """Elder-rule 0-dim persistence of a sublevel filtration on the pixel grid.

    Returns (births, deaths) for components that die; the oldest component
    (or the outside, when present) is never reported.
    """
    npx = rows * cols
    order = np.argsort(vals, kind="mergesort")
    rank = np.empty(npx + 1, dtype=np.int64)
    for r in range(npx):
        rank[order[r]] = r
    root_rank = np.empty(npx + 1, dtype=np.int64)
    parent = np.full(npx + 1, -1, dtype=np.int64)
    out_node = npx
    if outside:
        parent[out_node] = out_node
        root_rank[out_node] = -1
    births = np.empty(npx)
    deaths = np.empty(npx)
    npairs = 0
    if conn8:
        dr = np.array([-1, -1, -1, 0, 0, 1, 1, 1])
        dc = np.array([-1, 0, 1, -1, 1, -1, 0, 1])
    else:
        dr = np.array([-1, 0, 0, 1])
        dc = np.array([0, -1, 1, 0])
    for r in range(npx):
        p = order[r]
        v = vals[p]
        pr = p // cols
        pc = p % cols
        parent[p] = p
        root_rank[p] = r
        on_edge = pr == 0 or pc == 0 or pr == rows - 1 or pc == cols - 1
        for k in range(dr.shape[0] + 1):
            if k < dr.shape[0]:
                qr = pr + dr[k]
                qc = pc + dc[k]
                if qr < 0 or qc < 0 or qr >= rows or qc >= cols:
                    continue
                q = qr * cols + qc
                if parent[q] < 0:
                    continue
            else:
                if not (outside and on_edge):
                    continue
                q = out_node
            a = _find(parent, p)
            b = _find(parent, q)
            if a == b:
                continue
            if root_rank[a] < root_rank[b]:
                old, young = a, b
            else:
                old, young = b, a
            bv = vals[order[root_rank[young]]]
            if v > bv:
                births[npairs] = bv
                deaths[npairs] = v
                npairs += 1
            parent[young] = old
    return births[:npairs], deaths[:npairs]


def sublevel_pd(frame, connectivity: int = 8):
    """PD0 and PD1 of the sublevel filtration of ``frame``.

    Parameters
    ----------
    frame : (k, l) array
    connectivity : {8, 4}
        Adjacency of sublevel (dark) pixels.  8 is the T-construction; holes
        then use 4-adjacency.  4 gives the complementary pairing (dark
        4-connected, holes 8-connected).

    Returns
    -------
    (PersistenceDiagram, PersistenceDiagram)
        Dimension 0 and dimension 1 diagrams.  Pixel ties are broken by
        row-major index; zero-length pairs are dropped.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    a = np.ascontiguousarray(_frame(frame))
    rows, cols = a.shape
    flat = a.ravel()
    dark8 = connectivity == 8
    b0, d0 = _elder_sweep(flat, rows, cols, dark8, False)
    b1, d1 = _elder_sweep(-flat, rows, cols, not dark8, True)
    pd0 = PersistenceDiagram(0, np.column_stack([b0, d0]))
    pd1 = PersistenceDiagram(1, np.column_stack([-d1, -b1]))
    return pd0, pd1
