"""Body/drop collision detection.

Two detectors that must agree exactly: an all-pairs brute force used as the
oracle, and a uniform-grid broad phase. Both test ``dx*dx + dy*dy <= r*r``
with ``dx = drop - point``, so the decision is bit-stable between them.
A hit set is a sorted ``int64`` array of drop indices; each drop appears at
most once no matter how many body points it touches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .precip import BodyCloud, DropField

_KEY_OFFSET = 1 << 30
# Query boxes are padded so float rounding in the distance test can never
# accept a pair whose cells were skipped.
_PAD_REL = 1e-9
_PAD_ABS = 1e-15


def _empty_hits() -> np.ndarray:
    return np.empty(0, dtype=np.int64)


def _exact_hits(body: BodyCloud, xs: np.ndarray, ys: np.ndarray, radius: float) -> np.ndarray:
    """Boolean mask over the given drops: within radius of any body point."""
    r2 = radius * radius
    dx = xs[None, :] - body.x[:, None]
    dy = ys[None, :] - body.y[:, None]
    return np.any(dx * dx + dy * dy <= r2, axis=0)


def detect_bruteforce(body: BodyCloud, drops: DropField, radius: float) -> np.ndarray:
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    if len(drops) == 0 or len(body) == 0:
        return _empty_hits()
    # Chunk over drops to bound the temporary pair matrix.
    out = []
    chunk = max(1, 262144 // max(1, len(body)))
    for start in range(0, len(drops), chunk):
        stop = start + chunk
        mask = _exact_hits(body, drops.x[start:stop], drops.y[start:stop], radius)
        out.append(np.flatnonzero(mask) + start)
    return np.concatenate(out).astype(np.int64)


def _cell_keys(cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    return ((cx + _KEY_OFFSET) << 32) | (cy + _KEY_OFFSET)


@dataclass
class GridIndex:
    """Drops bucketed by ``floor(position / cell_size)``.

    Stored in compressed form: ``order`` lists drop indices sorted by cell
    key and ``keys`` holds the matching sorted keys.
    """

    cell_size: float
    n_drops: int
    keys: np.ndarray
    order: np.ndarray

    @property
    def buckets(self) -> dict[tuple[int, int], list[int]]:
        out: dict[tuple[int, int], list[int]] = {}
        for key, idx in zip(self.keys.tolist(), self.order.tolist()):
            cell = ((key >> 32) - _KEY_OFFSET, (key & 0xFFFFFFFF) - _KEY_OFFSET)
            out.setdefault(cell, []).append(idx)
        return out

    def candidates(self, cell_keys: np.ndarray) -> np.ndarray:
        """Drop indices stored in any of the given cells."""
        lo = np.searchsorted(self.keys, cell_keys, side="left")
        hi = np.searchsorted(self.keys, cell_keys, side="right")
        sizes = hi - lo
        keep = sizes > 0
        if not keep.any():
            return _empty_hits()
        lo, sizes = lo[keep], sizes[keep]
        # Expand [lo, hi) ranges without a Python loop.
        starts = np.repeat(lo - np.cumsum(sizes) + sizes, sizes)
        pos = starts + np.arange(sizes.sum())
        return self.order[pos]


def build_grid(drops: DropField, cell_size: float) -> GridIndex:
    if not cell_size > 0:
        raise ValueError(f"cell_size must be positive, got {cell_size!r}")
    cx = np.floor(drops.x / cell_size).astype(np.int64)
    cy = np.floor(drops.y / cell_size).astype(np.int64)
    keys = _cell_keys(cx, cy)
    order = np.argsort(keys, kind="stable")
    return GridIndex(cell_size, len(drops), keys[order], order.astype(np.int64))


def query_cells(body: BodyCloud, radius: float, cell_size: float) -> np.ndarray:
    """Unique keys of every cell overlapping a body point's padded disc."""
    reach = radius * (1.0 + _PAD_REL) + _PAD_ABS
    x0 = np.floor((body.x - reach) / cell_size).astype(np.int64)
    x1 = np.floor((body.x + reach) / cell_size).astype(np.int64)
    y0 = np.floor((body.y - reach) / cell_size).astype(np.int64)
    y1 = np.floor((body.y + reach) / cell_size).astype(np.int64)
    span_x = int((x1 - x0).max()) + 1
    span_y = int((y1 - y0).max()) + 1
    ox = np.arange(span_x)
    oy = np.arange(span_y)
    cx = x0[:, None, None] + ox[None, :, None]
    cy = y0[:, None, None] + oy[None, None, :]
    valid = (cx <= x1[:, None, None]) & (cy <= y1[:, None, None])
    cx, cy = np.broadcast_arrays(cx, cy)
    return np.unique(_cell_keys(cx[valid], cy[valid]))


def detect_grid(body: BodyCloud, grid: GridIndex, drops: DropField, radius: float) -> np.ndarray:
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    if grid.n_drops != len(drops):
        raise ValueError(
            f"stale grid: built for {grid.n_drops} drops, field has {len(drops)}"
        )
    if len(drops) == 0 or len(body) == 0:
        return _empty_hits()
    cand = grid.candidates(query_cells(body, radius, grid.cell_size))
    if len(cand) == 0:
        return _empty_hits()
    cand = np.unique(cand)
    mask = _exact_hits(body, drops.x[cand], drops.y[cand], radius)
    return cand[mask]


def detect(body: BodyCloud, drops: DropField, radius: float, detector: str = "grid") -> np.ndarray:
    if detector == "grid":
        return detect_grid(body, build_grid(drops, radius), drops, radius)
    if detector == "brute":
        return detect_bruteforce(body, drops, radius)
    raise ValueError(f"unknown detector {detector!r} (expected 'grid' or 'brute')")
