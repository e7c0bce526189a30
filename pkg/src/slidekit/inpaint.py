"""Fast-marching inpainting.

Masked pixels are filled in increasing distance-to-boundary order (the
distance field solves the eikonal equation on the grid). Each pixel is
estimated as a normalized weighted average of the already-known pixels in
a disc around it; the weight of a neighbor combines three factors:

* direction  – alignment of the neighbor offset with the marching front,
* geometry   – inverse squared distance,
* level set  – closeness of the neighbor's distance value to the pixel's.

The estimate is a convex combination of known values, so filled pixels
never leave the value range of the boundary that feeds them (maximum
principle), and pixels outside the mask are returned bit-identical.
"""

from __future__ import annotations

import heapq
import math
import warnings

import numpy as np

from .errors import ShapeMismatch
from .raster import Mask, Raster, as_raster

_KNOWN, _BAND, _INSIDE = 0, 1, 2
_INF = 1e6
_OFFSETS4 = ((0, 1), (0, -1), (1, 0), (-1, 0))

DEFAULT_RADIUS = 3


def _eikonal(t1: float, t2: float) -> float:
    tmin = min(t1, t2)
    if tmin >= _INF:
        return _INF
    if abs(t1 - t2) >= 1.0:
        return tmin + 1.0
    diff = t1 - t2
    return (t1 + t2 + math.sqrt(2.0 - diff * diff)) / 2.0


def _solve_t(t: np.ndarray, usable: np.ndarray, y: int, x: int) -> float:
    h, w = t.shape

    def val(yy: int, xx: int) -> float:
        if 0 <= yy < h and 0 <= xx < w and usable[yy, xx]:
            return max(t[yy, xx], 0.0)
        return _INF

    left, right = val(y, x - 1), val(y, x + 1)
    up, down = val(y - 1, x), val(y + 1, x)
    return min(
        _eikonal(left, up),
        _eikonal(right, up),
        _eikonal(left, down),
        _eikonal(right, down),
    )


def _band_ring(mask: np.ndarray) -> np.ndarray:
    """Known pixels 4-adjacent to the mask: the marching front at T=0."""
    ring = np.zeros_like(mask)
    ring[1:, :] |= mask[:-1, :]
    ring[:-1, :] |= mask[1:, :]
    ring[:, 1:] |= mask[:, :-1]
    ring[:, :-1] |= mask[:, 1:]
    return ring & ~mask


def _outside_distances(mask: np.ndarray, ring: np.ndarray, limit: float) -> np.ndarray:
    """Eikonal distance from the ring, marched outward over known pixels."""
    h, w = mask.shape
    dist = np.full((h, w), _INF, dtype=np.float64)
    dist[ring] = 0.0
    usable = ~mask
    heap = [(0.0, int(y), int(x)) for y, x in zip(*np.nonzero(ring))]
    heapq.heapify(heap)
    while heap:
        t, y, x = heapq.heappop(heap)
        if t > dist[y, x] + 1e-12 or t > limit:
            continue
        for dy, dx in _OFFSETS4:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and usable[ny, nx] and not ring[ny, nx]:
                cand = _solve_t(dist, usable, ny, nx)
                if cand < dist[ny, nx] - 1e-12:
                    dist[ny, nx] = cand
                    heapq.heappush(heap, (cand, ny, nx))
    np.minimum(dist, limit, out=dist)
    return dist


def _front_normal(t: np.ndarray, flags: np.ndarray, y: int, x: int) -> tuple[float, float]:
    """Gradient of the distance field at (y, x), one-sided where needed."""
    h, w = t.shape

    def component(d_first: tuple[int, int], d_second: tuple[int, int]) -> float:
        y1, x1 = y + d_first[0], x + d_first[1]
        y2, x2 = y + d_second[0], x + d_second[1]
        ok1 = 0 <= y1 < h and 0 <= x1 < w and flags[y1, x1] != _INSIDE
        ok2 = 0 <= y2 < h and 0 <= x2 < w and flags[y2, x2] != _INSIDE
        if ok1 and ok2:
            return (t[y1, x1] - t[y2, x2]) / 2.0
        if ok1:
            return t[y1, x1] - t[y, x]
        if ok2:
            return t[y, x] - t[y2, x2]
        return 0.0

    gx = component((0, 1), (0, -1))
    gy = component((1, 0), (-1, 0))
    norm = math.hypot(gx, gy)
    if norm == 0.0:
        return 0.0, 0.0
    return gy / norm, gx / norm


def telea_inpaint(img: Raster, mask: Mask, radius: int = DEFAULT_RADIUS) -> Raster:
    """Fill masked pixels from their surroundings; leave the rest untouched.

    ``radius`` is the neighborhood radius in pixels. An all-true mask has
    no boundary to march from; the image border is then treated as a known
    boundary of value 0 (with a warning).
    """
    img = as_raster(img)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape[:2]:
        raise ShapeMismatch(f"mask {mask.shape} does not match raster {img.shape[:2]}")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if not mask.any():
        return img.copy()
    if mask.all():
        warnings.warn(
            "inpainting an all-true mask: using the image border as a zero-valued boundary",
            RuntimeWarning,
            stacklevel=2,
        )
        padded_img = np.zeros((img.shape[0] + 2, img.shape[1] + 2, 3), dtype=np.uint8)
        padded_img[1:-1, 1:-1] = img
        padded_mask = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=bool)
        padded_mask[1:-1, 1:-1] = True
        return telea_inpaint(padded_img, padded_mask, radius)[1:-1, 1:-1]

    h, w = mask.shape
    ring = _band_ring(mask)
    limit = 2.0 * radius + 3.0

    # signed distance field: negative outside the mask, zero on the ring,
    # grows inward as the march proceeds
    t = np.where(mask, _INF, -_outside_distances(mask, ring, limit))
    t[ring] = 0.0

    flags = np.where(mask, _INSIDE, _KNOWN).astype(np.int8)
    flags[ring] = _BAND

    work = img.astype(np.float64)

    offs_y, offs_x = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    dist2_full = (offs_y**2 + offs_x**2).astype(np.float64)
    disc_full = (dist2_full <= radius * radius) & (dist2_full > 0)

    heap = [(0.0, int(y), int(x)) for y, x in zip(*np.nonzero(ring))]
    heapq.heapify(heap)

    while heap:
        _, y, x = heapq.heappop(heap)
        for dy, dx in _OFFSETS4:
            qy, qx = y + dy, x + dx
            if not (0 <= qy < h and 0 <= qx < w) or flags[qy, qx] != _INSIDE:
                continue
            t[qy, qx] = _solve_t(t, flags != _INSIDE, qy, qx)

            # weighted-neighbor estimate over the known part of the disc
            wy0, wy1 = max(0, qy - radius), min(h, qy + radius + 1)
            wx0, wx1 = max(0, qx - radius), min(w, qx + radius + 1)
            gy0, gx0 = wy0 - (qy - radius), wx0 - (qx - radius)
            gy1, gx1 = gy0 + (wy1 - wy0), gx0 + (wx1 - wx0)

            flag_win = flags[wy0:wy1, wx0:wx1]
            valid = disc_full[gy0:gy1, gx0:gx1] & (flag_win != _INSIDE)
            ny_grad, nx_grad = _front_normal(t, flags, qy, qx)
            ry = -offs_y[gy0:gy1, gx0:gx1][valid]
            rx = -offs_x[gy0:gy1, gx0:gx1][valid]
            d2 = dist2_full[gy0:gy1, gx0:gx1][valid]
            direction = np.abs(rx * nx_grad + ry * ny_grad) / np.sqrt(d2)
            np.maximum(direction, 1e-6, out=direction)
            level = 1.0 / (1.0 + np.abs(t[qy, qx] - t[wy0:wy1, wx0:wx1][valid]))
            weights = direction / d2 * level
            values = work[wy0:wy1, wx0:wx1][valid]
            work[qy, qx] = weights @ values / weights.sum()

            flags[qy, qx] = _BAND
            heapq.heappush(heap, (float(t[qy, qx]), qy, qx))

    out = img.copy()
    out[mask] = np.clip(np.rint(work[mask]), 0, 255).astype(np.uint8)
    return out
