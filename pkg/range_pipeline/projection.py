import logging
from typing import Optional, Tuple

import numpy as np

from depth_hfr.exceptions import InvalidInputError
from range_pipeline.types import GridSpec, PointCloud, RangeImage

logger = logging.getLogger(__name__)


def _pixel_indices(points: np.ndarray, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row/column of every point and a mask of points landing inside the grid.

    Columns grow with x, rows grow as y decreases (image rows run downwards).
    """
    cols = np.floor((points[:, 0] - grid.origin[0]) / grid.pitch).astype(np.int64)
    rows = np.floor((grid.origin[1] - points[:, 1]) / grid.pitch).astype(np.int64)
    inside = (rows >= 0) & (rows < grid.height) & (cols >= 0) & (cols < grid.width)
    return rows, cols, inside


def _rescale(depth: np.ndarray, mask: np.ndarray) -> np.ndarray:
    values = np.zeros(depth.shape, dtype=np.float64)
    observed = depth[mask]
    low, high = observed.min(), observed.max()
    if high > low:
        values[mask] = (observed - low) / (high - low)
    return values


def _zbuffer(cloud: PointCloud, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flat pixel index, raw depth and point index of every Z-buffer winner."""
    rows, cols, inside = _pixel_indices(cloud.points, grid)
    if not inside.any():
        raise InvalidInputError("No point of the cloud falls inside the grid")

    point_index = np.flatnonzero(inside)
    flat = rows[inside] * grid.width + cols[inside]
    z = cloud.points[inside, 2]

    # sorted by pixel, then by z: the last entry of every pixel run is the nearest point
    order = np.lexsort((z, flat))
    flat, z, point_index = flat[order], z[order], point_index[order]
    last = np.ones(len(flat), dtype=bool)
    last[:-1] = flat[1:] != flat[:-1]
    return flat[last], z[last], point_index[last]


def project_to_range(cloud: PointCloud, grid: GridSpec) -> RangeImage:
    """Z-buffer rasterization of a point cloud onto an orthographic grid."""
    flat, z, _ = _zbuffer(cloud, grid)

    depth = np.zeros(grid.height * grid.width, dtype=np.float64)
    mask = np.zeros(grid.height * grid.width, dtype=bool)
    depth[flat] = z
    mask[flat] = True
    depth, mask = depth.reshape(grid.shape), mask.reshape(grid.shape)

    logger.debug("Projected %d points onto %d pixels", len(cloud), int(mask.sum()))
    return RangeImage(_rescale(depth, mask), mask)


def project_texture(cloud: PointCloud, grid: GridSpec) -> Optional[np.ndarray]:
    """Colour of the Z-buffer winner of every pixel (H x W x 3, uint8)."""
    if cloud.colors is None:
        return None
    flat, _, winners = _zbuffer(cloud, grid)
    texture = np.zeros((grid.height * grid.width, 3), dtype=np.uint8)
    texture[flat] = cloud.colors[winners]
    return texture.reshape(grid.height, grid.width, 3)


def project_structured(points: np.ndarray, valid: np.ndarray) -> RangeImage:
    """Direct projection of a scan already arranged on an H x W grid."""
    points = np.asarray(points, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    if points.ndim != 3 or points.shape[2] != 3 or points.shape[:2] != valid.shape:
        raise InvalidInputError("Structured scan must be H x W x 3 with an H x W mask")
    valid = valid & np.isfinite(points).all(axis=2)
    if not valid.any():
        raise InvalidInputError("Structured scan has no valid point")
    depth = np.where(valid, points[..., 2], 0.0)
    return RangeImage(_rescale(depth, valid), valid)
