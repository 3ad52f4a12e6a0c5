import logging

import numpy as np
from matplotlib.path import Path as PolygonPath
from scipy import ndimage

from depth_hfr.exceptions import InvalidInputError, UnfillableError
from range_pipeline.types import JAW, LEFT_BROW, RIGHT_BROW, LandmarkSet, RangeImage

logger = logging.getLogger(__name__)

# 8-connected neighbourhood, centre excluded
NEIGHBOURS = np.array([[1.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0]])


def fill_holes(img: RangeImage, face_region: np.ndarray) -> RangeImage:
    """Fill unobserved pixels inside ``face_region`` with the mean of observed neighbours.

    Jacobi sweeps: every iteration reads the values of the previous one, so the
    result does not depend on the order pixels are visited in.
    """
    region = np.asarray(face_region, dtype=bool)
    if region.shape != img.shape:
        raise InvalidInputError(
            f"Face region {region.shape} does not match image {img.shape}"
        )
    if not (img.mask & region).any():
        raise UnfillableError("Face region contains no observed pixel")

    values = img.values.copy()
    mask = img.mask.copy()
    iterations = 0
    while True:
        holes = region & ~mask
        if not holes.any():
            break
        sums = ndimage.convolve(values * mask, NEIGHBOURS, mode="constant", cval=0.0)
        counts = ndimage.convolve(mask.astype(np.float64), NEIGHBOURS, mode="constant", cval=0.0)
        fillable = holes & (counts > 0)
        if not fillable.any():
            raise UnfillableError(
                f"{int(holes.sum())} hole pixel(s) are not connected to observed data"
            )
        values[fillable] = sums[fillable] / counts[fillable]
        mask[fillable] = True
        iterations += 1

    logger.debug("Filled holes in %d iteration(s)", iterations)
    return RangeImage(values, mask)


def face_region_from_landmarks(landmarks: LandmarkSet, shape) -> np.ndarray:
    """Pixels inside the polygon formed by the jaw line and the brows."""
    outline = list(JAW) + list(reversed(RIGHT_BROW)) + list(reversed(LEFT_BROW))
    polygon = PolygonPath(landmarks.points[outline])
    height, width = shape
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    centres = np.column_stack([cols.ravel(), rows.ravel()])
    return polygon.contains_points(centres).reshape(height, width)
