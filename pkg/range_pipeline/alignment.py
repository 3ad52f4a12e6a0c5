import math
from typing import Tuple

import attrs
import numpy as np
from scipy import ndimage

from depth_hfr.exceptions import DegenerateLandmarksError, InvalidInputError
from range_pipeline.types import LandmarkSet, RangeImage

CROP_SIZE = 128
DEFAULT_IOD_PX = 50.0
DEFAULT_EYE_ROW = 48.0


@attrs.frozen
class SimilarityTransform:
    """Maps input pixel (x, y) to output pixel: out = scale * R(-angle) (in - pivot) + anchor."""

    scale: float
    angle: float
    pivot: Tuple[float, float]
    anchor: Tuple[float, float]
    size: int = CROP_SIZE

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        cos, sin = math.cos(self.angle), math.sin(self.angle)
        delta = np.asarray(points, dtype=np.float64) - np.asarray(self.pivot)
        rotated = np.column_stack(
            [cos * delta[:, 0] + sin * delta[:, 1], -sin * delta[:, 0] + cos * delta[:, 1]]
        )
        return self.scale * rotated + np.asarray(self.anchor)

    def _inverse_affine(self) -> Tuple[np.ndarray, np.ndarray]:
        # scipy works in (row, col): input = matrix @ output + offset
        cos, sin = math.cos(self.angle), math.sin(self.angle)
        matrix = np.array([[cos, sin], [-sin, cos]]) / self.scale
        anchor_rc = np.array([self.anchor[1], self.anchor[0]])
        pivot_rc = np.array([self.pivot[1], self.pivot[0]])
        return matrix, pivot_rc - matrix @ anchor_rc

    def warp_plane(self, plane: np.ndarray, order: int = 1) -> np.ndarray:
        matrix, offset = self._inverse_affine()
        return ndimage.affine_transform(
            np.asarray(plane, dtype=np.float64),
            matrix,
            offset=offset,
            output_shape=(self.size, self.size),
            order=order,
            mode="constant",
            cval=0.0,
        )

    def warp_color(self, color: np.ndarray) -> np.ndarray:
        color = np.asarray(color)
        channels = [self.warp_plane(color[..., c]) for c in range(color.shape[2])]
        warped = np.stack(channels, axis=-1)
        if color.dtype == np.uint8:
            return np.clip(np.rint(warped), 0, 255).astype(np.uint8)
        return warped

    def warp_range(self, img: RangeImage) -> RangeImage:
        # normalized interpolation: observed neighbours only
        weight = self.warp_plane(img.mask.astype(np.float64))
        total = self.warp_plane(img.values * img.mask)
        mask = weight > 0.5
        values = np.zeros_like(total)
        values[mask] = np.clip(total[mask] / weight[mask], 0.0, 1.0)
        return RangeImage(values, mask)


def alignment_transform(
    lm: LandmarkSet,
    target_iod_px: float = DEFAULT_IOD_PX,
    eye_row: float = DEFAULT_EYE_ROW,
    size: int = CROP_SIZE,
) -> SimilarityTransform:
    if not 0 < target_iod_px < size:
        raise InvalidInputError(f"target_iod_px must be in (0, {size}), got {target_iod_px}")
    left, right = lm.left_eye, lm.right_eye
    delta = right - left
    distance = float(np.hypot(*delta))
    if distance == 0:
        raise DegenerateLandmarksError("Eye centres coincide")
    midpoint = (left + right) / 2.0
    centre_col = (size - 1) / 2.0
    return SimilarityTransform(
        scale=target_iod_px / distance,
        angle=math.atan2(delta[1], delta[0]),
        pivot=(float(midpoint[0]), float(midpoint[1])),
        anchor=(centre_col, float(eye_row)),
        size=size,
    )


def crop_and_align(
    img,
    lm: LandmarkSet,
    target_iod_px: float = DEFAULT_IOD_PX,
    eye_row: float = DEFAULT_EYE_ROW,
):
    """Level the eye line, fix the inter-ocular distance and crop to 128 x 128."""
    transform = alignment_transform(lm, target_iod_px, eye_row)
    if isinstance(img, RangeImage):
        return transform.warp_range(img)
    return transform.warp_color(img)


def align_pair(
    color: np.ndarray,
    depth: RangeImage,
    lm: LandmarkSet,
    target_iod_px: float = DEFAULT_IOD_PX,
    eye_row: float = DEFAULT_EYE_ROW,
) -> Tuple[np.ndarray, RangeImage, LandmarkSet]:
    """One transform for both images of a pair; landmarks follow it."""
    if np.asarray(color).shape[:2] != depth.shape:
        raise InvalidInputError("Colour and depth images of a pair must share a grid")
    transform = alignment_transform(lm, target_iod_px, eye_row)
    return (
        transform.warp_color(color),
        transform.warp_range(depth),
        LandmarkSet(transform.apply_points(lm.points)),
    )
