from typing import Optional, Tuple

import attrs
import numpy as np

from depth_hfr.exceptions import DegenerateLandmarksError, InvalidInputError

NUM_LANDMARKS = 68
# 68-point scheme: contour of the eye on the image left, then image right.
LEFT_EYE = tuple(range(36, 42))
RIGHT_EYE = tuple(range(42, 48))
JAW = tuple(range(0, 17))
LEFT_BROW = tuple(range(17, 22))
RIGHT_BROW = tuple(range(22, 27))


@attrs.frozen(eq=False)
class PointCloud:
    """3D points in millimetres; the camera looks down -z, so larger z is nearer."""

    points: np.ndarray
    colors: Optional[np.ndarray] = None

    def __attrs_post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3 or len(points) == 0:
            raise InvalidInputError("Point cloud must be a non-empty N x 3 array")
        if not np.isfinite(points).all():
            raise InvalidInputError("Point cloud has non-finite coordinates")
        object.__setattr__(self, "points", points)

        if self.colors is not None:
            colors = np.asarray(self.colors)
            if colors.shape != points.shape:
                raise InvalidInputError("Point colours must be N x 3, one per point")
            if colors.min() < 0 or colors.max() > 255:
                raise InvalidInputError("Point colours must lie in [0, 255]")
            object.__setattr__(self, "colors", colors.astype(np.uint8))

    def __len__(self) -> int:
        return len(self.points)


@attrs.frozen
class GridSpec:
    """Orthographic grid: ``origin`` is the (x, y) of the top-left pixel corner."""

    origin: Tuple[float, float]
    pitch: float
    height: int
    width: int

    def __attrs_post_init__(self) -> None:
        if self.pitch <= 0:
            raise InvalidInputError(f"Grid pitch must be positive, got {self.pitch}")
        if self.height <= 0 or self.width <= 0:
            raise InvalidInputError(
                f"Degenerate grid {self.height}x{self.width}, both sides must be > 0"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width


@attrs.frozen(eq=False)
class RangeImage:
    values: np.ndarray
    mask: np.ndarray

    def __attrs_post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise InvalidInputError(
                f"Range image values {values.shape} and mask {mask.shape} must be equal 2D grids"
            )
        if not np.isfinite(values).all():
            raise InvalidInputError("Range image has non-finite values")
        if values.min(initial=0.0) < 0.0 or values.max(initial=0.0) > 1.0:
            raise InvalidInputError("Range image values must lie in [0, 1]")
        if np.any(values[~mask] != 0.0):
            raise InvalidInputError("Unobserved pixels must carry the value 0")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def equals(self, other: "RangeImage") -> bool:
        return np.array_equal(self.values, other.values) and np.array_equal(
            self.mask, other.mask
        )


@attrs.frozen(eq=False)
class LandmarkSet:
    """68 (x, y) points in pixel coordinates, pixel centres at integers."""

    points: np.ndarray

    def __attrs_post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.shape != (NUM_LANDMARKS, 2):
            raise InvalidInputError(
                f"Expected {NUM_LANDMARKS} landmarks as (x, y), got shape {points.shape}"
            )
        if not np.isfinite(points).all():
            raise InvalidInputError("Landmarks must be finite")
        object.__setattr__(self, "points", points)
        if np.allclose(self.left_eye, self.right_eye):
            raise DegenerateLandmarksError("Eye centres coincide")

    @property
    def left_eye(self) -> np.ndarray:
        return self.points[list(LEFT_EYE)].mean(axis=0)

    @property
    def right_eye(self) -> np.ndarray:
        return self.points[list(RIGHT_EYE)].mean(axis=0)

    @property
    def inter_ocular_distance(self) -> float:
        return float(np.linalg.norm(self.right_eye - self.left_eye))


@attrs.frozen
class ChannelStats:
    mean: Tuple[float, ...]

    def __attrs_post_init__(self) -> None:
        mean = tuple(float(value) for value in self.mean)
        if not mean or not np.isfinite(mean).all():
            raise InvalidInputError("Channel means must be finite and non-empty")
        object.__setattr__(self, "mean", mean)

    @property
    def channels(self) -> int:
        return len(self.mean)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=np.float64)


@attrs.frozen(eq=False)
class FacePair:
    color: np.ndarray
    depth: RangeImage
    identity: int
    landmarks: LandmarkSet
    sample_id: str = ""
