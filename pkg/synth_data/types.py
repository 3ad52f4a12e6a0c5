import math
from typing import Tuple

import attrs
import numpy as np

from depth_hfr.exceptions import InvalidInputError

# (name, low, high) of every scalar shape parameter drawn per identity
SHAPE_RANGES = (
    ("face_width", 0.72, 0.82),
    ("face_height", 0.95, 1.05),
    ("depth_scale", 0.70, 0.90),
    ("eye_spacing", 0.34, 0.37),
    ("eye_row", -0.22, -0.17),
    ("nose_length", 0.22, 0.32),
    ("nose_height", 0.18, 0.34),
    ("nose_width", 0.14, 0.22),
    ("brow_height", 0.03, 0.09),
    ("cheek_height", 0.04, 0.12),
    ("cheek_spacing", 0.30, 0.42),
    ("mouth_width", 0.26, 0.36),
    ("mouth_row", 0.40, 0.50),
    ("chin_height", 0.04, 0.12),
)
DETAIL_BUMPS = 6
ALBEDO_RANGE = (0.45, 0.95)


@attrs.frozen
class IdentityParams:
    seed: int
    shape: Tuple[float, ...]
    # (u, v, sigma, amplitude) per bump, mirrored about the vertical midline
    details: Tuple[Tuple[float, float, float, float], ...]
    albedo: Tuple[float, float, float]
    # canonical 68 (u, v) anchors in face units, before any capture transform
    anchors: Tuple[Tuple[float, float], ...]

    def param(self, name: str) -> float:
        for index, (key, _, _) in enumerate(SHAPE_RANGES):
            if key == name:
                return self.shape[index]
        raise KeyError(name)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [
                np.asarray(self.shape),
                np.asarray(self.details).ravel(),
                np.asarray(self.albedo),
                np.asarray(self.anchors).ravel(),
            ]
        )


def _check_range(name: str, value: float, low: float, high: float) -> None:
    if not low <= value <= high:
        raise InvalidInputError(f"Capture parameter '{name}'={value} outside [{low}, {high}]")


@attrs.frozen
class CaptureParams:
    """Acquisition conditions of one sample.

    Bounds: light intensity [0.5, 1.5], light direction with z > 0,
    expression [0, 1], noise level [0, 0.1], scale [0.85, 1.15],
    offset within +-8 px, roll within +-10 degrees, hole rate [0, 0.2].
    """

    light_direction: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    light_intensity: float = 1.0
    expression: float = 0.0
    noise_level: float = 0.0
    scale: float = 1.0
    offset: Tuple[float, float] = (0.0, 0.0)
    roll_degrees: float = 0.0
    hole_rate: float = 0.0
    noise_seed: int = 0

    def __attrs_post_init__(self) -> None:
        direction = np.asarray(self.light_direction, dtype=np.float64)
        if direction.shape != (3,) or direction[2] <= 0:
            raise InvalidInputError("Light must come from the camera side (z > 0)")
        object.__setattr__(
            self, "light_direction", tuple(float(c) for c in direction / np.linalg.norm(direction))
        )
        _check_range("light_intensity", self.light_intensity, 0.5, 1.5)
        _check_range("expression", self.expression, 0.0, 1.0)
        _check_range("noise_level", self.noise_level, 0.0, 0.1)
        _check_range("scale", self.scale, 0.85, 1.15)
        _check_range("offset_x", self.offset[0], -8.0, 8.0)
        _check_range("offset_y", self.offset[1], -8.0, 8.0)
        _check_range("roll_degrees", self.roll_degrees, -10.0, 10.0)
        _check_range("hole_rate", self.hole_rate, 0.0, 0.2)

    @property
    def roll(self) -> float:
        return math.radians(self.roll_degrees)

    def as_dict(self) -> dict:
        return {
            key: list(value) if isinstance(value, tuple) else value
            for key, value in attrs.asdict(self).items()
        }
