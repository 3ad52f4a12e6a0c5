from enum import Enum
from typing import Tuple

import attrs
import numpy as np

from depth_hfr.exceptions import InvalidInputError, ShapeError


class Modality(Enum):
    COLOR = "2D"
    DEPTH = "2.5D"
    HETEROGENEOUS = "2D/2.5D"
    FUSION = "Fusion"

    @classmethod
    def has_value(cls, value: str) -> bool:
        return value in cls._value2member_map_

    @classmethod
    def channels(cls) -> Tuple["Modality", ...]:
        return cls.COLOR, cls.DEPTH, cls.HETEROGENEOUS


def _as_ids(values) -> Tuple:
    return tuple(values)


@attrs.frozen(eq=False)
class ScoreMatrix:
    """Probe x gallery similarities; ids are the identity labels of rows and columns."""

    values: np.ndarray = attrs.field(converter=lambda v: np.asarray(v, dtype=np.float64))
    probe_ids: Tuple = attrs.field(converter=_as_ids)
    gallery_ids: Tuple = attrs.field(converter=_as_ids)
    modality: Modality = attrs.field(converter=Modality)
    normalized: bool = False

    def __attrs_post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ShapeError(f"Score matrix must be 2-D, got shape {self.values.shape}")
        if self.values.shape != (len(self.probe_ids), len(self.gallery_ids)):
            raise ShapeError(
                f"Score matrix {self.values.shape} does not match "
                f"{len(self.probe_ids)} probe and {len(self.gallery_ids)} gallery ids"
            )
        if not np.isfinite(self.values).all():
            raise InvalidInputError("Scores must be finite")
        if self.normalized and self.values.size and (self.values.min() < 0 or self.values.max() > 1):
            raise InvalidInputError("A normalized score matrix must lie in [0, 1]")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def replace(self, values: np.ndarray, normalized: bool, modality: Modality = None) -> "ScoreMatrix":
        return ScoreMatrix(values, self.probe_ids, self.gallery_ids, modality or self.modality, normalized)
