"""Feature extraction and the on-disk feature file.

A feature file is a pair:

* ``NAME.bin``: rows x dim little-endian float32, row-major.
* ``NAME.json``: ``{"rows", "dim", "dtype": "<f4", "ids", "modality",
  "config_hash", ...}``.
"""

import json
from pathlib import Path
from typing import List, Optional, Sequence

import attrs
import numpy as np
import torch

from depth_hfr.exceptions import InvalidInputError, ShapeError
from unimodal_cnn.networks import CcpNetwork

FEATURE_DTYPE = "<f4"
# ITU-R BT.601 luma
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def to_grayscale(colors: np.ndarray) -> np.ndarray:
    """Channels-last RGB (... x H x W x 3) to luma (... x H x W x 1)."""
    colors = np.asarray(colors, dtype=np.float64)
    if colors.shape[-1] != 3:
        raise ShapeError(f"Grayscale conversion needs 3 channels, got shape {colors.shape}")
    return (colors @ LUMA_WEIGHTS)[..., np.newaxis]


@torch.no_grad()
def extract_features(net: CcpNetwork, images: torch.Tensor, batch_size: int = 64) -> torch.Tensor:
    expected = (net.in_channels, net.input_size, net.input_size)
    if images.dim() != 4 or tuple(images.shape[1:]) != expected:
        raise ShapeError(f"Feature extraction expects N x {expected} images, got {tuple(images.shape)}")
    net.eval()
    chunks = [net.features(images[start : start + batch_size]) for start in range(0, len(images), batch_size)]
    if not chunks:
        return images.new_zeros((0, net.feature_dim))
    return torch.cat(chunks)


@attrs.frozen(eq=False)
class FeatureFile:
    values: np.ndarray
    ids: List[str]
    modality: str
    config_hash: str
    meta: dict = attrs.field(factory=dict)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_features(
    path,
    features: np.ndarray,
    ids: Sequence,
    modality: str,
    config_hash: str,
    meta: Optional[dict] = None,
) -> Path:
    features = np.asarray(features)
    if features.ndim != 2 or len(features) != len(ids):
        raise ShapeError(f"Need a rows x dim matrix with one id per row, got {features.shape} and {len(ids)} ids")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.ascontiguousarray(features, dtype=FEATURE_DTYPE).tobytes(order="C"))
    sidecar = {
        "rows": int(features.shape[0]),
        "dim": int(features.shape[1]),
        "dtype": FEATURE_DTYPE,
        "ids": [str(value) for value in ids],
        "modality": modality,
        "config_hash": config_hash,
        **(meta or {}),
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_features(path) -> FeatureFile:
    path = Path(path)
    sidecar = json.loads(sidecar_path(path).read_text())
    if sidecar.get("dtype") != FEATURE_DTYPE:
        raise InvalidInputError(f"'{path}' is not a {FEATURE_DTYPE} feature file")
    values = np.frombuffer(path.read_bytes(), dtype=FEATURE_DTYPE)
    if values.size != sidecar["rows"] * sidecar["dim"]:
        raise ShapeError(f"'{path}' holds {values.size} values, sidecar announces {sidecar['rows']} x {sidecar['dim']}")
    meta = {key: value for key, value in sidecar.items() if key not in ("rows", "dim", "dtype", "ids", "modality", "config_hash")}
    return FeatureFile(
        values=values.reshape(sidecar["rows"], sidecar["dim"]).astype(np.float32),
        ids=list(sidecar["ids"]),
        modality=sidecar["modality"],
        config_hash=sidecar["config_hash"],
        meta=meta,
    )
