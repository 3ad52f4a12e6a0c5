from typing import Iterable

import numpy as np

from depth_hfr.exceptions import InvalidInputError
from range_pipeline.types import ChannelStats


def _channels_last(images: np.ndarray) -> np.ndarray:
    images = np.asarray(images)
    if images.ndim == 2:
        return images[..., np.newaxis]
    return images


def compute_channel_stats(dataset: Iterable[np.ndarray]) -> ChannelStats:
    """Per-channel mean over every pixel of every image (channels last)."""
    sums = None
    count = 0
    for image in dataset:
        image = _channels_last(image).astype(np.float64)
        flat = image.reshape(-1, image.shape[-1])
        if sums is None:
            sums = np.zeros(flat.shape[1], dtype=np.float64)
        elif flat.shape[1] != len(sums):
            raise InvalidInputError("Images of a dataset must share a channel count")
        sums += flat.sum(axis=0)
        count += flat.shape[0]
    if not count:
        raise InvalidInputError("Cannot compute channel statistics of an empty dataset")
    return ChannelStats(tuple(sums / count))


def _check_channels(batch: np.ndarray, stats: ChannelStats) -> None:
    if batch.shape[-1] != stats.channels:
        raise InvalidInputError(
            f"Batch has {batch.shape[-1]} channel(s), statistics have {stats.channels}"
        )


def normalize_batch(batch: np.ndarray, stats: ChannelStats) -> np.ndarray:
    batch = _channels_last(batch)
    _check_channels(batch, stats)
    return batch.astype(np.float64) - stats.as_array()


def denormalize_batch(
    batch: np.ndarray, stats: ChannelStats, dtype: np.dtype = np.float32
) -> np.ndarray:
    """Add the means back in float64 and cast to ``dtype``, the dtype of the original images.

    Float32 and integer images come back bit for bit. Float64 images come back within
    the rounding of one addition at the scale of the mean.
    """
    batch = _channels_last(batch)
    _check_channels(batch, stats)
    restored = batch.astype(np.float64) + stats.as_array()
    if np.issubdtype(dtype, np.integer):
        restored = np.rint(restored)
    return restored.astype(dtype)
