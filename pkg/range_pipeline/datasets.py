from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import attrs
import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from range_pipeline import io
from range_pipeline.normalization import normalize_batch
from range_pipeline.types import ChannelStats


def to_tensor(images: np.ndarray) -> torch.Tensor:
    """N x H x W x C (or H x W x C) numpy -> N x C x H x W float32 tensor."""
    array = np.asarray(images, dtype=np.float32)
    if array.ndim == 3:
        array = array[np.newaxis]
    return torch.from_numpy(np.ascontiguousarray(array.transpose(0, 3, 1, 2)))


def contiguous_labels(identities: Sequence[int]) -> Tuple[np.ndarray, Dict[int, int]]:
    index = {identity: label for label, identity in enumerate(sorted(set(identities)))}
    return np.asarray([index[identity] for identity in identities], dtype=np.int64), index


@attrs.frozen(eq=False)
class PairArrays:
    """A manifest split loaded in memory, channels last.

    ``color`` is in [0, 1] before normalization, ``depth`` in [0, 1].
    """

    color: np.ndarray
    depth: np.ndarray
    identities: np.ndarray
    sample_ids: List[str]

    def __len__(self) -> int:
        return len(self.identities)

    def subset(self, indices) -> "PairArrays":
        indices = np.asarray(indices, dtype=np.int64)
        return PairArrays(
            self.color[indices],
            self.depth[indices],
            self.identities[indices],
            [self.sample_ids[i] for i in indices],
        )

    def normalized_color(self, stats: ChannelStats) -> np.ndarray:
        return normalize_batch(self.color, stats)

    def normalized_depth(self, stats: ChannelStats) -> np.ndarray:
        return normalize_batch(self.depth, stats)


def load_pairs(manifest_path, split: Optional[str] = None) -> PairArrays:
    manifest_path = Path(manifest_path)
    records = io.read_manifest(manifest_path, split=split)
    colors, depths, identities, sample_ids = [], [], [], []
    for record in records:
        colors.append(io.read_color_png(io.resolve(manifest_path, record["color_path"])) / 255.0)
        depths.append(io.read_depth_png(io.resolve(manifest_path, record["depth_path"])).values[..., np.newaxis])
        identities.append(record["identity"])
        sample_ids.append(f"{record['identity']}:{record.get('sample', len(sample_ids))}")
    if not records:
        return PairArrays(np.zeros((0, 0, 0, 3)), np.zeros((0, 0, 0, 1)), np.zeros(0, np.int64), [])
    return PairArrays(
        np.stack(colors), np.stack(depths), np.asarray(identities, dtype=np.int64), sample_ids
    )


class FacePairDataset(Dataset):
    """Normalized colour condition, [0, 1] depth target and identity of each pair."""

    def __init__(self, pairs: PairArrays, color_stats: ChannelStats):
        self.color = to_tensor(pairs.normalized_color(color_stats))
        self.depth = to_tensor(pairs.depth)
        self.identities = torch.as_tensor(pairs.identities)

    def __len__(self) -> int:
        return len(self.identities)

    def __getitem__(self, index: int):
        return self.color[index], self.depth[index], self.identities[index]


def seeded_loader(
    dataset: Dataset,
    batch_size: int,
    seed: int,
    shuffle: bool = True,
    workers: int = 0,
) -> DataLoader:
    """Shuffled loader whose delivery order is a pure function of ``seed``."""
    generator = torch.Generator()
    generator.manual_seed(seed)
    options = {"num_workers": workers}
    if workers:
        options["prefetch_factor"] = 2
    return DataLoader(
        dataset,
        batch_size=batch_size,
        shuffle=shuffle,
        generator=generator,
        drop_last=False,
        **options,
    )
