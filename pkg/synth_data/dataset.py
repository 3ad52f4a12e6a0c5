import logging
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from depth_hfr.exceptions import InvalidInputError
from depth_hfr.seeding import derive_seed
from range_pipeline import io
from synth_data.faces import generate_identity
from synth_data.render import punch_holes, render_pair, surface_point_cloud
from synth_data.types import CaptureParams

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


def split_counts(num_ids: int, fractions: Sequence[float]) -> Dict[str, int]:
    """Identities per split: floors plus largest remainders, every non-zero split gets >= 1."""
    if len(fractions) != len(SPLITS) or any(f < 0 for f in fractions):
        raise InvalidInputError("Split needs three non-negative train/val/test fractions")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidInputError(f"Split fractions must sum to 1, got {sum(fractions)}")

    exact = [f * num_ids for f in fractions]
    counts = [int(np.floor(value + 1e-9)) for value in exact]
    remainders = sorted(
        range(len(SPLITS)), key=lambda i: (-(exact[i] - counts[i]), i)
    )
    for i in remainders[: num_ids - sum(counts)]:
        counts[i] += 1

    for name, fraction, count in zip(SPLITS, fractions, counts):
        if fraction > 0 and count == 0:
            raise InvalidInputError(
                f"{num_ids} identities are too few for a non-empty '{name}' split"
            )
    return dict(zip(SPLITS, counts))


def identity_splits(num_ids: int, fractions: Sequence[float], seed: int) -> Dict[int, str]:
    counts = split_counts(num_ids, fractions)
    order = np.random.default_rng(derive_seed(seed, "split")).permutation(num_ids)
    assignment, start = {}, 0
    for name in SPLITS:
        for identity in order[start : start + counts[name]]:
            assignment[int(identity)] = name
        start += counts[name]
    return assignment


def sample_capture(seed: int, identity: int, sample: int, hole_rate: float = 0.0) -> CaptureParams:
    rng = np.random.default_rng(derive_seed(seed, "capture", identity, sample))
    direction = (rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.4), 1.0)
    return CaptureParams(
        light_direction=direction,
        light_intensity=float(rng.uniform(0.7, 1.3)),
        expression=float(rng.uniform(0.0, 1.0) if rng.random() < 0.5 else 0.0),
        noise_level=float(rng.uniform(0.0, 0.03)),
        scale=float(rng.uniform(0.92, 1.08)),
        offset=(float(rng.uniform(-4, 4)), float(rng.uniform(-4, 4))),
        roll_degrees=float(rng.uniform(-6, 6)),
        hole_rate=hole_rate,
        noise_seed=derive_seed(seed, "noise", identity, sample),
    )


def build_dataset(
    num_ids: int,
    samples_per_id: int,
    split: Sequence[float],
    seed: int,
    out_dir,
    hole_rate: float = 0.02,
    clouds: bool = False,
) -> Path:
    """Render every sample and write the raw manifest; a pure function of the arguments."""
    if num_ids < 1 or samples_per_id < 1:
        raise InvalidInputError("Need at least one identity and one sample per identity")
    assignment = identity_splits(num_ids, split, seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    records: List[dict] = []
    for identity in range(num_ids):
        params = generate_identity(derive_seed(seed, "identity", identity))
        for sample in range(samples_per_id):
            capture = sample_capture(seed, identity, sample, hole_rate)
            rendered = render_pair(params, capture, label=identity)
            stem = f"id{identity:04d}_s{sample:03d}"

            record = {
                "identity": identity,
                "sample": sample,
                "split": assignment[identity],
                "capture": capture.as_dict(),
                "landmarks_path": f"{stem}_landmarks.txt",
                "color_path": f"{stem}_color.png",
                "depth_path": f"{stem}_depth.png",
            }
            io.write_color_png(out_dir / record["color_path"], rendered.color)
            io.write_depth_png(out_dir / record["depth_path"], punch_holes(rendered.depth, capture))
            io.write_landmarks(out_dir / record["landmarks_path"], rendered.landmarks)
            if clouds:
                cloud, grid = surface_point_cloud(rendered, capture)
                record["cloud_path"] = f"{stem}_cloud.npz"
                record["grid"] = {
                    "origin": list(grid.origin),
                    "pitch": grid.pitch,
                    "height": grid.height,
                    "width": grid.width,
                }
                io.write_point_cloud(out_dir / record["cloud_path"], cloud)
            records.append(record)

    manifest = io.write_manifest(out_dir / "manifest.jsonl", records)
    logger.info(
        "Synthesized %d identities x %d samples into %s", num_ids, samples_per_id, out_dir
    )
    return manifest
