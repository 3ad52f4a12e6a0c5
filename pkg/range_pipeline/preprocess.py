import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from range_pipeline import io
from range_pipeline.alignment import DEFAULT_EYE_ROW, DEFAULT_IOD_PX, align_pair
from range_pipeline.holes import face_region_from_landmarks, fill_holes
from range_pipeline.normalization import compute_channel_stats
from range_pipeline.projection import project_texture, project_to_range
from range_pipeline.types import ChannelStats, GridSpec, LandmarkSet, RangeImage

logger = logging.getLogger(__name__)

STATS_FILE = "channel_stats.json"


def rescale_to_region(img: RangeImage, region: np.ndarray) -> RangeImage:
    """Affine depth rescale using the min/max of observed pixels inside ``region``."""
    window = img.mask & region
    if not window.any():
        return img
    low, high = img.values[window].min(), img.values[window].max()
    if high <= low:
        return RangeImage(np.zeros_like(img.values), img.mask)
    values = np.clip((img.values - low) / (high - low), 0.0, 1.0)
    return RangeImage(np.where(img.mask, values, 0.0), img.mask)


def load_raw_pair(manifest_path: Path, record: dict) -> Tuple[np.ndarray, RangeImage, LandmarkSet]:
    landmarks = io.read_landmarks(io.resolve(manifest_path, record["landmarks_path"]))
    if "cloud_path" in record:
        cloud = io.read_point_cloud(io.resolve(manifest_path, record["cloud_path"]))
        grid = GridSpec(
            origin=tuple(record["grid"]["origin"]),
            pitch=record["grid"]["pitch"],
            height=record["grid"]["height"],
            width=record["grid"]["width"],
        )
        depth = project_to_range(cloud, grid)
        color = project_texture(cloud, grid)
        if color is None:
            color = np.zeros(grid.shape + (3,), dtype=np.uint8)
        return color, depth, landmarks

    color = io.read_color_png(io.resolve(manifest_path, record["color_path"]))
    depth = io.read_depth_png(io.resolve(manifest_path, record["depth_path"]))
    return color, depth, landmarks


def preprocess_record(
    manifest_path: Path,
    record: dict,
    out_dir: Path,
    target_iod_px: float,
    eye_row: float,
) -> dict:
    color, depth, landmarks = load_raw_pair(manifest_path, record)
    color, depth, landmarks = align_pair(color, depth, landmarks, target_iod_px, eye_row)
    region = face_region_from_landmarks(landmarks, depth.shape)
    depth = rescale_to_region(fill_holes(depth, region), region)

    stem = f"id{record['identity']:04d}_s{record.get('sample', 0):03d}"
    io.write_color_png(out_dir / f"{stem}_color.png", color)
    io.write_depth_png(out_dir / f"{stem}_depth.png", depth)
    io.write_landmarks(out_dir / f"{stem}_landmarks.txt", landmarks)

    aligned = {
        key: value
        for key, value in record.items()
        if key not in ("cloud_path", "grid", "color_path", "depth_path", "landmarks_path")
    }
    aligned.update(
        color_path=f"{stem}_color.png",
        depth_path=f"{stem}_depth.png",
        landmarks_path=f"{stem}_landmarks.txt",
    )
    return aligned


def preprocess_manifest(
    manifest_path,
    out_dir,
    target_iod_px: float = DEFAULT_IOD_PX,
    eye_row: float = DEFAULT_EYE_ROW,
    workers: int = 1,
) -> Path:
    """Align, hole-fill and rescale every record; output order follows the input manifest."""
    manifest_path, out_dir = Path(manifest_path), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = io.read_manifest(manifest_path)

    def convert(record: dict) -> dict:
        return preprocess_record(manifest_path, record, out_dir, target_iod_px, eye_row)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        aligned = list(pool.map(convert, records))

    output = io.write_manifest(out_dir / "manifest.jsonl", aligned)
    save_channel_stats(out_dir / STATS_FILE, training_channel_stats(output))
    logger.info("Preprocessed %d record(s) into %s", len(aligned), out_dir)
    return output


def training_channel_stats(manifest_path) -> Dict[str, ChannelStats]:
    train = io.read_manifest(manifest_path, split="train")
    colors = (
        io.read_color_png(io.resolve(manifest_path, record["color_path"])) / 255.0
        for record in train
    )
    depths = (
        io.read_depth_png(io.resolve(manifest_path, record["depth_path"])).values
        for record in train
    )
    return {
        "color": compute_channel_stats(colors),
        "depth": compute_channel_stats(depths),
    }


def save_channel_stats(path, stats: Dict[str, ChannelStats]) -> None:
    payload = {name: list(value.mean) for name, value in stats.items()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def load_channel_stats(path) -> Dict[str, ChannelStats]:
    payload = json.loads(Path(path).read_text())
    return {name: ChannelStats(tuple(mean)) for name, mean in payload.items()}
