import json
from pathlib import Path
from typing import Iterable, Iterator, List, Mapping, Union

import jsonschema
import numpy as np
from PIL import Image

from depth_hfr.exceptions import InvalidInputError
from range_pipeline.types import NUM_LANDMARKS, LandmarkSet, PointCloud, RangeImage

PathLike = Union[str, Path]

DEPTH_SCALE = 65535

MANIFEST_RECORD_SCHEMA = {
    "type": "object",
    "required": ["identity", "split", "landmarks_path"],
    "properties": {
        "color_path": {"type": "string"},
        "depth_path": {"type": "string"},
        "cloud_path": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["origin", "pitch", "height", "width"],
            "properties": {
                "origin": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "pitch": {"type": "number", "exclusiveMinimum": 0},
                "height": {"type": "integer", "minimum": 1},
                "width": {"type": "integer", "minimum": 1},
            },
        },
        "landmarks_path": {"type": "string"},
        "identity": {"type": "integer", "minimum": 0},
        "sample": {"type": "integer", "minimum": 0},
        "split": {"enum": ["train", "val", "test"]},
        "capture": {"type": "object"},
    },
    "anyOf": [
        {"required": ["color_path", "depth_path"]},
        {"required": ["cloud_path", "grid"]},
    ],
}


def write_color_png(path: PathLike, color: np.ndarray) -> None:
    color = np.asarray(color)
    if color.dtype != np.uint8:
        color = np.clip(np.rint(color * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(color).save(Path(path))


def read_color_png(path: PathLike) -> np.ndarray:
    with Image.open(Path(path)) as image:
        return np.asarray(image.convert("RGB"), dtype=np.uint8)


def encode_depth(img: RangeImage) -> np.ndarray:
    # 0 is reserved for "unobserved", so observed pixels are stored as >= 1
    encoded = np.rint(img.values * DEPTH_SCALE).astype(np.uint16)
    encoded[img.mask & (encoded == 0)] = 1
    encoded[~img.mask] = 0
    return encoded


def decode_depth(encoded: np.ndarray) -> RangeImage:
    encoded = np.asarray(encoded).astype(np.float64)
    mask = encoded > 0
    return RangeImage(np.where(mask, encoded / DEPTH_SCALE, 0.0), mask)


def write_depth_png(path: PathLike, img: RangeImage) -> None:
    Image.fromarray(encode_depth(img)).save(Path(path))


def read_depth_png(path: PathLike) -> RangeImage:
    with Image.open(Path(path)) as image:
        return decode_depth(np.asarray(image))


def write_landmarks(path: PathLike, lm: LandmarkSet) -> None:
    lines = [f"{x!r} {y!r}" for x, y in lm.points.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_landmarks(path: PathLike) -> LandmarkSet:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    if len(rows) != NUM_LANDMARKS or any(len(row) != 2 for row in rows):
        raise InvalidInputError(
            f"Landmark file '{path}' must hold {NUM_LANDMARKS} lines of 'x y'"
        )
    return LandmarkSet(np.asarray(rows, dtype=np.float64))


def write_point_cloud(path: PathLike, cloud: PointCloud) -> None:
    arrays = {"points": cloud.points}
    if cloud.colors is not None:
        arrays["colors"] = cloud.colors
    with open(Path(path), "wb") as handle:
        np.savez(handle, **arrays)


def read_point_cloud(path: PathLike) -> PointCloud:
    with np.load(Path(path)) as archive:
        colors = archive["colors"] if "colors" in archive.files else None
        return PointCloud(archive["points"], colors)


def write_manifest(path: PathLike, records: Iterable[Mapping]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for record in records:
        jsonschema.validate(record, MANIFEST_RECORD_SCHEMA)
        lines.append(json.dumps(record, sort_keys=True))
    path.write_text("\n".join(lines) + "\n")
    return path


def iter_manifest(path: PathLike) -> Iterator[dict]:
    path = Path(path)
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        try:
            jsonschema.validate(record, MANIFEST_RECORD_SCHEMA)
        except jsonschema.ValidationError as error:
            raise InvalidInputError(f"{path}:{number}: {error.message}") from error
        yield record


def read_manifest(path: PathLike, split: str = None) -> List[dict]:
    return [
        record
        for record in iter_manifest(path)
        if split is None or record["split"] == split
    ]


def resolve(manifest_path: PathLike, relative: str) -> Path:
    return Path(manifest_path).parent / relative
