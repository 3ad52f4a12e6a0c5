import math
from typing import NamedTuple, Tuple

import numpy as np
from scipy import ndimage

from range_pipeline.types import GridSpec, LandmarkSet, PointCloud, RangeImage
from synth_data.faces import albedo_map, canonical_anchors, height_field, shape_dict
from synth_data.types import CaptureParams, IdentityParams

IMAGE_SIZE = 128
# face units -> pixels at capture scale 1 (puts the eyes ~50 px apart)
PIXELS_PER_UNIT = 0.55 * IMAGE_SIZE
# depth written to the range image is height / MAX_HEIGHT
MAX_HEIGHT = 1.6


class RenderedPair(NamedTuple):
    color: np.ndarray
    depth: RangeImage
    landmarks: LandmarkSet
    label: int


def _pixel_scale(capture: CaptureParams, size: int) -> float:
    return PIXELS_PER_UNIT * size / IMAGE_SIZE * capture.scale


def _centre(capture: CaptureParams, size: int) -> Tuple[float, float]:
    return (size - 1) / 2.0 + capture.offset[0], (size - 1) / 2.0 + capture.offset[1]


def face_coordinates(capture: CaptureParams, size: int = IMAGE_SIZE) -> Tuple[np.ndarray, np.ndarray]:
    """Face-unit (u, v) of every pixel centre."""
    cx, cy = _centre(capture, size)
    scale = _pixel_scale(capture, size)
    cols, rows = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64))
    dx, dy = cols - cx, rows - cy
    cos, sin = math.cos(capture.roll), math.sin(capture.roll)
    return (cos * dx + sin * dy) / scale, (-sin * dx + cos * dy) / scale


def project_anchors(anchors, capture: CaptureParams, size: int = IMAGE_SIZE) -> np.ndarray:
    cx, cy = _centre(capture, size)
    scale = _pixel_scale(capture, size)
    points = np.asarray(anchors, dtype=np.float64)
    cos, sin = math.cos(capture.roll), math.sin(capture.roll)
    x = cos * points[:, 0] - sin * points[:, 1]
    y = sin * points[:, 0] + cos * points[:, 1]
    return np.column_stack([cx + scale * x, cy + scale * y])


def surface_normals(depth_values: np.ndarray, pixel_scale: float) -> np.ndarray:
    """Unit normals (x right, y down, z toward the camera) of a depth map."""
    z = depth_values * MAX_HEIGHT * pixel_scale
    dz_dy, dz_dx = np.gradient(z)
    normals = np.stack([-dz_dx, -dz_dy, np.ones_like(z)], axis=-1)
    return normals / np.linalg.norm(normals, axis=-1, keepdims=True)


def lambertian(albedo: np.ndarray, normals: np.ndarray, capture: CaptureParams) -> np.ndarray:
    shading = np.clip(normals @ np.asarray(capture.light_direction), 0.0, None)
    return albedo * capture.light_intensity * shading[..., np.newaxis]


def render_depth(identity: IdentityParams, capture: CaptureParams, size: int = IMAGE_SIZE) -> RangeImage:
    u, v = face_coordinates(capture, size)
    height = height_field(identity, u, v, capture.expression)
    values = np.clip(height / MAX_HEIGHT, 0.0, 1.0)
    return RangeImage(values, values > 0.0)


def render_pair(
    identity: IdentityParams,
    capture: CaptureParams,
    label: int = 0,
    size: int = IMAGE_SIZE,
) -> RenderedPair:
    """Depth = height field of the surface, colour = Lambertian shading of the same surface."""
    depth = render_depth(identity, capture, size)
    u, v = face_coordinates(capture, size)
    albedo = albedo_map(identity, u, v, capture.expression)
    color = lambertian(albedo, surface_normals(depth.values, _pixel_scale(capture, size)), capture)
    if capture.noise_level > 0:
        rng = np.random.default_rng(capture.noise_seed)
        color = color + rng.normal(0.0, capture.noise_level, size=color.shape)
    color = np.clip(np.rint(np.clip(color, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)

    anchors = canonical_anchors(shape_dict(identity), capture.expression)
    landmarks = LandmarkSet(project_anchors(anchors, capture, size))
    return RenderedPair(color, depth, landmarks, label)


def punch_holes(depth: RangeImage, capture: CaptureParams) -> RangeImage:
    """Simulated acquisition dropouts: small blobs of missing depth."""
    if capture.hole_rate <= 0:
        return depth
    rng = np.random.default_rng(capture.noise_seed + 1)
    seeds = depth.mask & (rng.random(depth.shape) < capture.hole_rate / 9.0)
    holes = ndimage.binary_dilation(seeds, structure=np.ones((3, 3), dtype=bool))
    mask = depth.mask & ~holes
    return RangeImage(np.where(mask, depth.values, 0.0), mask)


def surface_point_cloud(
    rendered: RenderedPair,
    capture: CaptureParams,
    pitch_mm: float = 1.0,
    back_offset_mm: float = 20.0,
) -> Tuple[PointCloud, GridSpec]:
    """Scanner-like point cloud of a rendered pair plus the grid it projects back onto.

    Each observed pixel yields its surface point and an occluded point
    ``back_offset_mm`` behind it, so the Z-buffer has something to reject.
    """
    size = rendered.depth.shape[0]
    rows, cols = np.nonzero(rendered.depth.mask)
    x = (cols - (size - 1) / 2.0) * pitch_mm
    y = ((size - 1) / 2.0 - rows) * pitch_mm
    z = rendered.depth.values[rows, cols] * MAX_HEIGHT * _pixel_scale(capture, size) * pitch_mm
    front = np.column_stack([x, y, z])
    back = np.column_stack([x, y, z - back_offset_mm])
    colors = rendered.color[rows, cols]
    cloud = PointCloud(
        np.concatenate([front, back]),
        np.concatenate([colors, np.zeros_like(colors)]),
    )
    grid = GridSpec(origin=(-size / 2.0 * pitch_mm, size / 2.0 * pitch_mm), pitch=pitch_mm, height=size, width=size)
    return cloud, grid
