"""Parametric face surfaces: an ellipsoid with Gaussian features on top.

Coordinates are face units: u grows to the image right, v grows downwards,
the face centre is (0, 0) and the face spans roughly [-0.8, 0.8] x [-1, 1].
Every feature is placed in mirrored pairs so a neutral face is bilaterally
symmetric.
"""

import math
from typing import Iterable, List, Tuple

import numpy as np

from synth_data.types import ALBEDO_RANGE, DETAIL_BUMPS, SHAPE_RANGES, IdentityParams

EYE_RADII = (0.09, 0.035)


def _gauss(u, v, cu, cv, su, sv):
    return np.exp(-((u - cu) ** 2) / (2.0 * su**2) - ((v - cv) ** 2) / (2.0 * sv**2))


def _mirrored(u, v, cu, cv, su, sv):
    return _gauss(u, v, cu, cv, su, sv) + _gauss(u, v, -cu, cv, su, sv)


def _ellipse(cu: float, cv: float, ru: float, rv: float, angles: Iterable[float]) -> List[Tuple[float, float]]:
    return [(cu + ru * math.cos(a), cv - rv * math.sin(a)) for a in angles]


def _mirror(points: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    return [(-u, v) for u, v in points]


def canonical_anchors(shape: dict, expression: float = 0.0) -> List[Tuple[float, float]]:
    """68 landmark anchors in face units (iBUG ordering)."""
    a, b = shape["face_width"], shape["face_height"]
    ex, ey = shape["eye_spacing"], shape["eye_row"]

    top = ey + 0.05
    bottom = 0.85 * b
    jaw = [
        (-0.92 * a * math.cos(math.pi * t / 16), top + (bottom - top) * math.sin(math.pi * t / 16))
        for t in range(17)
    ]

    brow_row = ey - 0.12
    left_brow = [
        (-(ex + 0.17) + 0.085 * k, brow_row - 0.03 * math.sin(math.pi * k / 4)) for k in range(5)
    ]
    right_brow = _mirror(left_brow[::-1])

    nose_tip = ey + shape["nose_length"]
    bridge = [(0.0, ey + shape["nose_length"] * k / 3) for k in range(4)]
    nose_base = [((k - 2) * shape["nose_width"] / 4, nose_tip + 0.04) for k in range(5)]

    rx, ry = EYE_RADII
    eye_angles = [math.pi, 2 * math.pi / 3, math.pi / 3, 0.0, -math.pi / 3, -2 * math.pi / 3]
    left_eye = _ellipse(-ex, ey, rx, ry, eye_angles)
    # inner corner first on the image-right eye
    right_eye = _mirror([left_eye[i] for i in (3, 2, 1, 0, 5, 4)])

    mouth_rx = shape["mouth_width"] / 2 * (1.0 + 0.25 * expression)
    row = shape["mouth_row"]
    outer = _ellipse(0.0, row, mouth_rx, 0.05, [math.pi - k * math.pi / 6 for k in range(12)])
    inner = _ellipse(
        0.0, row, 0.7 * mouth_rx, 0.015 + 0.04 * expression, [math.pi - k * math.pi / 4 for k in range(8)]
    )
    return jaw + left_brow + right_brow + bridge + nose_base + left_eye + right_eye + outer + inner


def generate_identity(seed: int) -> IdentityParams:
    """Identity parameters, a pure function of ``seed``."""
    rng = np.random.default_rng(seed)
    shape = tuple(float(rng.uniform(low, high)) for _, low, high in SHAPE_RANGES)
    named = {name: value for (name, _, _), value in zip(SHAPE_RANGES, shape)}

    details = []
    for index in range(DETAIL_BUMPS):
        # three spatial scales, finer bumps are weaker
        sigma = (0.18, 0.09, 0.045)[index % 3]
        details.append(
            (
                float(rng.uniform(0.05, 0.55)),
                float(rng.uniform(-0.6, 0.7)),
                sigma,
                float(rng.uniform(-1.0, 1.0) * sigma * 0.5),
            )
        )
    albedo = tuple(float(value) for value in rng.uniform(*ALBEDO_RANGE, size=3))
    return IdentityParams(
        seed=seed,
        shape=shape,
        details=tuple(details),
        albedo=albedo,
        anchors=tuple(canonical_anchors(named)),
    )


def shape_dict(identity: IdentityParams) -> dict:
    return {name: identity.shape[i] for i, (name, _, _) in enumerate(SHAPE_RANGES)}


def height_field(identity: IdentityParams, u: np.ndarray, v: np.ndarray, expression: float = 0.0) -> np.ndarray:
    """Surface height (face units) on the (u, v) sample points; 0 off the face."""
    s = shape_dict(identity)
    ex, ey = s["eye_spacing"], s["eye_row"]

    inside = 1.0 - (u / s["face_width"]) ** 2 - (v / s["face_height"]) ** 2
    height = s["depth_scale"] * np.sqrt(np.clip(inside, 0.0, None))

    nose_centre = ey + 0.6 * s["nose_length"]
    height = height + s["nose_height"] * _gauss(
        u, v, 0.0, nose_centre, 0.35 * s["nose_width"], 0.5 * s["nose_length"]
    )
    height = height + s["brow_height"] * _mirrored(u, v, ex, ey - 0.12, 0.11, 0.04)
    height = height - 0.06 * _mirrored(u, v, ex, ey, 0.08, 0.05)
    height = height + (s["cheek_height"] + 0.05 * expression) * _mirrored(
        u, v, s["cheek_spacing"], 0.12, 0.14, 0.12
    )
    height = height + s["chin_height"] * _gauss(u, v, 0.0, 0.78 * s["face_height"], 0.14, 0.08)
    height = height + 0.04 * _gauss(u, v, 0.0, s["mouth_row"], s["mouth_width"] / 2, 0.04)
    height = height - 0.08 * expression * _gauss(u, v, 0.0, s["mouth_row"], 0.12, 0.03)

    for cu, cv, sigma, amplitude in identity.details:
        height = height + amplitude * _mirrored(u, v, cu, cv, sigma, sigma)

    return np.where(inside > 0.0, np.clip(height, 0.0, None), 0.0)


def albedo_map(identity: IdentityParams, u: np.ndarray, v: np.ndarray, expression: float = 0.0) -> np.ndarray:
    """Per-pixel RGB reflectance: skin tone, darker brows, redder lips, black background."""
    s = shape_dict(identity)
    ex, ey = s["eye_spacing"], s["eye_row"]
    inside = (1.0 - (u / s["face_width"]) ** 2 - (v / s["face_height"]) ** 2) > 0.0

    base = np.asarray(identity.albedo)
    albedo = np.broadcast_to(base, u.shape + (3,)).copy()
    brows = _mirrored(u, v, ex, ey - 0.12, 0.11, 0.025)[..., np.newaxis]
    albedo *= 1.0 - 0.6 * np.clip(brows, 0.0, 1.0)
    lips = _gauss(u, v, 0.0, s["mouth_row"], s["mouth_width"] / 2 * (1 + 0.25 * expression), 0.03)
    albedo *= 1.0 - 0.35 * lips[..., np.newaxis] * np.array([0.0, 1.0, 1.0])
    return albedo * inside[..., np.newaxis]
