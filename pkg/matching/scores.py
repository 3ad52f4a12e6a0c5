from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from depth_hfr.exceptions import (
    AlignmentError,
    ContractError,
    DegenerateScoresError,
    InvalidInputError,
    ShapeError,
    UndefinedScoreError,
)
from matching.types import Modality, ScoreMatrix

NORMALIZATIONS = ("minmax", "zscore")


def cosine_score(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, dtype=np.float64).ravel(), np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"Cosine needs equal lengths, got {a.size} and {b.size}")
    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        raise UndefinedScoreError("Cosine similarity of a zero vector is undefined")
    return float(np.clip(a @ b / (norm_a * norm_b), -1.0, 1.0))


def _unit_rows(features: np.ndarray, side: str) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError(f"{side} features must be rows x dim, got shape {features.shape}")
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    if (norms == 0).any():
        raise UndefinedScoreError(f"{side} features contain a zero vector")
    return features / norms


def cosine_matrix(
    probe: np.ndarray,
    gallery: np.ndarray,
    probe_ids: Sequence,
    gallery_ids: Sequence,
    modality,
    workers: int = 1,
    rows_per_task: int = 256,
) -> ScoreMatrix:
    """Row-parallel cosine scores; the result does not depend on task completion order."""
    probe, gallery = _unit_rows(probe, "Probe"), _unit_rows(gallery, "Gallery")
    if probe.shape[1] != gallery.shape[1]:
        raise ShapeError(f"Probe dim {probe.shape[1]} differs from gallery dim {gallery.shape[1]}")
    starts = range(0, len(probe), rows_per_task)

    def score_rows(start: int) -> np.ndarray:
        return probe[start : start + rows_per_task] @ gallery.T

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        blocks = list(pool.map(score_rows, starts))
    values = np.vstack(blocks) if blocks else np.zeros((0, len(gallery)))
    return ScoreMatrix(np.clip(values, -1.0, 1.0), probe_ids, gallery_ids, modality)


def normalize_scores(matrix: ScoreMatrix, method: str = "minmax") -> ScoreMatrix:
    """Map scores to [0, 1].

    ``minmax`` uses the min and max of the whole matrix. ``zscore``
    standardizes each row first, then applies the same whole-matrix min-max.
    """
    if matrix.normalized:
        raise ContractError("Score matrix is already normalized")
    if method not in NORMALIZATIONS:
        raise InvalidInputError(f"Unknown normalization '{method}', use one of {NORMALIZATIONS}")
    values = matrix.values
    if method == "zscore":
        std = values.std(axis=1, keepdims=True)
        values = (values - values.mean(axis=1, keepdims=True)) / np.where(std > 0, std, 1.0)
    if not values.size or values.max() <= values.min():
        raise DegenerateScoresError("Cannot normalize a constant score matrix")
    low, high = values.min(), values.max()
    return matrix.replace(np.clip((values - low) / (high - low), 0.0, 1.0), normalized=True)


def fuse(matrices: Sequence[ScoreMatrix]) -> ScoreMatrix:
    """Sum rule over normalized matrices sharing probe and gallery ids."""
    if not matrices:
        raise ContractError("Nothing to fuse")
    first = matrices[0]
    for matrix in matrices:
        if not matrix.normalized:
            raise ContractError(f"{matrix.modality.value} scores must be normalized before fusion")
        if matrix.probe_ids != first.probe_ids or matrix.gallery_ids != first.gallery_ids:
            raise AlignmentError("Fused score matrices must share probe and gallery ids")
    values = np.zeros_like(first.values)
    for matrix in matrices:
        values = values + matrix.values
    return first.replace(values, normalized=False, modality=Modality.FUSION)
