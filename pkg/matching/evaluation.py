import csv
import json
from pathlib import Path
from typing import Optional

import numpy as np
from matplotlib.figure import Figure

from depth_hfr.exceptions import ProtocolError
from matching.types import ScoreMatrix


def correct_ranks(matrix: ScoreMatrix) -> np.ndarray:
    """1-based rank of the first gallery entry of each probe's identity.

    Galleries are ordered by descending score, ties by lowest gallery index.
    """
    gallery = np.asarray(matrix.gallery_ids, dtype=object)
    missing = sorted({str(pid) for pid in matrix.probe_ids} - {str(gid) for gid in gallery})
    if missing:
        raise ProtocolError(f"Probe identities absent from the gallery: {', '.join(missing)}")
    columns = np.arange(len(gallery))
    ranks = np.empty(len(matrix.probe_ids), dtype=np.int64)
    for row, probe_id in enumerate(matrix.probe_ids):
        order = np.lexsort((columns, -matrix.values[row]))
        ranks[row] = int(np.flatnonzero(gallery[order] == probe_id)[0]) + 1
    return ranks


def rank1_accuracy(matrix: ScoreMatrix) -> float:
    if not len(matrix.probe_ids):
        raise ProtocolError("No probes to evaluate")
    correct_ranks(matrix)
    best = np.argmax(matrix.values, axis=1)
    hits = [matrix.gallery_ids[column] == probe_id for column, probe_id in zip(best, matrix.probe_ids)]
    return float(np.mean(hits))


def cmc_curve(matrix: ScoreMatrix, max_rank: Optional[int] = None) -> np.ndarray:
    """Identification rate at ranks 1..max_rank (default: gallery size)."""
    ranks = correct_ranks(matrix)
    max_rank = max_rank or len(matrix.gallery_ids)
    return np.array([(ranks <= k).mean() for k in range(1, max_rank + 1)])


def write_cmc_csv(path, curves: dict, config_hash: str = "") -> Path:
    """One column per channel, one row per rank, after a ``# config_hash`` comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    depth = max((len(curve) for curve in curves.values()), default=0)
    with open(path, "w", newline="") as handle:
        if config_hash:
            handle.write(f"# config_hash: {config_hash}\n")
        writer = csv.writer(handle)
        writer.writerow(["rank", *curves])
        for k in range(depth):
            writer.writerow([k + 1, *(f"{curve[k]:.6f}" if k < len(curve) else "" for curve in curves.values())])
    return path


def plot_cmc(path, curves: dict, title: str = "", config_hash: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure = Figure(figsize=(5, 4))
    axes = figure.subplots()
    for name, curve in curves.items():
        axes.plot(np.arange(1, len(curve) + 1), curve, marker="o", label=name)
    axes.set_xlabel("Rank")
    axes.set_ylabel("Identification rate")
    axes.set_ylim(0, 1.02)
    axes.set_title(title)
    axes.legend(loc="lower right")
    metadata = None
    if config_hash:
        figure.text(0.99, 0.01, f"config {config_hash[:12]}", ha="right", va="bottom", fontsize=6)
        # PNG tEXt chunk
        metadata = {"config_hash": config_hash}
    figure.tight_layout()
    figure.savefig(path, dpi=120, metadata=metadata)
    return path


def dump_scores(directory, matrix: ScoreMatrix, config_hash: str = "") -> Path:
    """float32 little-endian values plus an id sidecar, named after the channel."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = matrix.modality.value.replace("/", "-").replace(".", "_").lower()
    path = directory / f"scores_{stem}.bin"
    path.write_bytes(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())
    sidecar = {
        "modality": matrix.modality.value,
        "normalized": matrix.normalized,
        "shape": list(matrix.shape),
        "dtype": "<f4",
        "probe_ids": [str(pid) for pid in matrix.probe_ids],
        "gallery_ids": [str(gid) for gid in matrix.gallery_ids],
        "config_hash": config_hash,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return path


def write_report(path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True))
    return path
