"""Directory layout of one experiment under ``out_dir``.

    raw/            synthesized manifest, PNGs, landmarks (and clouds)
    data/           aligned 128x128 pairs, manifest.jsonl, channel_stats.json
    checkpoints/    gan.ckpt, color.ckpt, gray.ckpt, depth.ckpt, crossmodal.ckpt
    reports/        losses, evaluation report, CMC curve, score dumps
    stages/         <stage>.json completion markers (config hash + artifact ids)
"""

import hashlib
import json
from pathlib import Path
from typing import Dict, Optional

import attrs

from range_pipeline.preprocess import STATS_FILE


def artifact_id(path) -> str:
    """Git blob id: sha1 of b"blob <size>\\0" + content."""
    content = Path(path).read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(content) + content).hexdigest()


@attrs.frozen
class Workspace:
    root: Path = attrs.field(converter=Path)

    @property
    def raw_dir(self) -> Path:
        return self.root / "raw"

    @property
    def raw_manifest(self) -> Path:
        return self.raw_dir / "manifest.jsonl"

    @property
    def data_dir(self) -> Path:
        return self.root / "data"

    @property
    def manifest(self) -> Path:
        return self.data_dir / "manifest.jsonl"

    @property
    def stats_file(self) -> Path:
        return self.data_dir / STATS_FILE

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / "checkpoints"

    def checkpoint(self, name: str) -> Path:
        return self.checkpoints_dir / f"{name}.ckpt"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    def report(self, name: str) -> Path:
        return self.reports_dir / name

    def marker(self, stage: str) -> Path:
        return self.root / "stages" / f"{stage}.json"

    def write_marker(self, stage: str, config_hash: str, artifacts: Dict[str, str], metrics: dict) -> None:
        path = self.marker(stage)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "stage": stage,
            "config_hash": config_hash,
            "artifacts": artifacts,
            "metrics": metrics,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True))

    def read_marker(self, stage: str) -> Optional[dict]:
        path = self.marker(stage)
        if not path.is_file():
            return None
        return json.loads(path.read_text())

    def completed(self, stage: str, config_hash: Optional[str] = None) -> Optional[dict]:
        """The stage marker if every artifact it lists still matches its recorded id."""
        marker = self.read_marker(stage)
        if marker is None or (config_hash is not None and marker["config_hash"] != config_hash):
            return None
        for relative, recorded in marker["artifacts"].items():
            path = self.root / relative
            if not path.is_file() or artifact_id(path) != recorded:
                return None
        return marker
