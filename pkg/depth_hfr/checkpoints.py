"""Checkpoint archive shared by every trained model.

A checkpoint is a ``torch.save`` zip archive holding one dict:

    {
        "format": "depth-hfr-checkpoint/1",
        "kind": "gan" | "ccp" | "crossmodal",
        "architecture": {<constructor kwargs per network name>},
        "state": {<network name>: state_dict},
        "optimizers": {<optimizer name>: optimizer.state_dict()},
        "stats": {"color": [...], "depth": [...]},
        "meta": {"epoch": int, "seed": int, "config_hash": str, ...},
    }

Only tensors, numbers, strings, lists and dicts are stored, so the archive
loads with ``torch.load(weights_only=True)``.
"""

from pathlib import Path
from typing import Any, Dict, Union

import attrs
import torch

from depth_hfr.exceptions import InvalidInputError

FORMAT = "depth-hfr-checkpoint/1"


@attrs.define
class Checkpoint:
    kind: str
    architecture: Dict[str, Dict[str, Any]] = attrs.field(factory=dict)
    state: Dict[str, Dict[str, torch.Tensor]] = attrs.field(factory=dict)
    optimizers: Dict[str, Dict[str, Any]] = attrs.field(factory=dict)
    stats: Dict[str, list] = attrs.field(factory=dict)
    meta: Dict[str, Any] = attrs.field(factory=dict)

    @property
    def config_hash(self) -> str:
        return self.meta.get("config_hash", "")


def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"format": FORMAT, **attrs.asdict(checkpoint, recurse=False)}
    torch.save(payload, path)
    return path


def load_checkpoint(path: Union[str, Path], kind: str = None) -> Checkpoint:
    payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    if payload.get("format") != FORMAT:
        raise InvalidInputError(f"'{path}' is not a {FORMAT} archive")
    payload.pop("format")
    checkpoint = Checkpoint(**payload)
    if kind is not None and checkpoint.kind != kind:
        raise InvalidInputError(
            f"Checkpoint '{path}' holds a '{checkpoint.kind}' model, expected '{kind}'"
        )
    return checkpoint
