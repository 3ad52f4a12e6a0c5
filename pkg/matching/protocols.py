import json
from pathlib import Path
from typing import Tuple

import attrs
import jsonschema

from depth_hfr.exceptions import ProtocolError
from matching.types import Modality

PROTOCOL_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "gallery_modalities": {
            "type": "array",
            "items": {"enum": ["2D", "2.5D"]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "probe_modalities": {
            "type": "array",
            "items": {"enum": ["2D", "2.5D"]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "channels": {
            "type": "array",
            "items": {"enum": ["2D", "2.5D", "2D/2.5D"]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "probe_depth_source": {"enum": ["reconstructed"]},
    },
    "required": ["name", "gallery_modalities", "probe_modalities", "channels"],
    "additionalProperties": False,
}

# channel -> (gallery modality, probe modality) it compares
CHANNEL_SIDES = {
    Modality.COLOR: (Modality.COLOR, Modality.COLOR),
    Modality.DEPTH: (Modality.DEPTH, Modality.DEPTH),
    Modality.HETEROGENEOUS: (Modality.DEPTH, Modality.COLOR),
}


def _modalities(values) -> Tuple[Modality, ...]:
    return tuple(Modality(value) for value in values)


@attrs.frozen
class ProtocolConfig:
    """Gallery / probe modality structure of one evaluation protocol.

    A probe's 2.5D side is always the depth reconstructed from its colour image.
    """

    name: str
    gallery_modalities: Tuple[Modality, ...] = attrs.field(converter=_modalities)
    probe_modalities: Tuple[Modality, ...] = attrs.field(converter=_modalities)
    channels: Tuple[Modality, ...] = attrs.field(converter=_modalities)
    probe_depth_source: str = "reconstructed"

    def __attrs_post_init__(self) -> None:
        if not self.channels:
            raise ProtocolError(f"Protocol '{self.name}' enables no score channel")
        if self.probe_depth_source != "reconstructed":
            raise ProtocolError("Probe depth can only come from reconstruction")
        for channel in self.channels:
            if channel not in CHANNEL_SIDES:
                raise ProtocolError(f"'{channel.value}' is not a score channel")
            gallery_side, probe_side = CHANNEL_SIDES[channel]
            if gallery_side not in self.gallery_modalities or probe_side not in self.probe_modalities:
                raise ProtocolError(
                    f"Channel {channel.value} of protocol '{self.name}' needs {gallery_side.value} "
                    f"gallery and {probe_side.value} probe data"
                )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "gallery_modalities": [m.value for m in self.gallery_modalities],
            "probe_modalities": [m.value for m in self.probe_modalities],
            "channels": [m.value for m in self.channels],
            "probe_depth_source": self.probe_depth_source,
        }


BUILTIN_PROTOCOLS = {
    "huang": ProtocolConfig(
        name="huang",
        gallery_modalities=("2D", "2.5D"),
        probe_modalities=("2D", "2.5D"),
        channels=("2D", "2.5D", "2D/2.5D"),
    ),
    # depth-only gallery: no 2D-2D matching
    "wang": ProtocolConfig(
        name="wang",
        gallery_modalities=("2.5D",),
        probe_modalities=("2D", "2.5D"),
        channels=("2.5D", "2D/2.5D"),
    ),
    "jin": ProtocolConfig(
        name="jin",
        gallery_modalities=("2.5D",),
        probe_modalities=("2D", "2.5D"),
        channels=("2.5D", "2D/2.5D"),
    ),
}


def protocol_from_dict(payload: dict) -> ProtocolConfig:
    try:
        jsonschema.validate(payload, PROTOCOL_SCHEMA)
    except jsonschema.ValidationError as error:
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ProtocolError(f"Invalid protocol at {location}: {error.message}") from error
    return ProtocolConfig(**payload)


def load_protocol(name_or_path: str) -> ProtocolConfig:
    if name_or_path in BUILTIN_PROTOCOLS:
        return BUILTIN_PROTOCOLS[name_or_path]
    path = Path(name_or_path)
    if not path.is_file():
        raise ProtocolError(
            f"Unknown protocol '{name_or_path}': not one of {sorted(BUILTIN_PROTOCOLS)} nor a JSON file"
        )
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as error:
        raise ProtocolError(f"Protocol file '{path}' is not valid JSON: {error}") from error
    return protocol_from_dict(payload)
