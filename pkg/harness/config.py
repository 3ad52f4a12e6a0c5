import copy
import hashlib
import json
from pathlib import Path
from typing import Any, Dict

import attrs
import yaml
from django.conf import settings

from depth_hfr.exceptions import ConfigError
from harness.serializers import ExperimentSerializer, flatten_errors

SECTIONS = ("data", "gan", "unimodal", "crossmodal", "evaluation")


def config_hash(values: Dict[str, Any]) -> str:
    canonical = json.dumps(values, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@attrs.frozen(eq=False)
class ExperimentConfig:
    """A validated experiment configuration, every default filled in."""

    values: Dict[str, Any]

    def __eq__(self, other) -> bool:
        return isinstance(other, ExperimentConfig) and self.values == other.values

    @property
    def hash(self) -> str:
        return config_hash(self.values)

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def out_dir(self) -> Path:
        return Path(self.values["out_dir"] or settings.DEPTH_HFR_RUNS_DIR / self.hash[:12])

    def section(self, name: str) -> Dict[str, Any]:
        return copy.deepcopy(self.values[name])

    @property
    def data(self) -> Dict[str, Any]:
        return self.section("data")

    @property
    def gan(self) -> Dict[str, Any]:
        return self.section("gan")

    @property
    def unimodal(self) -> Dict[str, Any]:
        return self.section("unimodal")

    @property
    def crossmodal(self) -> Dict[str, Any]:
        return self.section("crossmodal")

    @property
    def evaluation(self) -> Dict[str, Any]:
        return self.section("evaluation")

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.values)

    def override(self, **changes: Any) -> "ExperimentConfig":
        """Re-validated copy; keys are top-level names or ``section.key``."""
        values = self.as_dict()
        for dotted, value in changes.items():
            if value is None:
                continue
            if "." in dotted:
                section, key = dotted.split(".", 1)
                values.setdefault(section, {})[key] = value
            else:
                values[dotted] = value
        return validate_config(values)


def validate_config(payload: Any) -> ExperimentConfig:
    serializer = ExperimentSerializer(data=payload if payload is not None else {})
    if not serializer.is_valid():
        raise ConfigError(sorted(flatten_errors(serializer.errors)))
    # plain dicts and lists, no OrderedDict / ReturnDict
    return ExperimentConfig(json.loads(json.dumps(serializer.validated_data)))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"{path}: file not found"])
    try:
        payload = yaml.safe_load(path.read_text())
    except yaml.YAMLError as error:
        raise ConfigError([f"{path}: {error}"]) from error
    return validate_config(payload)


def save_config(config: ExperimentConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".json":
        path.write_text(json.dumps(config.values, indent=2, sort_keys=True))
    else:
        path.write_text(yaml.safe_dump(config.values, sort_keys=True))
    return path


def default_config() -> ExperimentConfig:
    return validate_config({})
