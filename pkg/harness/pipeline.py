import logging
import time
from typing import Dict, Iterable, List, Optional

from django.db import transaction

from depth_hfr.exceptions import DependencyError, InvalidInputError
from depth_hfr.seeding import derive_seed
from harness.config import ExperimentConfig, save_config
from harness.models import STAGES, RunRecord, StageEntry
from harness.stages import STAGE_FUNCTIONS
from harness.workspace import Workspace, artifact_id

logger = logging.getLogger(__name__)

DEPENDENCIES: Dict[str, tuple] = {
    "synth": (),
    "preprocess": ("synth",),
    "train_gan": ("preprocess",),
    "train_unimodal": ("preprocess",),
    "finetune": ("train_unimodal",),
    "train_crossmodal": ("train_unimodal", "finetune"),
    "evaluate": ("train_gan", "train_unimodal", "finetune", "train_crossmodal"),
}


def stage_order(stages: Optional[Iterable[str]] = None) -> List[str]:
    """Requested stages in dataflow order."""
    if stages is None:
        return list(STAGES)
    requested = set(stages)
    unknown = sorted(requested - set(STAGES))
    if unknown:
        raise InvalidInputError(f"Unknown stage(s) {unknown}, expected a subset of {STAGES}")
    return [stage for stage in STAGES if stage in requested]


def check_dependencies(order: List[str], ws: Workspace, config_hash: Optional[str] = None) -> None:
    """Every dependency is planned or has an intact marker written under ``config_hash``."""
    planned = set()
    for stage in order:
        missing = [
            dependency
            for dependency in DEPENDENCIES[stage]
            if dependency not in planned and ws.completed(dependency, config_hash) is None
        ]
        if missing:
            raise DependencyError(stage, missing)
        planned.add(stage)


def run_pipeline(
    config: ExperimentConfig, stages: Optional[Iterable[str]] = None, resume: bool = False
) -> RunRecord:
    """Run the requested stages in dependency order and append them to the ledger.

    With ``resume`` a stage whose marker carries this config hash and whose
    artifacts are intact is skipped.
    """
    order = stage_order(stages)
    ws = Workspace(config.out_dir)
    check_dependencies(order, ws, config.hash)
    ws.root.mkdir(parents=True, exist_ok=True)
    save_config(config, ws.root / "config.yaml")

    record = RunRecord.objects.create(
        config_hash=config.hash,
        seed=config.seed,
        config=config.as_dict(),
        out_dir=str(ws.root),
        requested_stages=order,
    )
    for stage in order:
        marker = ws.completed(stage, config.hash) if resume else None
        if marker is not None:
            logger.info("Stage %s already completed for config %s, skipping", stage, config.hash[:12])
            _append(record, stage, StageEntry.Outcomes.RESUMED, config.hash, marker["artifacts"], marker["metrics"], 0.0)
            continue

        logger.info("Running stage %s", stage)
        started = time.perf_counter()
        result = STAGE_FUNCTIONS[stage](config, ws, derive_seed(config.seed, stage))
        elapsed = time.perf_counter() - started
        artifacts = {str(path.relative_to(ws.root)): artifact_id(path) for path in result.artifacts}
        ws.write_marker(stage, config.hash, artifacts, result.metrics)
        _append(record, stage, StageEntry.Outcomes.COMPLETED, config.hash, artifacts, result.metrics, elapsed)
        logger.info("Stage %s finished in %.1fs: %s", stage, elapsed, result.metrics)
    return record


def _append(record, stage, outcome, config_hash, artifacts, metrics, elapsed) -> StageEntry:
    with transaction.atomic():
        return StageEntry.objects.create(
            run=record,
            stage=stage,
            outcome=outcome.value,
            config_hash=config_hash,
            artifact_ids=artifacts,
            metrics=metrics,
            wall_clock_seconds=elapsed,
        )
