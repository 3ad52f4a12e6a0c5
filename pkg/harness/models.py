from enum import Enum

from django.core.exceptions import ValidationError
from django.db import models

STAGES = (
    "synth",
    "preprocess",
    "train_gan",
    "train_unimodal",
    "finetune",
    "train_crossmodal",
    "evaluate",
)


class RunRecord(models.Model):
    config_hash = models.CharField(max_length=64, db_index=True)
    seed = models.BigIntegerField()
    config = models.JSONField()
    out_dir = models.CharField(max_length=1024)
    requested_stages = models.JSONField(blank=True, default=list)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ("id",)

    @property
    def metrics(self) -> dict:
        return {entry.stage: entry.metrics for entry in self.stages.all()}

    @property
    def artifact_ids(self) -> dict:
        return {entry.stage: entry.artifact_ids for entry in self.stages.all()}

    @property
    def wall_clock(self) -> dict:
        return {entry.stage: entry.wall_clock_seconds for entry in self.stages.all()}

    def __str__(self) -> str:
        return f"run {self.id} (config {self.config_hash[:12]}, seed {self.seed})"


class StageEntry(models.Model):
    """One completed (or resumed) stage of a run; rows are never updated."""

    class Outcomes(Enum):
        COMPLETED = "completed"
        RESUMED = "resumed"

        @classmethod
        def has_value(cls, value: str) -> bool:
            return value in cls._value2member_map_

    run = models.ForeignKey(RunRecord, on_delete=models.CASCADE, related_name="stages")
    stage = models.CharField(max_length=32)
    outcome = models.CharField(max_length=16, default=Outcomes.COMPLETED.value)
    config_hash = models.CharField(max_length=64)
    artifact_ids = models.JSONField(blank=True, default=dict)
    metrics = models.JSONField(blank=True, default=dict)
    wall_clock_seconds = models.FloatField(default=0.0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ("id",)

    def clean(self):
        if self.stage not in STAGES:
            raise ValidationError(f"Unknown stage '{self.stage}', expected one of {STAGES}")
        if not StageEntry.Outcomes.has_value(self.outcome):
            raise ValidationError(f"Unknown outcome '{self.outcome}'")
        if self.wall_clock_seconds < 0:
            raise ValidationError("Wall-clock time cannot be negative!")
        if not isinstance(self.artifact_ids, dict) or not isinstance(self.metrics, dict):
            raise ValidationError("Artifact ids and metrics must be objects")

    def save(self, force_insert=False, force_update=False, using=None, update_fields=None):
        if not self._state.adding:
            raise ValidationError("Stage entries are append-only and cannot be updated!")
        try:
            self.full_clean()
        except Exception as e:
            raise ValidationError(e)
        super().save(force_insert, force_update, using, update_fields)

    def __str__(self) -> str:
        return f"{self.stage} ({self.outcome}, run {self.run_id})"
