from collections.abc import Mapping

from rest_framework import serializers
from rest_framework.exceptions import ValidationError

from gan_depth.training import OBJECTIVES as GAN_OBJECTIVES
from matching.protocols import BUILTIN_PROTOCOLS
from matching.scores import NORMALIZATIONS


def positive(value: float) -> None:
    if value <= 0:
        raise ValidationError("Ensure this value is greater than 0.")


def momentum_range(value: float) -> None:
    if not 0 <= value < 1:
        raise ValidationError("Ensure this value is in [0, 1).")


class StrictFloatField(serializers.FloatField):
    """Numbers only: "500" and True are type errors, not 500.0 and 1.0."""

    def to_internal_value(self, data):
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            self.fail("invalid")
        return super().to_internal_value(data)


class StrictIntegerField(serializers.IntegerField):
    def to_internal_value(self, data):
        if isinstance(data, bool) or not isinstance(data, int):
            self.fail("invalid")
        return super().to_internal_value(data)


class StrictBooleanField(serializers.BooleanField):
    def to_internal_value(self, data):
        if not isinstance(data, bool):
            self.fail("invalid", input=data)
        return data


class StrictCharField(serializers.CharField):
    def to_internal_value(self, data):
        if not isinstance(data, str):
            self.fail("invalid")
        return super().to_internal_value(data)


class StrictSerializer(serializers.Serializer):
    """Rejects unknown keys and fills absent nested sections with their defaults."""

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise ValidationError({key: ["Unknown key."] for key in unknown})
            data = dict(data)
            for name, field in self.fields.items():
                if isinstance(field, StrictSerializer) and name not in data:
                    data[name] = {}
        return super().to_internal_value(data)


class DataSerializer(StrictSerializer):
    num_ids = StrictIntegerField(min_value=2, default=20)
    samples_per_id = StrictIntegerField(min_value=2, default=10)
    split = serializers.ListField(
        child=StrictFloatField(min_value=0, max_value=1),
        min_length=3,
        max_length=3,
        default=lambda: [0.7, 0.1, 0.2],
    )
    hole_rate = StrictFloatField(min_value=0, max_value=0.5, default=0.02)
    clouds = StrictBooleanField(default=False)
    target_iod_px = StrictFloatField(default=50.0)
    eye_row = StrictFloatField(min_value=0, max_value=127, default=48.0)
    workers = StrictIntegerField(min_value=1, default=1)

    def validate_split(self, value):
        if abs(sum(value) - 1.0) > 1e-9:
            raise ValidationError("Train/val/test fractions must sum to 1.")
        return value

    def validate_target_iod_px(self, value):
        if not 0 < value < 128:
            raise ValidationError("Ensure this value is in (0, 128).")
        return value


class GanSerializer(StrictSerializer):
    learning_rate = StrictFloatField(default=1e-4, validators=[positive])
    eta = StrictFloatField(min_value=0, default=500.0)
    beta1_start = StrictFloatField(default=0.5, validators=[momentum_range])
    beta1_final = StrictFloatField(default=0.9, validators=[momentum_range])
    switch_epoch = StrictIntegerField(min_value=0, default=10)
    epochs = StrictIntegerField(min_value=0, default=30)
    batch_size = StrictIntegerField(min_value=1, default=16)
    d_optimizer = serializers.ChoiceField(choices=("adam", "sgd"), default="adam")
    objective = serializers.ChoiceField(choices=GAN_OBJECTIVES, default="joint")
    generator_widths = serializers.ListField(
        child=StrictIntegerField(min_value=1),
        min_length=2,
        max_length=7,
        default=lambda: [64, 128, 256, 512, 512, 512],
    )
    discriminator_widths = serializers.ListField(
        child=StrictIntegerField(min_value=1),
        min_length=1,
        default=lambda: [64, 128, 256, 512],
    )
    discriminator_strided = StrictIntegerField(min_value=0, default=3)
    workers = StrictIntegerField(min_value=0, default=0)

    def validate(self, attrs):
        if attrs["discriminator_strided"] > len(attrs["discriminator_widths"]):
            raise ValidationError(
                {"discriminator_strided": ["Cannot exceed the number of discriminator blocks."]}
            )
        return attrs


class UnimodalSerializer(StrictSerializer):
    learning_rate = StrictFloatField(default=1.0, validators=[positive])
    decay_factor = StrictFloatField(default=5.0)
    decay_period = StrictIntegerField(min_value=1, default=10)
    momentum_start = StrictFloatField(default=0.5, validators=[momentum_range])
    momentum_final = StrictFloatField(default=0.9, validators=[momentum_range])
    momentum_switch_epoch = StrictIntegerField(min_value=0, default=10)
    epochs = StrictIntegerField(min_value=0, default=40)
    batch_size = StrictIntegerField(min_value=1, default=32)
    width_scale = StrictFloatField(max_value=4.0, default=1.0, validators=[positive])
    finetune_learning_rate = StrictFloatField(default=1e-3, validators=[positive])
    finetune_epochs = StrictIntegerField(min_value=0, default=20)

    def validate_decay_factor(self, value):
        if value <= 1:
            raise ValidationError("Ensure this value is greater than 1.")
        return value

    def validate(self, attrs):
        if attrs["momentum_switch_epoch"] > attrs["epochs"]:
            raise ValidationError({"momentum_switch_epoch": ["Cannot exceed epochs."]})
        return attrs


class CrossmodalSerializer(StrictSerializer):
    correlation_weight = StrictFloatField(min_value=0, default=0.6)
    learning_rate = StrictFloatField(default=1e-3, validators=[positive])
    momentum = StrictFloatField(default=0.9, validators=[momentum_range])
    epochs = StrictIntegerField(min_value=0, default=30)
    batch_size = StrictIntegerField(min_value=1, default=32)
    freeze_streams = StrictBooleanField(default=False)
    init_noise = StrictFloatField(min_value=0, default=1e-3)


class EvaluationSerializer(StrictSerializer):
    protocol = StrictCharField(default="huang")
    normalization = serializers.ChoiceField(choices=NORMALIZATIONS, default="minmax")
    heterogeneous_features = serializers.ChoiceField(choices=("mapped", "hidden"), default="mapped")
    workers = StrictIntegerField(min_value=1, default=1)
    dump_scores = StrictBooleanField(default=True)

    def validate_protocol(self, value):
        if value not in BUILTIN_PROTOCOLS and not value.endswith(".json"):
            raise ValidationError(
                f"Use one of {sorted(BUILTIN_PROTOCOLS)} or a path to a .json protocol."
            )
        return value


class ExperimentSerializer(StrictSerializer):
    seed = StrictIntegerField(min_value=0, default=0)
    out_dir = StrictCharField(allow_blank=True, default="")
    data = DataSerializer(required=False)
    gan = GanSerializer(required=False)
    unimodal = UnimodalSerializer(required=False)
    crossmodal = CrossmodalSerializer(required=False)
    evaluation = EvaluationSerializer(required=False)


def flatten_errors(detail, prefix: str = ""):
    """DRF error detail -> ["gan.eta: Ensure ...", ...]."""
    if isinstance(detail, Mapping):
        for key, value in detail.items():
            yield from flatten_errors(value, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(detail, (list, tuple)):
        for item in detail:
            yield from flatten_errors(item, prefix)
    else:
        yield f"{prefix or '<root>'}: {detail}"
