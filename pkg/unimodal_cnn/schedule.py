from typing import Optional

import attrs

from depth_hfr.exceptions import InvalidInputError


@attrs.frozen
class TrainSchedule:
    """Step-decayed learning rate with a one-time momentum switch.

    rate(e) = learning_rate / decay_factor ** (e // decay_period); a
    ``decay_period`` of None keeps the rate constant (fine-tuning).
    """

    learning_rate: float = 1.0
    decay_factor: float = 5.0
    decay_period: Optional[int] = 10
    momentum_start: float = 0.5
    momentum_final: float = 0.9
    momentum_switch_epoch: int = 10
    epochs: int = 40
    batch_size: int = 32

    def __attrs_post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise InvalidInputError(f"Learning rate must be positive, got {self.learning_rate}")
        if self.decay_factor <= 1:
            raise InvalidInputError(f"Decay factor must exceed 1, got {self.decay_factor}")
        if self.decay_period is not None and self.decay_period < 1:
            raise InvalidInputError(f"Decay period must be at least 1, got {self.decay_period}")
        if self.epochs < 0 or self.batch_size < 1:
            raise InvalidInputError("Epoch count must be >= 0 and batch size >= 1")
        if self.momentum_switch_epoch > self.epochs:
            raise InvalidInputError(
                f"Momentum switch epoch {self.momentum_switch_epoch} exceeds epoch count {self.epochs}"
            )
        for momentum in (self.momentum_start, self.momentum_final):
            if not 0 <= momentum < 1:
                raise InvalidInputError(f"Momentum must lie in [0, 1), got {momentum}")

    def learning_rate_at(self, epoch: int) -> float:
        if self.decay_period is None:
            return self.learning_rate
        return self.learning_rate / self.decay_factor ** (epoch // self.decay_period)

    def momentum_at(self, epoch: int) -> float:
        return self.momentum_start if epoch < self.momentum_switch_epoch else self.momentum_final

    @classmethod
    def finetuning(
        cls, learning_rate: float = 1e-3, epochs: int = 20, batch_size: int = 32, **momentum
    ) -> "TrainSchedule":
        momentum.setdefault("momentum_switch_epoch", min(10, epochs))
        return cls(
            learning_rate=learning_rate,
            decay_period=None,
            epochs=epochs,
            batch_size=batch_size,
            **momentum,
        )
