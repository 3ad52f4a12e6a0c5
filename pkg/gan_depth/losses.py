import math
from typing import Tuple

import attrs
import torch
import torch.nn.functional as F

from depth_hfr.exceptions import ShapeError


@attrs.frozen
class GanLossReport:
    loss_D: float
    loss_G_adv: float
    loss_G_L1: float
    eta: float

    @property
    def loss_G_total(self) -> float:
        return self.loss_G_adv + self.eta * self.loss_G_L1

    def is_finite(self) -> bool:
        values = (self.loss_D, self.loss_G_adv, self.loss_G_L1, self.loss_G_total)
        return all(math.isfinite(v) for v in values)

    def as_dict(self) -> dict:
        return {
            "loss_D": self.loss_D,
            "loss_G_adv": self.loss_G_adv,
            "loss_G_L1": self.loss_G_L1,
            "loss_G_total": self.loss_G_total,
        }


def loss_discriminator(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    # -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x)
    return F.softplus(-d_real).mean() + F.softplus(d_fake).mean()


def loss_generator_adversarial(d_fake: torch.Tensor) -> torch.Tensor:
    """Non-saturating generator loss -log sigmoid(d_fake)."""
    return F.softplus(-d_fake).mean()


def loss_adversarial(d_real: torch.Tensor, d_fake: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    return loss_discriminator(d_real, d_fake), loss_generator_adversarial(d_fake)


def loss_l1(generated: torch.Tensor, ground_truth: torch.Tensor) -> torch.Tensor:
    if generated.shape != ground_truth.shape:
        raise ShapeError(
            f"L1 needs equal shapes, got {tuple(generated.shape)} and {tuple(ground_truth.shape)}"
        )
    return (generated - ground_truth).abs().mean()
