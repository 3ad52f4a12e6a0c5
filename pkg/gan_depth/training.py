import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional

import attrs
import torch
from torch.utils.data import DataLoader

from depth_hfr.checkpoints import Checkpoint
from depth_hfr.exceptions import InvalidInputError, TrainingDivergedError
from gan_depth.losses import (
    GanLossReport,
    loss_discriminator,
    loss_generator_adversarial,
    loss_l1,
)
from gan_depth.networks import DiscriminatorNet, GeneratorNet, build_discriminator, build_generator

logger = logging.getLogger(__name__)

OBJECTIVES = ("joint", "l1", "adversarial")
LOSS_CURVE_FIELDS = ("epoch", "loss_D", "loss_G_adv", "loss_G_L1")


@attrs.frozen
class GanSchedule:
    learning_rate: float = 1e-4
    eta: float = 500.0
    beta1_start: float = 0.5
    beta1_final: float = 0.9
    beta2: float = 0.999
    switch_epoch: int = 10
    d_optimizer: str = "adam"
    objective: str = "joint"

    def __attrs_post_init__(self) -> None:
        if self.learning_rate < 0 or self.eta < 0:
            raise InvalidInputError("Learning rate and eta must be non-negative")
        if self.d_optimizer not in ("adam", "sgd"):
            raise InvalidInputError(f"Unknown discriminator optimizer '{self.d_optimizer}'")
        if self.objective not in OBJECTIVES:
            raise InvalidInputError(f"Unknown objective '{self.objective}', use one of {OBJECTIVES}")

    def beta1(self, epoch: int) -> float:
        return self.beta1_start if epoch < self.switch_epoch else self.beta1_final


def generator_objective(
    gen: GeneratorNet,
    disc: DiscriminatorNet,
    color: torch.Tensor,
    depth: torch.Tensor,
    eta: float,
    objective: str = "joint",
    stochastic: Optional[bool] = None,
):
    """(total, adversarial, L1) generator losses; total = adv + eta * L1 for the joint objective."""
    fake = gen(color, stochastic=stochastic)
    adversarial = loss_generator_adversarial(disc(fake, color))
    l1 = loss_l1(fake, depth)
    if objective == "l1":
        total = eta * l1
    elif objective == "adversarial":
        total = adversarial
    else:
        total = adversarial + eta * l1
    return total, adversarial, l1


class GanTrainer:
    """Alternating D / G optimization of the conditional depth GAN.

    Not thread-safe: one caller at a time may drive ``train_step``.
    """

    def __init__(self, gen: GeneratorNet, disc: DiscriminatorNet, schedule: GanSchedule = GanSchedule()):
        self.gen = gen
        self.disc = disc
        self.schedule = schedule
        self.epoch = 0
        betas = (schedule.beta1(0), schedule.beta2)
        self.opt_g = torch.optim.Adam(gen.parameters(), lr=schedule.learning_rate, betas=betas)
        if schedule.d_optimizer == "adam":
            self.opt_d = torch.optim.Adam(disc.parameters(), lr=schedule.learning_rate, betas=betas)
        else:
            self.opt_d = torch.optim.SGD(
                disc.parameters(), lr=schedule.learning_rate, momentum=schedule.beta1(0)
            )

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch
        beta1 = self.schedule.beta1(epoch)
        for group in self.opt_g.param_groups:
            group["betas"] = (beta1, self.schedule.beta2)
        for group in self.opt_d.param_groups:
            if "betas" in group:
                group["betas"] = (beta1, self.schedule.beta2)
            else:
                group["momentum"] = beta1

    def train_step(self, color: torch.Tensor, depth: torch.Tensor) -> GanLossReport:
        if len(color) == 0:
            raise InvalidInputError("Training batch is empty")
        self.gen.train()
        self.disc.train()
        objective = self.schedule.objective

        fake = self.gen(color, stochastic=True)
        loss_d = loss_discriminator(self.disc(depth, color), self.disc(fake.detach(), color))
        self._guard("loss_D", loss_d)
        if objective != "l1":
            self.opt_d.zero_grad(set_to_none=True)
            loss_d.backward()
            self.opt_d.step()

        adversarial = loss_generator_adversarial(self.disc(fake, color))
        l1 = loss_l1(fake, depth)
        if objective == "l1":
            total = self.schedule.eta * l1
        elif objective == "adversarial":
            total = adversarial
        else:
            total = adversarial + self.schedule.eta * l1
        self._guard("loss_G_total", total, adversarial=adversarial, l1=l1)
        self.opt_g.zero_grad(set_to_none=True)
        total.backward()
        self.opt_g.step()

        return GanLossReport(
            loss_D=float(loss_d),
            loss_G_adv=float(adversarial),
            loss_G_L1=float(l1),
            eta=self.schedule.eta,
        )

    def _guard(self, name: str, value: torch.Tensor, **extra: torch.Tensor) -> None:
        if torch.isfinite(value):
            return
        report = {"epoch": self.epoch, name: float(value)}
        report.update({key: float(tensor) for key, tensor in extra.items()})
        raise TrainingDivergedError(f"GAN training diverged: {name} is not finite", report)

    def fit(
        self,
        loader: DataLoader,
        epochs: int,
        loss_curve: Optional[Path] = None,
        start_epoch: int = 0,
        config_hash: str = "",
    ) -> List[Dict[str, float]]:
        history = []
        for epoch in range(start_epoch, epochs):
            self.set_epoch(epoch)
            totals = {"loss_D": 0.0, "loss_G_adv": 0.0, "loss_G_L1": 0.0}
            batches = 0
            for color, depth, _ in loader:
                report = self.train_step(color, depth)
                for key in totals:
                    totals[key] += getattr(report, key)
                batches += 1
            row = {"epoch": epoch, **{key: value / max(batches, 1) for key, value in totals.items()}}
            history.append(row)
            logger.info(
                "gan epoch %d: loss_D=%.4f loss_G_adv=%.4f loss_G_L1=%.4f",
                epoch, row["loss_D"], row["loss_G_adv"], row["loss_G_L1"],
            )
            self.epoch = epoch + 1
        if loss_curve is not None:
            write_loss_curve(loss_curve, history, config_hash)
        return history

    def checkpoint(self, seed: int, config_hash: str, stats: Dict[str, list]) -> Checkpoint:
        return Checkpoint(
            kind="gan",
            architecture={"generator": self.gen.config, "discriminator": self.disc.config},
            state={"generator": self.gen.state_dict(), "discriminator": self.disc.state_dict()},
            optimizers={"generator": self.opt_g.state_dict(), "discriminator": self.opt_d.state_dict()},
            stats=stats,
            meta={
                "epoch": self.epoch,
                "seed": seed,
                "config_hash": config_hash,
                "schedule": attrs.asdict(self.schedule),
            },
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> "GanTrainer":
        gen = build_generator(checkpoint.architecture["generator"])
        disc = build_discriminator(checkpoint.architecture["discriminator"])
        gen.load_state_dict(checkpoint.state["generator"])
        disc.load_state_dict(checkpoint.state["discriminator"])
        trainer = cls(gen, disc, GanSchedule(**checkpoint.meta["schedule"]))
        trainer.opt_g.load_state_dict(checkpoint.optimizers["generator"])
        trainer.opt_d.load_state_dict(checkpoint.optimizers["discriminator"])
        trainer.epoch = checkpoint.meta["epoch"]
        return trainer


def load_generator(checkpoint: Checkpoint) -> GeneratorNet:
    gen = build_generator(checkpoint.architecture["generator"])
    gen.load_state_dict(checkpoint.state["generator"])
    gen.eval()
    return gen


def write_loss_curve(path, history: List[Dict[str, float]], config_hash: str = "") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        if config_hash:
            handle.write(f"# config_hash: {config_hash}\n")
        writer = csv.DictWriter(handle, fieldnames=LOSS_CURVE_FIELDS, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(history)
