import copy
import logging
import math
from typing import List, Optional

import attrs
import torch
import torch.nn.functional as F
from torch.utils.data import TensorDataset

from depth_hfr.checkpoints import Checkpoint
from depth_hfr.exceptions import InvalidInputError, ShapeError, TrainingDivergedError
from depth_hfr.seeding import derive_seed
from range_pipeline.datasets import seeded_loader
from range_pipeline.types import ChannelStats
from unimodal_cnn.networks import CcpNetwork, load_ccp_network
from unimodal_cnn.schedule import TrainSchedule

logger = logging.getLogger(__name__)


@attrs.define
class TrainingResult:
    network: CcpNetwork
    history: List[dict]
    best_epoch: int
    best_accuracy: float


def check_inputs(net: CcpNetwork, images: torch.Tensor, labels: Optional[torch.Tensor] = None) -> None:
    expected = (net.in_channels, net.input_size, net.input_size)
    if images.dim() != 4 or tuple(images.shape[1:]) != expected:
        raise ShapeError(f"Network expects N x {expected} images, got {tuple(images.shape)}")
    if labels is None:
        return
    if len(labels) != len(images):
        raise ShapeError(f"{len(images)} images but {len(labels)} labels")
    if len(labels) and (int(labels.min()) < 0 or int(labels.max()) >= net.num_classes):
        raise InvalidInputError(f"Labels must lie in [0, {net.num_classes})")


@torch.no_grad()
def top1_accuracy(net: CcpNetwork, images: torch.Tensor, labels: torch.Tensor, batch_size: int = 64) -> float:
    if not len(labels):
        return 0.0
    net.eval()
    correct = 0
    for start in range(0, len(images), batch_size):
        logits = net(images[start : start + batch_size])
        correct += int((logits.argmax(dim=1) == labels[start : start + batch_size]).sum())
    return correct / len(labels)


def apply_schedule(optimizer: torch.optim.Optimizer, schedule: TrainSchedule, epoch: int) -> None:
    for group in optimizer.param_groups:
        group["lr"] = schedule.learning_rate_at(epoch)
        group["momentum"] = schedule.momentum_at(epoch)


def train_unimodal(
    net: CcpNetwork,
    images: torch.Tensor,
    labels: torch.Tensor,
    schedule: TrainSchedule,
    val_images: Optional[torch.Tensor] = None,
    val_labels: Optional[torch.Tensor] = None,
    seed: int = 0,
) -> TrainingResult:
    """Softmax cross-entropy with SGD + momentum; keeps the best-validation weights.

    Without a validation set the training accuracy picks the epoch kept.
    """
    check_inputs(net, images, labels)
    if not len(labels):
        raise InvalidInputError("Training set is empty")
    has_val = val_images is not None and val_labels is not None and len(val_labels) > 0
    if has_val:
        check_inputs(net, val_images, val_labels)

    optimizer = torch.optim.SGD(
        net.parameters(), lr=schedule.learning_rate_at(0), momentum=schedule.momentum_at(0)
    )
    loader = seeded_loader(TensorDataset(images, labels), schedule.batch_size, seed)
    history: List[dict] = []
    best_state, best_epoch, best_accuracy = None, -1, -1.0

    for epoch in range(schedule.epochs):
        apply_schedule(optimizer, schedule, epoch)
        net.train()
        total, seen = 0.0, 0
        for batch, target in loader:
            loss = F.cross_entropy(net(batch), target)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    "Unimodal training diverged: cross-entropy is not finite",
                    {"epoch": epoch, "loss": float(loss), "learning_rate": schedule.learning_rate_at(epoch)},
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            total += float(loss) * len(target)
            seen += len(target)
        net.trained_epochs += 1

        row = {
            "epoch": epoch,
            "learning_rate": schedule.learning_rate_at(epoch),
            "momentum": schedule.momentum_at(epoch),
            "loss": total / seen,
            "train_accuracy": top1_accuracy(net, images, labels),
        }
        if has_val:
            row["val_accuracy"] = top1_accuracy(net, val_images, val_labels)
        accuracy = row["val_accuracy"] if has_val else row["train_accuracy"]
        if accuracy > best_accuracy:
            best_state, best_epoch, best_accuracy = copy.deepcopy(net.state_dict()), epoch, accuracy
        history.append(row)
        logger.info(
            "ccp epoch %d: lr=%g momentum=%.1f loss=%.4f accuracy=%.4f",
            epoch, row["learning_rate"], row["momentum"], row["loss"], accuracy,
        )

    if best_state is not None:
        net.load_state_dict(best_state)
    net.eval()
    return TrainingResult(net, history, best_epoch, max(best_accuracy, 0.0))


def finetune(
    pretrained: CcpNetwork,
    images: torch.Tensor,
    labels: torch.Tensor,
    schedule: TrainSchedule,
    num_classes: int,
    val_images: Optional[torch.Tensor] = None,
    val_labels: Optional[torch.Tensor] = None,
    seed: int = 0,
) -> TrainingResult:
    """Copy a single-channel network, give it a fresh head, train every layer."""
    if pretrained.in_channels != 1 or images.dim() != 4 or images.shape[1] != 1:
        raise InvalidInputError(
            f"Fine-tuning needs a 1-channel network and 1-channel images, got "
            f"{pretrained.in_channels} and {tuple(images.shape)}"
        )
    net = copy.deepcopy(pretrained)
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, "head"))
    net.replace_head(num_classes, generator)
    return train_unimodal(net, images, labels, schedule, val_images, val_labels, seed)


def network_checkpoint(
    net: CcpNetwork,
    stats: ChannelStats,
    modality: str,
    seed: int,
    config_hash: str,
    history: Optional[List[dict]] = None,
) -> Checkpoint:
    return Checkpoint(
        kind="ccp",
        architecture={"network": dict(net.config)},
        state={"network": net.state_dict()},
        stats={"input": list(stats.mean)},
        meta={
            "modality": modality,
            "epoch": int(net.trained_epochs),
            "seed": seed,
            "config_hash": config_hash,
            "history": [
                {key: value for key, value in row.items() if isinstance(value, (int, float)) and math.isfinite(value)}
                for row in history or []
            ],
        },
    )


def network_from_checkpoint(checkpoint: Checkpoint) -> CcpNetwork:
    return load_ccp_network(checkpoint.architecture["network"], checkpoint.state["network"])
