import logging
from typing import List

import attrs
import torch
from torch.utils.data import TensorDataset

from depth_hfr.exceptions import (
    ContractError,
    DegenerateMappingError,
    InvalidInputError,
    ShapeError,
    TrainingDivergedError,
)
from crossmodal.losses import HfrLossReport, correlation_loss, joint_loss
from crossmodal.model import CrossModalModel
from range_pipeline.datasets import seeded_loader

logger = logging.getLogger(__name__)

COLLAPSE_NORM = 1e-6
OBJECTIVES = ("joint", "correlation")


@attrs.frozen
class CrossModalSchedule:
    learning_rate: float = 1e-3
    momentum: float = 0.9
    epochs: int = 30
    batch_size: int = 32
    correlation_weight: float = 0.6
    objective: str = "joint"
    freeze_streams: bool = False

    def __attrs_post_init__(self) -> None:
        if self.learning_rate <= 0 or self.epochs < 0 or self.batch_size < 1:
            raise InvalidInputError("Cross-modal schedule needs lr > 0, epochs >= 0, batch size >= 1")
        if self.correlation_weight < 0:
            raise InvalidInputError(f"Correlation weight must be >= 0, got {self.correlation_weight}")
        if self.objective not in OBJECTIVES:
            raise InvalidInputError(f"Unknown objective '{self.objective}', use one of {OBJECTIVES}")


def train_crossmodal(
    model: CrossModalModel,
    color_images: torch.Tensor,
    depth_images: torch.Tensor,
    labels: torch.Tensor,
    schedule: CrossModalSchedule = CrossModalSchedule(),
    seed: int = 0,
) -> List[dict]:
    """Minimize softmax + weight * correlation over paired images; returns per-epoch history.

    ``objective="correlation"`` drops the softmax term, which lets both maps
    shrink toward zero; a collapse below 1e-6 in both norms is an error.
    """
    if not (model.color_stream.is_trained and model.depth_stream.is_trained):
        raise ContractError("Cross-modal training needs pre-trained colour and depth streams")
    if not (len(color_images) == len(depth_images) == len(labels)) or not len(labels):
        raise ShapeError("Colour images, depth images and labels must be non-empty and paired")

    params = list(model.head_parameters())
    if not schedule.freeze_streams:
        params += list(model.stream_parameters())
    for param in model.stream_parameters():
        param.requires_grad_(not schedule.freeze_streams)
    optimizer = torch.optim.SGD(params, lr=schedule.learning_rate, momentum=schedule.momentum)
    loader = seeded_loader(TensorDataset(color_images, depth_images, labels), schedule.batch_size, seed)

    history: List[dict] = []
    for epoch in range(schedule.epochs):
        model.train()
        softmax_sum, correlation_sum = 0.0, 0.0
        for color, depth, target in loader:
            x_feat, y_feat = model.color_features(color), model.depth_features(depth)
            if schedule.objective == "correlation":
                report = HfrLossReport(
                    torch.zeros((), dtype=x_feat.dtype),
                    correlation_loss(model.map_color(x_feat), model.map_depth(y_feat)),
                    1.0,
                )
            else:
                report = joint_loss(x_feat, y_feat, target, model, schedule.correlation_weight)
            total = report.total
            if not torch.isfinite(total):
                raise TrainingDivergedError(
                    "Cross-modal training diverged: L_hfr is not finite", {"epoch": epoch, **report.as_dict()}
                )
            optimizer.zero_grad(set_to_none=True)
            total.backward()
            optimizer.step()
            softmax_sum += float(report.softmax)
            correlation_sum += float(report.correlation)

        norm_x, norm_y = model.mapping_norms()
        row = {
            "epoch": epoch,
            "softmax": softmax_sum,
            "correlation": correlation_sum,
            "norm_x": norm_x,
            "norm_y": norm_y,
            "joint_norm": model.joint_mapping_norm(),
        }
        history.append(row)
        logger.info(
            "crossmodal epoch %d: softmax=%.4f correlation=%.4f |M_X|=%.4g |M_Y|=%.4g",
            epoch, softmax_sum, correlation_sum, norm_x, norm_y,
        )
        if norm_x < COLLAPSE_NORM and norm_y < COLLAPSE_NORM:
            raise DegenerateMappingError("Both mappings collapsed to zero", row)

    for param in model.stream_parameters():
        param.requires_grad_(True)
    model.eval()
    return history
