from typing import Union

import attrs
import torch
import torch.nn.functional as F

from depth_hfr.exceptions import InvalidInputError, ShapeError

Scalar = Union[float, torch.Tensor]


@attrs.frozen
class HfrLossReport:
    """Softmax and correlation terms; ``total`` = softmax + weight * correlation.

    Terms may be live tensors (``total.backward()`` works) or plain floats.
    """

    softmax: Scalar
    correlation: Scalar
    weight: float

    @property
    def total(self) -> Scalar:
        return self.softmax + self.weight * self.correlation

    def as_dict(self) -> dict:
        return {
            "softmax": float(self.softmax),
            "correlation": float(self.correlation),
            "total": float(self.total),
        }


def correlation_loss(xm: torch.Tensor, ym: torch.Tensor) -> torch.Tensor:
    """Sum over the batch of squared distances between mapped features."""
    if xm.shape != ym.shape:
        raise ShapeError(f"Correlation loss needs equal shapes, got {tuple(xm.shape)} and {tuple(ym.shape)}")
    return ((xm - ym) ** 2).sum()


def joint_loss(
    x_feat: torch.Tensor,
    y_feat: torch.Tensor,
    labels: torch.Tensor,
    model,
    weight: float = 0.6,
) -> HfrLossReport:
    if weight < 0:
        raise InvalidInputError(f"Correlation weight must be >= 0, got {weight}")
    if len(labels) != len(x_feat):
        raise ShapeError(f"{len(x_feat)} feature rows but {len(labels)} labels")
    if len(labels) and (int(labels.min()) < 0 or int(labels.max()) >= model.num_classes):
        raise InvalidInputError(f"Labels must lie in [0, {model.num_classes})")
    xm, ym = model.map_color(x_feat), model.map_depth(y_feat)
    logits = model.classifier(model.shared(xm, ym))
    softmax = F.cross_entropy(logits, labels, reduction="sum")
    return HfrLossReport(softmax, correlation_loss(xm, ym), weight)
