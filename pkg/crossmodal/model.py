from typing import Optional, Tuple

import torch
import torch.nn as nn

from depth_hfr.checkpoints import Checkpoint
from depth_hfr.exceptions import InvalidInputError
from unimodal_cnn.networks import CcpNetwork

INIT_NOISE = 1e-3


class CrossModalModel(nn.Module):
    """Colour and depth streams, square maps M_X / M_Y and a shared softmax head.

    Maps start at identity + N(0, init_noise^2) so a pre-trained feature
    geometry survives the first epochs.
    """

    def __init__(
        self,
        color_stream: CcpNetwork,
        depth_stream: CcpNetwork,
        num_classes: int,
        init_noise: float = INIT_NOISE,
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        if color_stream.feature_dim != depth_stream.feature_dim:
            raise InvalidInputError(
                f"Stream feature widths differ: {color_stream.feature_dim} vs {depth_stream.feature_dim}"
            )
        if num_classes < 2:
            raise InvalidInputError(f"Need at least two classes, got {num_classes}")
        dim = color_stream.feature_dim
        dtype = color_stream.classifier.weight.dtype
        self.color_stream = color_stream
        self.depth_stream = depth_stream
        self.feature_dim = dim
        self.init_noise = init_noise

        def initial_map() -> torch.Tensor:
            noise = torch.randn(dim, dim, generator=generator, dtype=dtype) * init_noise
            return torch.eye(dim, dtype=dtype) + noise

        self.map_x = nn.Parameter(initial_map())
        self.map_y = nn.Parameter(initial_map())
        self.classifier = nn.Linear(dim, num_classes).to(dtype)

    @property
    def num_classes(self) -> int:
        return self.classifier.out_features

    @property
    def config(self) -> dict:
        return {"num_classes": self.num_classes, "init_noise": self.init_noise}

    def color_features(self, images: torch.Tensor) -> torch.Tensor:
        return self.color_stream.features(images)

    def depth_features(self, images: torch.Tensor) -> torch.Tensor:
        return self.depth_stream.features(images)

    def map_color(self, x_feat: torch.Tensor) -> torch.Tensor:
        return x_feat @ self.map_x.T

    def map_depth(self, y_feat: torch.Tensor) -> torch.Tensor:
        return y_feat @ self.map_y.T

    def shared(self, xm: torch.Tensor, ym: torch.Tensor) -> torch.Tensor:
        return (xm + ym) / 2.0

    def logits(self, x_feat: torch.Tensor, y_feat: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.shared(self.map_color(x_feat), self.map_depth(y_feat)))

    def mapping_norms(self) -> Tuple[float, float]:
        return float(self.map_x.detach().norm()), float(self.map_y.detach().norm())

    def joint_mapping_norm(self) -> float:
        norm_x, norm_y = self.mapping_norms()
        return (norm_x**2 + norm_y**2) ** 0.5

    def stream_parameters(self):
        yield from self.color_stream.parameters()
        yield from self.depth_stream.parameters()

    def head_parameters(self):
        yield self.map_x
        yield self.map_y
        yield from self.classifier.parameters()


def crossmodal_checkpoint(model: CrossModalModel, stats: dict, meta: dict) -> Checkpoint:
    return Checkpoint(
        kind="crossmodal",
        architecture={
            "color_stream": dict(model.color_stream.config),
            "depth_stream": dict(model.depth_stream.config),
            "model": model.config,
        },
        state={"model": model.state_dict()},
        stats=stats,
        meta=meta,
    )


def crossmodal_from_checkpoint(checkpoint: Checkpoint) -> CrossModalModel:
    architecture = checkpoint.architecture
    model = CrossModalModel(
        CcpNetwork(**architecture["color_stream"]),
        CcpNetwork(**architecture["depth_stream"]),
        **architecture["model"],
    )
    model.load_state_dict(checkpoint.state["model"])
    model.eval()
    return model
