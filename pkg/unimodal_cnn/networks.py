from typing import Optional, Sequence

import torch
import torch.nn as nn

from depth_hfr.exceptions import InvalidInputError
from gan_depth.networks import make_activation

FEATURE_DIM = 4096
BASE_WIDTHS = (32, 64, 128, 256)
INPUT_SIZE = 128


def scaled_widths(width_scale: float, base: Sequence[int] = BASE_WIDTHS) -> tuple:
    if width_scale <= 0:
        raise InvalidInputError(f"Width scale must be positive, got {width_scale}")
    return tuple(max(1, int(round(width * width_scale))) for width in base)


def ccp_block(in_c: int, out_c: int, activation: str) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_c, out_c, 3, 1, 1),
        make_activation(activation),
        nn.Conv2d(out_c, out_c, 3, 1, 1),
        make_activation(activation),
        nn.MaxPool2d(2),
    )


class CcpNetwork(nn.Module):
    """Stacked conv-conv-pool blocks, a dense feature layer and a softmax head.

    ``features`` never touches ``classifier``, so the head can be swapped
    (fine-tuning to a new identity count) without moving the feature space.
    """

    def __init__(
        self,
        in_channels: int,
        num_classes: int,
        widths: Sequence[int] = BASE_WIDTHS,
        feature_dim: int = FEATURE_DIM,
        input_size: int = INPUT_SIZE,
        activation: str = "relu",
    ):
        super().__init__()
        widths = tuple(int(w) for w in widths)
        if not widths or min(widths) < 1:
            raise InvalidInputError("C-C-P widths must be positive")
        if input_size % 2 ** len(widths):
            raise InvalidInputError(f"Input size {input_size} is not divisible by 2^{len(widths)}")
        if num_classes < 2:
            raise InvalidInputError(f"Need at least two classes, got {num_classes}")
        self.config = {
            "in_channels": in_channels,
            "num_classes": num_classes,
            "widths": list(widths),
            "feature_dim": feature_dim,
            "input_size": input_size,
            "activation": activation,
        }
        self.in_channels = in_channels
        self.input_size = input_size
        self.feature_dim = feature_dim

        blocks, prev = [], in_channels
        for width in widths:
            blocks.append(ccp_block(prev, width, activation))
            prev = width
        self.blocks = nn.Sequential(*blocks)
        side = input_size // 2 ** len(widths)
        self.feature = nn.Sequential(
            nn.Flatten(),
            nn.Linear(prev * side * side, feature_dim),
            make_activation(activation),
        )
        self.classifier = nn.Linear(feature_dim, num_classes)
        # > 0 once any training epoch ran; crossmodal training checks it
        self.register_buffer("trained_epochs", torch.zeros((), dtype=torch.long))

    @property
    def num_classes(self) -> int:
        return self.classifier.out_features

    @property
    def is_trained(self) -> bool:
        return int(self.trained_epochs) > 0

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.feature(self.blocks(x))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.features(x))

    def replace_head(self, num_classes: int, generator: Optional[torch.Generator] = None) -> None:
        if num_classes < 2:
            raise InvalidInputError(f"Need at least two classes, got {num_classes}")
        head = nn.Linear(self.feature_dim, num_classes)
        if generator is not None:
            bound = 1.0 / self.feature_dim**0.5
            with torch.no_grad():
                head.weight.uniform_(-bound, bound, generator=generator)
                head.bias.uniform_(-bound, bound, generator=generator)
        self.classifier = head.to(self.classifier.weight.dtype)
        self.config["num_classes"] = num_classes


def build_ccp_network(in_channels: int, num_classes: int, width_scale: float = 1.0) -> CcpNetwork:
    if in_channels not in (1, 3):
        raise InvalidInputError(f"C-C-P networks take 1 or 3 input channels, got {in_channels}")
    return CcpNetwork(in_channels, num_classes, widths=scaled_widths(width_scale))


def load_ccp_network(architecture: dict, state: dict) -> CcpNetwork:
    net = CcpNetwork(**architecture)
    net.load_state_dict(state)
    net.eval()
    return net


def parameter_count(net: nn.Module) -> int:
    return sum(param.numel() for param in net.parameters())
