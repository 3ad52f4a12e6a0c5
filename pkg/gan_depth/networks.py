from typing import List, Optional, Sequence, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from depth_hfr.exceptions import InvalidInputError

KERNEL = 4
PADDING = 1

ACTIVATIONS = {
    "leaky_relu": lambda: nn.LeakyReLU(0.2),
    "relu": nn.ReLU,
    "tanh": nn.Tanh,
}


def make_activation(name: str) -> nn.Module:
    if name not in ACTIVATIONS:
        raise InvalidInputError(f"Unknown activation '{name}', use one of {sorted(ACTIVATIONS)}")
    return ACTIVATIONS[name]()


def down(in_c: int, out_c: int, norm: bool, activation: str) -> nn.Sequential:
    layers = [nn.Conv2d(in_c, out_c, KERNEL, 2, PADDING)]
    if norm:
        layers.append(nn.InstanceNorm2d(out_c, affine=True))
    layers.append(make_activation(activation))
    return nn.Sequential(*layers)


def up(in_c: int, out_c: int, activation: str) -> nn.Sequential:
    return nn.Sequential(
        nn.ConvTranspose2d(in_c, out_c, KERNEL, 2, PADDING),
        nn.InstanceNorm2d(out_c, affine=True),
        make_activation(activation),
    )


class GeneratorNet(nn.Module):
    """Encoder-decoder with skip connections from colour to depth.

    Encoder block k (1-based) feeds decoder block n-k (0-based) through a
    channel concatenation. The noise input is realized as dropout on the first
    ``dropout_blocks`` decoder blocks. Output = (tanh + 1) / 2, in [0, 1].
    """

    def __init__(
        self,
        in_channels: int = 3,
        out_channels: int = 1,
        widths: Sequence[int] = (64, 128, 256, 512, 512, 512),
        input_size: int = 128,
        dropout: float = 0.5,
        dropout_blocks: int = 3,
        encoder_activation: str = "leaky_relu",
        decoder_activation: str = "relu",
    ):
        super().__init__()
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2:
            raise InvalidInputError("Generator needs at least two encoder blocks")
        if input_size % 2 ** len(widths):
            raise InvalidInputError(
                f"Input size {input_size} is not divisible by 2^{len(widths)}"
            )
        self.config = {
            "in_channels": in_channels,
            "out_channels": out_channels,
            "widths": list(widths),
            "input_size": input_size,
            "dropout": dropout,
            "dropout_blocks": dropout_blocks,
            "encoder_activation": encoder_activation,
            "decoder_activation": decoder_activation,
        }
        self.in_channels = in_channels
        self.input_size = input_size
        self.dropout = dropout
        self.dropout_blocks = dropout_blocks

        n = len(widths)
        self.encoder = nn.ModuleList()
        prev = in_channels
        for k, width in enumerate(widths):
            # outermost and innermost blocks carry no normalization
            self.encoder.append(down(prev, width, norm=0 < k < n - 1, activation=encoder_activation))
            prev = width

        self.decoder = nn.ModuleList()
        prev = widths[-1]
        for i in range(n - 1):
            width = widths[n - 2 - i]
            self.decoder.append(up(prev, width, decoder_activation))
            prev = width + widths[n - 2 - i]
        self.last = nn.ConvTranspose2d(prev, out_channels, KERNEL, 2, PADDING)

    def forward(
        self,
        x: torch.Tensor,
        stochastic: Optional[bool] = None,
        ablate: Optional[str] = None,
    ) -> torch.Tensor:
        """``ablate`` zeroes the "bottleneck" or all "skips" (diagnostics only)."""
        if stochastic is None:
            stochastic = self.training

        skips: List[torch.Tensor] = []
        h = x
        for block in self.encoder:
            h = block(h)
            skips.append(h)
        if ablate == "bottleneck":
            h = torch.zeros_like(h)
        elif ablate not in (None, "skips"):
            raise InvalidInputError(f"Unknown ablation '{ablate}'")

        for i, block in enumerate(self.decoder):
            h = block(h)
            if i < self.dropout_blocks and self.dropout > 0:
                h = F.dropout(h, self.dropout, training=stochastic)
            skip = skips[-2 - i]
            if ablate == "skips":
                skip = torch.zeros_like(skip)
            h = torch.cat([h, skip], dim=1)

        return (torch.tanh(self.last(h)) + 1.0) / 2.0


class DiscriminatorNet(nn.Module):
    """Patch discriminator over the channel-concatenated (depth, colour) pair.

    The first ``num_strided`` blocks halve the resolution, the rest keep
    stride 1; a 1-channel head emits one logit per patch. No dense layer.
    """

    def __init__(
        self,
        in_channels: int = 4,
        widths: Sequence[int] = (64, 128, 256, 512),
        num_strided: int = 3,
        activation: str = "leaky_relu",
    ):
        super().__init__()
        widths = tuple(int(w) for w in widths)
        self.config = {
            "in_channels": in_channels,
            "widths": list(widths),
            "num_strided": num_strided,
            "activation": activation,
        }
        self.in_channels = in_channels

        layers = []
        prev = in_channels
        for i, width in enumerate(widths):
            stride = 2 if i < num_strided else 1
            layers.append(nn.Conv2d(prev, width, KERNEL, stride, PADDING))
            if i > 0:
                layers.append(nn.InstanceNorm2d(width, affine=True))
            layers.append(make_activation(activation))
            prev = width
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv2d(prev, 1, KERNEL, 1, PADDING)
        self._strides = [2 if i < num_strided else 1 for i in range(len(widths))] + [1]

    def layer_specs(self) -> List[Tuple[int, int, int]]:
        """(kernel, stride, padding) of every convolution, head included."""
        return [(KERNEL, stride, PADDING) for stride in self._strides]

    def patch_map_size(self, input_size: int) -> int:
        size = input_size
        for kernel, stride, padding in self.layer_specs():
            size = (size + 2 * padding - kernel) // stride + 1
        return size

    def receptive_field(self) -> int:
        field = 1
        for kernel, stride, _ in reversed(self.layer_specs()):
            field = (field - 1) * stride + kernel
        return field

    def forward(self, depth: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        return self.head(self.body(torch.cat([depth, condition], dim=1)))


def build_generator(config: dict) -> GeneratorNet:
    return GeneratorNet(**config)


def build_discriminator(config: dict) -> DiscriminatorNet:
    return DiscriminatorNet(**config)
