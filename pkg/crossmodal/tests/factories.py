import torch

from crossmodal.model import CrossModalModel
from unimodal_cnn.networks import CcpNetwork


def toy_stream(in_channels: int, feature_dim: int = 8, trained: bool = True, dtype=torch.float32) -> CcpNetwork:
    net = CcpNetwork(in_channels, 2, widths=(2,), feature_dim=feature_dim, input_size=8, activation="tanh").to(dtype)
    if trained:
        net.trained_epochs += 1
    return net


def toy_model(num_classes: int = 3, feature_dim: int = 8, seed: int = 0, dtype=torch.float32, trained: bool = True):
    torch.manual_seed(seed)
    return CrossModalModel(
        toy_stream(3, feature_dim, trained, dtype),
        toy_stream(1, feature_dim, trained, dtype),
        num_classes,
        generator=torch.Generator().manual_seed(seed),
    )


def toy_images(count: int = 6, seed: int = 1):
    generator = torch.Generator().manual_seed(seed)
    color = torch.randn(count, 3, 8, 8, generator=generator)
    depth = torch.randn(count, 1, 8, 8, generator=generator)
    return color, depth, torch.arange(count) % 3
