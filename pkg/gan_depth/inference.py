import logging
from typing import Tuple

import numpy as np
import torch

from depth_hfr.exceptions import ShapeError
from gan_depth.networks import DiscriminatorNet, GeneratorNet

logger = logging.getLogger(__name__)

# mean-subtracted [0, 1] colour stays well inside these bounds
NORMALIZED_ABS_LIMIT = 1.0
NORMALIZED_MEAN_LIMIT = 0.35


def _batched(images: torch.Tensor) -> Tuple[torch.Tensor, bool]:
    if images.dim() == 3:
        return images.unsqueeze(0), True
    return images, False


def generator_forward(gen: GeneratorNet, color: torch.Tensor, stochastic: bool = False) -> torch.Tensor:
    """Depth in [0, 1] for one (C x S x S) or a batch (N x C x S x S) of colour images."""
    batch, single = _batched(color)
    expected = (gen.in_channels, gen.input_size, gen.input_size)
    if batch.dim() != 4 or tuple(batch.shape[1:]) != expected:
        raise ShapeError(f"Generator expects {expected} inputs, got {tuple(color.shape)}")
    depth = gen(batch, stochastic=stochastic)
    return depth[0] if single else depth


def discriminator_forward(
    disc: DiscriminatorNet, depth_candidate: torch.Tensor, condition: torch.Tensor
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Patch logit map and the mean patch probability of every sample."""
    depth, single = _batched(depth_candidate)
    cond, _ = _batched(condition)
    if (
        depth.shape[0] != cond.shape[0]
        or depth.shape[2:] != cond.shape[2:]
        or depth.shape[1] + cond.shape[1] != disc.in_channels
    ):
        raise ShapeError(
            f"Depth {tuple(depth_candidate.shape)} and condition {tuple(condition.shape)} do not pair up"
        )
    logits = disc(depth, cond)
    probability = torch.sigmoid(logits).mean(dim=(1, 2, 3))
    if single:
        return logits[0], probability[0]
    return logits, probability


def looks_normalized(colors: torch.Tensor) -> bool:
    if colors.numel() == 0:
        return True
    channel_means = colors.mean(dim=(0, 2, 3)).abs()
    return bool(
        colors.abs().max() <= NORMALIZED_ABS_LIMIT and channel_means.max() <= NORMALIZED_MEAN_LIMIT
    )


@torch.no_grad()
def reconstruct(colors: torch.Tensor, gen: GeneratorNet, batch_size: int = 16) -> torch.Tensor:
    """Deterministic depth recovery, output order follows input order."""
    if not looks_normalized(colors):
        logger.warning(
            "Colour input does not look mean-normalized (max |x| = %.3f); "
            "reconstruction quality will suffer",
            float(colors.abs().max()),
        )
    outputs = [
        generator_forward(gen, colors[start : start + batch_size], stochastic=False)
        for start in range(0, len(colors), batch_size)
    ]
    if not outputs:
        return colors.new_zeros((0, 1, gen.input_size, gen.input_size))
    return torch.cat(outputs)


def high_frequency_energy(depth: np.ndarray) -> float:
    """Mean squared discrete Laplacian: small for blurry maps."""
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim == 4:
        depth = depth[:, 0]
    elif depth.ndim == 2:
        depth = depth[np.newaxis]
    laplacian = (
        -4.0 * depth[:, 1:-1, 1:-1]
        + depth[:, :-2, 1:-1]
        + depth[:, 2:, 1:-1]
        + depth[:, 1:-1, :-2]
        + depth[:, 1:-1, 2:]
    )
    return float(np.mean(laplacian**2))


def evaluate_reconstruction(
    predicted: torch.Tensor, ground_truth: torch.Tensor, baseline_depth: float
) -> dict:
    """Held-out L1 against a constant mean-depth predictor, plus the blur metric."""
    predicted = predicted.detach().double()
    ground_truth = ground_truth.detach().double()
    l1 = float((predicted - ground_truth).abs().mean())
    baseline = float((ground_truth - baseline_depth).abs().mean())
    hfe_pred = high_frequency_energy(predicted.numpy())
    hfe_true = high_frequency_energy(ground_truth.numpy())
    return {
        "l1": l1,
        "baseline_l1": baseline,
        "relative_improvement": 1.0 - l1 / baseline if baseline > 0 else 0.0,
        "hf_energy": hfe_pred,
        "hf_energy_ground_truth": hfe_true,
        "hf_energy_gap": abs(hfe_pred - hfe_true),
    }
