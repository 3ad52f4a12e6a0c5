import torch

from crossmodal.model import CrossModalModel
from depth_hfr.exceptions import InvalidInputError, ShapeError

COLOR_TAGS = ("color", "2D")
DEPTH_TAGS = ("depth", "2.5D")


def _batched(image: torch.Tensor):
    if image.dim() == 3:
        return image.unsqueeze(0), True
    if image.dim() != 4:
        raise ShapeError(f"Expected C x H x W or N x C x H x W input, got {tuple(image.shape)}")
    return image, False


@torch.no_grad()
def mapped_features(
    model: CrossModalModel, images: torch.Tensor, modality: str, mapped: bool = True, batch_size: int = 64
) -> torch.Tensor:
    """Per-modality features: M_X x for colour, M_Y y for depth (``mapped=False`` skips the map)."""
    if modality in COLOR_TAGS:
        extract, project = model.color_features, model.map_color
    elif modality in DEPTH_TAGS:
        extract, project = model.depth_features, model.map_depth
    else:
        raise InvalidInputError(f"Unknown modality '{modality}', use one of {COLOR_TAGS + DEPTH_TAGS}")
    model.eval()
    chunks = []
    for start in range(0, len(images), batch_size):
        features = extract(images[start : start + batch_size])
        chunks.append(project(features) if mapped else features)
    if not chunks:
        return images.new_zeros((0, model.feature_dim))
    return torch.cat(chunks)


def extract_single(model: CrossModalModel, image: torch.Tensor, modality: str) -> torch.Tensor:
    batch, single = _batched(image)
    features = mapped_features(model, batch, modality)
    return features[0] if single else features


def extract_pair_feature(model: CrossModalModel, color_img: torch.Tensor, depth_img: torch.Tensor) -> torch.Tensor:
    return model.shared(
        extract_single(model, color_img, "color"), extract_single(model, depth_img, "depth")
    )
