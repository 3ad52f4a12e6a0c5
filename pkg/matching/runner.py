import logging
import time
from typing import Dict, Optional, Tuple

import attrs
import numpy as np
import torch

from crossmodal.features import mapped_features
from crossmodal.model import CrossModalModel
from depth_hfr.exceptions import ConfigurationError, ContractError, ProtocolError
from gan_depth.inference import reconstruct
from gan_depth.networks import GeneratorNet
from matching.evaluation import cmc_curve, rank1_accuracy
from matching.protocols import ProtocolConfig
from matching.scores import cosine_matrix, fuse, normalize_scores
from matching.types import Modality, ScoreMatrix
from range_pipeline.datasets import PairArrays, load_pairs, to_tensor
from range_pipeline.normalization import normalize_batch
from range_pipeline.types import ChannelStats
from unimodal_cnn.features import FeatureFile, extract_features
from unimodal_cnn.networks import CcpNetwork

logger = logging.getLogger(__name__)

CHANNEL_MODELS = {
    Modality.COLOR: ("color_net",),
    Modality.DEPTH: ("generator", "depth_net"),
    Modality.HETEROGENEOUS: ("crossmodal",),
}


@attrs.frozen(eq=False)
class EvaluationModels:
    """Trained models plus the training-split channel means they expect.

    ``heterogeneous_features`` picks mapped (M_X x vs M_Y y) or hidden
    stream features for the 2D/2.5D channel.
    """

    color_stats: ChannelStats
    depth_stats: ChannelStats
    generator: Optional[GeneratorNet] = None
    color_net: Optional[CcpNetwork] = None
    depth_net: Optional[CcpNetwork] = None
    crossmodal: Optional[CrossModalModel] = None
    heterogeneous_features: str = attrs.field(
        default="mapped", validator=attrs.validators.in_(("mapped", "hidden"))
    )


@attrs.frozen(eq=False)
class ProtocolReport:
    protocol: str
    rank1: Dict[str, float]
    fused_rank1: float
    matrices: Dict[str, ScoreMatrix]
    cmc: Dict[str, np.ndarray]
    runtime_seconds: float
    num_probes: int
    num_gallery: int

    def as_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "rank1": dict(self.rank1),
            "fusion": self.fused_rank1,
            "runtime_seconds": self.runtime_seconds,
            "num_probes": self.num_probes,
            "num_gallery": self.num_gallery,
        }


def split_gallery_probe(pairs: PairArrays) -> Tuple[PairArrays, PairArrays]:
    """First sample of every identity enrolls it; the remaining samples are probes."""
    seen, gallery, probe = set(), [], []
    for index, identity in enumerate(pairs.identities):
        (probe if identity in seen else gallery).append(index)
        seen.add(identity)
    if not probe:
        raise ProtocolError("Every identity has a single sample: no probes left after enrolment")
    return pairs.subset(gallery), pairs.subset(probe)


def check_models(protocol: ProtocolConfig, models: EvaluationModels) -> None:
    for channel in protocol.channels:
        missing = [name for name in CHANNEL_MODELS[channel] if getattr(models, name) is None]
        if missing:
            raise ConfigurationError(
                f"Channel {channel.value} of protocol '{protocol.name}' needs model(s): {', '.join(missing)}"
            )


def _color_input(pairs: PairArrays, stats: ChannelStats) -> torch.Tensor:
    return to_tensor(pairs.normalized_color(stats))


def _depth_input(depth: np.ndarray, stats: ChannelStats) -> torch.Tensor:
    return to_tensor(normalize_batch(depth, stats))


def reconstructed_depth(models: EvaluationModels, probe: PairArrays) -> np.ndarray:
    """Probe depth from the generator, channels last, never the captured probe depth."""
    generated = reconstruct(_color_input(probe, models.color_stats), models.generator)
    return generated.numpy().transpose(0, 2, 3, 1)


def channel_scores(
    channel: Modality,
    models: EvaluationModels,
    gallery: PairArrays,
    probe: PairArrays,
    probe_depth: Optional[np.ndarray],
    workers: int = 1,
) -> ScoreMatrix:
    if channel is Modality.COLOR:
        probe_feat = extract_features(models.color_net, _color_input(probe, models.color_stats))
        gallery_feat = extract_features(models.color_net, _color_input(gallery, models.color_stats))
    elif channel is Modality.DEPTH:
        probe_feat = extract_features(models.depth_net, _depth_input(probe_depth, models.depth_stats))
        gallery_feat = extract_features(models.depth_net, _depth_input(gallery.depth, models.depth_stats))
    else:
        mapped = models.heterogeneous_features == "mapped"
        probe_feat = mapped_features(
            models.crossmodal, _color_input(probe, models.color_stats), "color", mapped=mapped
        )
        gallery_feat = mapped_features(
            models.crossmodal, _depth_input(gallery.depth, models.depth_stats), "depth", mapped=mapped
        )
    return cosine_matrix(
        probe_feat.double().numpy(),
        gallery_feat.double().numpy(),
        [int(i) for i in probe.identities],
        [int(i) for i in gallery.identities],
        channel,
        workers=workers,
    )


def score_protocol(
    protocol: ProtocolConfig,
    models: EvaluationModels,
    gallery: PairArrays,
    probe: PairArrays,
    normalization: str = "minmax",
    workers: int = 1,
) -> ProtocolReport:
    check_models(protocol, models)
    started = time.perf_counter()
    probe_depth = reconstructed_depth(models, probe) if Modality.DEPTH in protocol.channels else None

    matrices: Dict[str, ScoreMatrix] = {}
    for channel in protocol.channels:
        raw = channel_scores(channel, models, gallery, probe, probe_depth, workers)
        matrices[channel.value] = normalize_scores(raw, normalization)
    fused = fuse(list(matrices.values()))

    rank1 = {name: rank1_accuracy(matrix) for name, matrix in matrices.items()}
    cmc = {name: cmc_curve(matrix) for name, matrix in matrices.items()}
    cmc[fused.modality.value] = cmc_curve(fused)
    matrices[fused.modality.value] = fused
    report = ProtocolReport(
        protocol=protocol.name,
        rank1=rank1,
        fused_rank1=rank1_accuracy(fused),
        matrices=matrices,
        cmc=cmc,
        runtime_seconds=time.perf_counter() - started,
        num_probes=len(probe),
        num_gallery=len(gallery),
    )
    logger.info("protocol %s: rank-1 %s, fusion %.4f", protocol.name, rank1, report.fused_rank1)
    return report


def run_protocol(
    protocol: ProtocolConfig,
    models: EvaluationModels,
    test_manifest,
    split: Optional[str] = "test",
    normalization: str = "minmax",
    workers: int = 1,
) -> ProtocolReport:
    check_models(protocol, models)
    gallery, probe = split_gallery_probe(load_pairs(test_manifest, split=split))
    return score_protocol(protocol, models, gallery, probe, normalization, workers)


def identity_of(sample_id: str) -> str:
    return str(sample_id).split(":", 1)[0]


def score_feature_files(probe: FeatureFile, gallery: FeatureFile, workers: int = 1) -> ScoreMatrix:
    """Cosine scores between two exported feature files from the same run."""
    if probe.config_hash != gallery.config_hash:
        raise ContractError(
            f"Probe features come from config {probe.config_hash[:12]}, "
            f"gallery features from {gallery.config_hash[:12]}"
        )
    sides = {probe.modality, gallery.modality}
    if sides == {"color"}:
        channel = Modality.COLOR
    elif sides == {"depth"}:
        channel = Modality.DEPTH
    else:
        channel = Modality.HETEROGENEOUS
    return cosine_matrix(
        probe.values,
        gallery.values,
        [identity_of(i) for i in probe.ids],
        [identity_of(i) for i in gallery.ids],
        channel,
        workers=workers,
    )
