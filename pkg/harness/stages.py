import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import attrs
import numpy as np
import torch

from crossmodal.features import mapped_features
from crossmodal.model import CrossModalModel, crossmodal_checkpoint, crossmodal_from_checkpoint
from crossmodal.training import CrossModalSchedule, train_crossmodal
from depth_hfr.checkpoints import load_checkpoint, save_checkpoint
from depth_hfr.exceptions import InvalidInputError
from depth_hfr.seeding import derive_seed, seed_everything
from gan_depth.inference import evaluate_reconstruction, reconstruct
from gan_depth.networks import DiscriminatorNet, GeneratorNet
from gan_depth.training import GanSchedule, GanTrainer, load_generator
from harness.config import ExperimentConfig
from harness.workspace import Workspace
from matching.evaluation import cmc_curve, dump_scores, plot_cmc, rank1_accuracy, write_cmc_csv, write_report
from matching.protocols import load_protocol
from matching.runner import (
    EvaluationModels,
    ProtocolReport,
    check_models,
    run_protocol,
    score_feature_files,
    score_protocol,
)
from range_pipeline.datasets import FacePairDataset, PairArrays, contiguous_labels, load_pairs, seeded_loader, to_tensor
from range_pipeline.normalization import compute_channel_stats, normalize_batch
from range_pipeline.io import read_manifest, resolve, write_depth_png, write_manifest
from range_pipeline.preprocess import STATS_FILE, load_channel_stats, preprocess_manifest
from range_pipeline.types import ChannelStats, RangeImage
from synth_data.dataset import build_dataset
from unimodal_cnn.features import extract_features, read_features, to_grayscale, write_features
from unimodal_cnn.networks import CcpNetwork, build_ccp_network
from unimodal_cnn.schedule import TrainSchedule
from unimodal_cnn.training import finetune, network_checkpoint, network_from_checkpoint, train_unimodal

logger = logging.getLogger(__name__)

UNIMODAL_MODALITIES = ("color", "depth")


@attrs.frozen
class StageResult:
    artifacts: List[Path]
    metrics: Dict[str, object] = attrs.field(factory=dict)


def gan_schedule(section: dict) -> GanSchedule:
    return GanSchedule(
        learning_rate=section["learning_rate"],
        eta=section["eta"],
        beta1_start=section["beta1_start"],
        beta1_final=section["beta1_final"],
        switch_epoch=section["switch_epoch"],
        d_optimizer=section["d_optimizer"],
        objective=section["objective"],
    )


def unimodal_schedule(section: dict) -> TrainSchedule:
    return TrainSchedule(
        learning_rate=section["learning_rate"],
        decay_factor=section["decay_factor"],
        decay_period=section["decay_period"],
        momentum_start=section["momentum_start"],
        momentum_final=section["momentum_final"],
        momentum_switch_epoch=section["momentum_switch_epoch"],
        epochs=section["epochs"],
        batch_size=section["batch_size"],
    )


def finetune_schedule(section: dict) -> TrainSchedule:
    return TrainSchedule.finetuning(
        learning_rate=section["finetune_learning_rate"],
        epochs=section["finetune_epochs"],
        batch_size=section["batch_size"],
        momentum_start=section["momentum_start"],
        momentum_final=section["momentum_final"],
    )


def crossmodal_schedule(section: dict) -> CrossModalSchedule:
    return CrossModalSchedule(
        learning_rate=section["learning_rate"],
        momentum=section["momentum"],
        epochs=section["epochs"],
        batch_size=section["batch_size"],
        correlation_weight=section["correlation_weight"],
        freeze_streams=section["freeze_streams"],
    )


def holdout_indices(pairs: PairArrays) -> Tuple[np.ndarray, np.ndarray]:
    """Last sample of every identity with at least two samples goes to validation.

    Splits are identity-disjoint, so classifier validation needs held-out
    samples of the training identities.
    """
    last = {}
    counts = {}
    for index, identity in enumerate(pairs.identities):
        last[identity] = index
        counts[identity] = counts.get(identity, 0) + 1
    val = sorted(index for identity, index in last.items() if counts[identity] > 1)
    fit = sorted(set(range(len(pairs))) - set(val))
    return np.asarray(fit, dtype=np.int64), np.asarray(val, dtype=np.int64)


def grayscale_input(pairs: PairArrays) -> Tuple[np.ndarray, ChannelStats]:
    gray = to_grayscale(pairs.color)
    return gray, compute_channel_stats(gray)


def train_modality(
    config: ExperimentConfig, pairs: PairArrays, stats: Dict[str, ChannelStats], modality: str, seed: int
) -> Tuple[CcpNetwork, ChannelStats, list]:
    """Colour network on RGB, or the 1-channel pretraining network on luma ("depth")."""
    section = config.unimodal
    if modality == "color":
        images, input_stats = pairs.normalized_color(stats["color"]), stats["color"]
    else:
        gray, input_stats = grayscale_input(pairs)
        images = normalize_batch(gray, input_stats)
    labels, _ = contiguous_labels(pairs.identities)
    fit, val = holdout_indices(pairs)
    images, labels = to_tensor(images), torch.as_tensor(labels)

    seed_everything(seed)
    net = build_ccp_network(images.shape[1], int(labels.max()) + 1, section["width_scale"])
    result = train_unimodal(
        net, images[fit], labels[fit], unimodal_schedule(section), images[val], labels[val], seed=seed
    )
    return result.network, input_stats, result.history


def data_paths(data_dir) -> Tuple[Path, Path]:
    data_dir = Path(data_dir)
    return data_dir / "manifest.jsonl", data_dir / STATS_FILE


def fit_gan(config: ExperimentConfig, data_dir, checkpoint_path, loss_curve, seed: int) -> Dict[str, float]:
    """Train the depth GAN on the train split, save it, score it on the test split."""
    section = config.gan
    manifest, stats_file = data_paths(data_dir)
    stats = load_channel_stats(stats_file)
    train = load_pairs(manifest, "train")

    seed_everything(seed)
    gen = GeneratorNet(widths=section["generator_widths"], input_size=train.color.shape[1])
    disc = DiscriminatorNet(
        widths=section["discriminator_widths"], num_strided=section["discriminator_strided"]
    )
    trainer = GanTrainer(gen, disc, gan_schedule(section))
    loader = seeded_loader(
        FacePairDataset(train, stats["color"]),
        section["batch_size"],
        derive_seed(seed, "loader"),
        workers=section["workers"],
    )
    trainer.fit(loader, section["epochs"], loss_curve, config_hash=config.hash)
    checkpoint = trainer.checkpoint(seed, config.hash, {name: list(value.mean) for name, value in stats.items()})
    save_checkpoint(checkpoint_path, checkpoint)

    test = load_pairs(manifest, "test")
    if not len(test):
        return {}
    predicted = reconstruct(to_tensor(test.normalized_color(stats["color"])), gen)
    return evaluate_reconstruction(predicted, to_tensor(test.depth), stats["depth"].mean[0])


def fit_unimodal(config: ExperimentConfig, data_dir, modality: str, checkpoint_path, seed: int) -> Dict[str, float]:
    manifest, stats_file = data_paths(data_dir)
    net, input_stats, history = train_modality(
        config, load_pairs(manifest, "train"), load_channel_stats(stats_file), modality, seed
    )
    # the 1-channel network trained here is the grayscale pretraining for depth
    saved_as = "color" if modality == "color" else "gray"
    save_checkpoint(checkpoint_path, network_checkpoint(net, input_stats, saved_as, seed, config.hash, history))
    return {"val_accuracy": max((row.get("val_accuracy", 0.0) for row in history), default=0.0)}


def fit_finetune(config: ExperimentConfig, data_dir, pretrained_path, checkpoint_path, seed: int) -> Dict[str, float]:
    manifest, stats_file = data_paths(data_dir)
    stats = load_channel_stats(stats_file)
    train = load_pairs(manifest, "train")
    pretrained = network_from_checkpoint(load_checkpoint(pretrained_path, "ccp"))

    labels, _ = contiguous_labels(train.identities)
    fit, val = holdout_indices(train)
    images, labels = to_tensor(train.normalized_depth(stats["depth"])), torch.as_tensor(labels)
    result = finetune(
        pretrained,
        images[fit],
        labels[fit],
        finetune_schedule(config.unimodal),
        int(labels.max()) + 1,
        images[val],
        labels[val],
        seed=seed,
    )
    checkpoint = network_checkpoint(result.network, stats["depth"], "depth", seed, config.hash, result.history)
    save_checkpoint(checkpoint_path, checkpoint)
    return {"val_accuracy": result.best_accuracy, "best_epoch": result.best_epoch}


def fit_crossmodal(
    config: ExperimentConfig, data_dir, color_path, depth_path, checkpoint_path, features_dir, seed: int
) -> Tuple[Dict[str, float], List[Path]]:
    """Joint training of both streams and maps; also exports test-split mapped features."""
    section = config.crossmodal
    manifest, stats_file = data_paths(data_dir)
    stats = load_channel_stats(stats_file)
    train = load_pairs(manifest, "train")
    color_net = network_from_checkpoint(load_checkpoint(color_path, "ccp"))
    depth_net = network_from_checkpoint(load_checkpoint(depth_path, "ccp"))

    labels, _ = contiguous_labels(train.identities)
    generator = seed_everything(seed)
    model = CrossModalModel(
        color_net, depth_net, int(labels.max()) + 1, init_noise=section["init_noise"], generator=generator
    )
    history = train_crossmodal(
        model,
        to_tensor(train.normalized_color(stats["color"])),
        to_tensor(train.normalized_depth(stats["depth"])),
        torch.as_tensor(labels),
        crossmodal_schedule(section),
        seed=derive_seed(seed, "loader"),
    )
    checkpoint = crossmodal_checkpoint(
        model,
        {name: list(value.mean) for name, value in stats.items()},
        {"epoch": len(history), "seed": seed, "config_hash": config.hash, "history": history},
    )
    save_checkpoint(checkpoint_path, checkpoint)
    exported = export_crossmodal_features(model, load_pairs(manifest, "test"), stats, Path(features_dir), config.hash)
    return (dict(history[-1]) if history else {}), exported


def export_crossmodal_features(
    model: CrossModalModel, pairs: PairArrays, stats: Dict[str, ChannelStats], directory: Path, config_hash: str
) -> List[Path]:
    color = mapped_features(model, to_tensor(pairs.normalized_color(stats["color"])), "color")
    depth = mapped_features(model, to_tensor(pairs.normalized_depth(stats["depth"])), "depth")
    return [
        write_features(directory / "crossmodal_color.bin", color.numpy(), pairs.sample_ids, "color", config_hash),
        write_features(directory / "crossmodal_depth.bin", depth.numpy(), pairs.sample_ids, "depth", config_hash),
    ]


def evaluation_models(
    config: ExperimentConfig,
    stats: Dict[str, ChannelStats],
    gan: Optional[Path] = None,
    color: Optional[Path] = None,
    depth: Optional[Path] = None,
    crossmodal: Optional[Path] = None,
) -> EvaluationModels:
    """Load whichever checkpoints exist; absent ones stay None."""

    def present(path: Optional[Path]) -> bool:
        return path is not None and Path(path).is_file()

    return EvaluationModels(
        color_stats=stats["color"],
        depth_stats=stats["depth"],
        generator=load_generator(load_checkpoint(gan, "gan")) if present(gan) else None,
        color_net=network_from_checkpoint(load_checkpoint(color, "ccp")) if present(color) else None,
        depth_net=network_from_checkpoint(load_checkpoint(depth, "ccp")) if present(depth) else None,
        crossmodal=crossmodal_from_checkpoint(load_checkpoint(crossmodal, "crossmodal")) if present(crossmodal) else None,
        heterogeneous_features=config.evaluation["heterogeneous_features"],
    )


def write_protocol_outputs(report: ProtocolReport, directory, config_hash: str, dump: bool = True) -> List[Path]:
    directory = Path(directory)
    payload = {**report.as_dict(), "config_hash": config_hash}
    paths = [
        write_report(directory / "evaluation.json", payload),
        write_cmc_csv(directory / "cmc.csv", report.cmc, config_hash),
        plot_cmc(directory / "cmc.png", report.cmc, title=f"CMC ({report.protocol})", config_hash=config_hash),
    ]
    if dump:
        paths += [dump_scores(directory / "scores", matrix, config_hash) for matrix in report.matrices.values()]
    return paths


def evaluate(
    config: ExperimentConfig,
    data_dir,
    reports_dir,
    protocol: Optional[str] = None,
    **checkpoints: Optional[Path],
) -> Tuple[ProtocolReport, List[Path]]:
    section = config.evaluation
    manifest, stats_file = data_paths(data_dir)
    models = evaluation_models(config, load_channel_stats(stats_file), **checkpoints)
    report = run_protocol(
        load_protocol(protocol or section["protocol"]),
        models,
        manifest,
        split="test",
        normalization=section["normalization"],
        workers=section["workers"],
    )
    return report, write_protocol_outputs(report, reports_dir, config.hash, section["dump_scores"])


def score_manifests(
    config: ExperimentConfig,
    gallery_manifest,
    probe_manifest,
    reports_dir,
    protocol: Optional[str] = None,
    **checkpoints: Optional[Path],
) -> Tuple[ProtocolReport, List[Path]]:
    """Evaluate on explicit gallery and probe manifests sharing one preprocessed stats file."""
    section = config.evaluation
    protocol_config = load_protocol(protocol or section["protocol"])
    stats = load_channel_stats(Path(gallery_manifest).parent / STATS_FILE)
    models = evaluation_models(config, stats, **checkpoints)
    check_models(protocol_config, models)
    report = score_protocol(
        protocol_config,
        models,
        load_pairs(gallery_manifest),
        load_pairs(probe_manifest),
        section["normalization"],
        section["workers"],
    )
    return report, write_protocol_outputs(report, reports_dir, config.hash, section["dump_scores"])


def score_features(probe_path, gallery_path, reports_dir, workers: int = 1) -> Tuple[dict, Path]:
    """Rank-1 and CMC of two exported feature files."""
    probe, gallery = read_features(probe_path), read_features(gallery_path)
    matrix = score_feature_files(probe, gallery, workers=workers)
    curve = cmc_curve(matrix)
    payload = {
        "modality": matrix.modality.value,
        "rank1": rank1_accuracy(matrix),
        "cmc": [float(value) for value in curve],
        "num_probes": len(matrix.probe_ids),
        "num_gallery": len(matrix.gallery_ids),
        "config_hash": probe.config_hash,
    }
    return payload, write_report(Path(reports_dir) / "evaluation.json", payload)


def extract_manifest_features(checkpoint_path, manifest, out, split: Optional[str] = None, modality: Optional[str] = None) -> Path:
    """Features of every manifest record under a CCP or cross-modal checkpoint.

    A CCP checkpoint knows its own input modality; a cross-modal one needs
    ``modality`` to pick the stream.
    """
    checkpoint = load_checkpoint(checkpoint_path)
    pairs = load_pairs(manifest, split=split)
    if checkpoint.kind == "ccp":
        net = network_from_checkpoint(checkpoint)
        stats = ChannelStats(checkpoint.stats["input"])
        source = checkpoint.meta.get("modality", "color")
        if source == "color":
            images = pairs.normalized_color(stats)
        elif source == "gray":
            images = normalize_batch(to_grayscale(pairs.color), stats)
        else:
            images = pairs.normalized_depth(stats)
        features = extract_features(net, to_tensor(images))
        tag = "depth" if source == "depth" else "color"
    elif checkpoint.kind == "crossmodal":
        if modality not in UNIMODAL_MODALITIES:
            raise InvalidInputError(f"A cross-modal checkpoint needs --modality {'|'.join(UNIMODAL_MODALITIES)}")
        model = crossmodal_from_checkpoint(checkpoint)
        stats = ChannelStats(checkpoint.stats[modality])
        images = pairs.normalized_color(stats) if modality == "color" else pairs.normalized_depth(stats)
        features = mapped_features(model, to_tensor(images), modality)
        tag = modality
    else:
        raise InvalidInputError(f"Cannot extract features with a '{checkpoint.kind}' checkpoint")
    return write_features(
        out,
        features.numpy(),
        pairs.sample_ids,
        tag,
        checkpoint.config_hash,
        {"checkpoint": str(checkpoint_path), "split": split},
    )


def reconstruct_directory(checkpoint_path, in_dir, out_dir, split: Optional[str] = None) -> Path:
    """Write a generated depth PNG per record of ``in_dir/manifest.jsonl``.

    The output manifest points at the original colour images and landmarks
    and at the reconstructed depth maps.
    """
    checkpoint = load_checkpoint(checkpoint_path, "gan")
    gen = load_generator(checkpoint)
    manifest = Path(in_dir) / "manifest.jsonl"
    out_dir = Path(out_dir)
    (out_dir / "depth").mkdir(parents=True, exist_ok=True)

    records = read_manifest(manifest, split=split)
    pairs = load_pairs(manifest, split=split)
    depth = reconstruct(to_tensor(pairs.normalized_color(ChannelStats(checkpoint.stats["color"]))), gen)
    depth = depth.clamp(0.0, 1.0).numpy()[:, 0]

    output = []
    for record, sample_id, values in zip(records, pairs.sample_ids, depth):
        name = sample_id.replace(":", "_")
        write_depth_png(out_dir / "depth" / f"{name}.png", RangeImage(values, np.ones(values.shape, dtype=bool)))
        output.append(
            {
                **record,
                "color_path": str(resolve(manifest, record["color_path"]).resolve()),
                "landmarks_path": str(resolve(manifest, record["landmarks_path"]).resolve()),
                "depth_path": f"depth/{name}.png",
                "capture": {**record.get("capture", {}), "reconstructed": True},
            }
        )
    logger.info("Reconstructed %d depth map(s) into %s", len(output), out_dir)
    return write_manifest(out_dir / "manifest.jsonl", output)


def synth_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    data = config.data
    manifest = build_dataset(
        data["num_ids"],
        data["samples_per_id"],
        data["split"],
        seed,
        ws.raw_dir,
        hole_rate=data["hole_rate"],
        clouds=data["clouds"],
    )
    return StageResult([manifest], {"records": data["num_ids"] * data["samples_per_id"]})


def preprocess_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    data = config.data
    manifest = preprocess_manifest(
        ws.raw_manifest, ws.data_dir, data["target_iod_px"], data["eye_row"], data["workers"]
    )
    return StageResult([manifest, ws.stats_file])


def train_gan_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    curve = ws.report("gan_losses.csv")
    metrics = fit_gan(config, ws.data_dir, ws.checkpoint("gan"), curve, seed)
    return StageResult([ws.checkpoint("gan"), curve], metrics)


def train_unimodal_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    colour = fit_unimodal(config, ws.data_dir, "color", ws.checkpoint("color"), derive_seed(seed, "color"))
    gray = fit_unimodal(config, ws.data_dir, "depth", ws.checkpoint("gray"), derive_seed(seed, "depth"))
    return StageResult(
        [ws.checkpoint("color"), ws.checkpoint("gray")],
        {"color_val_accuracy": colour["val_accuracy"], "gray_val_accuracy": gray["val_accuracy"]},
    )


def finetune_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    metrics = fit_finetune(config, ws.data_dir, ws.checkpoint("gray"), ws.checkpoint("depth"), seed)
    return StageResult([ws.checkpoint("depth")], metrics)


def train_crossmodal_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    metrics, exported = fit_crossmodal(
        config,
        ws.data_dir,
        ws.checkpoint("color"),
        ws.checkpoint("depth"),
        ws.checkpoint("crossmodal"),
        ws.root / "features",
        seed,
    )
    return StageResult([ws.checkpoint("crossmodal"), *exported], metrics)


def evaluate_stage(config: ExperimentConfig, ws: Workspace, seed: int) -> StageResult:
    report, paths = evaluate(
        config,
        ws.data_dir,
        ws.reports_dir,
        gan=ws.checkpoint("gan"),
        color=ws.checkpoint("color"),
        depth=ws.checkpoint("depth"),
        crossmodal=ws.checkpoint("crossmodal"),
    )
    return StageResult(paths[:2], {"rank1": report.rank1, "fusion": report.fused_rank1})


STAGE_FUNCTIONS = {
    "synth": synth_stage,
    "preprocess": preprocess_stage,
    "train_gan": train_gan_stage,
    "train_unimodal": train_unimodal_stage,
    "finetune": finetune_stage,
    "train_crossmodal": train_crossmodal_stage,
    "evaluate": evaluate_stage,
}
