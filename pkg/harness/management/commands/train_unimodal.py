from pathlib import Path

from harness.management.commands._base import ExperimentCommand
from harness.stages import UNIMODAL_MODALITIES, fit_unimodal


class Command(ExperimentCommand):
    help = (
        "Train a single-modality CCP network. 'depth' pretrains the 1-channel "
        "network on grayscale colour; run finetune afterwards"
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--modality", required=True, choices=UNIMODAL_MODALITIES)
        parser.add_argument("--data", required=True, help="Preprocessed data directory")
        parser.add_argument("--epochs", type=int)

    def run(self, **options):
        config = self.experiment_config(options, **{"unimodal.epochs": options["epochs"]})
        out = Path(options["out"]) if options["out"] else config.out_dir / "checkpoints"
        name = "color" if options["modality"] == "color" else "gray"
        metrics = fit_unimodal(config, options["data"], options["modality"], out / f"{name}.ckpt", config.seed)
        self.stdout.write(self.style.SUCCESS(f"Wrote {out / name}.ckpt {metrics}"))
