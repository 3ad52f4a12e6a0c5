from pathlib import Path

from harness.management.commands._base import ExperimentCommand
from harness.stages import fit_gan


class Command(ExperimentCommand):
    help = "Train the conditional GAN that predicts depth from colour"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--data", required=True, help="Preprocessed data directory")
        parser.add_argument("--objective", choices=("joint", "l1", "adversarial"))
        parser.add_argument("--epochs", type=int)

    def run(self, **options):
        config = self.experiment_config(
            options, **{"gan.objective": options["objective"], "gan.epochs": options["epochs"]}
        )
        out = Path(options["out"]) if options["out"] else config.out_dir / "checkpoints"
        metrics = fit_gan(config, options["data"], out / "gan.ckpt", out / "gan_losses.csv", config.seed)
        self.stdout.write(self.style.SUCCESS(f"Wrote {out / 'gan.ckpt'} {metrics}"))
