from pathlib import Path

from harness.management.commands._base import ExperimentCommand
from harness.stages import fit_finetune


class Command(ExperimentCommand):
    help = "Fine-tune the grayscale-pretrained network on depth images"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--ckpt", required=True, help="Grayscale-pretrained CCP checkpoint")
        parser.add_argument("--data", required=True, help="Preprocessed data directory")

    def run(self, **options):
        config = self.experiment_config(options)
        out = Path(options["out"]) if options["out"] else config.out_dir / "checkpoints"
        metrics = fit_finetune(config, options["data"], options["ckpt"], out / "depth.ckpt", config.seed)
        self.stdout.write(self.style.SUCCESS(f"Wrote {out / 'depth.ckpt'} {metrics}"))
