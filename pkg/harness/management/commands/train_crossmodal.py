from pathlib import Path

from harness.management.commands._base import ExperimentCommand
from harness.stages import fit_crossmodal


class Command(ExperimentCommand):
    help = "Jointly train colour/depth streams with the cross-modal correlation loss"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--color-ckpt", required=True)
        parser.add_argument("--depth-ckpt", required=True)
        parser.add_argument("--data", required=True, help="Preprocessed data directory")
        parser.add_argument("--lambda", dest="correlation_weight", type=float, help="Correlation loss weight")
        parser.add_argument("--freeze-streams", action="store_true", help="Train only the maps and classifier")

    def run(self, **options):
        config = self.experiment_config(
            options,
            **{
                "crossmodal.correlation_weight": options["correlation_weight"],
                "crossmodal.freeze_streams": options["freeze_streams"] or None,
            },
        )
        out = Path(options["out"]) if options["out"] else config.out_dir
        metrics, exported = fit_crossmodal(
            config,
            options["data"],
            options["color_ckpt"],
            options["depth_ckpt"],
            out / "crossmodal.ckpt",
            out / "features",
            config.seed,
        )
        for path in exported:
            self.stdout.write(f"Exported {path}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {out / 'crossmodal.ckpt'} {metrics}"))
