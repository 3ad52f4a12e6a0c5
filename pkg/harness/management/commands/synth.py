from pathlib import Path

from depth_hfr.seeding import derive_seed
from harness.management.commands._base import ExperimentCommand
from synth_data.dataset import build_dataset


class Command(ExperimentCommand):
    help = "Render a synthetic paired colour/depth face dataset and its manifest"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--ids", type=int, help="Number of identities")
        parser.add_argument("--per-id", type=int, help="Samples per identity")
        parser.add_argument("--split", type=float, nargs=3, metavar=("TRAIN", "VAL", "TEST"))
        parser.add_argument("--hole-rate", type=float)
        parser.add_argument("--clouds", action="store_true", help="Also export raw point clouds")

    def run(self, **options):
        config = self.experiment_config(
            options,
            **{
                "data.num_ids": options["ids"],
                "data.samples_per_id": options["per_id"],
                "data.split": options["split"],
                "data.hole_rate": options["hole_rate"],
                "data.clouds": options["clouds"] or None,
            },
        )
        data = config.data
        out = Path(options["out"]) if options["out"] else config.out_dir / "raw"
        manifest = build_dataset(
            data["num_ids"],
            data["samples_per_id"],
            data["split"],
            derive_seed(config.seed, "synth"),
            out,
            hole_rate=data["hole_rate"],
            clouds=data["clouds"],
        )
        self.stdout.write(self.style.SUCCESS(f"Wrote {manifest}"))
