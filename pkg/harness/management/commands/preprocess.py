from harness.management.commands._base import ExperimentCommand
from range_pipeline.alignment import DEFAULT_EYE_ROW, DEFAULT_IOD_PX
from range_pipeline.preprocess import preprocess_manifest


class Command(ExperimentCommand):
    help = "Align, hole-fill and normalize raw pairs into 128x128 training data"

    def add_arguments(self, parser):
        parser.add_argument("--manifest", required=True, help="Raw manifest (JSON lines)")
        parser.add_argument("--out", required=True, help="Output directory")
        parser.add_argument("--iod", type=float, default=DEFAULT_IOD_PX, help="Target inter-ocular distance (px)")
        parser.add_argument("--eye-row", type=float, default=DEFAULT_EYE_ROW)
        parser.add_argument("--workers", type=int, default=1)

    def run(self, **options):
        manifest = preprocess_manifest(
            options["manifest"], options["out"], options["iod"], options["eye_row"], options["workers"]
        )
        self.stdout.write(self.style.SUCCESS(f"Wrote {manifest}"))
