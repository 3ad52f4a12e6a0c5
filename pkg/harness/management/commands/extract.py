from harness.management.commands._base import ExperimentCommand
from harness.stages import UNIMODAL_MODALITIES, extract_manifest_features


class Command(ExperimentCommand):
    help = "Export features of a manifest as a float32 .bin file with a JSON sidecar"

    def add_arguments(self, parser):
        parser.add_argument("--ckpt", required=True, help="CCP or cross-modal checkpoint")
        parser.add_argument("--manifest", required=True)
        parser.add_argument("--out", required=True, help="Destination .bin file")
        parser.add_argument("--split", choices=("train", "val", "test"))
        parser.add_argument("--modality", choices=UNIMODAL_MODALITIES, help="Stream of a cross-modal checkpoint")

    def run(self, **options):
        path = extract_manifest_features(
            options["ckpt"], options["manifest"], options["out"], options["split"], options["modality"]
        )
        self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
