from harness.management.commands._base import ExperimentCommand
from harness.stages import reconstruct_directory


class Command(ExperimentCommand):
    help = "Generate depth maps for the colour images of a preprocessed directory"

    def add_arguments(self, parser):
        parser.add_argument("--ckpt", required=True, help="GAN checkpoint")
        parser.add_argument("--in", dest="in_dir", required=True, help="Directory holding manifest.jsonl")
        parser.add_argument("--out", required=True)
        parser.add_argument("--split", choices=("train", "val", "test"))

    def run(self, **options):
        manifest = reconstruct_directory(options["ckpt"], options["in_dir"], options["out"], options["split"])
        self.stdout.write(self.style.SUCCESS(f"Wrote {manifest}"))
