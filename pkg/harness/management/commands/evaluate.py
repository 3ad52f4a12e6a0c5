import json
from pathlib import Path

from django.core.management.base import CommandError

from harness.management.commands._base import ExperimentCommand
from harness.stages import evaluate, score_features, score_manifests


class Command(ExperimentCommand):
    help = (
        "Score a recognition protocol. Give --data for the test split of a "
        "preprocessed directory, --gallery/--probe manifests, or --gallery/--probe "
        "exported .bin feature files"
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--protocol", help="huang, wang, jin or a custom .json protocol")
        parser.add_argument("--data", help="Preprocessed data directory")
        parser.add_argument("--gallery")
        parser.add_argument("--probe")
        parser.add_argument("--gan")
        parser.add_argument("--color")
        parser.add_argument("--depth")
        parser.add_argument("--crossmodal")
        parser.add_argument("--normalization", choices=("minmax", "zscore"))

    def run(self, **options):
        config = self.experiment_config(
            options,
            **{
                "evaluation.protocol": options["protocol"],
                "evaluation.normalization": options["normalization"],
            },
        )
        out = Path(options["out"]) if options["out"] else config.out_dir / "reports"
        gallery, probe = options["gallery"], options["probe"]
        checkpoints = {name: options[name] for name in ("gan", "color", "depth", "crossmodal")}

        if gallery and probe and gallery.endswith(".bin") and probe.endswith(".bin"):
            payload, _ = score_features(probe, gallery, out, workers=config.evaluation["workers"])
        elif gallery and probe:
            report, _ = score_manifests(config, gallery, probe, out, **checkpoints)
            payload = report.as_dict()
        elif options["data"]:
            report, _ = evaluate(config, options["data"], out, **checkpoints)
            payload = report.as_dict()
        else:
            raise CommandError("Give --data, or both --gallery and --probe")
        self.stdout.write(json.dumps(payload, indent=2, sort_keys=True))
