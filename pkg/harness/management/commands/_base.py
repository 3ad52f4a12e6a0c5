from django.core.management.base import BaseCommand, CommandError

from depth_hfr.exceptions import DepthHfrError
from harness.config import default_config, load_config


class ExperimentCommand(BaseCommand):
    """Shared --config / --seed / --out options; domain errors become exit codes.

    Exit codes: 2 invalid config, 3 missing stage dependency, 4 diverged
    training, 1 any other domain error.
    """

    def add_arguments(self, parser):
        parser.add_argument("--config", help="YAML or JSON experiment config")
        parser.add_argument("--seed", type=int, help="Master seed (overrides the config)")
        parser.add_argument("--out", help="Output directory")

    def experiment_config(self, options, **overrides):
        config = load_config(options["config"]) if options.get("config") else default_config()
        return config.override(seed=options.get("seed"), **overrides)

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except DepthHfrError as error:
            raise CommandError(str(error), returncode=error.exit_code) from error

    def run(self, **options):
        raise NotImplementedError
