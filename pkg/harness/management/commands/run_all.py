from django.core.management import call_command

from harness.management.commands._base import ExperimentCommand
from harness.models import STAGES
from harness.pipeline import run_pipeline


class Command(ExperimentCommand):
    help = "Run the experiment stages end to end and record them in the run ledger"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--resume", action="store_true", help="Skip stages whose outputs are intact")
        parser.add_argument("--stages", nargs="+", metavar="STAGE", help=f"Subset of {', '.join(STAGES)}")

    def run(self, **options):
        config = self.experiment_config(options, out_dir=str(options["out"]) if options["out"] else None)
        call_command("migrate", verbosity=0, interactive=False)
        record = run_pipeline(config, stages=options["stages"], resume=options["resume"])
        for entry in record.stages.all():
            self.stdout.write(f"{entry.stage:<18} {entry.outcome:<10} {entry.wall_clock_seconds:8.1f}s {entry.metrics}")
        self.stdout.write(self.style.SUCCESS(f"Run {record.pk} finished in {record.out_dir}"))
