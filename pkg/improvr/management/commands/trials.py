# improvr.management.commands.trials.py
import logging

from django.core.management.base import CommandError

from improvr.feasibility import SceneSpec
from improvr.management.commands._options import (ImprovrCommand,
    add_config_argument, add_planner_arguments)
from improvr.models import TaskModel
from improvr.planner import PlannerConfig
from improvr.trials import run_trials

logger = logging.getLogger(__name__)

# =============================================================================

class Command(ImprovrCommand):
    help = ('Plans from randomly sampled feasible start states and reports '
        'full successes, partial solutions and failures')

    def add_arguments(self, parser):
        parser.add_argument('--model', required=True, metavar='PATH')
        parser.add_argument('--scene', required=True, metavar='PATH')
        parser.add_argument('--trials', type=int, default=50,
            help='number of trials, default 50')
        parser.add_argument('--out', metavar='PATH',
            help='report file to write')
        add_planner_arguments(parser)
        add_config_argument(parser)

    def handle(self, *args, **options):
        if options['trials'] < 1:
            raise CommandError('--trials must be at least 1')

        values = self.merged_options(options)
        model = TaskModel.load(options['model'])
        scene = SceneSpec.load(options['scene'])
        config = PlannerConfig.from_options(values, model)

        report = run_trials(model, scene, options['trials'], config)
        if options.get('out'):
            report.save(options['out'])

        self.stdout.write(report.summary())
        self.stdout.write('full-solution threshold: %.6g' % report.threshold)
