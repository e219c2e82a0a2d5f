# improvr.management.commands.plan.py
import logging

from improvr.feasibility import SceneSpec
from improvr.geometry import WorldState
from improvr.management.commands._options import (ImprovrCommand,
    add_config_argument, add_planner_arguments)
from improvr.models import TaskModel
from improvr.planner import PlannerConfig, Planner

logger = logging.getLogger(__name__)

# =============================================================================

class Command(ImprovrCommand):
    help = ('Plans from a start state with a learned model.  Exits with 2 '
        'when no feasible plan exists and 3 when the start state is '
        'infeasible')

    def add_arguments(self, parser):
        parser.add_argument('--model', required=True, metavar='PATH')
        parser.add_argument('--scene', required=True, metavar='PATH')
        parser.add_argument('--start', required=True, metavar='PATH',
            help='start state file, object id to pose')
        parser.add_argument('--out', required=True, metavar='PATH',
            help='plan file to write')
        parser.add_argument('--tree-out', metavar='PATH',
            help='also write the search tree as cytoscape JSON')
        add_planner_arguments(parser)
        add_config_argument(parser)

    def handle(self, *args, **options):
        values = self.merged_options(options)
        model = TaskModel.load(options['model'])
        scene = SceneSpec.load(options['scene'])
        model.check_scene(scene)
        s0 = WorldState.load(options['start'])

        config = PlannerConfig.from_options(values, model)
        planner = Planner(model.intention, model.actions, scene, config)
        plan = planner.solve(s0)
        plan.save(options['out'])

        if options.get('tree_out'):
            with open(options['tree_out'], 'w') as f:
                f.write(planner.tree.cytoscape_json())

        self.stdout.write('value: %.6g' % plan.value)
        self.stdout.write('steps: %s' % len(plan.steps))
        for index, step in enumerate(plan.steps):
            self.stdout.write('  %s. %s relative to %s' % (index + 1,
                step.action_id, step.template_id))
        self.stdout.write('iterations: %s' % plan.iterations_used)
