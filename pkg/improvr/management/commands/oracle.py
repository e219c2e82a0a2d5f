# improvr.management.commands.oracle.py
from improvr.feasibility import SceneSpec
from improvr.geometry import WorldState
from improvr.management.commands._options import (ImprovrCommand,
    add_config_argument)
from improvr.models import TaskModel
from improvr.oracle import DiscretizedProblem, enumerate_optimal

# =============================================================================

class Command(ImprovrCommand):
    help = ('(debugging) Exhaustively searches plans over the demonstrated '
        'goal poses and optionally compares the planner on the same space')

    def add_arguments(self, parser):
        parser.add_argument('--model', required=True, metavar='PATH')
        parser.add_argument('--scene', required=True, metavar='PATH')
        parser.add_argument('--start', required=True, metavar='PATH')
        parser.add_argument('--horizon', type=int, default=2,
            help='maximum number of actions, default 2')
        parser.add_argument('--action-cost', type=float)
        parser.add_argument('--waypoints', type=int)
        parser.add_argument('--iterations', type=int)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--check', action='store_true',
            help='also run the planner on the discretized problem')
        add_config_argument(parser)

    def handle(self, *args, **options):
        values = self.merged_options(options)
        model = TaskModel.load(options['model'])
        scene = SceneSpec.load(options['scene'])
        s0 = WorldState.load(options['start'])

        problem = DiscretizedProblem.from_task_model(model, scene, s0,
            options['horizon'], values['action_cost'], values['waypoints'])
        value, plan = enumerate_optimal(problem)
        self.stdout.write('paths: %s' % problem.path_count())
        self.stdout.write('oracle value: %.9g (%s steps)' % (value,
            len(plan.steps)))

        if options['check']:
            planner = problem.planner(values['iterations'], values['seed'])
            found = planner.solve(s0)
            self.stdout.write('planner value: %.9g (%s steps)' % (
                found.value, len(found.steps)))
