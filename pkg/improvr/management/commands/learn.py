# improvr.management.commands.learn.py
import logging

from improvr.demonstrations import load_demo_set
from improvr.exceptions import SceneError
from improvr.feasibility import SceneSpec
from improvr.geometry import PoseDistanceParams
from improvr.management.commands._options import (ImprovrCommand,
    add_config_argument, add_bandwidth_arguments)
from improvr.models import TaskModel

logger = logging.getLogger(__name__)

# =============================================================================

class Command(ImprovrCommand):
    help = ('Learns intention and action models from demonstration files '
        'and writes them as a model file')

    def add_arguments(self, parser):
        parser.add_argument('demos', nargs='+', metavar='DEMO',
            help='raw trace or pre-segmented demonstration files')
        parser.add_argument('--out', required=True, metavar='PATH',
            help='model file to write')
        parser.add_argument('--scene', metavar='PATH',
            help='scene file every demonstrated object must appear in')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--entropy-samples', type=int,
            help='Monte Carlo samples per relation entropy')
        parser.add_argument('--eps-move', type=float,
            help='per-frame motion threshold for segmentation')
        parser.add_argument('--min-frames', type=int,
            help='shortest accepted manipulation, in frames')
        parser.add_argument('--hand-radius', type=float,
            help='hand to object distance for attributing motion')
        add_bandwidth_arguments(parser)
        add_config_argument(parser)

    def handle(self, *args, **options):
        values = self.merged_options(options)
        demo_set = load_demo_set(options['demos'], values['eps_move'],
            values['min_frames'], values['hand_radius'],
            values['eps_static_t'], values['eps_static_r'])

        if options.get('scene'):
            scene = SceneSpec.load(options['scene'])
            missing = [k for k in demo_set.object_ids if k not in
                scene.objects]
            if missing:
                raise SceneError('%s: no shape for %s' % (options['scene'],
                    ', '.join(missing)))

        bandwidth = PoseDistanceParams(values['sigma_t'], values['sigma_r'])
        model = TaskModel.learn(demo_set, bandwidth,
            values['entropy_samples'], values['seed'])
        model.save(options['out'])

        self.stdout.write('%-24s %12s %12s' % ('pair', 'entropy', 'weight'))
        for relation in model.intention.relations:
            self.stdout.write('%-24s %12.4f %12.6f' % ('%s|%s' % (
                relation.pair[0], relation.pair[1]), relation.entropy,
                relation.weight))

        self.stdout.write('%s demonstrations, model written to %s' % (
            demo_set.N, options['out']))
