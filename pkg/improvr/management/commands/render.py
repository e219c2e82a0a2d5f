# improvr.management.commands.render.py
from improvr.feasibility import SceneSpec
from improvr.management.commands._options import ImprovrCommand
from improvr.render import render_svg, load_render_source

# =============================================================================

class Command(ImprovrCommand):
    help = 'Draws a state or a plan from above as SVG'

    def add_arguments(self, parser):
        parser.add_argument('--scene', required=True, metavar='PATH')
        parser.add_argument('--input', required=True, metavar='PATH',
            help='state or plan file')
        parser.add_argument('--out', required=True, metavar='PATH')

    def handle(self, *args, **options):
        scene = SceneSpec.load(options['scene'])
        source = load_render_source(options['input'])
        svg = render_svg(scene, source, title=options['input'])

        with open(options['out'], 'w') as f:
            f.write(svg)
