# improvr.render.py
"""Top-down SVG drawings of states and plans.  The workspace is drawn as a
rectangle, objects as rotated rectangles of their box footprint and
trajectories as polylines.  A plan gets one frame per step plus a frame for
its final state."""
import logging, json, math

from django.template.loader import render_to_string

from improvr.exceptions import ImprovrError
from improvr.geometry import WorldState
from improvr.planner import Plan

logger = logging.getLogger(__name__)

FRAME_WIDTH = 400
FRAME_GAP = 20


class Projection:
    """Maps world xy coordinates into frame pixels, y pointing down."""
    def __init__(self, scene, width=FRAME_WIDTH):
        (self.xmin, self.ymin, _), (xmax, self.ymax, _) = scene.workspace
        self.scale = width / (xmax - self.xmin)
        self.width = width
        self.height = int(math.ceil((self.ymax - self.ymin) * self.scale))

    def __call__(self, x, y):
        return (x - self.xmin) * self.scale, (self.ymax - y) * self.scale


def _boxes(scene, state, projection, moving=None):
    boxes = []
    for object_id, pose in state.items:
        hx, hy, _ = scene.shape(object_id)
        cx, cy = projection(pose.translation[0], pose.translation[1])
        width, height = 2 * hx * projection.scale, 2 * hy * projection.scale
        boxes.append({
            'id':object_id,
            'cx':'%.2f' % cx,
            'cy':'%.2f' % cy,
            'x':'%.2f' % (cx - width / 2),
            'y':'%.2f' % (cy - height / 2),
            'width':'%.2f' % width,
            'height':'%.2f' % height,
            # y is flipped, so rotations turn the other way
            'angle':'%.2f' % -math.degrees(pose.yaw),
            'moving':object_id == moving,
        })

    return boxes


def _frame(index, label, scene, state, projection, step=None):
    frame = {
        'offset':index * (projection.width + FRAME_GAP),
        'label':label,
        'boxes':_boxes(scene, state, projection,
            step.object_id if step else None),
        'path':'',
    }
    if step is not None and step.trajectory is not None:
        frame['path'] = ' '.join('%.2f,%.2f' % projection(p.translation[0],
            p.translation[1]) for p in step.trajectory.waypoints)

    return frame


def render_svg(scene, source, title='improvr'):
    """
    :param scene:
        :class:`improvr.feasibility.SceneSpec`
    :param source:
        :class:`improvr.geometry.WorldState` or
        :class:`improvr.planner.Plan`
    :returns:
        SVG document as a string
    """
    projection = Projection(scene)
    if isinstance(source, Plan):
        frames = []
        state = source.start_state
        for index, step in enumerate(source.steps):
            frames.append(_frame(index, 'step %s: %s / %s' % (index + 1,
                step.action_id, step.template_id), scene, state, projection,
                step))
            state = step.goal_state

        frames.append(_frame(len(frames), 'final', scene,
            source.final_state, projection))
    else:
        frames = [_frame(0, 'state', scene, source, projection)]

    context = {
        'title':title,
        'frames':frames,
        'frame_width':projection.width,
        'frame_height':projection.height,
        'width':len(frames) * (projection.width + FRAME_GAP) - FRAME_GAP,
        'height':projection.height,
    }
    return render_to_string('improvr/scene.svg', context)


def load_render_source(path):
    """Reads a plan file or a state file."""
    try:
        with open(path) as f:
            data = json.load(f)

        if isinstance(data, dict) and 'steps' in data:
            return Plan.from_json(data)

        return WorldState.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ImprovrError('%s: %s' % (path, e))
