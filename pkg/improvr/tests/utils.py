# improvr.tests.utils.py
import math, os
from functools import lru_cache

import numpy as np

from improvr.actions import ActionModel, ActionTemplate
from improvr.demonstrations import (Frame, RawDemo, ActionSegment,
    SegmentedDemo, build_task_demo_set, load_demo_set)
from improvr.feasibility import SceneSpec
from improvr.geometry import (Pose, PoseDistanceParams, WorldState, compose,
    inverse)
from improvr.intention import IntentionModel
from improvr.models import TaskModel

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'data',
    'lid_box')
DEMO_PATHS = [os.path.join(DATA_DIR, 'demo_%02d.json' % i) for i in
    range(1, 6)]
SCENE_PATH = os.path.join(DATA_DIR, 'scene.json')

BANDWIDTH = PoseDistanceParams()
CUBE = (0.05, 0.05, 0.05)

# ============================================================================
# Scenes and States
# ============================================================================

def make_scene(objects=None, low=(-0.6, -0.6, 0.7), high=(0.6, 0.6, 1.3),
        support=0.75, reach=0.9, lift=0.15):
    if objects is None:
        objects = {'a':CUBE, 'b':CUBE}

    return SceneSpec(dict(objects), (low, high), support, reach, lift)


def resting_state(scene, **placements):
    """``placements`` maps object id to ``(x, y)`` or ``(x, y, yaw)``."""
    poses = {}
    for object_id, place in placements.items():
        x, y = place[0], place[1]
        yaw = place[2] if len(place) > 2 else 0.0
        poses[object_id] = scene.resting_pose(object_id, x, y, yaw)

    return WorldState.factory(poses)


def random_pose(rng, spread=0.5):
    quat = rng.normal(size=4)
    return Pose(rng.uniform(-spread, spread, 3), quat)

# ============================================================================
# Demonstrations
# ============================================================================

def raw_trace(xs, source='trace'):
    """Raw demo from per-frame x positions: ``xs`` maps object id to a list
    of x values, one per frame."""
    count = len(next(iter(xs.values())))
    frames = []
    for index in range(count):
        poses = {k:Pose((v[index], 0.3 * i, 0.8)) for i, (k, v) in
            enumerate(sorted(xs.items()))}
        frames.append(Frame(0.1 * index, WorldState.factory(poses)))

    return RawDemo(tuple(frames), {k:CUBE for k in xs}, source)


def one_step_demo(start, object_id, goal_pose, shapes=None):
    end = start.with_pose(object_id, goal_pose)
    segment = ActionSegment(object_id, start, end, (start[object_id],
        goal_pose))
    return SegmentedDemo((segment, ), end, shapes or {})


def offset_demo_set(count=5, offset=(0.2, 0.0, 0.0), jitter=0.003, seed=0):
    """Demonstrations of placing cube ``a`` at ``offset`` in the frame of
    cube ``b``."""
    rng = np.random.default_rng(seed)
    scene = make_scene()
    demos = []
    for _ in range(count):
        yaw = rng.uniform(-math.pi, math.pi)
        start = resting_state(scene, a=(rng.uniform(-0.4, 0.4), -0.4),
            b=(rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1), yaw))
        relative = Pose(np.asarray(offset) + rng.uniform(-jitter, jitter, 3))
        demos.append(one_step_demo(start, 'a', compose(start['b'],
            relative), {'a':CUBE, 'b':CUBE}))

    return build_task_demo_set(demos)


@lru_cache(maxsize=None)
def offset_task_model(seed=0):
    return TaskModel.learn(offset_demo_set(seed=seed), BANDWIDTH, M=200,
        seed=seed)


@lru_cache(maxsize=None)
def lid_box_model():
    demo_set = load_demo_set(DEMO_PATHS, 0.002, 3)
    return TaskModel.learn(demo_set, BANDWIDTH, M=300, seed=0)

# ============================================================================
# Hand built models
# ============================================================================

def single_relation_intention(pair=('a', 'b'), offsets=((0.2, 0, 0), ),
        M=200, seed=0):
    """Intention model over ``pair`` and its reverse with one mode per
    offset."""
    samples = [Pose(offset) for offset in offsets]
    relations = {
        pair:samples,
        (pair[1], pair[0]):[inverse(p) for p in samples],
    }
    return IntentionModel.factory(relations, BANDWIDTH, M, seed)


def move_action(object_id, references, samples=None):
    """Action model moving ``object_id`` with one template per reference;
    the template samples default to the identity pose."""
    samples = samples or (Pose(), )
    templates = tuple(ActionTemplate(ref, ref, tuple(samples)) for ref in
        references)
    return ActionModel('move_%s' % object_id, object_id, templates,
        BANDWIDTH)
