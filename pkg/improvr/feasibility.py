# improvr.feasibility.py
"""Simulated geometric world used to decide whether states and trajectories
can be executed.  Objects are oriented boxes; inverse kinematics is replaced
by a reach test: an object is reachable when some point of the support plane
inside the workspace and outside every object footprint lies within
``reach_radius`` of it.  Trajectories follow a lift-carry-place profile and
are checked waypoint by waypoint.
"""
import logging, json, math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from improvr.exceptions import SceneError
from improvr.geometry import Pose, TOLERANCE

logger = logging.getLogger(__name__)

CONTACT_MARGIN = 1e-6

# unit pattern of candidate base positions: the center plus rings of points
_RINGS = 6
_SPOKES = 24
_angles = np.linspace(0.0, 2 * math.pi, _SPOKES, endpoint=False)
_REACH_PATTERN = np.vstack([np.zeros((1, 2))] + [
    (ring / _RINGS) * np.column_stack([np.cos(_angles), np.sin(_angles)])
    for ring in range(1, _RINGS + 1)])

# ============================================================================
# Scene
# ============================================================================

@dataclass(frozen=True)
class SceneSpec:
    """Static description of the world: box half-extents per object id,
    workspace bounds ``((xmin, ymin, zmin), (xmax, ymax, zmax))``, the height
    of the support plane, the reach radius and the lift height of
    trajectories."""
    objects: dict
    workspace: tuple
    support_height: float
    reach_radius: float = 0.9
    lift_height: float = 0.15

    def __post_init__(self):
        for object_id, extents in self.objects.items():
            if len(extents) != 3 or min(extents) <= 0:
                raise SceneError('object %s needs three positive '
                    'half-extents' % object_id)

        low, high = (np.asarray(b, dtype=float) for b in self.workspace)
        if low.shape != (3, ) or high.shape != (3, ) or np.any(low >= high):
            raise SceneError('degenerate workspace %r' % (self.workspace, ))
        if self.reach_radius <= 0:
            raise SceneError('reach_radius must be positive')
        if self.lift_height < 0:
            raise SceneError('lift_height must not be negative')

    def __str__(self):
        return 'SceneSpec(%s)' % ', '.join(sorted(self.objects))

    @classmethod
    def from_json(cls, data):
        try:
            objects = {str(o['id']):tuple(float(v) for v in o['box'])
                for o in data['objects']}
            low, high = data['workspace']
            return cls(objects, (tuple(float(v) for v in low),
                tuple(float(v) for v in high)),
                float(data['support_height']),
                float(data.get('reach_radius', 0.9)),
                float(data.get('lift_height', 0.15)))
        except (KeyError, TypeError, ValueError) as e:
            raise SceneError('malformed scene: %s' % e)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            raise SceneError('%s: %s' % (path, e))

        try:
            return cls.from_json(data)
        except SceneError as e:
            raise SceneError('%s: %s' % (path, e))

    def to_json(self):
        return {
            'workspace':[list(self.workspace[0]), list(self.workspace[1])],
            'support_height':self.support_height,
            'reach_radius':self.reach_radius,
            'lift_height':self.lift_height,
            'objects':[{'id':k, 'box':list(v)} for k, v in
                sorted(self.objects.items())],
        }

    def shape(self, object_id):
        try:
            return self.objects[object_id]
        except KeyError:
            raise SceneError('no shape for object %s' % object_id)

    def resting_pose(self, object_id, x, y, yaw):
        """Pose of an object lying on the support plane."""
        height = self.support_height + self.shape(object_id)[2]
        return Pose.from_yaw(yaw, (x, y, height))

# ============================================================================
# Box Geometry
# ============================================================================

_CORNER_SIGNS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1)
    for sz in (-1, 1)], dtype=float)


def box_corners(shape, pose):
    matrix = pose.as_matrix()
    local = _CORNER_SIGNS * np.asarray(shape, dtype=float)
    return local @ matrix[:3, :3].T + matrix[:3, 3]


def boxes_overlap(shape_a, pose_a, shape_b, pose_b, margin=CONTACT_MARGIN):
    """Separating axis test between two oriented boxes.  The candidate axes
    are the 3 + 3 face normals and the 9 edge cross products; boxes that
    only touch within ``margin`` do not overlap.
    """
    frame_a = pose_a.as_matrix()[:3, :3]
    frame_b = pose_b.as_matrix()[:3, :3]
    crosses = np.cross(frame_a.T[:, None, :], frame_b.T[None, :, :])
    axes = np.vstack([frame_a.T, frame_b.T, crosses.reshape(9, 3)])

    norms = np.linalg.norm(axes, axis=1)
    axes = axes[norms > 1e-9] / norms[norms > 1e-9][:, None]

    radius_a = np.abs(axes @ frame_a) @ np.asarray(shape_a, dtype=float)
    radius_b = np.abs(axes @ frame_b) @ np.asarray(shape_b, dtype=float)
    separation = np.abs(axes @ (pose_b.t - pose_a.t))
    return not np.any(separation > radius_a + radius_b - margin)


def _inside(corners, low, high):
    return bool(np.all(corners >= np.asarray(low) - TOLERANCE) and
        np.all(corners <= np.asarray(high) + TOLERANCE))


def _footprint(shape, pose):
    corners = box_corners(shape, pose)[:, :2]
    return np.concatenate([corners.min(axis=0), corners.max(axis=0)])


def _reachable(scene, position, footprints):
    drop = position[2] - scene.support_height
    spare = scene.reach_radius ** 2 - drop ** 2
    if spare < 0:
        return False

    points = position[:2] + math.sqrt(spare) * _REACH_PATTERN
    (xmin, ymin, _), (xmax, ymax, _) = scene.workspace
    keep = (points[:, 0] >= xmin) & (points[:, 0] <= xmax) & \
        (points[:, 1] >= ymin) & (points[:, 1] <= ymax)

    for box in footprints:
        keep &= ~((points[:, 0] > box[0]) & (points[:, 0] < box[2]) &
            (points[:, 1] > box[1]) & (points[:, 1] < box[3]))

    return bool(np.any(keep))

# ============================================================================
# State Checks
# ============================================================================

def state_feasible(scene, state):
    """``True`` when every object is inside the workspace, no two boxes
    overlap and every object is reachable."""
    boxes = [(k, scene.shape(k), pose) for k, pose in state.items]
    for object_id, shape, pose in boxes:
        if not _inside(box_corners(shape, pose), *scene.workspace):
            logger.debug('%s leaves the workspace', object_id)
            return False

    for index, (id_a, shape_a, pose_a) in enumerate(boxes):
        for id_b, shape_b, pose_b in boxes[index + 1:]:
            if boxes_overlap(shape_a, pose_a, shape_b, pose_b):
                logger.debug('%s collides with %s', id_a, id_b)
                return False

    footprints = [_footprint(shape, pose) for _, shape, pose in boxes]
    for object_id, _, pose in boxes:
        if not _reachable(scene, pose.t, footprints):
            logger.debug('%s is out of reach', object_id)
            return False

    return True

# ============================================================================
# Trajectories
# ============================================================================

@dataclass(frozen=True)
class Trajectory:
    """Waypoints of the moved object.  ``grasp_index`` is the first carry
    waypoint (end of the lift), ``place_index`` the last one."""
    object_id: str
    waypoints: tuple
    grasp_index: int
    place_index: int

    def to_json(self):
        return [p.to_json() for p in self.waypoints]


def generate_trajectory(scene, state, object_id, goal_pose, W):
    """Lift-carry-place motion of ``object_id`` from its pose in ``state``
    to ``goal_pose``: a quarter of the ``W`` waypoints raise the object by
    the scene's lift height, half carry it with linear translation and
    spherical rotation interpolation, and the last quarter lower it onto the
    goal.  The first and last waypoints are exactly the start and goal.
    """
    if W < 4:
        raise ValueError('a trajectory needs at least 4 waypoints')

    start = state[object_id]
    lift = scene.lift_height
    n_lift = max(1, W // 4)
    n_place = n_lift
    n_carry = W - n_lift - n_place

    waypoints = [start.raised(lift * i / n_lift) for i in range(n_lift)]

    high_start = start.raised(lift).t
    high_goal = goal_pose.raised(lift).t
    fractions = np.linspace(0.0, 1.0, n_carry)
    ends = Rotation.from_quat(np.vstack([start.scipy_rotation.as_quat(),
        goal_pose.scipy_rotation.as_quat()]))
    rotations = Slerp([0.0, 1.0], ends)(fractions)
    for index, fraction in enumerate(fractions):
        waypoints.append(Pose.from_rotation(rotations[index], high_start
            + fraction * (high_goal - high_start)))

    waypoints.extend(goal_pose.raised(lift * (1 - i / n_place))
        for i in range(1, n_place + 1))
    waypoints[0] = start
    waypoints[-1] = goal_pose

    return Trajectory(object_id, tuple(waypoints), n_lift,
        n_lift + n_carry - 1)


def trajectory_feasible(scene, state, trajectory):
    """Checks every waypoint of ``trajectory``: the moved box must not hit a
    static box, must stay inside the workspace (extended upwards by the lift
    height) and must stay reachable.  The final waypoint is checked as a
    full state.

    :returns:
        tuple ``(feasible, failing_index)`` with ``failing_index`` ``None``
        when feasible
    """
    object_id = trajectory.object_id
    if not trajectory.waypoints[0].isclose(state[object_id], 1e-6):
        raise ValueError('trajectory does not start at the pose of %s' % (
            object_id))

    shape = scene.shape(object_id)
    static = [(scene.shape(k), pose) for k, pose in state.items
        if k != object_id]
    footprints = [_footprint(s, p) for s, p in static]
    low, high = scene.workspace
    high = (high[0], high[1], high[2] + scene.lift_height)

    last = len(trajectory.waypoints) - 1
    for index, pose in enumerate(trajectory.waypoints):
        if index == last:
            if not state_feasible(scene, state.with_pose(object_id, pose)):
                return False, index
            break

        if not _inside(box_corners(shape, pose), low, high) or any(
                boxes_overlap(shape, pose, s, p) for s, p in static) or \
                not _reachable(scene, pose.t, footprints):
            logger.debug('%s blocked at waypoint %s', object_id, index)
            return False, index

    return True, None
