# improvr.geometry.py
"""Rigid-body pose algebra.  Poses are immutable: a translation in meters and
a unit quaternion stored as ``(w, x, y, z)`` in canonical sign (``w >= 0``, or
the first non-zero vector component positive when ``w == 0``).  Rotation
arithmetic is delegated to :class:`scipy.spatial.transform.Rotation`, which
uses scalar-last quaternions, so conversion happens at the boundary.
"""
import logging, json, math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.transform import Rotation

from improvr.exceptions import ImprovrError, ModelError

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9

# ============================================================================
# Quaternion helpers
# ============================================================================

def canonical_quaternions(quats):
    """Normalizes an ``(N, 4)`` array of ``(w, x, y, z)`` quaternions and flips
    each into canonical sign."""
    quats = np.asarray(quats, dtype=float)
    norms = np.linalg.norm(quats, axis=1)
    if np.any(norms == 0.0):
        raise ValueError('zero-length quaternion')

    # unit quaternions are left bit for bit unchanged
    quats = quats / np.where(np.abs(norms - 1.0) > 1e-12, norms,
        1.0)[:, None]
    leading = quats[np.arange(len(quats)), np.argmax(quats != 0.0, axis=1)]
    return quats * np.where(leading < 0, -1.0, 1.0)[:, None]


def _to_scipy(quats):
    return np.asarray(quats)[..., [1, 2, 3, 0]]


def _from_scipy(quats):
    return np.asarray(quats)[..., [3, 0, 1, 2]]


def fold_angles(angles):
    """Folds arbitrary rotation angles onto ``[0, pi]``."""
    angles = np.mod(np.abs(angles), 2 * math.pi)
    return np.where(angles > math.pi, 2 * math.pi - angles, angles)

# ============================================================================
# Pose
# ============================================================================

@dataclass(frozen=True)
class Pose:
    """Rigid transform: applies ``rotation`` then adds ``translation``."""
    translation: tuple = (0.0, 0.0, 0.0)
    rotation: tuple = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        translation = tuple(float(v) for v in self.translation)
        if len(translation) != 3:
            raise ValueError('translation needs 3 components')

        rotation = np.asarray(self.rotation, dtype=float)
        if rotation.shape != (4,):
            raise ValueError('rotation needs 4 components')

        rotation = canonical_quaternions(rotation[None, :])[0]
        object.__setattr__(self, 'translation', translation)
        object.__setattr__(self, 'rotation', tuple(float(v) for v in
            rotation))

    def __str__(self):
        return 'Pose(t=(%.4f, %.4f, %.4f), yaw=%.1fdeg)' % (
            self.translation + (math.degrees(self.yaw), ))

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_rotation(cls, rotation, translation=(0.0, 0.0, 0.0)):
        """Builds a ``Pose`` from a scipy ``Rotation`` and a translation."""
        return cls(translation, _from_scipy(rotation.as_quat()))

    @classmethod
    def from_yaw(cls, yaw, translation=(0.0, 0.0, 0.0)):
        """Builds a ``Pose`` rotated by ``yaw`` radians about the z-axis."""
        return cls(translation, (math.cos(yaw / 2), 0.0, 0.0,
            math.sin(yaw / 2)))

    @classmethod
    def from_json(cls, data):
        """Parses ``{"t":[x,y,z], "q":[w,x,y,z]}``."""
        try:
            return cls(data['t'], data['q'])
        except (KeyError, TypeError) as e:
            raise ValueError('malformed pose %r: %s' % (data, e))

    def to_json(self):
        return {
            't':list(self.translation),
            'q':list(self.rotation),
        }

    @property
    def t(self):
        return np.array(self.translation)

    @property
    def q(self):
        return np.array(self.rotation)

    @cached_property
    def scipy_rotation(self):
        return Rotation.from_quat(_to_scipy(self.rotation))

    @property
    def yaw(self):
        """Heading of the x-axis in the xy-plane, radians."""
        x_axis = self.scipy_rotation.apply([1.0, 0.0, 0.0])
        return math.atan2(x_axis[1], x_axis[0])

    def as_matrix(self):
        """Homogeneous 4x4 transform."""
        matrix = np.eye(4)
        matrix[:3, :3] = self.scipy_rotation.as_matrix()
        matrix[:3, 3] = self.translation
        return matrix

    def isclose(self, other, tol=TOLERANCE):
        """Component-wise comparison that treats ``q`` and ``-q`` as equal."""
        if np.max(np.abs(self.t - other.t)) > tol:
            return False

        diff = min(np.max(np.abs(self.q - other.q)),
            np.max(np.abs(self.q + other.q)))
        return diff <= tol

    def raised(self, height):
        """Returns this pose translated by ``height`` along world z."""
        x, y, z = self.translation
        return Pose((x, y, z + height), self.rotation)


def translate(x, y, z):
    return Pose((x, y, z))


@dataclass(frozen=True)
class PoseDistanceParams:
    """Bandwidths of the pose kernel: ``sigma_t`` in meters, ``sigma_r`` in
    radians."""
    sigma_t: float = 0.02
    sigma_r: float = 0.1

    def __post_init__(self):
        if not (self.sigma_t > 0 and self.sigma_r > 0):
            raise ValueError('bandwidths must be strictly positive')

    @property
    def normalizer(self):
        """Kernel normalizer ``(2 pi)^(3/2) sigma_t^3 * sqrt(2 pi) sigma_r``.
        The rotation factor is a pseudo-normalizer shared by every relation.
        """
        return ((2 * math.pi) ** 1.5 * self.sigma_t ** 3
            * math.sqrt(2 * math.pi) * self.sigma_r)

    @classmethod
    def from_json(cls, data):
        return cls(float(data['sigma_t']), float(data['sigma_r']))

    def to_json(self):
        return {
            'sigma_t':self.sigma_t,
            'sigma_r':self.sigma_r,
        }

# ============================================================================
# Pose algebra
# ============================================================================

def compose(a, b):
    """Transform equal to applying ``b`` then ``a``."""
    rotation = a.scipy_rotation
    return Pose.from_rotation(rotation * b.scipy_rotation,
        a.t + rotation.apply(b.t))


def inverse(a):
    rotation = a.scipy_rotation.inv()
    return Pose.from_rotation(rotation, -rotation.apply(a.t))


def relative_pose(ref, target):
    """Pose of ``target`` expressed in the frame of ``ref``, so that
    ``compose(ref, relative_pose(ref, target)) == target``."""
    return compose(inverse(ref), target)


def rotation_angle(qa, qb):
    """Geodesic angle between two quaternions, in ``[0, pi]``."""
    dot = min(1.0, abs(float(np.dot(qa, qb))))
    return 2 * math.acos(dot)


def pose_distance(a, b, params):
    """Bandwidth-normalized distance ``sqrt(|dt|^2/sigma_t^2 +
    theta^2/sigma_r^2)``."""
    offset = a.t - b.t
    theta = rotation_angle(a.q, b.q)
    return math.sqrt(float(np.dot(offset, offset)) / params.sigma_t ** 2
        + theta ** 2 / params.sigma_r ** 2)


def mean_pose(poses):
    """Average pose of a tight cluster: arithmetic mean translation and the
    normalized component mean of the quaternions after sign-aligning each to
    the first one.

    :raises ModelError:
        if ``poses`` is empty
    """
    if not poses:
        raise ModelError('cannot average an empty cluster')

    translations, quats = stack_poses(poses)
    signs = np.where(quats @ quats[0] < 0, -1.0, 1.0)
    quat = (quats * signs[:, None]).mean(axis=0)
    return Pose(translations.mean(axis=0), quat)

# ============================================================================
# Batch helpers
# ============================================================================

def stack_poses(poses):
    """Returns ``(translations, quaternions)`` as ``(N, 3)`` and ``(N, 4)``
    arrays."""
    translations = np.array([p.translation for p in poses], dtype=float)
    quats = np.array([p.rotation for p in poses], dtype=float)
    return translations.reshape(-1, 3), quats.reshape(-1, 4)


def unstack_poses(translations, quats):
    return [Pose(t, q) for t, q in zip(translations, quats)]


def batch_distances(translations, quats, pose, params):
    """Distances between each stacked pose and a single ``pose``."""
    offsets = translations - pose.t
    dots = np.minimum(1.0, np.abs(quats @ pose.q))
    thetas = 2 * np.arccos(dots)
    return np.sqrt(np.sum(offsets ** 2, axis=1) / params.sigma_t ** 2
        + thetas ** 2 / params.sigma_r ** 2)


def pairwise_distances(translations, quats, params):
    """Square ``(N, N)`` matrix of :func:`pose_distance` values."""
    offsets = translations[:, None, :] - translations[None, :, :]
    dots = np.minimum(1.0, np.abs(quats @ quats.T))
    thetas = 2 * np.arccos(dots)
    distances = np.sqrt(np.sum(offsets ** 2, axis=2) / params.sigma_t ** 2
        + thetas ** 2 / params.sigma_r ** 2)
    np.fill_diagonal(distances, 0.0)
    return distances


def compose_batch(pose, translations, quats):
    """Left-multiplies every stacked pose by ``pose``."""
    rotation = pose.scipy_rotation
    rotations = rotation * Rotation.from_quat(_to_scipy(quats))
    return (pose.t + rotation.apply(translations),
        canonical_quaternions(_from_scipy(rotations.as_quat())))


def perturb_poses(translations, quats, params, rng):
    """Draws one kernel sample around each stacked pose: Gaussian translation
    noise with ``sigma_t`` per axis, and a rotation about a uniformly random
    axis by a folded Gaussian angle with ``sigma_r``.  The random draws are
    made in a fixed order so results are reproducible for a seeded
    generator.
    """
    count = len(translations)
    translations = translations + rng.normal(0.0, params.sigma_t, (count, 3))

    axes = rng.normal(size=(count, 3))
    axes /= np.linalg.norm(axes, axis=1)[:, None]
    angles = fold_angles(rng.normal(0.0, params.sigma_r, count))

    noise = Rotation.from_rotvec(axes * angles[:, None])
    rotations = noise * Rotation.from_quat(_to_scipy(quats))
    return translations, canonical_quaternions(
        _from_scipy(rotations.as_quat()))

# ============================================================================
# World state
# ============================================================================

@dataclass(frozen=True)
class WorldState:
    """Immutable mapping from object id to :class:`Pose`, kept sorted by id.
    Build instances with :func:`WorldState.factory`."""
    items: tuple = ()

    @classmethod
    def factory(cls, poses):
        """
        :param poses:
            dictionary or iterable of ``(object_id, Pose)`` pairs
        """
        if isinstance(poses, dict):
            poses = poses.items()

        return cls(tuple(sorted((str(k), v) for k, v in poses)))

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise ValueError('state must be an object mapping ids to poses')

        return cls.factory({k:Pose.from_json(v) for k, v in data.items()})

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                return cls.from_json(json.load(f))
        except (OSError, ValueError, TypeError) as e:
            raise ImprovrError('%s: %s' % (path, e))

    def to_json(self):
        return {k:v.to_json() for k, v in self.items}

    def __str__(self):
        return 'WorldState(%s)' % ', '.join(k for k, _ in self.items)

    def __getitem__(self, object_id):
        for key, pose in self.items:
            if key == object_id:
                return pose

        raise KeyError(object_id)

    def __contains__(self, object_id):
        return any(key == object_id for key, _ in self.items)

    def __len__(self):
        return len(self.items)

    @property
    def ids(self):
        return [k for k, _ in self.items]

    @property
    def poses(self):
        return dict(self.items)

    def with_pose(self, object_id, pose):
        """Returns a copy with ``object_id`` moved to ``pose``; every other
        pose is shared unchanged."""
        if object_id not in self:
            raise KeyError(object_id)

        return WorldState(tuple((k, pose if k == object_id else v)
            for k, v in self.items))

    def moved_objects(self, other, eps_t, eps_r):
        """Ids whose pose differs from ``other`` by more than ``eps_t``
        meters or ``eps_r`` radians."""
        moved = []
        for key, pose in self.items:
            target = other[key]
            offset = float(np.linalg.norm(pose.t - target.t))
            if offset > eps_t or rotation_angle(pose.q, target.q) > eps_r:
                moved.append(key)

        return moved
