# improvr.actions.py
"""Action models.  Each action moves one object; its templates are the
possible reference frames for the goal pose (every other object, plus the
object's own start pose) and each template keeps the relative goal poses seen
in the demonstrations.  Goal states are sampled from a template, mapped into
the world frame and merged by complete-linkage clustering.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import linkage, fcluster
from scipy.spatial.distance import squareform

from improvr.demonstrations import extract_action_samples
from improvr.exceptions import ModelError
from improvr.geometry import (Pose, PoseDistanceParams, stack_poses,
    unstack_poses, compose_batch, pairwise_distances, perturb_poses,
    mean_pose)

logger = logging.getLogger(__name__)

NOOP_ID = 'noop'

# ============================================================================
# Data Types
# ============================================================================

@dataclass(frozen=True)
class ActionTemplate:
    """Moves the action's object to a pose relative to
    ``reference_object``."""
    template_id: str
    reference_object: str
    samples: tuple

    def __post_init__(self):
        if not self.samples:
            raise ModelError('template %s has no samples' % (
                self.template_id))

    @cached_property
    def arrays(self):
        return stack_poses(self.samples)

    def to_json(self):
        return {
            'id':self.template_id,
            'reference':self.reference_object,
            'samples':[p.to_json() for p in self.samples],
        }

    @classmethod
    def from_json(cls, data):
        return cls(str(data['id']), str(data['reference']),
            tuple(Pose.from_json(p) for p in data['samples']))


@dataclass(frozen=True)
class ActionModel:
    action_id: str
    object_id: Optional[str]
    templates: tuple = ()
    bandwidth: PoseDistanceParams = PoseDistanceParams()
    is_noop: bool = False

    def __post_init__(self):
        if self.is_noop:
            return

        if not self.templates:
            raise ModelError('action %s has no templates' % self.action_id)

        references = [t.reference_object for t in self.templates]
        if len(set(references)) != len(references):
            raise ModelError('action %s repeats a reference object' % (
                self.action_id))

    def __str__(self):
        return 'ActionModel(%s, %s templates)' % (self.action_id,
            len(self.templates))

    @classmethod
    def noop(cls):
        return cls(NOOP_ID, None, is_noop=True)

    def template(self, template_id):
        for template in self.templates:
            if template.template_id == template_id:
                return template

        raise KeyError(template_id)

    def to_json(self):
        return {
            'id':self.action_id,
            'object':self.object_id,
            'noop':self.is_noop,
            'templates':[t.to_json() for t in self.templates],
        }

    @classmethod
    def from_json(cls, data, bandwidth):
        return cls(str(data['id']), data.get('object'),
            tuple(ActionTemplate.from_json(t) for t in data['templates']),
            bandwidth, bool(data.get('noop', False)))


@dataclass(frozen=True)
class GoalCandidate:
    state: object
    probability: float
    cluster_size: int

# ============================================================================
# Model Construction
# ============================================================================

def build_action_models(demo_set, bandwidth=PoseDistanceParams()):
    """One :class:`ActionModel` per manipulated object, with a template per
    other object plus the self template, followed by the no-op model."""
    models = []
    for object_id, templates in extract_action_samples(demo_set).items():
        models.append(ActionModel('move_%s' % object_id, object_id,
            tuple(ActionTemplate(ref, ref, tuple(samples))
                for ref, samples in templates.items()), bandwidth))

        logger.info('action %s: %s templates, %s samples each',
            models[-1].action_id, len(templates),
            len(next(iter(templates.values()))))

    models.append(ActionModel.noop())
    return models


def template_prior(model):
    """Uniform prior over the templates of an action.

    :raises ModelError:
        for the no-op model, which has no templates
    """
    if model.is_noop:
        raise ModelError('the no-op action has no templates')

    return 1.0 / len(model.templates)

# ============================================================================
# Goal Sampling
# ============================================================================

def cluster_poses(translations, quats, params, cutoff):
    """Complete-linkage clustering under the pose distance scaled to meters
    (``sigma_t * pose_distance``) with a distance cutoff.

    :returns:
        list of member index lists, ordered by first member
    """
    count = len(translations)
    if count == 1:
        return [[0]]

    distances = pairwise_distances(translations, quats, params) * \
        params.sigma_t
    tree = linkage(squareform(distances, checks=False), method='complete')
    labels = fcluster(tree, t=cutoff, criterion='distance')

    clusters = {}
    for index, label in enumerate(labels):
        clusters.setdefault(label, []).append(index)

    return list(clusters.values())


def goal_candidates(model, template, state, translations, quats, clusters):
    """Builds one :class:`GoalCandidate` per cluster of relative goal poses.
    Poses are mapped to the world through the reference object's pose in
    ``state``; only the action's object changes."""
    reference = state[template.reference_object]
    world_t, world_q = compose_batch(reference, translations, quats)
    poses = unstack_poses(world_t, world_q)

    total = sum(len(members) for members in clusters)
    candidates = []
    for members in clusters:
        pose = mean_pose([poses[i] for i in members])
        candidates.append(GoalCandidate(state.with_pose(model.object_id,
            pose), len(members) / total, len(members)))

    return candidates


def sample_goal_candidates(model, template, state, S, delta_c, seed,
        noise=True):
    """Samples ``S`` goal poses for ``model``'s object from ``template`` and
    merges them into candidate goal states.

    :param S:
        number of draws, with replacement, from the template's samples
    :param delta_c:
        cluster cutoff in meters-equivalent
    :param seed:
        integer seed or ``numpy.random.Generator``
    :param noise:
        ``True`` to perturb each draw with kernel noise (a draw from the
        density), ``False`` to use the demonstrated poses verbatim
    :returns:
        list of :class:`GoalCandidate` whose probabilities sum to one
    """
    if S < 1:
        raise ValueError('S must be at least 1')
    if template not in model.templates:
        raise ModelError('template %s does not belong to %s' % (
            template.template_id, model.action_id))

    rng = np.random.default_rng(seed)
    modes_t, modes_q = template.arrays
    picks = rng.integers(0, len(template.samples), S)
    translations, quats = modes_t[picks], modes_q[picks]
    if noise:
        translations, quats = perturb_poses(translations, quats,
            model.bandwidth, rng)

    # the pose distance is invariant to a common left transform, so the
    # clusters of the relative poses are the clusters of the world poses
    clusters = cluster_poses(translations, quats, model.bandwidth, delta_c)
    return goal_candidates(model, template, state, translations, quats,
        clusters)
