# improvr.models.py
"""Learned task models.

A :class:`TaskModel` bundles everything the planner needs to know about a
task: the intention model, the action models, the kernel bandwidth, the
object shapes seen in the demonstrations and the demonstrated final states.
Models are stored as JSON; floats are written with ``repr`` precision so a
saved model reloads bit for bit.
"""
import logging, json, math
from dataclasses import dataclass
from functools import cached_property

from improvr.actions import ActionModel, build_action_models
from improvr.demonstrations import extract_final_relations
from improvr.exceptions import ModelError, SceneError
from improvr.geometry import PoseDistanceParams, WorldState
from improvr.intention import IntentionModel, intention_likelihood

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TaskModel:
    intention: IntentionModel
    actions: tuple
    bandwidth: PoseDistanceParams
    shapes: dict
    final_states: tuple

    def __str__(self):
        return 'TaskModel(objects=%s, N=%s)' % (', '.join(
            self.intention.object_ids), len(self.final_states))

    @classmethod
    def learn(cls, demo_set, bandwidth=PoseDistanceParams(), M=1000, seed=0):
        """Learns the intention and action models of a task.

        :param demo_set:
            :class:`improvr.demonstrations.TaskDemoSet`
        :param bandwidth:
            :class:`improvr.geometry.PoseDistanceParams` shared by every
            kernel
        :param M:
            samples per relation entropy estimate
        :param seed:
            seed of the entropy estimates
        """
        if len(demo_set.object_ids) < 2:
            raise ModelError('a task needs at least two objects')

        intention = IntentionModel.factory(extract_final_relations(demo_set),
            bandwidth, M, seed)
        actions = tuple(build_action_models(demo_set, bandwidth))
        finals = tuple(demo.final_state for demo in demo_set.demos)
        return cls(intention, actions, bandwidth, dict(demo_set.shapes),
            finals)

    @property
    def movable_objects(self):
        return [a.object_id for a in self.actions if not a.is_noop]

    @cached_property
    def reference_psi(self):
        """Intention likelihood of the first demonstrated final state."""
        return intention_likelihood(self.intention, self.final_states[0])

    @cached_property
    def mean_demo_psi(self):
        values = [intention_likelihood(self.intention, s) for s in
            self.final_states]
        return sum(values) / len(values)

    def psi(self, state):
        return intention_likelihood(self.intention, state)

    def check_scene(self, scene):
        """Makes sure ``scene`` has every demonstrated object with the box
        it had in the demonstrations.

        :raises SceneError:
            for a missing object or a different box
        """
        for object_id, shape in sorted(self.shapes.items()):
            found = scene.shape(object_id)
            if any(not math.isclose(a, b, abs_tol=1e-9) for a, b in
                    zip(found, shape)):
                raise SceneError('scene box of %s is %s, the model was '
                    'learned with %s' % (object_id, list(found), list(shape)))

    # --------------------------------------------------------------
    # Serialization

    def to_json(self):
        return {
            'version':FORMAT_VERSION,
            'bandwidth':self.bandwidth.to_json(),
            'shapes':{k:list(v) for k, v in sorted(self.shapes.items())},
            'intention':self.intention.to_json(),
            'actions':[a.to_json() for a in self.actions],
            'final_states':[s.to_json() for s in self.final_states],
        }

    @classmethod
    def from_json(cls, data):
        try:
            if data.get('version') != FORMAT_VERSION:
                raise ModelError('unsupported model version %r' % (
                    data.get('version'), ))

            bandwidth = PoseDistanceParams.from_json(data['bandwidth'])
            intention = IntentionModel.from_json(data['intention'],
                bandwidth)
            actions = tuple(ActionModel.from_json(a, bandwidth) for a in
                data['actions'])
            shapes = {k:tuple(v) for k, v in data.get('shapes', {}).items()}
            finals = tuple(WorldState.from_json(s) for s in
                data['final_states'])
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ModelError('malformed model: %s' % e)

        if not finals:
            raise ModelError('model has no demonstrated final states')

        return cls(intention, actions, bandwidth, shapes, finals)

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write('\n')

        logger.info('model written to %s', path)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            raise ModelError('%s: %s' % (path, e))

        try:
            return cls.from_json(data)
        except ModelError as e:
            raise ModelError('%s: %s' % (path, e))
