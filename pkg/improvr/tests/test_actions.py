import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from improvr.actions import (NOOP_ID, ActionModel, ActionTemplate,
    build_action_models, template_prior, cluster_poses,
    sample_goal_candidates)
from improvr.demonstrations import load_demo_set
from improvr.exceptions import ModelError
from improvr.geometry import (Pose, PoseDistanceParams, WorldState, compose,
    stack_poses, translate)
from improvr.tests.utils import (BANDWIDTH, DEMO_PATHS, offset_demo_set,
    move_action)

# ============================================================================

class ActionModelTests(SimpleTestCase):
    def test_build(self):
        models = build_action_models(load_demo_set(DEMO_PATHS, 0.002, 3))
        self.assertEqual([m.action_id for m in models], ['move_lid',
            NOOP_ID])

        move, noop = models
        self.assertEqual(move.object_id, 'lid')
        self.assertEqual([t.reference_object for t in move.templates],
            ['box', 'lid'])
        self.assertEqual(move.template('box').reference_object, 'box')
        self.assertEqual(str(move), 'ActionModel(move_lid, 2 templates)')
        with self.assertRaises(KeyError):
            move.template('table')

        self.assertTrue(noop.is_noop)
        self.assertIsNone(noop.object_id)
        self.assertEqual(noop.templates, ())

    def test_validation(self):
        with self.assertRaises(ModelError):
            ActionModel('move_a', 'a')
        with self.assertRaises(ModelError):
            ActionTemplate('b', 'b', ())

        template = ActionTemplate('b', 'b', (Pose(), ))
        with self.assertRaises(ModelError):
            ActionModel('move_a', 'a', (template, template))

    def test_template_prior(self):
        self.assertEqual(template_prior(move_action('a', ['b', 'a'])), 0.5)
        self.assertEqual(template_prior(move_action('a', ['b', 'c', 'a'])),
            1 / 3)
        with self.assertRaises(ModelError):
            template_prior(ActionModel.noop())

    def test_json(self):
        model = move_action('a', ['b', 'a'], (translate(0.1, 0, 0),
            Pose.from_yaw(0.5)))
        self.assertEqual(ActionModel.from_json(model.to_json(), BANDWIDTH),
            model)

        noop = ActionModel.noop()
        self.assertEqual(ActionModel.from_json(noop.to_json(), BANDWIDTH),
            noop)


class ClusterTests(SimpleTestCase):
    def test_cutoff(self):
        params = PoseDistanceParams()
        poses = [translate(0, 0, 0), translate(0.01, 0, 0),
            translate(0.5, 0, 0), translate(0.51, 0, 0)]
        translations, quats = stack_poses(poses)

        self.assertEqual(cluster_poses(translations, quats, params, 0.06),
            [[0, 1], [2, 3]])
        self.assertEqual(cluster_poses(translations, quats, params, 1.0),
            [[0, 1, 2, 3]])
        self.assertEqual(cluster_poses(translations, quats, params, 0.001),
            [[0], [1], [2], [3]])

        translations, quats = stack_poses(poses[:1])
        self.assertEqual(cluster_poses(translations, quats, params, 0.06),
            [[0]])

    def test_complete_linkage(self):
        # a chain where neighbours are close but the ends are not
        params = PoseDistanceParams()
        poses = [translate(0.04 * i, 0, 0) for i in range(4)]
        translations, quats = stack_poses(poses)
        clusters = cluster_poses(translations, quats, params, 0.06)
        for members in clusters:
            spread = 0.04 * (max(members) - min(members))
            self.assertLessEqual(spread, 0.06)


class SamplingTests(SimpleTestCase):
    def setUp(self):
        self.model = move_action('a', ['b', 'a'], (translate(0.2, 0, 0), ))
        self.state = WorldState.factory({
            'a':translate(-0.3, 0, 0.8),
            'b':Pose.from_yaw(math.pi / 2, (0.1, 0.1, 0.8)),
        })

    def test_without_noise(self):
        template = self.model.template('b')
        candidates = sample_goal_candidates(self.model, template,
            self.state, 16, 0.06, 0, noise=False)
        self.assertEqual(len(candidates), 1)

        candidate = candidates[0]
        self.assertEqual(candidate.probability, 1.0)
        self.assertEqual(candidate.cluster_size, 16)
        np.testing.assert_allclose(candidate.state['a'].t, [0.1, 0.3, 0.8],
            atol=1e-9)
        self.assertIs(candidate.state['b'], self.state['b'])

        # the self template is relative to the start pose of the object
        candidates = sample_goal_candidates(self.model,
            self.model.template('a'), self.state, 4, 0.06, 0, noise=False)
        np.testing.assert_allclose(candidates[0].state['a'].t,
            [-0.1, 0, 0.8], atol=1e-9)

    def test_with_noise(self):
        template = self.model.template('b')
        candidates = sample_goal_candidates(self.model, template,
            self.state, 32, 0.06, 3)
        self.assertAlmostEqual(sum(c.probability for c in candidates), 1.0)
        self.assertEqual(sum(c.cluster_size for c in candidates), 32)

        target = compose(self.state['b'], translate(0.2, 0, 0))
        for candidate in candidates:
            offset = np.linalg.norm(candidate.state['a'].t - target.t)
            self.assertLess(offset, 6 * BANDWIDTH.sigma_t)

        # seeded and repeatable
        again = sample_goal_candidates(self.model, template, self.state, 32,
            0.06, 3)
        self.assertEqual(candidates, again)

        # a generator is used as is
        rng = np.random.default_rng(3)
        from_rng = sample_goal_candidates(self.model, template, self.state,
            32, 0.06, rng)
        self.assertEqual(from_rng, candidates)

    def test_errors(self):
        template = self.model.template('b')
        with self.assertRaises(ValueError):
            sample_goal_candidates(self.model, template, self.state, 0, 0.06,
                0)

        other = ActionTemplate('c', 'c', (Pose(), ))
        with self.assertRaises(ModelError):
            sample_goal_candidates(self.model, other, self.state, 4, 0.06, 0)

    def test_learned_offsets(self):
        demo_set = offset_demo_set()
        move = build_action_models(demo_set)[0]
        template = move.template('b')
        state = WorldState.factory({'a':translate(0, -0.4, 0.8),
            'b':translate(0, 0, 0.8)})

        candidates = sample_goal_candidates(move, template, state, 16, 0.06,
            0, noise=False)
        best = max(candidates, key=lambda c: c.probability)
        np.testing.assert_allclose(best.state['a'].t, [0.2, 0, 0.8],
            atol=0.01)

    def test_two_modes(self):
        # demonstrated placements 1m apart, one draw per sample
        model = move_action('a', ['b'], (Pose(), translate(1, 0, 0)))
        template = model.template('b')
        state = WorldState.factory({'a':translate(0, -0.4, 0.8),
            'b':translate(0, 0, 0.8)})

        firsts = []
        for seed in range(10):
            candidates = sample_goal_candidates(model, template, state, 100,
                0.1, seed, noise=False)
            self.assertEqual(len(candidates), 2)
            self.assertAlmostEqual(sum(c.probability for c in candidates),
                1.0)
            for candidate in candidates:
                self.assertLess(abs(candidate.probability - 0.5), 0.2)

            first = [c for c in candidates if c.state['a'].t[0] < 0.5]
            firsts.append(first[0].probability)

        self.assertLess(abs(np.mean(firsts) - 0.5), 0.05)

        # kernel noise stays well inside a cutoff that is wide compared to
        # the bandwidth but narrow compared to the gap between the modes
        for seed in range(10):
            candidates = sample_goal_candidates(model, template, state, 100,
                0.4, seed)
            self.assertEqual(len(candidates), 2)
            xs = sorted(c.state['a'].t[0] for c in candidates)
            self.assertAlmostEqual(xs[0], 0, delta=0.05)
            self.assertAlmostEqual(xs[1], 1, delta=0.05)

    def test_noise_cutoffs(self):
        # the cutoff alone decides how a single noisy mode is split
        template = self.model.template('b')

        candidates = sample_goal_candidates(self.model, template,
            self.state, 50, 1e-9, 0)
        self.assertEqual(len(candidates), 50)

        candidates = sample_goal_candidates(self.model, template,
            self.state, 50, 10.0, 0)
        self.assertEqual(len(candidates), 1)
        self.assertEqual(candidates[0].probability, 1.0)

        # three bandwidths is tighter than the spread of the noise
        for seed in range(5):
            candidates = sample_goal_candidates(self.model, template,
                self.state, 100, 3 * BANDWIDTH.sigma_t, seed)
            self.assertGreater(len(candidates), 1)
            self.assertLess(len(candidates), 100)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_reference_equivariance(self, seed, offset_seed):
        rng = np.random.default_rng(offset_seed)
        offset = Pose(rng.uniform(-1, 1, 3), rng.normal(size=4))
        template = self.model.template('b')
        moved = self.state.with_pose('b', compose(offset, self.state['b']))

        candidates = sample_goal_candidates(self.model, template,
            self.state, 16, 0.06, seed)
        shifted = sample_goal_candidates(self.model, template, moved, 16,
            0.06, seed)
        self.assertEqual(len(shifted), len(candidates))
        for before, after in zip(candidates, shifted):
            self.assertEqual(after.cluster_size, before.cluster_size)
            self.assertEqual(after.probability, before.probability)
            expected = compose(offset, before.state['a'])
            self.assertTrue(after.state['a'].isclose(expected, 1e-9))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.tuples(*[st.floats(min_value=-0.5, max_value=0.5)] * 3))
    def test_self_template_ignores_others(self, seed, position):
        template = self.model.template('a')
        moved = self.state.with_pose('b', Pose(position))

        candidates = sample_goal_candidates(self.model, template,
            self.state, 16, 0.06, seed)
        others = sample_goal_candidates(self.model, template, moved, 16,
            0.06, seed)
        self.assertEqual([c.state['a'] for c in others],
            [c.state['a'] for c in candidates])
        self.assertEqual([c.probability for c in others],
            [c.probability for c in candidates])
