import math
from collections import OrderedDict

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from improvr.exceptions import ModelError
from improvr.geometry import (Pose, PoseDistanceParams, WorldState,
    translate, relative_pose, compose)
from improvr.intention import (RelationModel, IntentionModel,
    kernel_density, entropy_terms, estimate_entropy, compute_weights,
    intention_likelihood)
from improvr.tests.utils import BANDWIDTH, single_relation_intention

# ============================================================================

def _relation_samples(rng, count, noise):
    return [Pose(np.array([0.2, 0.0, 0.0]) + rng.normal(0, noise, 3))
        for _ in range(count)]


class RelationTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(ModelError):
            RelationModel(('a', 'b'), (), BANDWIDTH)
        with self.assertRaises(ModelError):
            RelationModel(('a', 'b'), (Pose(), ), BANDWIDTH, weight=0)

        relation = RelationModel(('a', 'b'), (Pose(), ), BANDWIDTH)
        self.assertEqual(str(relation), 'RelationModel(a|b, N=1, w=1)')

    def test_density_at_mode(self):
        relation = RelationModel(('a', 'b'), (Pose(), ), BANDWIDTH)
        self.assertAlmostEqual(kernel_density(relation, Pose()) *
            BANDWIDTH.normalizer, 1.0)

        # one bandwidth away in translation
        value = kernel_density(relation, translate(BANDWIDTH.sigma_t, 0, 0))
        self.assertAlmostEqual(value * BANDWIDTH.normalizer,
            math.exp(-0.5))

        # the mean over modes
        relation = RelationModel(('a', 'b'), (Pose(), translate(5, 0, 0)),
            BANDWIDTH)
        self.assertAlmostEqual(kernel_density(relation, Pose()) *
            BANDWIDTH.normalizer, 0.5)

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.integers(min_value=1, max_value=6))
    def test_samples_beat_far_points(self, seed, count):
        rng = np.random.default_rng(seed)
        params = PoseDistanceParams(rng.uniform(0.005, 0.05),
            rng.uniform(0.05, 0.3))
        samples = tuple(Pose(rng.uniform(-0.1, 0.1, 3), rng.normal(size=4))
            for _ in range(count))
        relation = RelationModel(('a', 'b'), samples, params)

        # at least 5 bandwidths from every sample
        far = Pose(rng.uniform(-0.1, 0.1, 3) + np.array([0.1 + 5 *
            params.sigma_t + 0.2, 0, 0]), rng.normal(size=4))
        far_density = kernel_density(relation, far)
        for sample in samples:
            self.assertGreaterEqual(kernel_density(relation, sample),
                far_density)

    def test_single_mode_entropy(self):
        relation = RelationModel(('a', 'b'), (Pose(), ), BANDWIDTH)
        terms = entropy_terms(relation, 10000, 3)
        estimate = float(np.mean(terms))
        error = float(np.std(terms)) / math.sqrt(len(terms))

        # 3/2 from the translation kernel, 1/2 from the rotation angle
        expected = 2.0 + math.log(BANDWIDTH.normalizer)
        self.assertLess(abs(estimate - expected), 3 * error)

    def test_entropy_is_seeded(self):
        relation = RelationModel(('a', 'b'), (Pose(), translate(0.1, 0, 0)),
            BANDWIDTH)
        self.assertEqual(estimate_entropy(relation, 500, 1),
            estimate_entropy(relation, 500, 1))
        with self.assertRaises(ValueError):
            estimate_entropy(relation, 0, 1)

    def test_entropy_spread(self):
        relation = RelationModel(('a', 'b'), (Pose(), translate(0.1, 0, 0)),
            BANDWIDTH)
        small = [estimate_entropy(relation, 100, seed) for seed in range(20)]
        large = [estimate_entropy(relation, 10000, seed) for seed in
            range(20)]
        self.assertLess(np.std(large), np.std(small) / 3)
        self.assertAlmostEqual(np.mean(large), np.mean(small),
            delta=4 * np.std(small) / math.sqrt(20))

    def test_entropy_bandwidth_scaling(self):
        # twice the translation bandwidth is eight times the volume
        narrow = RelationModel(('a', 'b'), (Pose(), ), BANDWIDTH)
        wide = RelationModel(('a', 'b'), (Pose(), ), PoseDistanceParams(
            2 * BANDWIDTH.sigma_t, BANDWIDTH.sigma_r))
        for seed in range(3):
            gain = estimate_entropy(wide, 10000, seed) - estimate_entropy(
                narrow, 10000, seed)
            self.assertAlmostEqual(gain, 3 * math.log(2), places=6)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.integers(min_value=1, max_value=4))
    def test_density_left_invariance(self, seed, count):
        rng = np.random.default_rng(seed)
        samples = tuple(Pose(rng.uniform(-0.1, 0.1, 3), rng.normal(size=4))
            for _ in range(count))
        offset = Pose(rng.uniform(-2, 2, 3), rng.normal(size=4))
        moved = tuple(compose(offset, s) for s in samples)

        query = compose(samples[0], Pose(rng.normal(0, 0.02, 3),
            (1, *rng.normal(0, 0.05, 3))))
        before = kernel_density(RelationModel(('a', 'b'), samples,
            BANDWIDTH), query)
        after = kernel_density(RelationModel(('a', 'b'), moved, BANDWIDTH),
            compose(offset, query))
        self.assertAlmostEqual(before * BANDWIDTH.normalizer,
            after * BANDWIDTH.normalizer, delta=1e-5)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_single_mode_peak(self, seed):
        rng = np.random.default_rng(seed)
        mode = Pose(rng.uniform(-1, 1, 3), rng.normal(size=4))
        relation = RelationModel(('a', 'b'), (mode, ), BANDWIDTH)
        peak = kernel_density(relation, mode) * BANDWIDTH.normalizer
        self.assertAlmostEqual(peak, 1.0, places=6)

        for scale in (0.001, 0.01, 0.1, 1.0):
            query = Pose(mode.t + rng.normal(0, scale, 3), mode.q +
                rng.normal(0, scale, 4))
            value = kernel_density(relation, query) * BANDWIDTH.normalizer
            self.assertLessEqual(value, peak + 1e-9)


class WeightTests(SimpleTestCase):
    def test_compute_weights(self):
        weights, eta, eps_H = compute_weights({'x':-3.0, 'y':1.0})
        self.assertAlmostEqual(eps_H, 3.01)
        self.assertAlmostEqual(weights['x'], 100.0)
        self.assertAlmostEqual(weights['y'], 1 / 4.01)
        self.assertAlmostEqual(eta * (weights['x'] + weights['y']), 1.0)

        weights, eta, eps_H = compute_weights({'x':2.0, 'y':1.0})
        self.assertAlmostEqual(eps_H, 0.01)
        self.assertGreater(weights['y'], weights['x'])

        with self.assertRaises(ModelError):
            compute_weights({})

    def test_tight_relation_wins(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            relations = OrderedDict([
                (('a', 'b'), _relation_samples(rng, 5, 0.005)),
                (('c', 'd'), _relation_samples(rng, 5, 0.2)),
            ])
            model = IntentionModel.factory(relations, BANDWIDTH, 1000, seed)
            tight, loose = model.relations
            self.assertGreater(tight.weight, loose.weight)
            self.assertLess(tight.entropy, loose.entropy)


class IntentionModelTests(SimpleTestCase):
    def test_likelihood(self):
        model = single_relation_intention()
        self.assertEqual(model.object_ids, ['a', 'b'])
        self.assertEqual(model.bandwidth, BANDWIDTH)

        b = Pose.from_yaw(0.7, (0.1, 0.2, 0.8))
        at_goal = WorldState.factory({'b':b, 'a':Pose.from_rotation(
            b.scipy_rotation, b.t + b.scipy_rotation.apply([0.2, 0, 0]))})
        away = at_goal.with_pose('a', translate(-0.4, 0, 0.8))
        self.assertGreater(intention_likelihood(model, at_goal),
            intention_likelihood(model, away))
        self.assertEqual(model.likelihood(at_goal),
            intention_likelihood(model, at_goal))

        # direct evaluation of the weighted sum
        expected = 0.0
        for relation in model.relations:
            k, l = relation.pair
            expected += relation.weight * kernel_density(relation,
                relative_pose(at_goal[l], at_goal[k]))
        self.assertAlmostEqual(intention_likelihood(model, at_goal),
            model.eta * expected)

        # objects the model does not know are ignored
        extra = WorldState.factory(dict(at_goal.items, wall=Pose()))
        self.assertEqual(intention_likelihood(model, extra),
            intention_likelihood(model, at_goal))

        with self.assertRaises(ModelError):
            intention_likelihood(model, WorldState.factory({'a':Pose()}))

    def test_json(self):
        model = single_relation_intention(offsets=((0.2, 0, 0),
            (0.25, 0.01, 0)))
        loaded = IntentionModel.from_json(model.to_json(), BANDWIDTH)
        self.assertEqual(loaded, model)

        with self.assertRaises(ModelError):
            IntentionModel((), 1.0, 0.01)
