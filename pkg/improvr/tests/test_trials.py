import json, math, os, tempfile
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from improvr.conf import DEFAULTS
from improvr.exceptions import SceneError, WorkspaceTooConstrained
from improvr.feasibility import SceneSpec, state_feasible
from improvr.planner import Plan, PlanStep, PlannerConfig
from improvr.trials import (FULL, PARTIAL, FAILURE, TrialOutcome, RunReport,
    sample_start_state, classify, run_trials)
from improvr.tests.utils import (CUBE, SCENE_PATH, make_scene, resting_state,
    offset_task_model, lid_box_model)

# ============================================================================

def cramped_lid_box_scene():
    """The lid cannot be put down next to the box anywhere in here."""
    return SceneSpec({'box':(0.1, 0.1, 0.06), 'lid':(0.11, 0.11, 0.01)},
        ((-0.15, -0.15, 0.7), (0.15, 0.45, 1.3)), 0.75)


class StartStateTests(SimpleTestCase):
    def test_sampling(self):
        scene = make_scene()
        first = sample_start_state(['a', 'b'], scene,
            np.random.default_rng(5))
        second = sample_start_state(['a', 'b'], scene,
            np.random.default_rng(5))
        self.assertEqual(first, second)
        self.assertTrue(state_feasible(scene, first))
        for object_id in first.ids:
            self.assertAlmostEqual(first[object_id].t[2], 0.8)

    def test_too_constrained(self):
        scene = make_scene(low=(-0.06, -0.06, 0.7), high=(0.06, 0.06, 1.3))
        with self.assertRaises(WorkspaceTooConstrained):
            sample_start_state(['a', 'b'], scene, np.random.default_rng(0),
                max_attempts=50)


class ReportTests(SimpleTestCase):
    def test_classify(self):
        state = resting_state(make_scene(), a=(0, 0), b=(0.3, 0))
        empty = Plan((), 1.0, state, state)
        moved = Plan((PlanStep('move_a', 'b', 'a', state), ), 1.0, state,
            state)

        self.assertEqual(classify(empty, 2.0, 1.0), FULL)
        self.assertEqual(classify(moved, 1.0, 1.0), FULL)
        self.assertEqual(classify(moved, 0.5, 1.0), PARTIAL)
        self.assertEqual(classify(empty, 0.5, 1.0), FAILURE)

    def test_report(self):
        report = RunReport(0.5, [
            TrialOutcome(0, 7, FULL, 1.0, 1.2, 1, 0.1),
            TrialOutcome(1, 8, PARTIAL, 0.2, 0.3, 2, 0.1),
            TrialOutcome(2, 9, FAILURE, -math.inf, 0.0, 0, 0.1),
        ])
        self.assertEqual(report.summary(),
            '3 trials: 1 full, 1 partial, 1 failed')

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'report.json')
            report.save(path)
            with open(path) as f:
                data = json.load(f)

        self.assertEqual(data['trials'], 3)
        self.assertEqual(data['full_successes'], 1)
        self.assertEqual(data['threshold'], 0.5)
        self.assertEqual([o['seed'] for o in data['outcomes']], [7, 8, 9])
        self.assertIsNone(data['outcomes'][2]['value'])


class RunTests(SimpleTestCase):
    def test_small_run(self):
        model = offset_task_model()
        scene = make_scene()
        config = replace(PlannerConfig.from_options(DEFAULTS, model), K=60,
            seed=20)

        report = run_trials(model, scene, 3, config)
        self.assertEqual(report.trials, 3)
        self.assertEqual([o.seed for o in report.outcomes], [20, 21, 22])
        self.assertEqual(report.full_successes + report.partial_solutions
            + report.failures, 3)
        self.assertAlmostEqual(report.threshold, 0.5 * model.mean_demo_psi)

        again = run_trials(model, scene, 3, config)
        self.assertEqual([o.value for o in again.outcomes],
            [o.value for o in report.outcomes])

        with self.assertRaises(ValueError):
            run_trials(model, scene, 0, config)

        # fewer start states than trials
        s0 = resting_state(scene, a=(0, 0), b=(0.3, 0))
        with self.assertRaises(ValueError) as cm:
            run_trials(model, scene, 2, config, start_states=[s0])
        self.assertIn('1 start states for 2 trials', str(cm.exception))

        # boxes differ from the demonstrated ones
        with self.assertRaises(SceneError):
            run_trials(model, make_scene({'a':CUBE, 'b':(0.1, 0.1, 0.1)}),
                1, config)

    def test_no_feasible_plan(self):
        model = lid_box_model()
        scene = cramped_lid_box_scene()
        s0 = resting_state(scene, box=(0, 0), lid=(0, 0.3))
        config = PlannerConfig.from_options(dict(DEFAULTS, iterations=50,
            require_action=True), model)

        report = run_trials(model, scene, 1, config, start_states=[s0])
        outcome = report.outcomes[0]
        self.assertEqual(outcome.outcome, FAILURE)
        self.assertEqual(outcome.value, -math.inf)
        self.assertEqual(outcome.steps, 0)

        # without the requirement the empty plan is returned
        config = replace(config, require_action=False)
        report = run_trials(model, scene, 1, config, start_states=[s0])
        self.assertEqual(report.outcomes[0].outcome, FAILURE)
        self.assertEqual(report.outcomes[0].steps, 0)

    def test_bundled_task(self):
        model = lid_box_model()
        scene = SceneSpec.load(SCENE_PATH)
        config = PlannerConfig.from_options(DEFAULTS, model)

        report = run_trials(model, scene, 50, config)
        self.assertEqual(report.trials, 50)
        self.assertGreaterEqual(report.full_successes, 40)
