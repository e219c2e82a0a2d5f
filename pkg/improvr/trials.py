# improvr.trials.py
"""Randomized trials: plan from many random feasible start states and count
how often the planner reaches a full solution."""
import logging, json, math, time
from dataclasses import dataclass, field, replace

import numpy as np

from improvr.exceptions import NoFeasiblePlan, WorkspaceTooConstrained
from improvr.feasibility import state_feasible
from improvr.geometry import WorldState
from improvr.planner import solve_task

logger = logging.getLogger(__name__)

FULL = 'full'
PARTIAL = 'partial'
FAILURE = 'failure'

MAX_START_ATTEMPTS = 10 ** 4

# ============================================================================
# Report
# ============================================================================

@dataclass(frozen=True)
class TrialOutcome:
    index: int
    seed: int
    outcome: str
    value: float
    final_psi: float
    steps: int
    seconds: float

    def to_json(self):
        return {
            'index':self.index,
            'seed':self.seed,
            'outcome':self.outcome,
            'value':self.value if math.isfinite(self.value) else None,
            'final_psi':self.final_psi,
            'steps':self.steps,
            'seconds':self.seconds,
        }


@dataclass
class RunReport:
    threshold: float
    outcomes: list = field(default_factory=list)

    @property
    def trials(self):
        return len(self.outcomes)

    def _count(self, kind):
        return sum(1 for o in self.outcomes if o.outcome == kind)

    @property
    def full_successes(self):
        return self._count(FULL)

    @property
    def partial_solutions(self):
        return self._count(PARTIAL)

    @property
    def failures(self):
        return self._count(FAILURE)

    def summary(self):
        return '%s trials: %s full, %s partial, %s failed' % (self.trials,
            self.full_successes, self.partial_solutions, self.failures)

    def to_json(self):
        return {
            'trials':self.trials,
            'full_successes':self.full_successes,
            'partial_solutions':self.partial_solutions,
            'failures':self.failures,
            'threshold':self.threshold,
            'outcomes':[o.to_json() for o in self.outcomes],
        }

    def save(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write('\n')

# ============================================================================
# Trials
# ============================================================================

def sample_start_state(object_ids, scene, rng,
        max_attempts=MAX_START_ATTEMPTS):
    """Rejection samples a feasible state with every object resting on the
    support plane at a uniformly random position and heading.

    :raises WorkspaceTooConstrained:
        if no feasible state turns up within ``max_attempts`` draws
    """
    (xmin, ymin, _), (xmax, ymax, _) = scene.workspace
    for attempt in range(max_attempts):
        poses = {}
        for object_id in object_ids:
            x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
            yaw = rng.uniform(-math.pi, math.pi)
            poses[object_id] = scene.resting_pose(object_id, x, y, yaw)

        state = WorldState.factory(poses)
        if state_feasible(scene, state):
            logger.debug('start state after %s attempts', attempt + 1)
            return state

    raise WorkspaceTooConstrained('workspace too constrained: no feasible '
        'start state in %s attempts' % max_attempts)


def classify(plan, final_psi, threshold):
    if final_psi >= threshold:
        return FULL
    if plan.steps:
        return PARTIAL

    return FAILURE


def run_trials(model, scene, n, config, start_states=None):
    """Solves ``n`` tasks from random start states.  Trial ``i`` uses the
    seed ``config.seed + i`` both for its start state and for its search.
    A plan is a full success when the intention likelihood of its final
    state reaches half the mean likelihood of the demonstrated final states.

    :param model:
        :class:`improvr.models.TaskModel`
    :param config:
        :class:`improvr.planner.PlannerConfig`
    :param start_states:
        optional list of at least ``n`` start states to use instead of
        sampling
    :returns:
        :class:`RunReport`
    :raises SceneError:
        if ``scene`` doesn't match the shapes the model was learned with
    """
    if n < 1:
        raise ValueError('need at least one trial')
    if start_states is not None and len(start_states) < n:
        raise ValueError('%s start states for %s trials' % (
            len(start_states), n))

    model.check_scene(scene)
    report = RunReport(0.5 * model.mean_demo_psi)
    object_ids = model.final_states[0].ids
    for index in range(n):
        seed = config.seed + index
        if start_states is not None:
            s0 = start_states[index]
        else:
            s0 = sample_start_state(object_ids, scene,
                np.random.default_rng(seed))

        started = time.perf_counter()
        try:
            plan = solve_task(model.intention, model.actions, scene, s0,
                replace(config, seed=seed))
            final_psi = model.psi(plan.final_state)
            outcome = TrialOutcome(index, seed, classify(plan, final_psi,
                report.threshold), plan.value, final_psi, len(plan.steps),
                time.perf_counter() - started)
        except NoFeasiblePlan:
            outcome = TrialOutcome(index, seed, FAILURE, -math.inf,
                model.psi(s0), 0, time.perf_counter() - started)

        logger.info('trial %s: %s (%s steps, psi %.4g)', index,
            outcome.outcome, outcome.steps, outcome.final_psi)
        report.outcomes.append(outcome)

    return report
