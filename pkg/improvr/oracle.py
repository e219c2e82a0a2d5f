# improvr.oracle.py
"""Brute-force reference search.

A :class:`DiscretizedProblem` replaces goal sampling with fixed candidate
lists so that the planner and an exhaustive enumeration search the same
finite space.  :func:`enumerate_optimal` visits every action sequence up to
the horizon, applying the same state and trajectory checks the planner
applies, and returns the best achievable plan value.
"""
import logging, math
from dataclasses import dataclass

from improvr.exceptions import GuardExceeded, InfeasibleStart
from improvr.feasibility import (state_feasible, generate_trajectory,
    trajectory_feasible)
from improvr.intention import intention_likelihood
from improvr.planner import (PlannerConfig, PlanStep, Plan, Planner,
    FixedCandidates)

logger = logging.getLogger(__name__)

PATH_GUARD = 10 ** 6


@dataclass(frozen=True)
class DiscretizedProblem:
    """
    :param candidates:
        dictionary of ``(action_id, template_id)`` to a list of goal poses
        relative to the template's reference object
    :param T_max:
        maximum number of real actions
    """
    intention: object
    actions: tuple
    candidates: dict
    scene: object
    s0: object
    T_max: int
    action_cost: float = 0.0
    W: int = 32

    @classmethod
    def from_task_model(cls, model, scene, s0, T_max, action_cost=None,
            W=32):
        """Uses each template's demonstrated relative poses as its fixed
        candidates."""
        candidates = {}
        for action in model.actions:
            for template in action.templates:
                candidates[(action.action_id, template.template_id)] = list(
                    template.samples)

        if action_cost is None:
            action_cost = 0.05 * model.reference_psi

        return cls(model.intention, tuple(model.actions), candidates, scene,
            s0, T_max, action_cost, W)

    @property
    def branching(self):
        return sum(len(self.candidates.get((a.action_id, t.template_id), []))
            for a in self.actions if not a.is_noop for t in a.templates)

    def path_count(self):
        """Number of action sequences of length up to ``T_max``."""
        return sum(self.branching ** t for t in range(self.T_max + 1))

    def planner_config(self, K=2000, seed=0, tau0=1.0):
        return PlannerConfig(K=K, S=1, action_cost=self.action_cost,
            tau0=tau0, max_depth=max(1, self.T_max), W=self.W, seed=seed,
            noise_on=False)

    def planner(self, K=2000, seed=0, tau0=1.0):
        return inject_candidates(self.planner_config(K, seed, tau0),
            self.candidates, self.intention, self.actions, self.scene)


def inject_candidates(config, candidates, intention, actions, scene):
    """Builds a :class:`improvr.planner.Planner` whose expansions use the
    given relative poses verbatim, each with uniform probability.

    :raises CoverageError:
        if an ``(action, template)`` pair has no candidate list
    """
    provider = FixedCandidates(candidates)
    provider.check_coverage(actions)
    return Planner(intention, actions, scene, config, provider)


def enumerate_optimal(problem):
    """Exhaustive depth first search for the plan maximizing the intention
    likelihood of its final state minus the action costs.  A step is only
    followed when its trajectory passes the feasibility check.

    :returns:
        tuple ``(value, plan)``
    :raises GuardExceeded:
        if the problem has more than ``PATH_GUARD`` action sequences
    :raises InfeasibleStart:
        if the start state fails the state check
    """
    count = problem.path_count()
    if count > PATH_GUARD:
        raise GuardExceeded('%s paths exceed the limit of %s' % (count,
            PATH_GUARD))

    if not state_feasible(problem.scene, problem.s0):
        raise InfeasibleStart('start state is not feasible')

    provider = FixedCandidates(problem.candidates)
    provider.check_coverage(problem.actions)
    real_actions = [a for a in problem.actions if not a.is_noop]
    best = {'value':-math.inf, 'steps':(), 'state':problem.s0}

    def visit(state, steps):
        value = intention_likelihood(problem.intention, state)
        for _ in steps:
            value -= problem.action_cost

        if value > best['value']:
            best.update(value=value, steps=tuple(steps), state=state)

        if len(steps) == problem.T_max:
            return

        for model in real_actions:
            for template in model.templates:
                for candidate in provider(model, template, state, None):
                    goal = candidate.state[model.object_id]
                    trajectory = generate_trajectory(problem.scene, state,
                        model.object_id, goal, problem.W)
                    feasible, _ = trajectory_feasible(problem.scene, state,
                        trajectory)
                    if not feasible:
                        continue

                    step = PlanStep(model.action_id, template.template_id,
                        model.object_id, candidate.state, trajectory)
                    visit(candidate.state, steps + [step])

    visit(problem.s0, [])
    logger.debug('oracle: %s paths, best value %s', count, best['value'])

    plan = Plan(best['steps'], best['value'], problem.s0, best['state'])
    return best['value'], plan
