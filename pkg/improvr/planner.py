# improvr.planner.py
"""Teach-and-improvise search.

The search tree alternates three kinds of nodes::

      action_selection (state s_t)
        |-- template_selection (action a)          one per real action
        |     |-- goal_selection (template g)       one per template of a
        |     |     |-- action_selection (s_t+1)    one per goal candidate
        |-- action_selection (terminal no-op)      stop in s_t

Leaves start with the intention likelihood of their state as value; values
are backed up with the max rule and the action cost is subtracted at goal
selection nodes.  After the iteration budget is spent the greedy best plan is
checked trajectory by trajectory; nodes reached through an infeasible step
are demoted to ``-inf`` until a feasible plan comes out.
"""
import logging, json, math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from improvr.actions import sample_goal_candidates, goal_candidates
from improvr.exceptions import (InfeasibleStart, NoFeasiblePlan,
    CoverageError)
from improvr.feasibility import (state_feasible, generate_trajectory,
    trajectory_feasible)
from improvr.geometry import Pose, WorldState, stack_poses
from improvr.intention import intention_likelihood

logger = logging.getLogger(__name__)

ACTION_SELECTION = 'action_selection'
TEMPLATE_SELECTION = 'template_selection'
GOAL_SELECTION = 'goal_selection'

# ============================================================================
# Configuration
# ============================================================================

@dataclass(frozen=True)
class PlannerConfig:
    """
    :param K: iteration budget
    :param S: goal samples drawn per template at expansion
    :param action_cost: constant cost of every real action
    :param tau0: initial Boltzmann temperature
    :param delta_c: cluster cutoff, meters-equivalent
    :param max_depth: maximum number of actions in a plan
    :param W: waypoints per trajectory
    :param seed: seed of the search's random generator
    :param noise_on: perturb sampled goals with kernel noise
    :param require_action: give the root no no-op child
    """
    K: int = 300
    S: int = 16
    action_cost: float = 0.0
    tau0: float = 1.0
    delta_c: float = 0.06
    max_depth: int = 4
    W: int = 32
    seed: int = 0
    noise_on: bool = True
    require_action: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError('K must be at least 1')
        if self.S < 1:
            raise ValueError('S must be at least 1')
        if self.action_cost < 0:
            raise ValueError('action_cost must not be negative')
        if not self.tau0 > 0:
            raise ValueError('tau0 must be positive')
        if self.max_depth < 1:
            raise ValueError('max_depth must be at least 1')

    @classmethod
    def from_options(cls, options, task_model):
        """Builds a config from merged command options (see
        :func:`improvr.conf.get_options`), resolving the model-dependent
        defaults: ``tau0`` and ``action_cost`` are 5% of the likelihood of
        the first demonstrated final state, ``max_depth`` is twice the number
        of movable objects and the cluster cutoff is three translation
        bandwidths."""
        scale = task_model.reference_psi
        default_share = 0.05 * scale if scale > 0 else 1.0

        def pick(key, default):
            value = options.get(key)
            return default if value is None else value

        return cls(K=int(options['iterations']), S=int(options['samples']),
            action_cost=float(pick('action_cost', 0.05 * scale)),
            tau0=float(pick('tau0', default_share)),
            delta_c=float(pick('cluster_cutoff',
                3 * task_model.bandwidth.sigma_t)),
            max_depth=int(pick('max_depth',
                2 * len(task_model.movable_objects))),
            W=int(options['waypoints']), seed=int(options['seed']),
            noise_on=bool(options['noise']),
            require_action=bool(options.get('require_action', False)))

# ============================================================================
# Search Tree
# ============================================================================

class SearchNode:
    """Node of the search tree.  ``state`` is set on action selection nodes,
    ``action`` on template and goal selection nodes and ``template`` on goal
    selection nodes.  ``index`` is the creation order inside the tree and
    breaks ties."""
    def __init__(self, tree, kind, parent=None, state=None, action=None,
            template=None, value=0.0, goal_probability=1.0, terminal=False,
            depth=0):
        self.tree = tree
        self.kind = kind
        self.parent = parent
        self.state = state
        self.action = action
        self.template = template
        self.value = value
        self.goal_probability = goal_probability
        self.terminal = terminal
        self.depth = depth
        self.children = []
        self.visits = 0
        self.solved = terminal
        self.expanded = False
        self.demoted = False
        self.index = tree._register(self)

    def __str__(self):
        return 'SearchNode(id=%s, %s, value=%s)' % (self.index, self.kind,
            self.value)

    def is_root(self):
        return self.parent is None

    def add_child(self, kind, **kwargs):
        """Creates a new ``SearchNode`` below this one.

        :param kwargs:
            arguments for the ``SearchNode`` constructor
        :returns:
            the new node
        """
        kwargs.setdefault('depth', self.depth)
        node = SearchNode(self.tree, kind, parent=self, **kwargs)
        self.children.append(node)
        return node

    def ancestors(self):
        """Returns the nodes between this one and the root, parent first."""
        ancestors = []
        node = self.parent
        while node is not None:
            ancestors.append(node)
            node = node.parent

        return ancestors

    def descendents(self):
        """Returns every node below this one, depth first."""
        visited = []
        for child in self.children:
            visited.append(child)
            visited.extend(child.descendents())

        return visited

    def backed_up(self):
        """The ``(value, solved)`` pair the backup rule gives this node for
        its current children."""
        if self.demoted:
            return -math.inf, True

        if not self.children:
            if self.kind == ACTION_SELECTION and not self.expanded:
                return self.value, self.solved

            return -math.inf, True

        best = max(child.value for child in self.children)
        if self.kind == GOAL_SELECTION:
            best = best - self.tree.action_cost

        return best, all(child.solved for child in self.children)

    def refresh(self):
        self.value, self.solved = self.backed_up()


class SearchTree:
    def __init__(self, state, value, action_cost):
        self.action_cost = action_cost
        self.nodes = []
        self.root = SearchNode(self, ACTION_SELECTION, state=state,
            value=value)

    def _register(self, node):
        self.nodes.append(node)
        return len(self.nodes) - 1

    def audit(self, start=None):
        """Returns the nodes at and below ``start`` (the root by default)
        whose stored value or solved flag differs from what the backup rule
        computes from their children, in depth first order."""
        start = start or self.root
        return [n for n in [start] + start.descendents()
            if (n.children or n.demoted) and
            (n.value, n.solved) != n.backed_up()]

    def cytoscape_json(self, extra_fields=lambda x:{}):
        data = {
            'nodes':[],
            'edges':[],
        }
        for node in self.nodes:
            node_data = {
                'data':{
                    'id':'n%s' % node.index,
                    'kind':node.kind,
                    'value':node.value if math.isfinite(node.value) else
                        None,
                    'visits':node.visits,
                    'solved':node.solved,
                }
            }
            for key, value in extra_fields(node).items():
                node_data['data'][key] = value

            data['nodes'].append(node_data)

            for child in node.children:
                data['edges'].append({
                    'data':{
                        'id':'e%s_%s' % (node.index, child.index),
                        'source':'n%s' % node.index,
                        'target':'n%s' % child.index,
                    }
                })

        return json.dumps(data)

# ============================================================================
# Plans
# ============================================================================

@dataclass(frozen=True)
class PlanStep:
    action_id: str
    template_id: str
    object_id: str
    goal_state: WorldState
    trajectory: Optional[object] = None

    def to_json(self):
        return {
            'action':self.action_id,
            'template':self.template_id,
            'object':self.object_id,
            'goal_state':self.goal_state.to_json(),
            'trajectory':self.trajectory.to_json() if self.trajectory else
                [],
        }


@dataclass(frozen=True)
class Plan:
    """Sequence of ``(action, template, goal state)`` steps.  ``value`` is
    the likelihood of the final state minus the cost of the steps.
    ``nodes`` holds the tree nodes reached by each step and is not
    serialized."""
    steps: tuple
    value: float
    start_state: WorldState
    final_state: WorldState
    iterations_used: int = 0
    nodes: tuple = field(default=(), compare=False, repr=False)

    def to_json(self):
        return {
            'steps':[step.to_json() for step in self.steps],
            'value':self.value,
            'start_state':self.start_state.to_json(),
            'final_state':self.final_state.to_json(),
            'iterations_used':self.iterations_used,
        }

    @classmethod
    def from_json(cls, data):
        from improvr.feasibility import Trajectory

        steps = []
        for entry in data['steps']:
            waypoints = tuple(Pose.from_json(p) for p in
                entry.get('trajectory', []))
            trajectory = None
            if waypoints:
                trajectory = Trajectory(entry.get('object'), waypoints, 0,
                    len(waypoints) - 1)

            steps.append(PlanStep(entry['action'], entry['template'],
                entry.get('object'), WorldState.from_json(
                entry['goal_state']), trajectory))

        final = WorldState.from_json(data['final_state'])
        start = WorldState.from_json(data.get('start_state',
            data['final_state']))
        return cls(tuple(steps), float(data['value']), start, final,
            int(data.get('iterations_used', 0)))

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def save(self, path):
        with open(path, 'w') as f:
            f.write(self.dumps())
            f.write('\n')

# ============================================================================
# Goal Candidate Providers
# ============================================================================

class SampledCandidates:
    """Samples and clusters goal candidates for every expansion."""
    def __init__(self, config):
        self.config = config

    def __call__(self, model, template, state, rng):
        return sample_goal_candidates(model, template, state, self.config.S,
            self.config.delta_c, rng, self.config.noise_on)


class FixedCandidates:
    """Uses fixed relative goal poses for every expansion, each with the
    same probability.

    :param candidates:
        dictionary of ``(action_id, template_id)`` to a list of relative
        poses
    """
    def __init__(self, candidates):
        self.candidates = {key:stack_poses(poses) for key, poses in
            candidates.items()}
        self.sizes = {key:len(poses) for key, poses in candidates.items()}

    def check_coverage(self, actions):
        missing = [(m.action_id, t.template_id) for m in actions
            if not m.is_noop for t in m.templates
            if (m.action_id, t.template_id) not in self.candidates]
        if missing:
            raise CoverageError('no candidates for %s' % ', '.join(
                '%s/%s' % key for key in missing))

    def __call__(self, model, template, state, rng):
        key = (model.action_id, template.template_id)
        translations, quats = self.candidates[key]
        clusters = [[i] for i in range(self.sizes[key])]
        if not clusters:
            return []

        return goal_candidates(model, template, state, translations, quats,
            clusters)

# ============================================================================
# Search Operations
# ============================================================================

def temperature(tau0, visits):
    return tau0 / math.log(math.e + visits)


def choose_child(node, config, rng):
    """Picks one of the unsolved children of an expanded node.  Goal
    selection nodes choose in proportion to the goal probability, the other
    kinds use Boltzmann exploration over the child values at the node's
    temperature."""
    open_children = [c for c in node.children if not c.solved]
    if not open_children:
        raise ValueError('%s has no unsolved children' % node)

    if node.kind == GOAL_SELECTION:
        weights = np.array([c.goal_probability for c in open_children])
    else:
        values = np.array([c.value for c in open_children])
        tau = temperature(config.tau0, node.visits)
        top = values.max()
        if math.isfinite(top):
            weights = np.exp((values - top) / tau)
        else:
            weights = np.ones(len(values))

    weights = weights / weights.sum()
    return open_children[int(rng.choice(len(open_children), p=weights))]


def select_leaf_node(root, config, rng):
    """Descends from ``root`` to the first unexpanded node, counting a visit
    on every node along the way.  Only action selection nodes are ever left
    unexpanded."""
    if root.solved:
        raise ValueError('cannot select below a solved root')

    node = root
    node.visits += 1
    while node.expanded:
        node = choose_child(node, config, rng)
        node.visits += 1

    return node


def expand_node(leaf, intention, actions, scene, config, rng,
        provider=None):
    """Expands an unexpanded action selection node.

    A leaf whose state fails the lazy feasibility check is demoted to
    ``-inf`` and backed up.  Otherwise a template selection child is added
    per real action, a goal selection child per template and an action
    selection leaf per goal candidate, each leaf valued with the intention
    likelihood of its state.  Leaves at ``max_depth`` only get the terminal
    no-op child.  Values of the expanded node and its ancestors are left for
    :func:`update_values`.
    """
    if leaf.kind != ACTION_SELECTION or leaf.expanded or leaf.terminal:
        raise ValueError('%s cannot be expanded' % leaf)

    provider = provider or SampledCandidates(config)
    leaf.expanded = True
    if not state_feasible(scene, leaf.state):
        logger.debug('lazy check rejected %s', leaf)
        demote(leaf)
        update_values(leaf)
        return

    if leaf.depth < config.max_depth:
        for model in actions:
            if model.is_noop:
                continue

            # template and goal selection nodes are complete when created
            action_node = leaf.add_child(TEMPLATE_SELECTION, action=model)
            action_node.expanded = True
            for template in model.templates:
                goal_node = action_node.add_child(GOAL_SELECTION,
                    action=model, template=template)
                goal_node.expanded = True
                for candidate in provider(model, template, leaf.state, rng):
                    goal_node.add_child(ACTION_SELECTION,
                        state=candidate.state,
                        goal_probability=candidate.probability,
                        value=intention_likelihood(intention,
                            candidate.state),
                        depth=leaf.depth + 1)

                goal_node.refresh()

            action_node.refresh()

    if not (config.require_action and leaf.is_root()):
        leaf.add_child(ACTION_SELECTION, state=leaf.state,
            value=intention_likelihood(intention, leaf.state),
            terminal=True)


def update_values(node):
    """Backs values and solved flags up from ``node`` to the root: max over
    children at action and template selection nodes, max minus the action
    cost at goal selection nodes; a node is solved when all its children
    are."""
    for each in [node] + node.ancestors():
        each.refresh()


def demote(node):
    """Marks ``node`` infeasible: its value stays ``-inf`` whatever its
    children hold."""
    node.demoted = True
    node.value = -math.inf
    node.solved = True


def _best_child(node):
    # strict comparison keeps the earliest created child on ties
    best = node.children[0]
    for child in node.children[1:]:
        if child.value > best.value:
            best = child

    return best


def recommend_best_plan(root):
    """Follows the highest valued child from the root down to a terminal
    no-op or an unexpanded leaf.

    :returns:
        :class:`Plan` without trajectories
    :raises ValueError:
        if the root has not been expanded
    :raises NoFeasiblePlan:
        if every branch below the root has been demoted
    """
    if not root.expanded:
        raise ValueError('root has not been expanded')
    if root.value == -math.inf:
        raise NoFeasiblePlan('no feasible plan')

    steps = []
    nodes = []
    node = root
    end_value = root.value
    while node.expanded and node.children:
        action_node = _best_child(node)
        if action_node.terminal:
            end_value = action_node.value
            break

        goal_node = _best_child(action_node)
        node = _best_child(goal_node)
        steps.append(PlanStep(goal_node.action.action_id,
            goal_node.template.template_id, goal_node.action.object_id,
            node.state))
        nodes.append(node)
        end_value = node.value

    # same subtraction order as the backup so the value matches root.value
    value = end_value
    for _ in steps:
        value -= root.tree.action_cost

    return Plan(tuple(steps), value, root.state, node.state,
        nodes=tuple(nodes))


def check_feasibility(plan, scene, config):
    """Generates and checks the trajectory of every step, each one starting
    where the previous step ended.

    :returns:
        tuple ``(feasible, failing_step, plan)`` where ``failing_step`` is the
        index of the first infeasible step (``None`` if all pass) and
        ``plan`` carries the trajectories when feasible
    """
    state = plan.start_state
    steps = []
    for index, step in enumerate(plan.steps):
        goal_pose = step.goal_state[step.object_id]
        trajectory = generate_trajectory(scene, state, step.object_id,
            goal_pose, config.W)
        feasible, waypoint = trajectory_feasible(scene, state, trajectory)
        if not feasible:
            logger.debug('step %s (%s) fails at waypoint %s', index,
                step.action_id, waypoint)
            return False, index, plan

        steps.append(replace(step, trajectory=trajectory))
        state = state.with_pose(step.object_id, goal_pose)

    return True, None, replace(plan, steps=tuple(steps))

# ============================================================================
# Planner
# ============================================================================

class Planner:
    """Runs the whole search for one task.

    :param intention:
        :class:`improvr.intention.IntentionModel`
    :param actions:
        list of :class:`improvr.actions.ActionModel`
    :param scene:
        :class:`improvr.feasibility.SceneSpec`
    :param config:
        :class:`PlannerConfig`
    :param provider:
        goal candidate provider, defaults to :class:`SampledCandidates`
    """
    def __init__(self, intention, actions, scene, config, provider=None):
        self.intention = intention
        self.actions = list(actions)
        self.scene = scene
        self.config = config
        self.provider = provider or SampledCandidates(config)
        self.rng = np.random.default_rng(config.seed)
        self.tree = None

    def create_tree(self, s0):
        self.tree = SearchTree(s0, intention_likelihood(self.intention, s0),
            self.config.action_cost)
        return self.tree

    def iterate(self):
        """One select, expand and back up round."""
        leaf = select_leaf_node(self.tree.root, self.config, self.rng)
        expand_node(leaf, self.intention, self.actions, self.scene,
            self.config, self.rng, self.provider)
        update_values(leaf)
        return leaf

    def search(self, s0):
        """Grows a tree from ``s0`` until the budget is spent or the root is
        solved.

        :returns:
            number of iterations run
        """
        if not state_feasible(self.scene, s0):
            raise InfeasibleStart('start state is not feasible')

        self.create_tree(s0)
        iterations = 0
        while iterations < self.config.K and not self.tree.root.solved:
            self.iterate()
            iterations += 1

        logger.debug('search: %s iterations, %s nodes, root value %s',
            iterations, len(self.tree.nodes), self.tree.root.value)
        return iterations

    def repair(self):
        """Recommends plans until one passes the trajectory checks, demoting
        the node reached by the first failing step each time."""
        root = self.tree.root
        rounds = 0
        while True:
            plan = recommend_best_plan(root)
            feasible, failing, checked = check_feasibility(plan, self.scene,
                self.config)
            if feasible:
                logger.debug('repair: feasible after %s demotions', rounds)
                return checked

            rounds += 1
            node = plan.nodes[failing]
            demote(node)
            update_values(node.parent)

    def solve(self, s0):
        iterations = self.search(s0)
        plan = self.repair()
        logger.info('plan: %s steps, value %.6g, %s iterations',
            len(plan.steps), plan.value, iterations)
        return replace(plan, iterations_used=iterations)


def solve_task(intention, actions, scene, s0, config, provider=None):
    """Computes a feasible plan from ``s0`` that maximizes the intention
    likelihood of its final state minus the action costs.

    :raises InfeasibleStart:
        if ``s0`` fails the state check
    :raises NoFeasiblePlan:
        if every branch has been demoted
    """
    return Planner(intention, actions, scene, config, provider).solve(s0)
