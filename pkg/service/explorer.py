"""
Belief exploration with cut-offs and clipping.

Beliefs are taken from a FIFO queue. Goal beliefs get a goal self-loop,
expanded beliefs get their belief-MDP successors, and every other belief is
cut off towards b_cut with reward V(b); with clipping enabled it also gets a
clip transition to the best grid candidate b~ (probability 1 - delta) and to
b_cut (probability delta, reward sum_s delta(s)/delta * U(s)). Grid beliefs
are always expanded when clipping is on, so clip targets never clip again.
"""

import logging
from collections import deque
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import networkx as nx

from model.abstraction import CLIP_LABEL, CUT_LABEL, GOAL_LABEL, AbstractionMdp, ExplorationConfig
from model.belief import Belief
from model.clipping import ClippingResult
from model.errors import InvalidAbstractionError
from model.pomdp import GoalSpec, Pomdp, RewardStructure
from model.values import ExtReal, StateValues, is_infinite
from service.beliefs import belief_key, initial_belief, is_goal_belief, successors
from service.clipping import grid_candidates, is_grid_belief, solve_clipping, solve_clipping_milp

logger = logging.getLogger(__name__)

CutoffFn = Callable[[Belief], ExtReal]


def _labels(actions: Tuple[str, ...]) -> Tuple[str, ...]:
    taken = set(actions)
    labels = list(actions)
    for base in (GOAL_LABEL, CUT_LABEL, CLIP_LABEL):
        name, suffix = base, 1
        while name in taken:
            name = f"{base}_{suffix}"
            suffix += 1
        taken.add(name)
        labels.append(name)
    return tuple(labels)


def expansion_threshold(pomdp: Pomdp, config: ExplorationConfig) -> float:
    """Abstraction size up to which non-grid beliefs are expanded."""
    if config.size_budget is not None:
        return config.size_budget
    return config.size_factor * pomdp.num_states * pomdp.max_observation_class_size


def clip_reward(result: ClippingResult, u: StateValues) -> ExtReal:
    """sum_s (delta(s) / delta) * U(s), the reward of the clip transition into b_cut."""
    total: ExtReal = Fraction(0)
    for state, d in result.state_deltas:
        if d == 0:
            continue
        value = u[state]
        if is_infinite(value):
            return value
        total += (d / result.delta) * value
    return total


class _Builder:
    def __init__(self, pomdp: Pomdp, rewards: RewardStructure, config: ExplorationConfig):
        self.pomdp = pomdp
        self.rewards = rewards
        self.config = config
        self.labels = _labels(pomdp.actions)
        self.goal = len(pomdp.actions)
        self.cut = self.goal + 1
        self.clip = self.goal + 2
        self.beliefs: List[Optional[Belief]] = []
        self.index: Dict[tuple, int] = {}
        self.enabled: List[Tuple[int, ...]] = []
        self.transitions: Dict[Tuple[int, int], Tuple[Tuple[int, Fraction], ...]] = {}
        self.reward_map: Dict[Tuple[int, int, int], ExtReal] = {}
        self.queue = deque()

    def add(self, belief: Optional[Belief]) -> int:
        """Index of a belief, registering and enqueueing it when new."""
        if belief is not None:
            key = belief_key(belief)
            if key in self.index:
                return self.index[key]
            self.index[key] = len(self.beliefs)
            self.queue.append(len(self.beliefs))
        self.beliefs.append(belief)
        self.enabled.append(())
        return len(self.beliefs) - 1

    def set_row(self, state: int, action: int, row, rewards: Dict[int, ExtReal] = None):
        self.transitions[(state, action)] = tuple(sorted(row))
        for target, value in (rewards or {}).items():
            if is_infinite(value) or value != 0:
                self.reward_map[(state, action, target)] = value


def explore(pomdp: Pomdp, rewards: RewardStructure, goals: GoalSpec, cutoff_fn: CutoffFn,
            u: Optional[StateValues], config: ExplorationConfig) -> AbstractionMdp:
    """Unfold the belief MDP from b_init into a finite abstraction MDP."""
    goal_states = goals.states(pomdp)
    builder = _Builder(pomdp, rewards, config)
    threshold = expansion_threshold(pomdp, config)
    cut_state = 1
    builder.add(initial_belief(pomdp))
    builder.add(None)
    builder.set_row(cut_state, builder.cut, [(cut_state, Fraction(1))])
    builder.enabled[cut_state] = (builder.cut,)

    expanded = set()
    goal_beliefs = set()
    expansions = 0
    usable = True
    while builder.queue:
        state = builder.queue.popleft()
        belief = builder.beliefs[state]
        if is_goal_belief(belief, goal_states):
            builder.set_row(state, builder.goal, [(state, Fraction(1))])
            builder.enabled[state] = (builder.goal,)
            goal_beliefs.add(state)
            continue

        anchor = config.clipping_enabled and is_grid_belief(belief, config.eta)
        wants_expansion = anchor or len(builder.beliefs) <= threshold
        if wants_expansion and config.max_expansions is not None and expansions >= config.max_expansions:
            if usable:
                logger.warning("exploration hard cap of %d expansions reached", config.max_expansions)
            usable = False
            wants_expansion = False

        if wants_expansion:
            expansions += 1
            actions = pomdp.enabled_for_observation(belief.observation)
            for action in actions:
                row, row_rewards = [], {}
                for transition in successors(pomdp, rewards, belief, action):
                    target = builder.add(transition.belief)
                    row.append((target, transition.probability))
                    row_rewards[target] = transition.reward
                builder.set_row(state, action, row, row_rewards)
            builder.enabled[state] = tuple(actions)
            expanded.add(state)
            logger.debug("expanded belief %d {%s}", state, belief.label())
            continue

        builder.set_row(state, builder.cut, [(cut_state, Fraction(1))], {cut_state: cutoff_fn(belief)})
        enabled = [builder.cut]
        if config.clipping_enabled and usable:
            result = _clip(belief, u, config)
            if result is not None and not result.is_trivial:
                target = builder.add(result.candidate)
                builder.set_row(
                    state, builder.clip,
                    [(target, 1 - result.delta), (cut_state, result.delta)],
                    {cut_state: clip_reward(result, u) if u is not None else Fraction(0)},
                )
                enabled.append(builder.clip)
        builder.enabled[state] = tuple(enabled)
        logger.debug("cut off belief %d {%s}", state, belief.label())

    abstraction = AbstractionMdp(
        beliefs=builder.beliefs,
        action_labels=builder.labels,
        num_pomdp_actions=len(pomdp.actions),
        enabled=builder.enabled,
        transitions=builder.transitions,
        rewards=builder.reward_map,
        goal_states=frozenset(goal_beliefs | {cut_state}),
        sign=rewards.sign,
        expanded=frozenset(expanded),
        initial=0,
        cut_state=cut_state,
        usable=usable,
    )
    logger.info(
        "explored %d beliefs (%d expanded, %d cut, %d clipped)",
        abstraction.explored_beliefs, len(expanded), abstraction.cut_transitions, abstraction.clip_transitions,
    )
    return abstraction


def _clip(belief: Belief, u: Optional[StateValues], config: ExplorationConfig) -> Optional[ClippingResult]:
    candidates = grid_candidates(belief.observation, belief.support, config.eta)
    if config.clipping_solver == "milp":
        return solve_clipping_milp(belief, candidates, u)
    return solve_clipping(belief, candidates, u, threads=config.threads)


def clip_graph(abstraction: AbstractionMdp) -> nx.DiGraph:
    """Edges from clipped beliefs to their clipping candidates."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(abstraction.num_states))
    for (state, action), row in abstraction.transitions.items():
        if action == abstraction.clip_action:
            graph.add_edges_from((state, t) for t, _ in row if t != abstraction.cut_state)
    return graph


def validate_abstraction(abstraction: AbstractionMdp):
    """Raise InvalidAbstractionError unless the structural invariants hold."""
    cut, goal, clip = abstraction.cut_action, abstraction.goal_action, abstraction.clip_action
    n = abstraction.num_states
    if n < 2 or abstraction.beliefs[abstraction.cut_state] is not None:
        raise InvalidAbstractionError("abstraction needs b_init and b_cut")
    if len(abstraction.enabled) != n:
        raise InvalidAbstractionError("enabled-action table does not cover every state")
    for (state, action), row in abstraction.transitions.items():
        if action not in abstraction.enabled[state]:
            raise InvalidAbstractionError(f"state {state}: row for disabled action {action}")
        if any(not 0 < p <= 1 or not 0 <= t < n for t, p in row):
            raise InvalidAbstractionError(f"state {state}: malformed row for action {action}")
        if sum(p for _, p in row) != 1:
            raise InvalidAbstractionError(f"state {state}: row of action {action} does not sum to 1")
    for (state, action, target), _ in abstraction.rewards.items():
        if target not in {t for t, _ in abstraction.successors(state, action)}:
            raise InvalidAbstractionError(f"reward on missing transition {state} -{action}-> {target}")

    for state in range(n):
        acts = abstraction.enabled[state]
        if not acts:
            raise InvalidAbstractionError(f"state {state} has no enabled action")
        for action in acts:
            if (state, action) not in abstraction.transitions:
                raise InvalidAbstractionError(f"state {state}: enabled action {action} has no row")
        if state == abstraction.cut_state or state in abstraction.goal_states:
            expected = cut if state == abstraction.cut_state else goal
            if acts != (expected,) or abstraction.successors(state, expected) != ((state, Fraction(1)),):
                raise InvalidAbstractionError(f"state {state} must only have its self-loop")
            if abstraction.reward(state, expected, state) != 0:
                raise InvalidAbstractionError(f"self-loop of state {state} must have reward 0")
            continue
        if state in abstraction.expanded:
            if any(a >= abstraction.num_pomdp_actions for a in acts):
                raise InvalidAbstractionError(f"expanded state {state} uses abstraction actions")
            continue
        if cut not in acts or abstraction.successors(state, cut) != ((abstraction.cut_state, Fraction(1)),):
            raise InvalidAbstractionError(f"frontier state {state} lacks the cut transition")
        if set(acts) - {cut, clip}:
            raise InvalidAbstractionError(f"frontier state {state} has unexpected actions")
        if clip in acts:
            row = abstraction.successors(state, clip)
            if len(row) != 2 or abstraction.cut_state not in {t for t, _ in row}:
                raise InvalidAbstractionError(f"clip transition of state {state} is malformed")
    if not nx.is_directed_acyclic_graph(clip_graph(abstraction)):
        raise InvalidAbstractionError("clip transitions form a cycle")
