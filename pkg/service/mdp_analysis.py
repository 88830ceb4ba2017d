"""
Fully observable analysis of the underlying MDP: minimal and maximal
expected total rewards, the observation-based heuristic policy, exact
policy evaluation and the cut-off value of a belief.
"""

import logging
import math
from fractions import Fraction
from typing import AbstractSet, List, NamedTuple, Optional, Set

import numpy as np

from config.settings import get_settings
from model.belief import Belief
from model.errors import ActionNotEnabledError, ChainTooLargeError, SingularSystemError
from model.pomdp import Pomdp, RewardSign, RewardStructure
from model.values import ExtReal, MemorylessObsPolicy, StateValues, ValueKind, is_infinite
from service.exact_solve import evaluate_chain
from service.graph_analysis import reachable_divergence, unavoidable_divergence
from service.sparse_mdp import Iteration, SparseMdp, greedy_choices, value_iteration
from service.transforms import negate_rewards

logger = logging.getLogger(__name__)

ANALYSIS_PRECISION = 1e-8


class Optimum(NamedTuple):
    iteration: Iteration
    choices: List[int]
    infinite: Set[int]


def optimise_positive(mdp: SparseMdp, maximize: bool, precision: float,
                      max_iterations: Optional[int] = None,
                      sanity_bound: Optional[np.ndarray] = None) -> Optimum:
    """
    Optimal total reward on a non-negative SparseMdp: qualitative +inf
    detection, value iteration from zero (converging from below) and greedy
    choice extraction.
    """
    if max_iterations is None:
        max_iterations = get_settings().max_iterations
    infinite = reachable_divergence(mdp) if maximize else unavoidable_divergence(mdp)
    fixed = {t: 0.0 for t in mdp.targets}
    fixed.update({s: math.inf for s in infinite})
    iteration = value_iteration(mdp, maximize, fixed, precision, max_iterations, sanity_bound)
    choices = greedy_choices(mdp, iteration.values, maximize, tolerance=max(10 * precision, 1e-12))
    return Optimum(iteration, choices, infinite)


def refine_with_policy(mdp: SparseMdp, optimum: Optimum, maximize: bool, exact_limit: int) -> List[ExtReal]:
    """
    Combine value iteration (a lower bound) with the exact value of the
    greedy policy: for max both are lower bounds and the larger wins; for
    min the policy value is an upper bound, used only where it meets the
    iterate.
    """
    values = optimum.iteration.values
    try:
        exact = evaluate_chain(mdp.restrict(optimum.choices), exact_limit, allow_float=False)
    except (ChainTooLargeError, SingularSystemError) as exc:
        logger.debug("exact refinement skipped: %s", exc)
        exact = [None] * mdp.num_states
    refined: List[ExtReal] = []
    for s in range(mdp.num_states):
        v = float(values[s])
        e = exact[s]
        if math.isinf(v):
            refined.append(v)
        elif e is None or is_infinite(e):
            refined.append(v)
        elif (maximize and e >= v) or (not maximize and e <= v):
            refined.append(e)
        else:
            refined.append(v)
    return refined


def _underlying(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int]) -> SparseMdp:
    return SparseMdp.from_mdp(pomdp.mdp, rewards, frozenset(goal_states))


def _negated(values: StateValues, kind: ValueKind) -> StateValues:
    return StateValues(tuple(-v for v in values.values), kind)


def min_expected_reward(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int],
                        precision: float = ANALYSIS_PRECISION) -> StateValues:
    """U(s): minimal expected total reward until G over all policies of the underlying MDP."""
    if rewards.sign is RewardSign.NEGATIVE:
        return _negated(max_expected_reward(pomdp, negate_rewards(rewards), goal_states, precision), ValueKind.MIN)
    mdp = _underlying(pomdp, rewards, goal_states)
    optimum = optimise_positive(mdp, maximize=False, precision=precision)
    values = refine_with_policy(mdp, optimum, maximize=False, exact_limit=get_settings().exact_limit)
    return StateValues(tuple(values), ValueKind.MIN)


def max_expected_reward(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int],
                        precision: float = ANALYSIS_PRECISION) -> StateValues:
    """Maximal expected total reward until G over all policies of the underlying MDP."""
    if rewards.sign is RewardSign.NEGATIVE:
        return _negated(min_expected_reward(pomdp, negate_rewards(rewards), goal_states, precision), ValueKind.MAX)
    mdp = _underlying(pomdp, rewards, goal_states)
    optimum = optimise_positive(mdp, maximize=True, precision=precision)
    values = refine_with_policy(mdp, optimum, maximize=True, exact_limit=get_settings().exact_limit)
    return StateValues(tuple(values), ValueKind.MAX)


def q_value(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int],
            values: StateValues, state: int, action: int) -> ExtReal:
    if state in goal_states:
        return Fraction(0)
    total: ExtReal = Fraction(0)
    for succ, prob in pomdp.mdp.successors(state, action):
        total += prob * (rewards.reward(state, action, succ) + values[succ])
    return total


def heuristic_policy(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int],
                     max_values: Optional[StateValues] = None) -> MemorylessObsPolicy:
    """
    Per observation, the enabled action with the largest unweighted mean of
    underlying-MDP optimal Q-values over the observation's states; ties go to
    the smallest action index.
    """
    if max_values is None:
        max_values = max_expected_reward(pomdp, rewards, goal_states)
    choice = []
    for z, members in enumerate(pomdp.observation_classes):
        enabled = pomdp.enabled_for_observation(z)
        best_action, best_mean = (enabled[0] if enabled else 0), None
        for action in enabled:
            mean = sum(
                (q_value(pomdp, rewards, goal_states, max_values, s, action) for s in members), Fraction(0)
            ) / len(members)
            if best_mean is None or mean > best_mean:
                best_action, best_mean = action, mean
        choice.append(best_action)
    policy = MemorylessObsPolicy(tuple(choice))
    logger.info(
        "heuristic policy: %s",
        ", ".join(f"{pomdp.observation_names[z]}->{pomdp.actions[a]}"
                  for z, a in enumerate(policy.choice) if pomdp.observation_classes[z]),
    )
    return policy


def evaluate_policy(pomdp: Pomdp, policy: MemorylessObsPolicy, rewards: RewardStructure,
                    goal_states: AbstractSet[int], exact_limit: Optional[int] = None) -> StateValues:
    """V^sigma(s): expected total reward of the chain induced by the policy."""
    if exact_limit is None:
        exact_limit = get_settings().exact_limit
    actions = []
    for s in range(pomdp.num_states):
        action = policy.action_for(pomdp.obs_of[s])
        if not pomdp.mdp.is_enabled(s, action):
            raise ActionNotEnabledError(f"policy picks action {action} which state {s} does not enable")
        actions.append(action)
    chain = SparseMdp.from_mdp(pomdp.mdp, rewards, frozenset(goal_states), actions_per_state=actions)
    return StateValues(tuple(evaluate_chain(chain, exact_limit)), ValueKind.POLICY)


def cutoff_value(belief: Belief, values: StateValues) -> ExtReal:
    """V(b) = sum_s b(s) * values(s), the cut-off transition reward."""
    total: ExtReal = Fraction(0)
    for state, prob in belief.entries:
        v = values[state]
        if is_infinite(v):
            return v
        total += prob * v
    return total
