"""
Finite-horizon reference values in exact arithmetic.

    V_n(b)      optimal n-step value of a belief (belief-tree recursion)
    V_n^pi(b)   n-step value of a memoryless observation-based policy
    W_n^pi(s)   the same policy's n-step value per state of the underlying MDP
    U_n(s)      minimal n-step value per state of the underlying MDP

They back the soundness checks of cut-offs and clipping.
"""

from fractions import Fraction
from typing import AbstractSet, Dict, Optional, Tuple

from config.settings import get_settings
from model.belief import Belief
from model.errors import HorizonTooLargeError
from model.pomdp import Pomdp, RewardStructure
from model.values import MemorylessObsPolicy
from service.beliefs import belief_key, is_goal_belief, successors


def _check_horizon(n: int, bound: Optional[int]):
    if bound is None:
        bound = get_settings().oracle_horizon
    if n < 0:
        raise ValueError("horizon must be >= 0")
    if n > bound:
        raise HorizonTooLargeError(f"horizon {n} exceeds the oracle bound {bound}")


def n_step_oracle(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int], belief: Belief,
                  n: int, minimize: bool = False, bound: Optional[int] = None) -> Fraction:
    """V_n(b): 0 on goal beliefs, else opt_a sum_z P(b, a, z) * (reward(b, a, z) + V_{n-1}(b'))."""
    _check_horizon(n, bound)
    pick = min if minimize else max
    memo: Dict[Tuple[tuple, int], Fraction] = {}

    def value(b: Belief, depth: int) -> Fraction:
        if depth == 0 or is_goal_belief(b, goal_states):
            return Fraction(0)
        key = (belief_key(b), depth)
        if key not in memo:
            memo[key] = pick(
                sum((t.probability * (t.reward + value(t.belief, depth - 1))
                     for t in successors(pomdp, rewards, b, a)), Fraction(0))
                for a in pomdp.enabled_for_observation(b.observation)
            )
        return memo[key]

    return value(belief, n)


def n_step_policy_value(pomdp: Pomdp, policy: MemorylessObsPolicy, rewards: RewardStructure,
                        goal_states: AbstractSet[int], belief: Belief, n: int,
                        bound: Optional[int] = None) -> Fraction:
    """V_n^pi(b) for a memoryless observation-based policy."""
    _check_horizon(n, bound)

    def value(b: Belief, depth: int) -> Fraction:
        if depth == 0 or is_goal_belief(b, goal_states):
            return Fraction(0)
        action = policy.action_for(b.observation)
        return sum(
            (t.probability * (t.reward + value(t.belief, depth - 1))
             for t in successors(pomdp, rewards, b, action)),
            Fraction(0),
        )

    return value(belief, n)


def _state_recursion(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int], n: int,
                     actions_of) -> Tuple[Fraction, ...]:
    mdp = pomdp.mdp
    current = [Fraction(0)] * mdp.num_states
    for _ in range(n):
        nxt = []
        for s in range(mdp.num_states):
            if s in goal_states:
                nxt.append(Fraction(0))
                continue
            options = [
                sum((p * (rewards.reward(s, a, t) + current[t]) for t, p in mdp.successors(s, a)), Fraction(0))
                for a in actions_of(s)
            ]
            nxt.append(min(options))
        current = nxt
    return tuple(current)


def n_step_state_min(pomdp: Pomdp, rewards: RewardStructure, goal_states: AbstractSet[int], n: int,
                     bound: Optional[int] = None) -> Tuple[Fraction, ...]:
    """U_n(s) on the underlying MDP."""
    _check_horizon(n, bound)
    return _state_recursion(pomdp, rewards, goal_states, n, lambda s: pomdp.mdp.enabled[s])


def n_step_policy_state_values(pomdp: Pomdp, policy: MemorylessObsPolicy, rewards: RewardStructure,
                               goal_states: AbstractSet[int], n: int,
                               bound: Optional[int] = None) -> Tuple[Fraction, ...]:
    """W_n^pi(s): the policy's n-step value from each state of the underlying MDP."""
    _check_horizon(n, bound)
    return _state_recursion(
        pomdp, rewards, goal_states, n, lambda s: (policy.action_for(pomdp.obs_of[s]),)
    )
