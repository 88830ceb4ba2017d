"""
Belief MDP semantics: Bayesian successors, observation probabilities and
belief rewards, all in exact rational arithmetic.
"""

from fractions import Fraction
from typing import AbstractSet, Dict, List, NamedTuple, Tuple

from model.belief import Belief
from model.errors import ActionNotEnabledError, UndefinedSuccessorError
from model.pomdp import Pomdp, RewardStructure


class BeliefTransition(NamedTuple):
    observation: int
    probability: Fraction
    belief: Belief
    reward: Fraction


def initial_belief(pomdp: Pomdp) -> Belief:
    s = pomdp.mdp.initial_state
    return Belief.dirac(s, pomdp.obs_of[s])


def belief_key(belief: Belief) -> Tuple[Tuple[int, Fraction], ...]:
    """Canonical hashable key; Fractions are normalised so equal maps give equal keys."""
    return belief.entries


def is_goal_belief(belief: Belief, goal_states: AbstractSet[int]) -> bool:
    return belief.support <= goal_states


def _require_enabled(pomdp: Pomdp, belief: Belief, action: int):
    if action not in pomdp.enabled_for_observation(belief.observation):
        name = pomdp.actions[action] if 0 <= action < len(pomdp.actions) else action
        raise ActionNotEnabledError(
            f"action {name} not enabled for observation {pomdp.observation_names[belief.observation]}"
        )


def _split(pomdp: Pomdp, rewards: RewardStructure, belief: Belief, action: int):
    """Unnormalised successor mass and reward mass per observation."""
    _require_enabled(pomdp, belief, action)
    mass: Dict[int, Dict[int, Fraction]] = {}
    reward_mass: Dict[int, Fraction] = {}
    for s, p in belief.entries:
        for succ, prob in pomdp.mdp.successors(s, action):
            z = pomdp.obs_of[succ]
            weight = p * prob
            bucket = mass.setdefault(z, {})
            bucket[succ] = bucket.get(succ, Fraction(0)) + weight
            r = rewards.reward(s, action, succ)
            if r:
                reward_mass[z] = reward_mass.get(z, Fraction(0)) + weight * r
    return mass, reward_mass


def obs_probability(pomdp: Pomdp, belief: Belief, action: int, observation: int) -> Fraction:
    _require_enabled(pomdp, belief, action)
    total = Fraction(0)
    for s, p in belief.entries:
        for succ, prob in pomdp.mdp.successors(s, action):
            if pomdp.obs_of[succ] == observation:
                total += p * prob
    return total


def successors(pomdp: Pomdp, rewards: RewardStructure, belief: Belief, action: int) -> List[BeliefTransition]:
    """All (z, P(b, a, z), [b|a,z], reward) with positive probability, z ascending."""
    mass, reward_mass = _split(pomdp, rewards, belief, action)
    result = []
    for z in sorted(mass):
        bucket = mass[z]
        prob = sum(bucket.values(), Fraction(0))
        succ_belief = Belief.from_mapping({s: m / prob for s, m in bucket.items()}, z)
        result.append(BeliefTransition(z, prob, succ_belief, reward_mass.get(z, Fraction(0)) / prob))
    return result


def _transition(pomdp, rewards, belief, action, observation) -> BeliefTransition:
    for transition in successors(pomdp, rewards, belief, action):
        if transition.observation == observation:
            return transition
    raise UndefinedSuccessorError(
        f"observation {pomdp.observation_names[observation]} has probability 0 "
        f"after {pomdp.actions[action]} from belief {{{belief.label()}}}"
    )


def successor(pomdp: Pomdp, belief: Belief, action: int, observation: int) -> Belief:
    return _transition(pomdp, RewardStructure(), belief, action, observation).belief


def belief_reward(pomdp: Pomdp, rewards: RewardStructure, belief: Belief, action: int, observation: int) -> Fraction:
    return _transition(pomdp, rewards, belief, action, observation).reward
