"""
Model transformations applied before exploration: goal observability,
reachability-to-reward encoding and reward negation for minimisation.
"""

import logging
from fractions import Fraction
from typing import AbstractSet, Dict, List, Tuple

from model.errors import ModelValidationError
from model.pomdp import GoalSpec, Mdp, Pomdp, RewardStructure

logger = logging.getLogger(__name__)


def _fresh_name(base: str, taken) -> str:
    name, suffix = base, 1
    while name in taken:
        name = f"{base}_{suffix}"
        suffix += 1
    return name


def make_goals_observable(pomdp: Pomdp, rewards: RewardStructure,
                          goal_states: AbstractSet[int]) -> Tuple[Pomdp, RewardStructure, GoalSpec]:
    """
    Give every goal state a copy with a fresh goal observation.

    Transitions into a goal state s are redirected to its copy and keep their
    reward; the copy only enables a zero-reward `goal` self-loop. The original
    goal states become unreachable and are dropped; remaining states keep
    their relative order, copies are appended in goal-state order. When G is
    already a union of observation classes only the GoalSpec changes.
    """
    goals = frozenset(goal_states)
    if not goals:
        raise ModelValidationError("goal set is empty")
    spec = GoalSpec(goal_states=goals)
    if spec.observation_characterized(pomdp):
        return pomdp, rewards, spec.as_observations(pomdp)

    mdp = pomdp.mdp
    kept = [s for s in range(mdp.num_states) if s not in goals]
    copies = sorted(goals)
    index: Dict[int, int] = {s: i for i, s in enumerate(kept)}
    copy_index: Dict[int, int] = {g: len(kept) + i for i, g in enumerate(copies)}

    def target(s: int) -> int:
        return copy_index[s] if s in goals else index[s]

    used_obs = sorted({pomdp.obs_of[s] for s in kept})
    obs_index = {z: i for i, z in enumerate(used_obs)}
    names = [pomdp.observation_names[z] for z in used_obs]
    goal_obs = len(names)
    names.append(_fresh_name("goal", names))

    actions = list(mdp.actions)
    goal_action = len(actions)
    actions.append(_fresh_name("goal", actions))

    transitions = {}
    new_rewards = {}
    for s in kept:
        for a in mdp.enabled[s]:
            row: Dict[int, Fraction] = {}
            for succ, prob in mdp.successors(s, a):
                t = target(succ)
                row[t] = row.get(t, Fraction(0)) + prob
                r = rewards.reward(s, a, succ)
                if r:
                    new_rewards[(index[s], a, t)] = r
            transitions[(index[s], a)] = tuple(sorted(row.items()))
    for g in copies:
        transitions[(copy_index[g], goal_action)] = ((copy_index[g], Fraction(1)),)

    enabled: List[Tuple[int, ...]] = [mdp.enabled[s] for s in kept] + [(goal_action,)] * len(copies)
    new_mdp = Mdp(
        num_states=len(kept) + len(copies),
        actions=tuple(actions),
        enabled=tuple(enabled),
        transitions=dict(sorted(transitions.items())),
        initial_state=target(mdp.initial_state),
    )
    new_pomdp = Pomdp(
        mdp=new_mdp,
        num_observations=len(names),
        obs_of=tuple([obs_index[pomdp.obs_of[s]] for s in kept] + [goal_obs] * len(copies)),
        observation_names=tuple(names),
    )
    logger.info(
        "goal states %s made observable: %d states -> %d states",
        sorted(goals), mdp.num_states, new_mdp.num_states,
    )
    return (
        new_pomdp,
        RewardStructure.from_entries(new_rewards, sign=rewards.sign),
        GoalSpec(goal_observations=frozenset({goal_obs})),
    )


def encode_reachability(pomdp: Pomdp, goal_states: AbstractSet[int]) -> RewardStructure:
    """Reward 1 on every transition entering G from outside G."""
    mdp = pomdp.mdp
    entries = {}
    for (s, a), row in mdp.transitions.items():
        if s in goal_states:
            continue
        for succ, _ in row:
            if succ in goal_states:
                entries[(s, a, succ)] = Fraction(1)
    return RewardStructure.from_entries(entries)


def negate_rewards(rewards: RewardStructure) -> RewardStructure:
    return RewardStructure(
        rewards={key: -value for key, value in rewards.rewards.items()},
        sign=rewards.sign.flipped(),
    )
