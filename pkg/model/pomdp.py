"""
POMDP data model.

An Mdp holds global action names with per-state enablement and sparse
transition rows keyed by (state, action). A Pomdp adds the observation
labelling. Probabilities and rewards are exact Fractions.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Mapping, Optional, Tuple

from model.errors import ModelValidationError

Row = Tuple[Tuple[int, Fraction], ...]


@dataclass(frozen=True)
class Mdp:
    """Finite MDP: states are 0..num_states-1, actions index into `actions`."""
    num_states: int
    actions: Tuple[str, ...]
    enabled: Tuple[Tuple[int, ...], ...]
    transitions: Mapping[Tuple[int, int], Row]
    initial_state: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.num_states < 1:
            raise ModelValidationError("model needs at least one state")
        if not 0 <= self.initial_state < self.num_states:
            raise ModelValidationError(f"initial state {self.initial_state} out of range")
        if len(self.enabled) != self.num_states:
            raise ModelValidationError("enabled-action table does not cover every state")
        for state, acts in enumerate(self.enabled):
            if not acts:
                raise ModelValidationError(f"state {state} has no enabled action")
            if list(acts) != sorted(set(acts)):
                raise ModelValidationError(f"enabled actions of state {state} must be sorted and unique")
            for action in acts:
                if not 0 <= action < len(self.actions):
                    raise ModelValidationError(f"state {state}: unknown action index {action}")
                row = self.transitions.get((state, action))
                if not row:
                    raise ModelValidationError(
                        f"state {state}, action {self.actions[action]}: enabled but has no transitions"
                    )
                total = Fraction(0)
                for succ, prob in row:
                    if not 0 <= succ < self.num_states:
                        raise ModelValidationError(f"state {state}: successor {succ} out of range")
                    if not 0 < prob <= 1:
                        raise ModelValidationError(
                            f"state {state}, action {self.actions[action]}: probability {prob} not in (0, 1]"
                        )
                    total += prob
                if total != 1:
                    raise ModelValidationError(
                        f"state {state}, action {self.actions[action]}: transition row sum {total} != 1"
                    )
        for state, action in self.transitions:
            if action not in self.enabled[state]:
                raise ModelValidationError(f"state {state}: row for action {action} that is not enabled")

    def successors(self, state: int, action: int) -> Row:
        return self.transitions.get((state, action), ())

    def is_enabled(self, state: int, action: int) -> bool:
        return action in self.enabled[state]


@dataclass(frozen=True)
class Pomdp:
    """MDP plus observation labelling obs_of[state] -> observation index."""
    mdp: Mdp
    num_observations: int
    obs_of: Tuple[int, ...]
    observation_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.observation_names:
            object.__setattr__(
                self, "observation_names", tuple(f"z{i}" for i in range(self.num_observations))
            )
        self.validate()

    def validate(self):
        if len(self.obs_of) != self.mdp.num_states:
            raise ModelValidationError("every state needs exactly one observation")
        if len(self.observation_names) != self.num_observations:
            raise ModelValidationError("observation names do not match the observation count")
        if len(set(self.observation_names)) != self.num_observations:
            raise ModelValidationError("observation names must be unique")
        first_seen: Dict[int, int] = {}
        for state, obs in enumerate(self.obs_of):
            if not 0 <= obs < self.num_observations:
                raise ModelValidationError(f"state {state}: observation index {obs} out of range")
            other = first_seen.setdefault(obs, state)
            if self.mdp.enabled[other] != self.mdp.enabled[state]:
                raise ModelValidationError(
                    f"states {other} and {state} share observation "
                    f"'{self.observation_names[obs]}' but enable different actions "
                    "(observation-based policies need identical action sets per observation)"
                )

    @property
    def num_states(self) -> int:
        return self.mdp.num_states

    @property
    def actions(self) -> Tuple[str, ...]:
        return self.mdp.actions

    @cached_property
    def observation_classes(self) -> Tuple[Tuple[int, ...], ...]:
        """States grouped per observation (O^-1(z)), ascending."""
        classes = [[] for _ in range(self.num_observations)]
        for state, obs in enumerate(self.obs_of):
            classes[obs].append(state)
        return tuple(tuple(c) for c in classes)

    @cached_property
    def max_observation_class_size(self) -> int:
        return max(len(c) for c in self.observation_classes)

    def enabled_for_observation(self, observation: int) -> Tuple[int, ...]:
        members = self.observation_classes[observation]
        return self.mdp.enabled[members[0]] if members else ()

    def observation_index(self, name: str) -> int:
        try:
            return self.observation_names.index(name)
        except ValueError:
            raise ModelValidationError(f"unknown observation '{name}'") from None


class RewardSign(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    def flipped(self) -> "RewardSign":
        return RewardSign.NEGATIVE if self is RewardSign.POSITIVE else RewardSign.POSITIVE


@dataclass(frozen=True)
class RewardStructure:
    """Transition rewards (state, action, successor) -> Fraction. Absent means 0."""
    rewards: Mapping[Tuple[int, int, int], Fraction] = field(default_factory=dict)
    sign: RewardSign = RewardSign.POSITIVE

    def __post_init__(self):
        for key, value in self.rewards.items():
            if value == 0:
                raise ModelValidationError(f"zero reward stored for {key}")
            if (value > 0) != (self.sign is RewardSign.POSITIVE):
                raise ModelValidationError(
                    "rewards must be all non-negative or all non-positive "
                    f"(entry {key} = {value} conflicts with sign {self.sign.value})"
                )

    @classmethod
    def from_entries(cls, entries: Mapping[Tuple[int, int, int], Fraction],
                     sign: Optional[RewardSign] = None) -> "RewardStructure":
        """Drop zero entries and infer the sign when not given."""
        cleaned = {key: Fraction(value) for key, value in entries.items() if value != 0}
        if sign is None:
            has_pos = any(v > 0 for v in cleaned.values())
            has_neg = any(v < 0 for v in cleaned.values())
            if has_pos and has_neg:
                raise ModelValidationError("mixed reward signs: rewards must be all >= 0 or all <= 0")
            sign = RewardSign.NEGATIVE if has_neg else RewardSign.POSITIVE
        return cls(rewards=dict(sorted(cleaned.items())), sign=sign)

    def reward(self, state: int, action: int, successor: int) -> Fraction:
        return self.rewards.get((state, action, successor), Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self.rewards


@dataclass(frozen=True)
class GoalSpec:
    """
    Goal set G. Either characterised by observations (Z' with s in G iff
    O(s) in Z') or, before the goal-observability transform, by states.
    """
    goal_observations: FrozenSet[int] = frozenset()
    goal_states: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if not self.goal_observations and not self.goal_states:
            raise ModelValidationError("goal specification is empty")

    def states(self, pomdp: Pomdp) -> FrozenSet[int]:
        if self.goal_observations:
            return frozenset(
                s for s in range(pomdp.num_states) if pomdp.obs_of[s] in self.goal_observations
            )
        return self.goal_states

    def observation_characterized(self, pomdp: Pomdp) -> bool:
        """True iff G is exactly a union of observation classes."""
        if self.goal_observations:
            return True
        observations = {pomdp.obs_of[s] for s in self.goal_states}
        covered = {s for z in observations for s in pomdp.observation_classes[z]}
        return covered == set(self.goal_states)

    def as_observations(self, pomdp: Pomdp) -> "GoalSpec":
        """Observation form of an observation-characterised goal set."""
        if self.goal_observations:
            return self
        if not self.observation_characterized(pomdp):
            raise ModelValidationError("goal states are not characterised by observations")
        return GoalSpec(goal_observations=frozenset(pomdp.obs_of[s] for s in self.goal_states))
