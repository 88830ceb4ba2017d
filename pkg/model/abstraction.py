from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from model.belief import Belief
from model.errors import ConfigurationError
from model.pomdp import RewardSign
from model.values import ExtReal

GOAL_LABEL = "goal"
CUT_LABEL = "cut"
CLIP_LABEL = "clip"


@dataclass(frozen=True)
class ExplorationConfig:
    """Knobs of the belief exploration."""
    size_factor: float = 1.0
    clipping_enabled: bool = False
    eta: int = 2
    max_expansions: Optional[int] = None
    size_budget: Optional[int] = None  # absolute abstraction-size threshold, overrides size_factor
    threads: int = 1
    clipping_solver: str = "enumerate"  # 'enumerate' or 'milp'

    def __post_init__(self):
        if self.eta < 1:
            raise ConfigurationError("eta must be >= 1")
        if self.size_factor < 0:
            raise ConfigurationError("size_factor must be >= 0")
        if self.size_budget is not None and self.size_budget < 0:
            raise ConfigurationError("size budget must be >= 0")
        if self.max_expansions is not None and self.max_expansions < 0:
            raise ConfigurationError("max_expansions must be >= 0")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        if self.clipping_solver not in ("enumerate", "milp"):
            raise ConfigurationError(f"unknown clipping solver '{self.clipping_solver}'")


@dataclass
class AbstractionMdp:
    """
    Finite abstraction MDP built by the explorer.

    State 0 is b_init and state 1 is b_cut (belief None). Action indices
    below len(pomdp actions) are POMDP actions; goal/cut/clip follow.
    """
    beliefs: List[Optional[Belief]]
    action_labels: Tuple[str, ...]
    num_pomdp_actions: int
    enabled: List[Tuple[int, ...]]
    transitions: Dict[Tuple[int, int], Tuple[Tuple[int, Fraction], ...]]
    rewards: Dict[Tuple[int, int, int], ExtReal]
    goal_states: FrozenSet[int]
    sign: RewardSign = RewardSign.POSITIVE
    expanded: FrozenSet[int] = frozenset()
    initial: int = 0
    cut_state: int = 1
    usable: bool = True

    @property
    def num_states(self) -> int:
        return len(self.beliefs)

    @property
    def goal_action(self) -> int:
        return self.num_pomdp_actions

    @property
    def cut_action(self) -> int:
        return self.num_pomdp_actions + 1

    @property
    def clip_action(self) -> int:
        return self.num_pomdp_actions + 2

    def successors(self, state: int, action: int):
        return self.transitions.get((state, action), ())

    def reward(self, state: int, action: int, successor: int) -> ExtReal:
        return self.rewards.get((state, action, successor), Fraction(0))

    @property
    def explored_beliefs(self) -> int:
        return self.num_states - 1

    @property
    def cut_transitions(self) -> int:
        return sum(
            1 for s in range(self.num_states)
            if s != self.cut_state and (s, self.cut_action) in self.transitions
        )

    @property
    def clip_transitions(self) -> int:
        return sum(1 for s in range(self.num_states) if (s, self.clip_action) in self.transitions)

    @property
    def complete(self) -> bool:
        """No cut-off or clipping was needed."""
        return self.cut_transitions == 0 and self.clip_transitions == 0

    def restrict(self, policy: Tuple[int, ...]) -> "AbstractionMdp":
        """Markov chain induced by a memoryless policy (one action per state)."""
        transitions = {(s, a): self.transitions[(s, a)] for s, a in enumerate(policy)}
        rewards = {k: v for k, v in self.rewards.items() if policy[k[0]] == k[1]}
        return AbstractionMdp(
            beliefs=self.beliefs,
            action_labels=self.action_labels,
            num_pomdp_actions=self.num_pomdp_actions,
            enabled=[(a,) for a in policy],
            transitions=transitions,
            rewards=rewards,
            goal_states=self.goal_states,
            sign=self.sign,
            expanded=self.expanded,
            initial=self.initial,
            cut_state=self.cut_state,
            usable=self.usable,
        )


@dataclass(frozen=True)
class SolveResult:
    value: ExtReal
    policy: Tuple[int, ...]
    iterations: int
    precision_achieved: float
    values: Tuple[ExtReal, ...] = ()
    exact: bool = False
    precision_limited: bool = False
