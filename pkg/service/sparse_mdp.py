"""
Common sparse representation for every MDP we solve numerically (the
underlying MDP of a POMDP, policy-induced chains, belief abstractions)
together with value iteration over scipy sparse matrices.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from model.abstraction import AbstractionMdp
from model.errors import SolverError
from model.pomdp import Mdp, RewardSign, RewardStructure
from model.values import ExtReal, is_infinite

logger = logging.getLogger(__name__)

Branch = Tuple[int, Fraction, ExtReal]  # successor, probability, reward


class Choice(NamedTuple):
    action: int
    branches: Tuple[Branch, ...]

    @property
    def successors(self) -> Tuple[int, ...]:
        return tuple(t for t, _, _ in self.branches)

    @property
    def has_reward(self) -> bool:
        return any(is_infinite(r) or r != 0 for _, _, r in self.branches)

    @property
    def has_infinite_reward(self) -> bool:
        return any(is_infinite(r) for _, _, r in self.branches)


@dataclass
class SparseMdp:
    num_states: int
    choices: List[Tuple[Choice, ...]]
    targets: FrozenSet[int]
    sign: RewardSign = RewardSign.POSITIVE
    initial: int = 0

    @classmethod
    def from_mdp(cls, mdp: Mdp, rewards: RewardStructure, goal_states: FrozenSet[int],
                 actions_per_state: Optional[Sequence[int]] = None) -> "SparseMdp":
        """Underlying MDP, or the chain induced by one fixed action per state."""
        choices = []
        for s in range(mdp.num_states):
            acts = mdp.enabled[s] if actions_per_state is None else (actions_per_state[s],)
            choices.append(tuple(
                Choice(a, tuple((t, p, rewards.reward(s, a, t)) for t, p in mdp.successors(s, a)))
                for a in acts
            ))
        return cls(mdp.num_states, choices, frozenset(goal_states), rewards.sign, mdp.initial_state)

    @classmethod
    def from_abstraction(cls, abstraction: AbstractionMdp) -> "SparseMdp":
        choices = []
        for s in range(abstraction.num_states):
            choices.append(tuple(
                Choice(a, tuple((t, p, abstraction.reward(s, a, t)) for t, p in abstraction.successors(s, a)))
                for a in abstraction.enabled[s]
            ))
        return cls(abstraction.num_states, choices, abstraction.goal_states, abstraction.sign, abstraction.initial)

    def restrict(self, chosen: Sequence[int]) -> "SparseMdp":
        """Keep only choice index chosen[s] in every state."""
        choices = [(self.choices[s][chosen[s]],) for s in range(self.num_states)]
        return SparseMdp(self.num_states, choices, self.targets, self.sign, self.initial)

    def negated(self) -> "SparseMdp":
        choices = [
            tuple(Choice(c.action, tuple((t, p, -r) for t, p, r in c.branches)) for c in cs)
            for cs in self.choices
        ]
        return SparseMdp(self.num_states, choices, self.targets, self.sign.flipped(), self.initial)

    @property
    def infinity(self) -> float:
        return math.inf if self.sign is RewardSign.POSITIVE else -math.inf


class Iteration(NamedTuple):
    values: np.ndarray
    iterations: int
    precision_achieved: float
    converged: bool


class _Matrices(NamedTuple):
    transition: sparse.csr_matrix
    reward: np.ndarray
    group_starts: np.ndarray
    row_state: np.ndarray


def _assemble(mdp: SparseMdp) -> _Matrices:
    data, rows, cols, reward, group_starts, row_state = [], [], [], [], [], []
    row = 0
    for s in range(mdp.num_states):
        if not mdp.choices[s]:
            raise SolverError(f"state {s} has no choice")
        group_starts.append(row)
        for choice in mdp.choices[s]:
            expected = 0.0
            for t, p, r in choice.branches:
                rows.append(row)
                cols.append(t)
                data.append(float(p))
                if is_infinite(r) or r != 0:
                    expected += float(p) * float(r)
            reward.append(expected)
            row_state.append(s)
            row += 1
    transition = sparse.csr_matrix((data, (rows, cols)), shape=(row, mdp.num_states))
    return _Matrices(transition, np.array(reward, dtype=float), np.array(group_starts), np.array(row_state))


def q_values(mdp: SparseMdp, values: np.ndarray) -> List[np.ndarray]:
    """Q(s, c) = r(s, c) + sum_t P(s, c, t) * values[t], grouped per state."""
    m = _assemble(mdp)
    q = m.reward + m.transition @ values
    ends = list(m.group_starts[1:]) + [len(q)]
    return [q[start:end] for start, end in zip(m.group_starts, ends)]


def value_iteration(mdp: SparseMdp, maximize: bool, fixed: Dict[int, ExtReal], precision: float,
                    max_iterations: int, sanity_bound: Optional[np.ndarray] = None,
                    observer: Optional[Callable[[int, np.ndarray], None]] = None) -> Iteration:
    """
    Jacobi value iteration from the zero vector. States in `fixed` (targets,
    qualitatively infinite states) keep their value. Stops when every finite
    entry changes by at most `precision` relative to its new value.
    `observer(iteration, values)` sees every iterate.
    """
    m = _assemble(mdp)
    reduce = np.maximum.reduceat if maximize else np.minimum.reduceat
    fixed_idx = np.array(sorted(fixed), dtype=int)
    fixed_val = np.array([float(fixed[s]) for s in sorted(fixed)], dtype=float)
    x = np.zeros(mdp.num_states)
    if len(fixed_idx):
        x[fixed_idx] = fixed_val
    achieved = math.inf
    for iteration in range(1, max_iterations + 1):
        q = m.reward + m.transition @ x
        v = reduce(q, m.group_starts)
        if len(fixed_idx):
            v[fixed_idx] = fixed_val
        finite = np.isfinite(v) & np.isfinite(x)
        diff = np.abs(v[finite] - x[finite])
        scale = np.abs(v[finite])
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(diff == 0, 0.0, diff / scale)
        achieved = float(rel.max(initial=0.0))
        if sanity_bound is not None:
            over = np.isfinite(v) & (v > sanity_bound + 1e-6 * np.maximum(1.0, np.abs(sanity_bound)))
            if over.any():
                state = int(np.flatnonzero(over)[0])
                raise SolverError(
                    f"value iteration diverged: state {state} exceeds the underlying MDP bound "
                    f"({v[state]} > {sanity_bound[state]})"
                )
        x = v
        if observer is not None:
            observer(iteration, x)
        if achieved <= precision:
            logger.debug("value iteration converged after %d iterations (precision %.3g)", iteration, achieved)
            return Iteration(x, iteration, achieved, True)
    logger.warning("value iteration hit the cap of %d iterations (precision %.3g)", max_iterations, achieved)
    return Iteration(x, max_iterations, achieved, False)


def greedy_choices(mdp: SparseMdp, values: np.ndarray, maximize: bool, tolerance: float) -> List[int]:
    """
    Pick an optimal choice per state. Among near-optimal choices, prefer one
    that moves towards a target (backward layers from the targets), so that
    zero-reward self-loops tied with progress are not selected.
    """
    per_state = q_values(mdp, values)
    optimal: List[List[int]] = []
    for s, q in enumerate(per_state):
        best = float(q.max() if maximize else q.min())
        if math.isinf(best) or math.isinf(values[s]):
            close = [i for i, v in enumerate(q) if v == best]
        else:
            slack = tolerance * max(1.0, abs(best))
            close = [i for i, v in enumerate(q) if abs(v - best) <= slack]
        optimal.append(close or [int(np.argmax(q) if maximize else np.argmin(q))])

    chosen: Dict[int, int] = {}
    resolved = set(mdp.targets)
    while True:
        layer = {}
        for s in range(mdp.num_states):
            if s in resolved or s in chosen:
                continue
            for i in optimal[s]:
                if any(t in resolved for t in mdp.choices[s][i].successors):
                    layer[s] = i
                    break
        if not layer:
            break
        chosen.update(layer)
        resolved.update(layer)
    return [chosen.get(s, optimal[s][0]) for s in range(mdp.num_states)]
