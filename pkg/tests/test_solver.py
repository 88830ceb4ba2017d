import math
import warnings
from dataclasses import replace
from fractions import Fraction

import pytest

from model.abstraction import AbstractionMdp, ExplorationConfig
from model.belief import Belief
from model.errors import InvalidAbstractionError, SolverError
from model.pomdp import RewardSign
from service.explorer import explore
from service.mdp_analysis import min_expected_reward
from service.solver import solve_exact_chain, solve_max
from service.sparse_mdp import Choice, SparseMdp, value_iteration
from service.transforms import negate_rewards


def _abstraction(toy, clipping=False, budget=4, eta=1, rewards=None):
    pomdp, toy_rewards, goals = toy
    rewards = rewards or toy_rewards
    u = min_expected_reward(pomdp, rewards, goals.states(pomdp))
    config = ExplorationConfig(clipping_enabled=clipping, eta=eta, size_budget=budget)
    return explore(pomdp, rewards, goals, lambda belief: Fraction(0), u, config)


def _single_cut(reward):
    """b_init cut off straight into b_cut with the given reward."""
    return AbstractionMdp(
        beliefs=[Belief.dirac(0, 0), None],
        action_labels=("go", "goal", "cut", "clip"),
        num_pomdp_actions=1,
        enabled=[(2,), (2,)],
        transitions={(0, 2): ((1, Fraction(1)),), (1, 2): ((1, Fraction(1)),)},
        rewards={(0, 2, 1): reward} if reward else {},
        goal_states=frozenset({1}),
    )


def test_clipping_reaches_the_optimum(toy):
    solution = solve_max(_abstraction(toy, clipping=True))
    assert solution.value == Fraction(3, 4)
    assert solution.exact
    assert not solution.precision_limited
    # alpha, alpha, clip, then beta from {s1}
    assert solution.policy == (0, 3, 0, 2, 4, 1)


@pytest.mark.parametrize("budget, expected", [
    (0, 0),
    (2, 0),
    (3, 0),
    (4, Fraction(1, 2)),
    (6, Fraction(7, 8)),
    (11, 1 - Fraction(1, 2 ** 8)),
])
def test_cutoff_bounds_grow_with_the_budget(toy, budget, expected):
    solution = solve_max(_abstraction(toy, budget=budget))
    assert solution.value == expected


def test_single_reward_chain():
    solution = solve_max(_single_cut(Fraction(5, 2)))
    assert solution.value == Fraction(5, 2)
    assert solution.exact
    assert solve_max(_single_cut(None)).value == 0


def test_exact_chain_of_the_optimal_policy(toy):
    abstraction = _abstraction(toy, clipping=True)
    solution = solve_max(abstraction)
    values = solve_exact_chain(abstraction.restrict(solution.policy))
    assert values[0] == Fraction(3, 4)
    assert values == solution.values


def test_exact_chain_needs_one_action_per_state(toy):
    with pytest.raises(InvalidAbstractionError, match="expected 1"):
        solve_exact_chain(_abstraction(toy, clipping=True))


def test_value_iteration_increases_monotonically(toy):
    mdp = SparseMdp.from_abstraction(_abstraction(toy, budget=11))
    trace = []
    value_iteration(mdp, True, {t: 0.0 for t in mdp.targets}, 1e-9, 10_000,
                    observer=lambda i, values: trace.append(values.copy()))
    assert len(trace) > 1
    for earlier, later in zip(trace, trace[1:]):
        assert (later >= earlier - 1e-12).all()
    assert trace[-1][0] == pytest.approx(1 - 2 ** -8)


def test_iteration_cap_is_an_error(toy):
    with pytest.raises(SolverError, match="did not converge"):
        solve_max(_abstraction(toy, budget=11), max_iterations=1)


def test_sanity_bound_violation_is_an_error(toy):
    abstraction = _abstraction(toy, clipping=True)
    with pytest.raises(SolverError, match="diverged"):
        solve_max(abstraction, upper_bounds=[0.0] * abstraction.num_states)


def test_invalid_abstraction_is_rejected(toy):
    abstraction = _abstraction(toy)
    with pytest.raises(InvalidAbstractionError):
        solve_max(replace(abstraction, goal_states=frozenset()))


def test_non_positive_rewards(toy):
    _, rewards, _ = toy
    abstraction = _abstraction(toy, budget=6, rewards=negate_rewards(rewards))
    assert abstraction.sign is RewardSign.NEGATIVE
    solution = solve_max(abstraction)
    # staying on alpha avoids the only reward
    assert solution.value == 0
    assert solution.exact
    assert not solution.precision_limited


def test_infinite_states_do_not_disturb_the_convergence_check():
    one = Fraction(1)
    mdp = SparseMdp(
        num_states=3,
        choices=[
            (Choice(0, ((1, one, one),)), Choice(1, ((2, one, Fraction(0)),))),
            (Choice(0, ((1, one, Fraction(0)),)),),
            (Choice(0, ((2, one, Fraction(0)),)),),
        ],
        targets=frozenset({2}),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        result = value_iteration(mdp, True, {1: math.inf, 2: 0.0}, 1e-9, 100)
    assert result.converged
    assert result.values[0] == math.inf
