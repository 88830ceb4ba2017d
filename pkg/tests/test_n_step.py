from fractions import Fraction

import pytest

from model.belief import Belief
from model.errors import HorizonTooLargeError
from model.values import MemorylessObsPolicy
from service.beliefs import initial_belief
from service.n_step import (
    n_step_oracle,
    n_step_policy_state_values,
    n_step_policy_value,
    n_step_state_min,
)

ALWAYS_BETA = MemorylessObsPolicy((1, 0))
HALF = Belief.from_mapping({0: Fraction(1, 2), 1: Fraction(1, 2)}, 0)


def test_three_steps_of_the_guessing_game(toy):
    pomdp, rewards, goals = toy
    # alpha, alpha, beta: s1 is reached with probability 3/4
    assert n_step_oracle(pomdp, rewards, goals.states(pomdp), initial_belief(pomdp), 3) == Fraction(3, 4)


@pytest.mark.parametrize("n, expected", [(0, 0), (1, 0), (2, Fraction(1, 2)), (4, Fraction(7, 8))])
def test_values_grow_with_the_horizon(toy, n, expected):
    pomdp, rewards, goals = toy
    assert n_step_oracle(pomdp, rewards, goals.states(pomdp), initial_belief(pomdp), n) == expected


def test_goal_beliefs_have_value_zero(toy):
    pomdp, rewards, goals = toy
    assert n_step_oracle(pomdp, rewards, goals.states(pomdp), Belief.dirac(2, 1), 5) == 0


def test_minimising_oracle(toy):
    pomdp, rewards, goals = toy
    assert n_step_oracle(pomdp, rewards, goals.states(pomdp), HALF, 4, minimize=True) == 0


def test_horizon_is_bounded(toy):
    pomdp, rewards, goals = toy
    with pytest.raises(HorizonTooLargeError, match="horizon 9"):
        n_step_oracle(pomdp, rewards, goals.states(pomdp), initial_belief(pomdp), 9)
    assert n_step_oracle(pomdp, rewards, goals.states(pomdp), initial_belief(pomdp), 9, bound=9) == 1 - Fraction(1, 2 ** 8)


def test_horizon_bound_follows_the_environment(toy, monkeypatch):
    from config.settings import get_settings

    monkeypatch.setenv("BELIEF_BOUND_ORACLE_HORIZON", "2")
    get_settings.cache_clear()
    pomdp, rewards, goals = toy
    with pytest.raises(HorizonTooLargeError):
        n_step_oracle(pomdp, rewards, goals.states(pomdp), initial_belief(pomdp), 3)


def test_policy_value(toy):
    pomdp, rewards, goals = toy
    goal_states = goals.states(pomdp)
    assert n_step_policy_value(pomdp, ALWAYS_BETA, rewards, goal_states, HALF, 1) == Fraction(1, 2)
    assert n_step_policy_value(pomdp, ALWAYS_BETA, rewards, goal_states, initial_belief(pomdp), 3) == 0


def test_state_recursions(toy):
    pomdp, rewards, goals = toy
    goal_states = goals.states(pomdp)
    assert n_step_state_min(pomdp, rewards, goal_states, 3) == (0, 0, 0)
    assert n_step_policy_state_values(pomdp, ALWAYS_BETA, rewards, goal_states, 0) == (0, 0, 0)
    assert n_step_policy_state_values(pomdp, ALWAYS_BETA, rewards, goal_states, 1) == (0, 1, 0)


def test_policy_value_is_the_belief_average_of_state_values(random_pomdp):
    for seed in range(5):
        pomdp, rewards, goals = random_pomdp(seed)
        goal_states = goals.states(pomdp)
        policy = MemorylessObsPolicy(tuple(0 for _ in range(pomdp.num_observations)))
        per_state = n_step_policy_state_values(pomdp, policy, rewards, goal_states, 4)
        assert n_step_policy_value(pomdp, policy, rewards, goal_states, initial_belief(pomdp), 4) == per_state[0]
