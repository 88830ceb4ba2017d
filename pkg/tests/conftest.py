import random
from fractions import Fraction
from pathlib import Path

import pytest

from config.database import close_connection, init_db
from config.settings import get_settings
from dao.model_format import parse_pomdp
from model.pomdp import GoalSpec, Mdp, Pomdp, RewardStructure
from service.beliefs import initial_belief
from service.n_step import n_step_oracle

MODELS = Path(__file__).resolve().parent.parent / "models"


def random_acyclic_pomdp(seed, max_states=8, max_actions=3, max_observations=4, goal_observable=True):
    """
    Small random POMDP whose transitions only move to higher-numbered states.
    The last one or two states are goals and self-loop under every action;
    every action is enabled everywhere and rewards are non-negative.
    """
    rng = random.Random(seed)
    n = rng.randint(3, max_states)
    num_actions = rng.randint(1, max_actions)
    num_obs = rng.randint(2, max_observations)
    goals = [n - 1] if rng.random() < 0.5 else [n - 2, n - 1]
    non_goal = [s for s in range(n) if s not in goals]

    if goal_observable:
        obs_of = [rng.randrange(num_obs - 1) for _ in non_goal] + [num_obs - 1] * len(goals)
    else:
        obs_of = [rng.randrange(num_obs) for _ in range(n)]
        obs_of[goals[0]] = obs_of[0]

    transitions, rewards = {}, {}
    for s in range(n):
        for a in range(num_actions):
            if s in goals:
                transitions[(s, a)] = ((s, Fraction(1)),)
                continue
            later = list(range(s + 1, n))
            targets = sorted(rng.sample(later, rng.randint(1, min(3, len(later)))))
            weights = [rng.randint(1, 4) for _ in targets]
            total = sum(weights)
            transitions[(s, a)] = tuple((t, Fraction(w, total)) for t, w in zip(targets, weights))
            for t in targets:
                if rng.random() < 0.5:
                    rewards[(s, a, t)] = rng.choice([Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)])

    mdp = Mdp(
        num_states=n,
        actions=tuple(f"a{i}" for i in range(num_actions)),
        enabled=tuple(tuple(range(num_actions)) for _ in range(n)),
        transitions=transitions,
        initial_state=0,
    )
    pomdp = Pomdp(mdp=mdp, num_observations=num_obs, obs_of=tuple(obs_of))
    return pomdp, RewardStructure.from_entries(rewards), GoalSpec(goal_states=frozenset(goals))


def exact_optimum(pomdp, rewards, goal_states, belief=None):
    """Optimal value by full belief-tree evaluation; exact on acyclic models."""
    if belief is None:
        belief = initial_belief(pomdp)
    horizon = pomdp.num_states
    return n_step_oracle(pomdp, rewards, goal_states, belief, horizon, bound=horizon)


@pytest.fixture
def toy_path():
    return MODELS / "guess_reward.pomdp"


@pytest.fixture
def toy_text(toy_path):
    return toy_path.read_text(encoding="utf-8")


@pytest.fixture
def toy(toy_text):
    """(pomdp, rewards, goals) of the three-state guessing game."""
    return parse_pomdp(toy_text)


@pytest.fixture
def hidden_exit_text():
    return (MODELS / "hidden_exit.pomdp").read_text(encoding="utf-8")


@pytest.fixture
def random_pomdp():
    return random_acyclic_pomdp


@pytest.fixture
def exact_value():
    return exact_optimum


@pytest.fixture
def temp_db(tmp_path, monkeypatch):
    path = tmp_path / "runs.db"
    monkeypatch.setenv("BELIEF_BOUND_DB", str(path))
    get_settings.cache_clear()
    init_db()
    yield path
    close_connection()
    get_settings.cache_clear()


@pytest.fixture
def client(temp_db):
    from app import create_app

    app = create_app()
    app.config["TESTING"] = True
    with app.test_client() as test_client:
        yield test_client


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
