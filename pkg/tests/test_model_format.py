from fractions import Fraction

import pytest

from dao.model_format import parse_pomdp, read_model_text, serialize_pomdp
from model.errors import ModelError, ModelParseError, ModelValidationError
from model.pomdp import RewardSign


def test_parse_toy_model(toy):
    pomdp, rewards, goals = toy
    assert pomdp.num_states == 3
    assert pomdp.actions == ("alpha", "beta")
    assert pomdp.observation_names == ("white", "orange")
    assert pomdp.obs_of == (0, 0, 1)
    assert pomdp.mdp.successors(0, 0) == ((0, Fraction(1, 2)), (1, Fraction(1, 2)))
    assert pomdp.enabled_for_observation(1) == (0,)
    assert rewards.reward(1, 1, 2) == 1
    assert rewards.sign is RewardSign.POSITIVE
    assert goals.states(pomdp) == frozenset({2})


def test_serialize_then_parse_gives_same_model(toy):
    pomdp, rewards, goals = toy
    text = serialize_pomdp(pomdp, rewards, goals)
    assert parse_pomdp(text) == (pomdp, rewards, goals)
    assert serialize_pomdp(*parse_pomdp(text)) == text


def test_model_without_goal_parses_with_none(toy_text):
    text = "\n".join(line for line in toy_text.splitlines() if not line.startswith("goal-obs"))
    assert parse_pomdp(text)[2] is None


@pytest.mark.parametrize("replace, expected", [
    (("pomdp", "mdp"), "line 4: document must start with 'pomdp'"),
    (("trans 0 beta 2 1", "trans 0 gamma 2 1"), "unknown action 'gamma'"),
    (("trans 0 beta 2 1", "trans 0 beta 2 3/2"), "probability 3/2 not in"),
    (("obs 2 orange", "obs 2 purple"), "unknown observation 'purple'"),
    (("reward 1 beta 2 1", "reward 1 beta 0 1"), "does not exist"),
    (("goal-obs orange", "goal-obs orange\ngoal 2"), "goal given twice"),
    (("init 0", "init 0\nfrobnicate"), "unknown keyword 'frobnicate'"),
])
def test_parse_errors_carry_line_numbers(toy_text, replace, expected):
    old, new = replace
    with pytest.raises(ModelParseError, match=expected) as info:
        parse_pomdp(toy_text.replace(old, new, 1))
    assert info.value.line_number is not None


def test_row_sum_violation(toy_text):
    with pytest.raises(ModelValidationError, match="row sum"):
        parse_pomdp(toy_text.replace("trans 0 alpha 1 1/2", "trans 0 alpha 1 2/5"))


def test_mixed_reward_signs(toy_text):
    with pytest.raises(ModelValidationError, match="mixed reward signs"):
        parse_pomdp(toy_text + "reward 0 beta 2 -1\n")


def test_actions_must_agree_within_observation(toy_text):
    with pytest.raises(ModelValidationError, match="share observation"):
        parse_pomdp(toy_text.replace("trans 1 beta 2 1\n", "").replace("reward 1 beta 2 1\n", ""))


def test_missing_file_is_a_model_error(tmp_path):
    with pytest.raises(ModelError, match="cannot read model file"):
        read_model_text(str(tmp_path / "missing.pomdp"))


def test_non_utf8_file_is_a_model_error(tmp_path):
    path = tmp_path / "latin.pomdp"
    path.write_bytes(b"\xff\xfepomdp\n")
    with pytest.raises(ModelError, match="not UTF-8"):
        read_model_text(str(path))
