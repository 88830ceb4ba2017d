"""
Reader and writer for the explicit POMDP text format.

    pomdp
    states <N>
    actions <name> <name> ...
    observations <name> <name> ...
    init <state>
    obs <state> <observation-name>            # one line per state
    trans <state> <action-name> <state> <p/q> # rational probability
    reward <state> <action-name> <state> <p/q>
    goal-obs <observation-name> ...           # optional; else goal states listed:
    goal <state> ...

States are 0-based integers, `#` starts a comment. Serialisation is
deterministic (sorted keys) so parse(serialize(m)) == m exactly.
"""

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from model.abstraction import AbstractionMdp
from model.errors import ModelError, ModelParseError, ModelValidationError
from model.pomdp import GoalSpec, Mdp, Pomdp, RewardStructure
from model.values import is_infinite

_NAME = re.compile(r"^[^\s#]+$")

ParsedModel = Tuple[Pomdp, RewardStructure, Optional[GoalSpec]]


def _rational(token: str, line_number: int, what: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ModelParseError(f"{what} must be a rational number, got '{token}'", line_number) from None


def _state(token: str, line_number: int, num_states: Optional[int]) -> int:
    if num_states is None:
        raise ModelParseError("'states' must be declared before states are used", line_number)
    if not token.isdigit():
        raise ModelParseError(f"state must be a non-negative integer, got '{token}'", line_number)
    state = int(token)
    if state >= num_states:
        raise ModelParseError(f"state {state} out of range (states {num_states})", line_number)
    return state


def _lookup(names: Optional[List[str]], token: str, line_number: int, kind: str) -> int:
    if names is None:
        raise ModelParseError(f"'{kind}s' must be declared before use", line_number)
    try:
        return names.index(token)
    except ValueError:
        raise ModelParseError(f"unknown {kind} '{token}'", line_number) from None


def _names(tokens: List[str], line_number: int, kind: str) -> List[str]:
    if not tokens:
        raise ModelParseError(f"'{kind}s' needs at least one name", line_number)
    if len(set(tokens)) != len(tokens):
        raise ModelParseError(f"duplicate {kind} name", line_number)
    return tokens


def parse_pomdp(text: str) -> ParsedModel:
    """
    Parse a model document.

    Returns (pomdp, rewards, goals); goals is None when the document has
    neither `goal-obs` nor `goal` (callers may supply goal observations).
    Raises ModelParseError with a line number on syntax errors and
    ModelValidationError when the parsed model violates a model invariant.
    """
    num_states: Optional[int] = None
    actions: Optional[List[str]] = None
    observations: Optional[List[str]] = None
    initial: Optional[int] = None
    obs_of: Dict[int, int] = {}
    rows: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    reward_entries: Dict[Tuple[int, int, int], Fraction] = {}
    reward_lines: Dict[Tuple[int, int, int], int] = {}
    goal_obs: Optional[List[int]] = None
    goal_states: Optional[List[int]] = None
    seen_header = False

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        if not seen_header:
            if keyword != "pomdp" or args:
                raise ModelParseError("document must start with 'pomdp'", line_number)
            seen_header = True
            continue

        if keyword == "states":
            if num_states is not None:
                raise ModelParseError("'states' declared twice", line_number)
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) < 1:
                raise ModelParseError("'states' expects one positive integer", line_number)
            num_states = int(args[0])
        elif keyword == "actions":
            if actions is not None:
                raise ModelParseError("'actions' declared twice", line_number)
            actions = _names(args, line_number, "action")
        elif keyword == "observations":
            if observations is not None:
                raise ModelParseError("'observations' declared twice", line_number)
            observations = _names(args, line_number, "observation")
        elif keyword == "init":
            if initial is not None:
                raise ModelParseError("'init' declared twice", line_number)
            if len(args) != 1:
                raise ModelParseError("'init' expects one state", line_number)
            initial = _state(args[0], line_number, num_states)
        elif keyword == "obs":
            if len(args) != 2:
                raise ModelParseError("'obs' expects <state> <observation-name>", line_number)
            state = _state(args[0], line_number, num_states)
            if state in obs_of:
                raise ModelParseError(f"state {state} already has an observation", line_number)
            obs_of[state] = _lookup(observations, args[1], line_number, "observation")
        elif keyword == "trans":
            if len(args) != 4:
                raise ModelParseError("'trans' expects <state> <action> <state> <probability>", line_number)
            source = _state(args[0], line_number, num_states)
            action = _lookup(actions, args[1], line_number, "action")
            target = _state(args[2], line_number, num_states)
            prob = _rational(args[3], line_number, "probability")
            if not 0 < prob <= 1:
                raise ModelParseError(f"probability {prob} not in (0, 1]", line_number)
            row = rows.setdefault((source, action), {})
            if target in row:
                raise ModelParseError(f"duplicate transition {source} {args[1]} {target}", line_number)
            row[target] = prob
        elif keyword == "reward":
            if len(args) != 4:
                raise ModelParseError("'reward' expects <state> <action> <state> <value>", line_number)
            key = (
                _state(args[0], line_number, num_states),
                _lookup(actions, args[1], line_number, "action"),
                _state(args[2], line_number, num_states),
            )
            if key in reward_entries:
                raise ModelParseError("duplicate reward entry", line_number)
            reward_entries[key] = _rational(args[3], line_number, "reward")
            reward_lines[key] = line_number
        elif keyword == "goal-obs":
            if goal_obs is not None or goal_states is not None:
                raise ModelParseError("goal given twice (use either 'goal-obs' or 'goal')", line_number)
            if not args:
                raise ModelParseError("'goal-obs' needs at least one observation", line_number)
            goal_obs = [_lookup(observations, a, line_number, "observation") for a in args]
        elif keyword == "goal":
            if goal_obs is not None or goal_states is not None:
                raise ModelParseError("goal given twice (use either 'goal-obs' or 'goal')", line_number)
            if not args:
                raise ModelParseError("'goal' needs at least one state", line_number)
            goal_states = [_state(a, line_number, num_states) for a in args]
        else:
            raise ModelParseError(f"unknown keyword '{keyword}'", line_number)

    if not seen_header:
        raise ModelParseError("empty model document")
    for required, name in ((num_states, "states"), (actions, "actions"), (observations, "observations")):
        if required is None:
            raise ModelParseError(f"missing '{name}' declaration")
    missing = [s for s in range(num_states) if s not in obs_of]
    if missing:
        raise ModelValidationError(f"states without observation: {missing}")
    for key, line_number in reward_lines.items():
        source, action, target = key
        if target not in rows.get((source, action), {}):
            raise ModelParseError("reward given for a transition that does not exist", line_number)

    enabled = tuple(
        tuple(a for a in range(len(actions)) if (s, a) in rows) for s in range(num_states)
    )
    transitions = {key: tuple(sorted(row.items())) for key, row in sorted(rows.items())}
    mdp = Mdp(
        num_states=num_states,
        actions=tuple(actions),
        enabled=enabled,
        transitions=transitions,
        initial_state=initial or 0,
    )
    pomdp = Pomdp(
        mdp=mdp,
        num_observations=len(observations),
        obs_of=tuple(obs_of[s] for s in range(num_states)),
        observation_names=tuple(observations),
    )
    rewards = RewardStructure.from_entries(reward_entries)
    goals = None
    if goal_obs is not None:
        goals = GoalSpec(goal_observations=frozenset(goal_obs))
    elif goal_states is not None:
        goals = GoalSpec(goal_states=frozenset(goal_states))
    return pomdp, rewards, goals


def read_model_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except UnicodeDecodeError as exc:
        raise ModelError(f"model file {path} is not UTF-8 text (byte {exc.start})") from None
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc.strerror or exc}") from None


def _check_name(name: str) -> str:
    if not _NAME.match(name):
        raise ModelValidationError(f"name '{name}' cannot be written (whitespace or '#')")
    return name


def _number(value) -> str:
    if is_infinite(value):
        return "inf" if value > 0 else "-inf"
    return str(Fraction(value))


def serialize_pomdp(pomdp: Pomdp, rewards: RewardStructure, goals: Optional[GoalSpec]) -> str:
    mdp = pomdp.mdp
    lines = [
        "pomdp",
        f"states {mdp.num_states}",
        "actions " + " ".join(_check_name(a) for a in mdp.actions),
        "observations " + " ".join(_check_name(z) for z in pomdp.observation_names),
        f"init {mdp.initial_state}",
    ]
    lines += [f"obs {s} {pomdp.observation_names[z]}" for s, z in enumerate(pomdp.obs_of)]
    for (state, action), row in sorted(mdp.transitions.items()):
        for succ, prob in row:
            lines.append(f"trans {state} {mdp.actions[action]} {succ} {prob}")
    for (state, action, succ), value in sorted(rewards.rewards.items()):
        lines.append(f"reward {state} {mdp.actions[action]} {succ} {value}")
    if goals is not None:
        if goals.goal_observations:
            names = [pomdp.observation_names[z] for z in sorted(goals.goal_observations)]
            lines.append("goal-obs " + " ".join(names))
        else:
            lines.append("goal " + " ".join(str(s) for s in sorted(goals.goal_states)))
    return "\n".join(lines) + "\n"


def serialize_abstraction(abstraction: AbstractionMdp) -> str:
    """
    Write the abstraction MDP in the explicit format, one observation per state.

    Finite float rewards are written as their exact binary Fraction;
    infinite cut-off rewards are written as inf/-inf, which parse_pomdp
    rejects, so such exports are for inspection only.
    """
    names = ["b_cut" if s == abstraction.cut_state else f"b{s}" for s in range(abstraction.num_states)]
    lines = [
        "# belief abstraction: one observation per abstraction state",
        "pomdp",
        f"states {abstraction.num_states}",
        "actions " + " ".join(_check_name(a) for a in abstraction.action_labels),
        "observations " + " ".join(names),
        f"init {abstraction.initial}",
    ]
    for state in range(abstraction.num_states):
        belief = abstraction.beliefs[state]
        comment = f"  # {belief.label()}" if belief is not None else ""
        lines.append(f"obs {state} {names[state]}{comment}")
    for (state, action), row in sorted(abstraction.transitions.items()):
        for succ, prob in row:
            lines.append(f"trans {state} {abstraction.action_labels[action]} {succ} {prob}")
    for (state, action, succ), value in sorted(abstraction.rewards.items()):
        if not is_infinite(value) and value == 0:
            continue
        lines.append(f"reward {state} {abstraction.action_labels[action]} {succ} {_number(value)}")
    lines.append("goal-obs " + " ".join(names[s] for s in sorted(abstraction.goal_states)))
    return "\n".join(lines) + "\n"
