"""GraphViz rendering of an abstraction MDP."""

from fractions import Fraction

from model.abstraction import AbstractionMdp
from model.values import ExtReal, is_infinite


def _number(value: ExtReal) -> str:
    if is_infinite(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, Fraction):
        return str(value)
    return format(value, ".6g")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(abstraction: AbstractionMdp, state_names=None) -> str:
    """Deterministic DOT document; beliefs are labelled by their distributions."""
    lines = ["digraph abstraction {", "  rankdir=LR;", "  node [shape=box];"]
    for state, belief in enumerate(abstraction.beliefs):
        label = "cut" if belief is None else belief.label(state_names)
        attrs = [f"label={_quote(label)}"]
        if state in abstraction.goal_states:
            attrs.append("peripheries=2")
        styles = []
        if state == abstraction.initial:
            styles.append("bold")
        if belief is not None and state not in abstraction.expanded and state not in abstraction.goal_states:
            styles.append("dashed")  # frontier
        if styles:
            attrs.append(f"style={_quote(','.join(styles))}")
        lines.append(f"  n{state} [{', '.join(attrs)}];")
    for (state, action), row in sorted(abstraction.transitions.items()):
        name = abstraction.action_labels[action]
        for target, prob in row:
            label = f"{name}: {prob}"
            reward = abstraction.reward(state, action, target)
            if is_infinite(reward) or reward != 0:
                label += f" | R={_number(reward)}"
            lines.append(f"  n{state} -> n{target} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
