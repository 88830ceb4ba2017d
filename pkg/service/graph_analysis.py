"""
Qualitative analysis on the graph of a SparseMdp: end components,
positive-probability and almost-sure reachability, and detection of states
whose expected total reward is infinite.
"""

from typing import AbstractSet, Callable, Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from service.sparse_mdp import Choice, SparseMdp

ChoiceFilter = Callable[[Choice], bool]
EndComponent = Tuple[FrozenSet[int], Dict[int, List[int]]]

_SINK = "__sink__"


def choice_graph(mdp: SparseMdp, allowed: Optional[ChoiceFilter] = None,
                 states: Optional[AbstractSet[int]] = None) -> nx.DiGraph:
    """Edges s -> t for every allowed choice of s with successor t; targets get no out-edges."""
    nodes = range(mdp.num_states) if states is None else states
    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    for s in nodes:
        if s in mdp.targets:
            continue
        for choice in mdp.choices[s]:
            if allowed is None or allowed(choice):
                graph.add_edges_from((s, t) for t in choice.successors if t in graph)
    return graph


def can_reach(mdp: SparseMdp, seeds: AbstractSet[int], allowed: Optional[ChoiceFilter] = None) -> Set[int]:
    """States from which some policy reaches `seeds` with positive probability."""
    graph = choice_graph(mdp, allowed)
    reached = set(seeds)
    for seed in seeds:
        reached |= nx.ancestors(graph, seed)
    return reached


def maximal_end_components(mdp: SparseMdp, allowed: Optional[ChoiceFilter] = None,
                           exclude: AbstractSet[int] = frozenset()) -> List[EndComponent]:
    """
    Maximal end components over states outside `exclude`, using only allowed
    choices. Returns (states, internal choice indices per state), sorted by
    smallest member.
    """
    states = set(range(mdp.num_states)) - set(exclude)
    choices = {
        s: [i for i, c in enumerate(mdp.choices[s]) if allowed is None or allowed(c)]
        for s in states
    }
    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(states)
        for s in states:
            for i in choices[s]:
                graph.add_edges_from((s, t) for t in mdp.choices[s][i].successors if t in states)
        component = {}
        for k, scc in enumerate(nx.strongly_connected_components(graph)):
            for s in scc:
                component[s] = k
        changed = False
        for s in sorted(states):
            keep = [
                i for i in choices[s]
                if all(t in states and component.get(t) == component[s] for t in mdp.choices[s][i].successors)
            ]
            if len(keep) != len(choices[s]):
                choices[s] = keep
                changed = True
        empty = {s for s in states if not choices[s]}
        if empty:
            states -= empty
            changed = True
        if not changed:
            break

    groups: Dict[int, Set[int]] = {}
    for s in states:
        groups.setdefault(component[s], set()).add(s)
    result = [(frozenset(g), {s: choices[s] for s in sorted(g)}) for g in groups.values()]
    return sorted(result, key=lambda ec: min(ec[0]))


def almost_sure_reach(mdp: SparseMdp, target: AbstractSet[int], allowed: Optional[ChoiceFilter] = None) -> Set[int]:
    """States from which some policy using allowed choices reaches `target` with probability 1."""
    candidates = set(range(mdp.num_states))
    target = set(target)
    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(candidates)
        graph.add_node(_SINK)
        for s in candidates:
            if s in target:
                graph.add_edge(s, _SINK)
                continue
            for choice in mdp.choices[s]:
                if allowed is not None and not allowed(choice):
                    continue
                succs = choice.successors
                if all(t in candidates for t in succs):
                    graph.add_edges_from((s, t) for t in succs)
        reach = nx.ancestors(graph, _SINK)
        if reach == candidates:
            return reach
        candidates = reach


def _has_reward_inside(mdp: SparseMdp, ec: EndComponent) -> bool:
    return any(mdp.choices[s][i].has_reward for s, idx in ec[1].items() for i in idx)


def reachable_divergence(mdp: SparseMdp) -> Set[int]:
    """
    States where some policy collects infinite total reward with positive
    probability: it can reach an infinite-reward transition or an end
    component (outside the targets) containing a rewarded choice.
    """
    seeds = {
        s for s in range(mdp.num_states)
        if s not in mdp.targets and any(c.has_infinite_reward for c in mdp.choices[s])
    }
    for ec in maximal_end_components(mdp, exclude=mdp.targets):
        if _has_reward_inside(mdp, ec):
            seeds |= ec[0]
    if not seeds:
        return set()
    return can_reach(mdp, seeds)


def unavoidable_divergence(mdp: SparseMdp) -> Set[int]:
    """
    States where every policy collects infinite total reward with positive
    probability: no policy avoiding infinite-reward transitions almost surely
    reaches the targets or a reward-free end component.
    """
    reward_free = maximal_end_components(mdp, allowed=lambda c: not c.has_reward, exclude=mdp.targets)
    safe = set(mdp.targets)
    for states, _ in reward_free:
        safe |= states
    finite = almost_sure_reach(mdp, safe, allowed=lambda c: not c.has_infinite_reward)
    return set(range(mdp.num_states)) - finite


def zero_value_states(mdp: SparseMdp) -> Set[int]:
    """States of reward-free end components (all choices) plus targets; value 0 for a chain."""
    zero = set(mdp.targets)
    for ec in maximal_end_components(mdp, exclude=mdp.targets):
        if not _has_reward_inside(mdp, ec):
            zero |= ec[0]
    return zero
