"""
Belief clipping.

A candidate b~ is reachable from b by removing mass mu and renormalising iff
supp(b~) is contained in supp(b); the smallest removable mass is
    delta = 1 - min_{s in supp(b~)} b(s) / b~(s)
with per-state values b(s) - (1 - delta) * b~(s). Picking the best candidate
from a finite set is the mixed-integer program over selectors a_j, delta and
delta_s; enumerating candidates with the closed form solves it exactly.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import partial
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from model.belief import Belief
from model.clipping import ClippingResult
from model.errors import ObservationMismatchError, SolverError
from model.values import StateValues, is_infinite

logger = logging.getLogger(__name__)


def clip_values(belief: Belief, candidate: Belief) -> Optional[ClippingResult]:
    """Minimal clip of `belief` inducing `candidate`, or None when no clip induces it."""
    if belief.observation != candidate.observation:
        raise ObservationMismatchError(
            f"candidate observation {candidate.observation} differs from belief observation {belief.observation}"
        )
    probs = belief.as_dict()
    if not candidate.support <= belief.support:
        return None
    ratio = min(probs[s] / p for s, p in candidate.entries)
    delta = 1 - ratio
    if delta >= 1:
        return None
    target = candidate.as_dict()
    state_deltas = tuple((s, p - (1 - delta) * target.get(s, Fraction(0))) for s, p in belief.entries)
    return ClippingResult(candidate=candidate, delta=delta, state_deltas=state_deltas)


def apply_clip(belief: Belief, result: ClippingResult) -> Belief:
    """Rebuild b~ from b and the clip, (b(s) - delta(s)) / (1 - delta)."""
    return result.as_clip().induced(belief)


def is_grid_belief(belief: Belief, eta: int) -> bool:
    return all(eta % p.denominator == 0 for _, p in belief.entries)


def _compositions(total: int, parts: int) -> Iterable[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_candidates(observation: int, support: Iterable[int], eta: int) -> List[Belief]:
    """
    All beliefs over `support` with components in {0, 1/eta, ..., 1}, in
    lexicographic order with the first state's mass descending.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    states = sorted(support)
    if not states:
        return []
    candidates = []
    for counts in _compositions(eta, len(states)):
        mapping = {s: Fraction(c, eta) for s, c in zip(states, counts) if c}
        candidates.append(Belief.from_mapping(mapping, observation))
    return candidates


def _admissible(result: Optional[ClippingResult], u: Optional[StateValues]) -> bool:
    if result is None:
        return False
    if u is None:
        return True
    # Removing mass from a state whose minimal value is -inf makes the clip worthless.
    return not any(d > 0 and is_infinite(u[s]) and u[s] < 0 for s, d in result.state_deltas)


def solve_clipping(belief: Belief, candidates: Sequence[Belief], u: Optional[StateValues] = None,
                   threads: int = 1) -> Optional[ClippingResult]:
    """
    Best adequate candidate: minimal delta, ties broken by candidate order.
    Returns None when no candidate is adequate.
    """
    evaluate = partial(clip_values, belief)
    if threads > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, candidates))
    else:
        results = [evaluate(c) for c in candidates]
    best: Optional[ClippingResult] = None
    for result in results:
        if _admissible(result, u) and (best is None or result.delta < best.delta):
            best = result
    return best


def solve_clipping_milp(belief: Belief, candidates: Sequence[Belief],
                        u: Optional[StateValues] = None) -> Optional[ClippingResult]:
    """
    Solve the candidate-selection MILP with scipy (HiGHS):

        minimise delta
        s.t. sum_j a_j = 1,  sum_s delta_s = delta,  0 <= delta_s <= b(s)
             delta_s - b_j(s) * delta - a_j >= b(s) - b_j(s) - 1   for all j, s
             a_j binary

    The chosen candidate's delta is recomputed exactly; among candidates with
    that exact delta the first in order is returned.
    """
    if not candidates:
        return None
    for c in candidates:
        if c.observation != belief.observation:
            raise ObservationMismatchError("candidate observation differs from belief observation")
    probs = belief.as_dict()
    states = sorted(set(probs).union(*(c.support for c in candidates)))
    n_cand, n_states = len(candidates), len(states)
    delta_col = n_cand
    state_col = {s: n_cand + 1 + i for i, s in enumerate(states)}
    n_vars = n_cand + 1 + n_states

    cost = np.zeros(n_vars)
    cost[delta_col] = 1.0
    lower = np.zeros(n_vars)
    upper = np.ones(n_vars)
    for s in states:
        blocked = u is not None and is_infinite(u[s]) and u[s] < 0
        upper[state_col[s]] = 0.0 if blocked else float(probs.get(s, 0))

    rows, lb, ub = [], [], []

    def constrain(coefficients: dict, low: float, high: float):
        row = np.zeros(n_vars)
        for col, value in coefficients.items():
            row[col] = value
        rows.append(row)
        lb.append(low)
        ub.append(high)

    constrain({j: 1.0 for j in range(n_cand)}, 1.0, 1.0)
    constrain({delta_col: -1.0, **{state_col[s]: 1.0 for s in states}}, 0.0, 0.0)
    for j, cand in enumerate(candidates):
        target = cand.as_dict()
        for s in states:
            bj = float(target.get(s, 0))
            constrain({state_col[s]: 1.0, delta_col: -bj, j: -1.0}, float(probs.get(s, 0)) - bj - 1.0, np.inf)

    integrality = np.zeros(n_vars)
    integrality[:n_cand] = 1
    result = milp(
        c=cost,
        constraints=LinearConstraint(np.array(rows), np.array(lb), np.array(ub)),
        integrality=integrality,
        bounds=Bounds(lower, upper),
        options={"mip_rel_gap": 0.0},
    )
    if result.status == 2:  # infeasible: every candidate is excluded
        return None
    if not result.success:
        raise SolverError(f"clipping MILP failed: {result.message}")
    chosen = int(np.argmax(result.x[:n_cand]))
    exact = clip_values(belief, candidates[chosen])
    if not _admissible(exact, u):
        # delta = 1 is always feasible, so an inadequate pick means nothing is adequate
        if any(_admissible(clip_values(belief, c), u) for c in candidates):
            raise SolverError("clipping MILP selected an inadequate candidate")
        return None
    for cand in candidates:
        tied = clip_values(belief, cand)
        if _admissible(tied, u) and tied.delta == exact.delta:
            return tied
    return exact
