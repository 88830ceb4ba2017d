import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from model.belief import Belief
from model.errors import ObservationMismatchError
from model.values import StateValues, ValueKind
from service.clipping import (
    apply_clip,
    clip_values,
    grid_candidates,
    is_grid_belief,
    solve_clipping,
    solve_clipping_milp,
)


def belief(mapping, observation=0):
    return Belief.from_mapping({s: Fraction(p) for s, p in mapping.items()}, observation)


QUARTER = belief({0: "1/4", 1: "3/4"})
HALF = belief({0: "1/2", 1: "1/2"})


def test_clipping_towards_a_dirac_candidate():
    result = clip_values(QUARTER, belief({1: 1}))
    assert result.delta == Fraction(1, 4)
    assert result.deltas_dict() == {0: Fraction(1, 4), 1: 0}
    assert apply_clip(QUARTER, result) == belief({1: 1})


def test_clipping_between_interior_beliefs():
    result = clip_values(HALF, QUARTER)
    assert result.delta == Fraction(1, 3)
    assert result.deltas_dict() == {0: Fraction(1, 3), 1: 0}
    assert apply_clip(HALF, result) == QUARTER


def test_identical_candidate_needs_no_clip():
    result = clip_values(QUARTER, QUARTER)
    assert result.is_trivial
    assert all(d == 0 for _, d in result.state_deltas)


def test_candidate_outside_the_support_is_inadequate():
    assert clip_values(belief({1: 1}), QUARTER) is None


def test_observations_must_match():
    with pytest.raises(ObservationMismatchError):
        clip_values(QUARTER, belief({1: 1}, observation=1))


def test_grid_candidates_order():
    candidates = grid_candidates(0, {0, 1}, 2)
    assert candidates == [belief({0: 1}), HALF, belief({1: 1})]
    assert len(grid_candidates(0, {0, 1, 2}, 3)) == 10
    assert len(grid_candidates(0, {0, 1, 2}, 4)) == 15
    assert is_grid_belief(HALF, 2) and not is_grid_belief(QUARTER, 2)
    assert is_grid_belief(QUARTER, 4)


def test_best_dirac_candidate():
    result = solve_clipping(QUARTER, grid_candidates(0, QUARTER.support, 1))
    assert result.candidate == belief({1: 1})
    assert result.delta == Fraction(1, 4)


def test_ties_go_to_the_first_candidate():
    result = solve_clipping(HALF, grid_candidates(0, HALF.support, 1))
    assert result.candidate == belief({0: 1})
    assert result.delta == Fraction(1, 2)


def test_candidates_hitting_minus_infinity_are_excluded():
    u = StateValues((Fraction(0), -math.inf), ValueKind.MIN)
    result = solve_clipping(QUARTER, grid_candidates(0, QUARTER.support, 1), u)
    # {s1: 1} would remove mass from s0 only; {s0: 1} removes mass from s1 where U = -inf
    assert result.candidate == belief({1: 1})
    u = StateValues((-math.inf, Fraction(0)), ValueKind.MIN)
    assert solve_clipping(QUARTER, grid_candidates(0, QUARTER.support, 1), u).candidate == belief({0: 1})
    u = StateValues((-math.inf, -math.inf), ValueKind.MIN)
    assert solve_clipping(QUARTER, grid_candidates(0, QUARTER.support, 1), u) is None
    assert solve_clipping_milp(QUARTER, grid_candidates(0, QUARTER.support, 1), u) is None


def test_no_candidates():
    assert solve_clipping(QUARTER, []) is None
    assert solve_clipping_milp(QUARTER, []) is None


def test_parallel_solving_gives_the_same_answer():
    candidates = grid_candidates(0, {0, 1, 2, 3}, 4)
    b = belief({0: "1/7", 1: "2/7", 2: "3/7", 3: "1/7"})
    assert solve_clipping(b, candidates, threads=4) == solve_clipping(b, candidates)


def _brute_force(b, candidates):
    """Minimise sum(mu) per candidate with a linear program; None when no candidate is reachable."""
    states = sorted(set(b.support).union(*(c.support for c in candidates)))
    best = None
    for index, cand in enumerate(candidates):
        target = cand.as_dict()
        n = len(states)
        # variables mu(s); equality b(s) - mu(s) = (1 - sum mu) * target(s)
        a_eq = np.zeros((n, n))
        b_eq = np.zeros(n)
        for i, s in enumerate(states):
            a_eq[i, :] = float(target.get(s, 0))
            a_eq[i, i] -= 1.0
            b_eq[i] = float(target.get(s, 0)) - float(b.prob(s))
        bounds = [(0.0, float(b.prob(s))) for s in states]
        res = linprog(np.ones(n), A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if res.status != 0 or res.fun >= 1 - 1e-9:
            continue
        if best is None or res.fun < best[1] - 1e-9:
            best = (index, res.fun)
    return best


def _random_instance(rng):
    size = rng.randint(1, 4)
    support = sorted(rng.sample(range(6), size))
    weights = [rng.randint(1, 9) for _ in support]
    b = Belief.from_mapping({s: Fraction(w, sum(weights)) for s, w in zip(support, weights)}, 0)
    eta = rng.randint(1, 4)
    if rng.random() < 0.2:
        # candidates over states partly outside the support: possibly none adequate
        grid_support = sorted(rng.sample(range(6), rng.randint(1, 3)))
    else:
        grid_support = support
    return b, grid_candidates(0, grid_support, eta)


@pytest.mark.parametrize("seed", range(200))
def test_enumeration_matches_brute_force(seed):
    rng = random.Random(seed)
    b, candidates = _random_instance(rng)
    expected = _brute_force(b, candidates)
    result = solve_clipping(b, candidates)
    if expected is None:
        assert result is None
        return
    index, delta = expected
    assert result.candidate == candidates[index]
    assert float(result.delta) == pytest.approx(delta, abs=1e-9)


@pytest.mark.parametrize("seed", range(0, 200, 4))
def test_milp_matches_enumeration(seed):
    rng = random.Random(seed)
    b, candidates = _random_instance(rng)
    assert solve_clipping_milp(b, candidates) == solve_clipping(b, candidates)


def test_grid_belief_is_its_own_best_candidate():
    result = solve_clipping(HALF, grid_candidates(0, HALF.support, 2))
    assert result.candidate == HALF
    assert result.delta == 0
