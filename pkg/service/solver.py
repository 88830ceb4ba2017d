"""
Maximal expected total reward of an abstraction MDP.

Non-negative rewards: value iteration from zero converges from below, so the
reported value never exceeds the abstraction's true value; the exact value of
the greedy policy (also a lower bound) replaces it when larger. Non-positive
rewards are solved as a minimisation of the negation; the iterate then
approaches from above, so the reported value is the exact value of the
extracted policy, or the iterate tagged precision-limited when the chain is
too large for exact solving.
"""

import logging
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from config.settings import get_settings
from model.abstraction import AbstractionMdp, SolveResult
from model.errors import ChainTooLargeError, InvalidAbstractionError, SingularSystemError, SolverError
from model.pomdp import RewardSign
from model.values import ExtReal
from service.exact_solve import evaluate_chain
from service.explorer import validate_abstraction
from service.mdp_analysis import optimise_positive, refine_with_policy
from service.sparse_mdp import SparseMdp

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = 1e-6


def solve_max(abstraction: AbstractionMdp, precision: float = DEFAULT_PRECISION,
              max_iterations: Optional[int] = None, exact_limit: Optional[int] = None,
              upper_bounds: Optional[Sequence[float]] = None) -> SolveResult:
    """
    `upper_bounds[s]` (optional) is a value no state may exceed; crossing it
    aborts with SolverError since it indicates a broken abstraction.
    """
    validate_abstraction(abstraction)
    settings = get_settings()
    if max_iterations is None:
        max_iterations = settings.max_iterations
    if exact_limit is None:
        exact_limit = settings.exact_limit
    mdp = SparseMdp.from_abstraction(abstraction)

    if abstraction.sign is RewardSign.POSITIVE:
        bounds = None if upper_bounds is None else np.asarray(upper_bounds, dtype=float)
        optimum = optimise_positive(mdp, True, precision, max_iterations, bounds)
        _require_convergence(optimum.iteration.converged, max_iterations)
        values = refine_with_policy(mdp, optimum, maximize=True, exact_limit=exact_limit)
        limited = False
    else:
        optimum = optimise_positive(mdp.negated(), False, precision, max_iterations)
        _require_convergence(optimum.iteration.converged, max_iterations)
        try:
            values = evaluate_chain(mdp.restrict(optimum.choices), exact_limit, allow_float=False)
            limited = False
        except (ChainTooLargeError, SingularSystemError) as exc:
            logger.warning("policy value unavailable (%s); reporting the iterate", exc)
            values = [float(-v) for v in optimum.iteration.values]
            limited = True

    policy = tuple(mdp.choices[s][c].action for s, c in enumerate(optimum.choices))
    value = values[abstraction.initial]
    logger.info(
        "abstraction of %d states solved: value %s after %d iterations",
        abstraction.num_states, value, optimum.iteration.iterations,
    )
    return SolveResult(
        value=value,
        policy=policy,
        iterations=optimum.iteration.iterations,
        precision_achieved=optimum.iteration.precision_achieved,
        values=tuple(values),
        exact=isinstance(value, Fraction),
        precision_limited=limited,
    )


def _require_convergence(converged: bool, max_iterations: int):
    if not converged:
        raise SolverError(f"value iteration did not converge within {max_iterations} iterations")


def solve_exact_chain(chain: AbstractionMdp, exact_limit: Optional[int] = None) -> Tuple[ExtReal, ...]:
    """Exact per-state values of an abstraction restricted to one action per state."""
    for state, acts in enumerate(chain.enabled):
        if len(acts) != 1:
            raise InvalidAbstractionError(f"state {state} has {len(acts)} enabled actions, expected 1")
        if sum(p for _, p in chain.successors(state, acts[0])) != 1:
            raise InvalidAbstractionError(f"state {state}: row does not sum to 1")
    if exact_limit is None:
        exact_limit = get_settings().exact_limit
    return tuple(evaluate_chain(SparseMdp.from_abstraction(chain), exact_limit, allow_float=False))
