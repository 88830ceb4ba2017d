"""
Expected total reward of Markov chains.

Qualitative preprocessing fixes targets and reward-free bottom components to
0 and divergent states to +-inf; the remaining transient states form a
non-singular system (I - P) x = r, solved with exact Fractions up to a size
limit and with scipy's sparse solver beyond it.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from model.errors import ChainTooLargeError, SingularSystemError, SolverError
from model.values import ExtReal, is_infinite
from service.graph_analysis import reachable_divergence, zero_value_states
from service.sparse_mdp import SparseMdp

logger = logging.getLogger(__name__)


def _exact(value: ExtReal) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def solve_sparse_exact(rows: Dict[int, Dict[int, Fraction]], rhs: Dict[int, Fraction]) -> Dict[int, Fraction]:
    """
    Gaussian elimination on a sparse rational system; rows[e] maps variable ->
    coefficient of equation e. Variables and equations share the same keys.
    """
    order = sorted(rows)
    rows = {e: dict(r) for e, r in rows.items()}
    rhs = dict(rhs)
    column: Dict[int, set] = {}
    for e, row in rows.items():
        for var in row:
            column.setdefault(var, set()).add(e)
    remaining = set(order)
    pivots = []
    for var in order:
        holders = sorted(e for e in column.get(var, ()) if e in remaining and rows[e].get(var))
        if not holders:
            raise SingularSystemError(f"singular system: no pivot for state {var}", (var,))
        pivot = var if var in holders else holders[0]
        remaining.discard(pivot)
        prow = rows[pivot]
        coeff = prow[var]
        if coeff != 1:
            for k in prow:
                prow[k] /= coeff
            rhs[pivot] /= coeff
        for e in holders:
            if e == pivot:
                continue
            factor = rows[e].pop(var)
            column[var].discard(e)
            for k, v in prow.items():
                if k == var:
                    continue
                updated = rows[e].get(k, Fraction(0)) - factor * v
                if updated:
                    rows[e][k] = updated
                    column.setdefault(k, set()).add(e)
                elif k in rows[e]:
                    del rows[e][k]
                    column[k].discard(e)
            rhs[e] -= factor * rhs[pivot]
        pivots.append((var, pivot))

    solution: Dict[int, Fraction] = {}
    for var, pivot in reversed(pivots):
        total = rhs[pivot]
        for k, v in rows[pivot].items():
            if k != var:
                total -= v * solution[k]
        solution[var] = total
    return solution


def evaluate_chain(chain: SparseMdp, exact_limit: int, allow_float: bool = True) -> List[ExtReal]:
    """
    Per-state expected total reward until the targets of a chain (exactly
    one choice per state). Exact Fractions when the transient part has at
    most `exact_limit` states; otherwise floats via spsolve, or
    ChainTooLargeError when `allow_float` is False.
    """
    if any(len(cs) != 1 for cs in chain.choices):
        raise SolverError("chain evaluation needs exactly one choice per state")
    infinite = reachable_divergence(chain)
    zero = zero_value_states(chain) - infinite
    unknowns = [s for s in range(chain.num_states) if s not in infinite and s not in zero]
    values: List[Optional[ExtReal]] = [None] * chain.num_states
    for s in infinite:
        values[s] = chain.infinity
    for s in zero:
        values[s] = Fraction(0)
    if not unknowns:
        return values

    index = {s: i for i, s in enumerate(unknowns)}
    if len(unknowns) <= exact_limit:
        rows: Dict[int, Dict[int, Fraction]] = {}
        rhs: Dict[int, Fraction] = {}
        for s in unknowns:
            row = {s: Fraction(1)}
            total = Fraction(0)
            for t, p, r in chain.choices[s][0].branches:
                if r != 0:
                    total += p * _exact(r)
                if t in index:
                    row[t] = row.get(t, Fraction(0)) - p
                    if row[t] == 0:
                        del row[t]
            rows[s] = row
            rhs[s] = total
        solution = solve_sparse_exact(rows, rhs)
        for s in unknowns:
            values[s] = solution[s]
        return values

    if not allow_float:
        raise ChainTooLargeError(
            f"chain has {len(unknowns)} transient states, above the exact limit {exact_limit}"
        )
    logger.info("chain with %d transient states solved in floating point", len(unknowns))
    data, rr, cc = [], [], []
    b = np.zeros(len(unknowns))
    for s in unknowns:
        i = index[s]
        data.append(1.0)
        rr.append(i)
        cc.append(i)
        for t, p, r in chain.choices[s][0].branches:
            if r != 0 and not is_infinite(r):
                b[i] += float(p) * float(r)
            if t in index:
                data.append(-float(p))
                rr.append(i)
                cc.append(index[t])
    matrix = sparse.csr_matrix((data, (rr, cc)), shape=(len(unknowns), len(unknowns)))
    x = spsolve(matrix.tocsc(), b)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("floating-point chain system is singular", tuple(unknowns))
    for s in unknowns:
        values[s] = float(x[index[s]])
    return values
