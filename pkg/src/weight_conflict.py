"""
Weight-conflict analysis.

When the upper bound of the trail drops below the active bound, the trail
literals are sorted by ascending weight and the shortest prefix S whose own
bound w(S) * I_max(S) is already below the active bound is extracted. The
clause made of the negations of S is learned: no model reaching the bound can
contain all of S.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

try:
    from .cdcl_engine import Clause, Solver
    from .constants import ClauseOrigin
    from .exceptions import ContractViolation
    from .formula import Literal, WeightTable, lit_index, var_of
    from .weight_state import ActiveBound, exact_sign, near_tie
except ImportError:
    from cdcl_engine import Clause, Solver
    from constants import ClauseOrigin
    from exceptions import ContractViolation
    from formula import Literal, WeightTable, lit_index, var_of
    from weight_state import ActiveBound, exact_sign, near_tie

logger = logging.getLogger(__name__)


@dataclass
class WeightConflictSet:
    """Literals of the conflict set and their bound w(S) * I_max(S) at return."""

    literals: List[Literal]
    bound_score: float
    log_domain: bool = True

    @property
    def bound_at_return(self) -> float:
        return math.exp(self.bound_score) if self.log_domain else self.bound_score

    @property
    def clause(self) -> List[Literal]:
        """C_w, the disjunction of the negated literals of S."""
        return [-lit for lit in self.literals]


@dataclass
class WeightConflictOutcome:
    conflict_set: WeightConflictSet
    clause: Optional[Clause]
    backtrack_level: int
    complete: bool


def _prefix_bound(trail: Sequence[Literal], prefix: Sequence[int], table: WeightTable) -> Tuple[float, float]:
    """(linear, log) bound of a set of trail positions, recomputed in variable order."""
    chosen = {var_of(trail[i]): trail[i] for i in prefix}
    linear, logs = [], []
    for var in range(1, table.num_vars + 1):
        lit = chosen.get(var)
        if lit is None:
            linear.append(table.best_of(var))
            logs.append(table.log_best_of(var))
        else:
            linear.append(table.weight(lit))
            logs.append(table.log_weight(lit))
    return math.prod(linear), math.fsum(logs)


def _conflict_set(trail: Sequence[Literal], prefix: Sequence[int], table: WeightTable,
                  log_domain: bool) -> WeightConflictSet:
    linear, log = _prefix_bound(trail, prefix, table)
    return WeightConflictSet([trail[i] for i in prefix], log if log_domain else linear, log_domain)


def _greedy_prefix(trail: Sequence[Literal], table: WeightTable, bound: ActiveBound,
                   log_domain: bool) -> WeightConflictSet:
    # The walk runs on log sums in both domains; near-ties go to exact_sign
    order = sorted(range(len(trail)), key=lambda i: (table.weight(trail[i]), i))
    literal, best = table.literal_log_weights, table.log_best_weights
    partial, residual = 0.0, math.fsum(best[1:])
    for count, position in enumerate(order, start=1):
        lit = trail[position]
        partial += literal[lit_index(lit)]
        residual -= best[var_of(lit)]
        score = partial + residual
        if near_tie(score, bound.log_weight, True):
            below = exact_sign(*_prefix_bound(trail, order[:count], table), bound) < 0
        else:
            below = score < bound.log_weight
        if below:
            return _conflict_set(trail, order[:count], table, log_domain)
    return _conflict_set(trail, order, table, log_domain)


def greedy_conflict_set(trail: Sequence[Literal], table: WeightTable, theta: float,
                        log_domain: bool = True) -> WeightConflictSet:
    """
    Extract the greedy weight-conflict set of a trail.

    Args:
        trail: Assigned literals in trail order
        table: Literal weights
        theta: Active bound (linear weight)
        log_domain: Report the bound at return as a sum of logs

    Returns:
        The shortest ascending-weight prefix S with w(S) * I_max(S) < theta,
        or the whole trail when no strict prefix suffices. Ties in weight keep
        trail order.

    Raises:
        ContractViolation: if the trail is not in weight conflict with theta
    """
    if theta <= 0.0:
        raise ContractViolation(f"Bound must be positive, got {theta}")
    bound = ActiveBound.of_weight(theta)
    linear, log = _prefix_bound(trail, range(len(trail)), table)
    if exact_sign(linear, log, bound) >= 0:
        raise ContractViolation(f"Trail bound {linear} is not below the active bound {theta}")
    return _greedy_prefix(trail, table, bound, log_domain)


def analyze_weight_conflict(solver: Solver, bound: Union[float, ActiveBound]) -> WeightConflictOutcome:
    """
    Learn C_w from the current weight conflict and backtrack.

    Non-chronological: backtrack to the highest level of S below its top
    level H (0 if none). With a single literal of S at H the clause asserts
    there; otherwise it waits unassigned on two watches.

    Chronological: pop everything above H, close level H by the flip
    discipline, then add C_w.

    Args:
        solver: Solver at a BCP fixpoint in weight conflict
        bound: Active bound, or its score in the solver's weight domain

    Returns:
        The outcome; complete is set when S holds only level-0 literals or no
        open decision remains
    """
    log_domain = solver.config.log_domain
    conflict_set = _greedy_prefix(solver.trail, solver.table, ActiveBound.coerce(bound, log_domain), log_domain)
    literals = conflict_set.literals
    stats = solver.stats
    stats.weight_conflicts += 1
    stats.weight_set_literals += len(literals)
    solver.count_weight_conflict()
    solver.bump_variables(var_of(lit) for lit in literals)

    levels = [solver.level_of(lit) for lit in literals]
    top = max(levels, default=0)
    if top == 0:
        logger.debug("Weight conflict at decision level 0, search under the bound is complete")
        return WeightConflictOutcome(conflict_set, None, 0, complete=True)

    if solver.config.chronological:
        solver.backtrack_to(top)
        if not solver.flip_last_open_decision():
            return WeightConflictOutcome(conflict_set, None, 0, complete=True)
        backtrack_level = solver.decision_level
    else:
        backtrack_level = max((level for level in levels if level < top), default=0)
        solver.backtrack_to(backtrack_level)
    clause = solver.add_learned(conflict_set.clause, ClauseOrigin.WEIGHT_CONFLICT)
    return WeightConflictOutcome(conflict_set, clause, backtrack_level, complete=False)
