"""
Incremental weight state of a partial assignment.

Maintains w(mu), the product of the weights of the assigned literals, and
I_max(mu), the product of best(A) over the unassigned variables. Their product
upper-bounds the weight of every total extension of mu, which is what the
weight-conflict (pruning) test compares against the active bound.

In log domain both quantities are kept as sums of logs and every update is an
addition or subtraction. In linear mode they are products, and both fields are
recomputed from scratch every DefaultValues.LINEAR_RECOMPUTE_INTERVAL updates.

The comparison value used by the solver is called a *score*: the natural log of
a weight in log domain, the weight itself in linear mode.

Comparisons against a bound are decided on the incremental score unless the
two are within NEAR_TIE of each other. Near-ties are settled by exact_sign on
the bound recomputed in variable order, which on a total assignment is the
model weight itself, so acceptance and pruning agree at equality.
"""

import math
import sys
from typing import Iterable, NamedTuple, Tuple, Union

try:
    from .constants import DefaultValues
    from .exceptions import ContractViolation
    from .formula import Literal, WeightTable, lit_index
except ImportError:
    from constants import DefaultValues
    from exceptions import ContractViolation
    from formula import Literal, WeightTable, lit_index

# Relative distance under which score comparisons are redone exactly
NEAR_TIE = 1e-9
MIN_NORMAL = sys.float_info.min


class ActiveBound(NamedTuple):
    """A bound on model weight, as a linear weight and as its natural log."""

    weight: float
    log_weight: float

    @classmethod
    def of_weight(cls, weight: float) -> "ActiveBound":
        return cls(weight, math.log(weight) if weight > 0.0 else -math.inf)

    @classmethod
    def of_score(cls, score: float, log_domain: bool) -> "ActiveBound":
        if log_domain:
            return cls(math.exp(score), score)
        return cls.of_weight(score)

    @classmethod
    def coerce(cls, bound: Union[float, "ActiveBound"], log_domain: bool) -> "ActiveBound":
        return bound if isinstance(bound, ActiveBound) else cls.of_score(bound, log_domain)

    def score(self, log_domain: bool) -> float:
        return self.log_weight if log_domain else self.weight


def near_tie(score: float, target: float, log_domain: bool) -> bool:
    if log_domain:
        return abs(score - target) <= NEAR_TIE * max(1.0, abs(target))
    return abs(score - target) <= NEAR_TIE * max(abs(score), abs(target))


def exact_sign(linear: float, log: float, bound: ActiveBound) -> int:
    """
    Sign of (weight - bound) for a weight given as its variable-order product
    and its exactly rounded log sum.

    The product decides while both sides are normal floats; below that the
    logs do.
    """
    if linear >= MIN_NORMAL and bound.weight >= MIN_NORMAL:
        a, b = linear, bound.weight
    else:
        a, b = log, bound.log_weight
    return (a > b) - (a < b)


class WeightState:
    """Partial weight and optimistic residual bound of the solver trail."""

    def __init__(self, table: WeightTable, log_domain: bool = True,
                 recompute_interval: int = DefaultValues.LINEAR_RECOMPUTE_INTERVAL):
        self.table = table
        self.log_domain = log_domain
        self.recompute_interval = recompute_interval
        if log_domain:
            self._literal = table.literal_log_weights
            self._best = table.log_best_weights
        else:
            self._literal = table.literal_weights
            self._best = table.best_weights
        # 0 unassigned, otherwise the assigned literal
        self._assigned = [0] * (table.num_vars + 1)
        self.assigned_count = 0
        self.operations = 0
        self.partial_score = 0.0
        self.residual_score = 0.0
        self.recompute()

    def copy(self) -> "WeightState":
        clone = WeightState.__new__(WeightState)
        clone.__dict__.update(self.__dict__)
        clone._assigned = list(self._assigned)
        return clone

    # =========================================================================
    # UPDATES
    # =========================================================================

    def on_assign(self, lit: Literal) -> None:
        var = lit if lit > 0 else -lit
        if self._assigned[var]:
            raise ContractViolation(f"Variable {var} is already assigned")
        self._assigned[var] = lit
        self.assigned_count += 1
        if self.log_domain:
            self.partial_score += self._literal[lit_index(lit)]
            self.residual_score -= self._best[var]
        else:
            self.partial_score *= self._literal[lit_index(lit)]
            self.residual_score /= self._best[var]
            self._count_linear_operation()

    def on_unassign(self, lit: Literal) -> None:
        var = lit if lit > 0 else -lit
        if self._assigned[var] != lit:
            raise ContractViolation(f"Literal {lit} is not assigned")
        self._assigned[var] = 0
        self.assigned_count -= 1
        if self.log_domain:
            self.partial_score -= self._literal[lit_index(lit)]
            self.residual_score += self._best[var]
        else:
            self.partial_score /= self._literal[lit_index(lit)]
            self.residual_score *= self._best[var]
            self._count_linear_operation()

    def _count_linear_operation(self) -> None:
        self.operations += 1
        if self.operations >= self.recompute_interval:
            self.recompute()

    def recompute(self) -> None:
        """Rebuild both fields from the set of assigned literals."""
        assigned = [lit for lit in self._assigned[1:] if lit]
        unassigned = [var for var in range(1, len(self._assigned)) if not self._assigned[var]]
        if self.log_domain:
            self.partial_score = math.fsum(self._literal[lit_index(lit)] for lit in assigned)
            self.residual_score = math.fsum(self._best[var] for var in unassigned)
        else:
            self.partial_score = math.prod(self._literal[lit_index(lit)] for lit in assigned)
            self.residual_score = math.prod(self._best[var] for var in unassigned)
        self.operations = 0

    def is_assigned(self, var: int) -> bool:
        return bool(self._assigned[var])

    def assigned_literals(self) -> Iterable[Literal]:
        return (lit for lit in self._assigned[1:] if lit)

    # =========================================================================
    # BOUNDS
    # =========================================================================

    def score(self, weight: float) -> float:
        """Convert a linear weight to this state's comparison domain."""
        if not self.log_domain:
            return weight
        return math.log(weight) if weight > 0.0 else -math.inf

    def to_weight(self, score: float) -> float:
        return math.exp(score) if self.log_domain else score

    @property
    def partial_weight(self) -> float:
        """w(mu)."""
        return self.to_weight(self.partial_score)

    @property
    def residual_bound(self) -> float:
        """I_max(mu)."""
        return self.to_weight(self.residual_score)

    def upper_bound_score(self) -> float:
        if self.log_domain:
            return self.partial_score + self.residual_score
        return self.partial_score * self.residual_score

    def upper_bound(self) -> float:
        """w(mu) * I_max(mu), an upper bound on every total extension of mu."""
        return self.to_weight(self.upper_bound_score())

    def exact_upper_bound(self) -> Tuple[float, float]:
        """
        (linear, log) upper bound recomputed in variable order, without drift.

        On a total assignment these equal formula.model_weight(..., log_domain=False)
        and formula.model_log_weight.
        """
        table = self.table
        linear, logs = [], []
        for var in range(1, len(self._assigned)):
            lit = self._assigned[var]
            if lit:
                linear.append(table.literal_weights[lit_index(lit)])
                logs.append(table.literal_log_weights[lit_index(lit)])
            else:
                linear.append(table.best_weights[var])
                logs.append(table.log_best_weights[var])
        return math.prod(linear), math.fsum(logs)

    def exact_upper_bound_score(self) -> float:
        linear, log = self.exact_upper_bound()
        return log if self.log_domain else linear

    def compare_bound(self, bound: ActiveBound) -> int:
        """Sign of w(mu) * I_max(mu) - bound; exact at near-ties."""
        score = self.upper_bound_score()
        target = bound.score(self.log_domain)
        if not near_tie(score, target, self.log_domain):
            return 1 if score > target else -1
        return exact_sign(*self.exact_upper_bound(), bound)

    def weight_conflict_score(self, theta_score: float) -> bool:
        return self.compare_bound(ActiveBound.of_score(theta_score, self.log_domain)) < 0

    def weight_conflict(self, theta: float) -> bool:
        """True iff w(mu) * I_max(mu) < theta (strict)."""
        if theta <= 0.0:
            raise ContractViolation(f"Bound must be positive, got {theta}")
        return self.compare_bound(ActiveBound.of_weight(theta)) < 0
