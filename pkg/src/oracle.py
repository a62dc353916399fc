"""
Brute-force reference enumeration over all 2^n total assignments.

Formulas are evaluated clause by clause on NumPy boolean matrices, one chunk
of assignments at a time. Model weights are computed from the dense weight
arrays with plain products and sums of logs, independently of the solver's
incremental weight state.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

try:
    from .constants import DefaultValues
    from .exceptions import ContractViolation, OracleCapExceeded
    from .formula import CnfFormula, Literal, WeightTable
except ImportError:
    from constants import DefaultValues
    from exceptions import ContractViolation, OracleCapExceeded
    from formula import CnfFormula, Literal, WeightTable

logger = logging.getLogger(__name__)

CHUNK_BITS = 16
RELATIVE_TOLERANCE = 1e-9

Assignment = Tuple[Literal, ...]


class OracleModel(NamedTuple):
    assignment: Assignment
    weight: float
    log_weight: float


@dataclass
class TieGroup:
    """Models whose weight ties with the k-th best; any `slots` of them complete the top-k."""

    weight: float
    members: List[Assignment]
    slots: int


@dataclass
class OracleResult:
    models: List[OracleModel] = field(default_factory=list)
    tie_group: Optional[TieGroup] = None

    def __len__(self) -> int:
        return len(self.models)

    @property
    def weights(self) -> List[float]:
        return [m.weight for m in self.models]

    def assignments(self) -> List[Assignment]:
        return [m.assignment for m in self.models]


def _satisfying_rows(formula: CnfFormula) -> Iterable[np.ndarray]:
    n = formula.num_vars
    total = 1 << n
    chunk = 1 << CHUNK_BITS
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(bool)
        satisfied = np.ones(len(codes), dtype=bool)
        for clause in formula.clauses:
            clause_true = np.zeros(len(codes), dtype=bool)
            for lit in clause:
                column = bits[:, abs(lit) - 1]
                clause_true |= column if lit > 0 else ~column
            satisfied &= clause_true
        yield bits[satisfied]


def _weigh(row: np.ndarray, table: WeightTable) -> OracleModel:
    factors = []
    assignment = []
    for index, value in enumerate(row.tolist(), start=1):
        if value:
            assignment.append(index)
            factors.append(float(table.positive[index]))
        else:
            assignment.append(-index)
            factors.append(float(table.negative[index]))
    weight = math.prod(factors)
    log_weight = math.fsum(math.log(f) for f in factors)
    if weight > 0.0 and not math.isclose(weight, math.exp(log_weight), rel_tol=RELATIVE_TOLERANCE):
        raise ContractViolation(f"Linear and log weights disagree for {assignment}: {weight} vs {log_weight}")
    return OracleModel(tuple(assignment), weight, log_weight)


def brute_force_all(formula: CnfFormula, table: WeightTable,
                    max_vars: int = DefaultValues.ORACLE_MAX_VARS) -> OracleResult:
    """
    Every model with its weight, heaviest first, ties in lexicographic order.

    Raises:
        OracleCapExceeded: if the formula has more than max_vars variables
    """
    if formula.num_vars > max_vars:
        raise OracleCapExceeded(f"Oracle limited to {max_vars} variables, instance has {formula.num_vars}")
    models = [_weigh(row, table) for rows in _satisfying_rows(formula) for row in rows]
    models.sort(key=lambda m: (-m.log_weight, m.assignment))
    logger.debug(f"Oracle found {len(models)} models over {formula.num_vars} variables")
    return OracleResult(models)


def brute_force_threshold(formula: CnfFormula, table: WeightTable, theta: float) -> OracleResult:
    """Models with w >= theta."""
    everything = brute_force_all(formula, table)
    return OracleResult([m for m in everything.models if m.weight >= theta])


def brute_force_top_k(formula: CnfFormula, table: WeightTable, k: int) -> OracleResult:
    """
    The k heaviest models.

    When models beyond rank k tie with the k-th weight, the result carries a
    TieGroup listing all of them and how many belong in the top-k.
    """
    everything = brute_force_all(formula, table).models
    prefix = everything[:k]
    result = OracleResult(prefix)
    if len(everything) > k:
        kth = prefix[-1].weight
        tied = [m.assignment for m in everything
                if math.isclose(m.weight, kth, rel_tol=RELATIVE_TOLERANCE)]
        if any(a not in {p.assignment for p in prefix} for a in tied):
            slots = sum(1 for m in prefix if math.isclose(m.weight, kth, rel_tol=RELATIVE_TOLERANCE))
            result.tie_group = TieGroup(kth, tied, slots)
    return result


# =========================================================================
# COMPARISON
# =========================================================================

def _canonical(assignment: Sequence[Literal]) -> Assignment:
    return tuple(sorted(assignment, key=abs))


def compare_model_sets(emitted: Iterable[Sequence[Literal]], expected: OracleResult) -> Tuple[bool, str]:
    """Exact set equality of emitted assignments, duplicates rejected."""
    seen: Dict[Assignment, int] = {}
    for assignment in emitted:
        key = _canonical(assignment)
        seen[key] = seen.get(key, 0) + 1
    duplicates = [a for a, count in seen.items() if count > 1]
    if duplicates:
        return False, f"{len(duplicates)} duplicate models, first {duplicates[0]}"
    wanted = {m.assignment for m in expected.models}
    missing = wanted - seen.keys()
    extra = seen.keys() - wanted
    if missing:
        return False, f"{len(missing)} missing models, first {sorted(missing)[0]}"
    if extra:
        return False, f"{len(extra)} unexpected models, first {sorted(extra)[0]}"
    return True, f"{len(wanted)} models"


def compare_top_k(emitted: Sequence[Tuple[Sequence[Literal], float]], expected: OracleResult) -> Tuple[bool, str]:
    """
    Top-k equivalence up to ties.

    Every emitted assignment must be one of the oracle's top-k or a member of
    its tie group, carry the right weight, and the emitted weight multiset
    must match the oracle's.
    """
    if len(emitted) != len(expected.models):
        return False, f"expected {len(expected.models)} models, got {len(emitted)}"
    allowed = {m.assignment: m.weight for m in expected.models}
    if expected.tie_group is not None:
        for member in expected.tie_group.members:
            allowed.setdefault(member, expected.tie_group.weight)
    keys = [_canonical(a) for a, _ in emitted]
    if len(set(keys)) != len(keys):
        return False, "duplicate models in top-k"
    for key, (_, weight) in zip(keys, emitted):
        if key not in allowed:
            return False, f"{key} is not among the top-k models"
        if not math.isclose(weight, allowed[key], rel_tol=RELATIVE_TOLERANCE):
            return False, f"{key} reported with weight {weight}, expected {allowed[key]}"
    got = sorted((w for _, w in emitted), reverse=True)
    for rank, (mine, theirs) in enumerate(zip(got, expected.weights), start=1):
        if not math.isclose(mine, theirs, rel_tol=RELATIVE_TOLERANCE):
            return False, f"rank {rank} weight {mine} differs from {theirs}"
    return True, f"{len(emitted)} models"
