"""
Enumeration driver: all, threshold and top-k weighted model enumeration.

The Enumerator runs the CDCL loop of the Solver and decides what happens at
each BCP fixpoint: weight-conflict pruning against the active bound, the
weight-relevant completion check, restarts, decisions, and model handling.

Model handling depends on the backtracking style:

* non-chronological: a blocking clause over the negated decision literals is
  learned and asserted at the previous level.
* chronological: the last open decision is flipped (implicit blocking).

In top-k mode every model that enters the heap is emitted at once; when it
tightens the k-th best score, residual-aware backtracking pops the trail
until some completion could still beat the new bound.
"""

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterator, List, Optional, Tuple, Union

try:
    from .cdcl_engine import Solver, SolverConfig, SolverStats
    from .constants import ClauseOrigin, DefaultValues, EnumerationMode, RelevanceCheck
    from .exceptions import ContractViolation
    from .formula import CnfFormula, Literal, WeightTable, model_log_weight, model_weight
    from .weight_conflict import analyze_weight_conflict
    from .weight_state import ActiveBound
except ImportError:
    from cdcl_engine import Solver, SolverConfig, SolverStats
    from constants import ClauseOrigin, DefaultValues, EnumerationMode, RelevanceCheck
    from exceptions import ContractViolation
    from formula import CnfFormula, Literal, WeightTable, model_log_weight, model_weight
    from weight_conflict import analyze_weight_conflict
    from weight_state import ActiveBound

logger = logging.getLogger(__name__)

FixpointObserver = Callable[[Solver, Optional[float]], None]


@dataclass
class EnumerationTask:
    """
    What to enumerate and how.

    Args:
        mode: ALL, THRESHOLD (needs theta > 0) or TOP_K (needs k >= 1)
        theta: Inclusive lower bound on model weight
        k: Number of best models
        config: Solver configuration
        priority_optimization: Decide weight-relevant variables first and
            apply the relevant-completion check in top-k mode
    """

    mode: EnumerationMode = EnumerationMode.ALL
    theta: Optional[float] = None
    k: Optional[int] = None
    config: SolverConfig = field(default_factory=SolverConfig)
    priority_optimization: bool = True

    def __post_init__(self):
        if self.mode is EnumerationMode.THRESHOLD:
            if self.theta is None or not math.isfinite(self.theta) or self.theta <= 0.0:
                raise ValueError(f"Threshold mode requires theta > 0, got {self.theta}")
        elif self.mode is EnumerationMode.TOP_K:
            if self.k is None or self.k < 1:
                raise ValueError(f"Top-k mode requires k >= 1, got {self.k}")

    @classmethod
    def all_models(cls, config: Optional[SolverConfig] = None, **kwargs) -> "EnumerationTask":
        return cls(EnumerationMode.ALL, config=config or SolverConfig(), **kwargs)

    @classmethod
    def threshold(cls, theta: float, config: Optional[SolverConfig] = None, **kwargs) -> "EnumerationTask":
        return cls(EnumerationMode.THRESHOLD, theta=theta, config=config or SolverConfig(), **kwargs)

    @classmethod
    def top_k(cls, k: int, config: Optional[SolverConfig] = None, **kwargs) -> "EnumerationTask":
        return cls(EnumerationMode.TOP_K, k=k, config=config or SolverConfig(), **kwargs)


@dataclass(frozen=True)
class ModelRecord:
    """A total satisfying assignment in variable order with its weight."""

    assignment: Tuple[Literal, ...]
    weight: float
    log_weight: float


@dataclass(frozen=True)
class WeightPartition:
    """Weight-relevant and weight-irrelevant variables, with theta_i."""

    relevant: FrozenSet[int]
    irrelevant: FrozenSet[int]
    irrelevant_factor: float
    irrelevant_log_factor: float


def partition_weight_relevant(table: WeightTable) -> WeightPartition:
    """Split variables by whether both polarities carry exactly equal weights."""
    irrelevant = frozenset(v for v in range(1, table.num_vars + 1) if table.has_equal_polarities(v))
    relevant = frozenset(range(1, table.num_vars + 1)) - irrelevant
    log_factor = math.fsum(table.log_best_of(v) for v in irrelevant)
    return WeightPartition(relevant, irrelevant, math.exp(log_factor), log_factor)


class TopKState:
    """Min-heap of the k best models; its minimum is the active bound once full."""

    def __init__(self, k: int):
        self.k = k
        self._heap: List[Tuple[float, int, ModelRecord]] = []
        self._sequence = itertools.count()
        self.bound_trace: List[float] = []
        self.improvements = 0

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def full(self) -> bool:
        return len(self._heap) >= self.k

    @property
    def bound_score(self) -> Optional[float]:
        """Score of the k-th best model, or None while the bound is inactive."""
        return self._heap[0][0] if self.full else None

    @property
    def bound(self) -> Optional[ActiveBound]:
        """Weight of the k-th best model, or None while the bound is inactive."""
        if not self.full:
            return None
        record = self._heap[0][2]
        return ActiveBound(record.weight, record.log_weight)

    def offer(self, record: ModelRecord, score: float) -> Tuple[bool, bool]:
        """
        Insert a model if it belongs to the current top-k.

        Returns:
            (inserted, bound tightened)
        """
        before = self.bound_score
        if not self.full:
            heapq.heappush(self._heap, (score, next(self._sequence), record))
        elif score > self._heap[0][0]:
            heapq.heapreplace(self._heap, (score, next(self._sequence), record))
            self.improvements += 1
        else:
            return False, False
        after = self.bound_score
        tightened = after is not None and (before is None or after > before)
        if after is not None:
            self.bound_trace.append(after)
        return True, tightened

    def sorted_records(self) -> List[ModelRecord]:
        """Heap contents by descending score, discovery order among ties."""
        return [record for _, _, record in sorted(self._heap, key=lambda e: (-e[0], e[1]))]


@dataclass
class ResidualBacktrack:
    popped: List[Literal]
    level: int
    exhausted: bool
    bound_score: float


def residual_aware_backtrack(solver: Solver, theta: Union[float, ActiveBound]) -> ResidualBacktrack:
    """
    Pop trail literals, most recent first, until the bound of the remaining
    trail is strictly above theta.

    Works on a copy of the weight state; the solver trail is untouched. At
    least one literal is popped and level-0 literals never are.

    Args:
        solver: Solver at a total assignment
        theta: Active bound, or its score in the solver's weight domain

    Returns:
        The popped literals, the level of the last one popped (the level to
        close), and whether even the level-0 trail cannot beat theta
    """
    theta = ActiveBound.coerce(theta, solver.config.log_domain)
    remaining = solver.weight_state.copy()
    popped: List[Literal] = []
    level = 0
    for lit in reversed(solver.trail):
        if solver.level_of(lit) == 0:
            break
        remaining.on_unassign(lit)
        popped.append(lit)
        level = solver.level_of(lit)
        if remaining.compare_bound(theta) > 0:
            return ResidualBacktrack(popped, level, False, remaining.upper_bound_score())
    return ResidualBacktrack(popped, level, True, remaining.upper_bound_score())


def relevant_complete_check(solver: Solver, partition: WeightPartition,
                            theta_r_score: float) -> RelevanceCheck:
    """
    Compare the weight of the weight-relevant part of the trail with theta_r.

    Returns SKIP_IRRELEVANT when the check does not apply: no
    weight-irrelevant variables, weight-relevant variables still unassigned,
    or a total assignment.
    """
    if not partition.irrelevant or not solver.relevant_complete() or solver.all_assigned():
        return RelevanceCheck.SKIP_IRRELEVANT
    table = solver.table
    relevant_lits = [lit for lit in solver.trail if abs(lit) in partition.relevant]
    if solver.config.log_domain:
        score = math.fsum(table.log_weight(lit) for lit in relevant_lits)
    else:
        score = math.prod(table.weight(lit) for lit in relevant_lits)
    if score >= theta_r_score:
        return RelevanceCheck.EXTEND_AND_VALIDATE
    return RelevanceCheck.WEIGHT_CONFLICT_TRIGGER


class Enumerator:
    """
    Runs one enumeration task on one formula.

    Args:
        formula: The CNF formula
        table: Literal weights
        task: Mode, bound and solver configuration
        timeout: Wall-clock limit in seconds, measured from the first model request
        conflict_budget: Stop after this many Boolean and weight conflicts
        fixpoint_observer: Called with (solver, active bound score) at every
            conflict-free BCP fixpoint
    """

    def __init__(self, formula: CnfFormula, table: WeightTable, task: EnumerationTask,
                 timeout: Optional[float] = None, conflict_budget: Optional[int] = None,
                 fixpoint_observer: Optional[FixpointObserver] = None):
        self.formula = formula
        self.task = task
        self.config = task.config
        self.table = table if table.log_domain == self.config.log_domain else table.with_log_domain(
            self.config.log_domain)
        self.timeout = timeout
        self.conflict_budget = conflict_budget
        self.fixpoint_observer = fixpoint_observer

        self.partition = partition_weight_relevant(self.table)
        self.priority_active = (task.priority_optimization and task.mode is not EnumerationMode.ALL
                                and bool(self.partition.irrelevant))
        relevant = self.partition.relevant if self.priority_active else None
        self.solver = Solver(formula, self.table, self.config, relevant)
        self.top_k = TopKState(task.k) if task.mode is EnumerationMode.TOP_K else None
        self.theta_bound = (ActiveBound.of_weight(task.theta)
                            if task.mode is EnumerationMode.THRESHOLD else None)
        self.emitted: List[ModelRecord] = []
        self.complete = False
        self.timed_out = False
        self._deadline: Optional[float] = None

    @property
    def stats(self) -> SolverStats:
        return self.solver.stats

    @property
    def bound_trace(self) -> List[float]:
        """Active bounds (as weights) in the order they were set."""
        if self.top_k is None:
            return []
        return [self.solver.weight_state.to_weight(score) for score in self.top_k.bound_trace]

    def active_bound(self) -> Optional[ActiveBound]:
        """Bound used for pruning, or None when pruning is inactive."""
        if not self.config.weight_pruning:
            return None
        if self.theta_bound is not None:
            return self.theta_bound
        if self.top_k is not None:
            return self.top_k.bound
        return None

    def active_bound_score(self) -> Optional[float]:
        bound = self.active_bound()
        return None if bound is None else bound.score(self.config.log_domain)

    def top_k_records(self) -> List[ModelRecord]:
        return self.top_k.sorted_records() if self.top_k is not None else []

    # =========================================================================
    # MAIN LOOP
    # =========================================================================

    def models(self) -> Iterator[ModelRecord]:
        """Yield models as they are emitted; sets `complete` when the search space is exhausted."""
        solver = self.solver
        started = time.perf_counter()
        if self.timeout is not None:
            self._deadline = started + self.timeout
        try:
            if solver.inconsistent:
                logger.info("Formula contains an empty or contradictory unit clause")
                self.complete = True
                return
            for iteration in itertools.count(1):
                if self._out_of_resources(iteration):
                    return

                conflict = solver.propagate()
                if conflict is not None:
                    if not solver.resolve_conflict(conflict):
                        self.complete = True
                        return
                    continue

                bound = self.active_bound()
                if self.fixpoint_observer is not None:
                    self.fixpoint_observer(solver, self.active_bound_score())
                if bound is not None and solver.weight_state.compare_bound(bound) < 0:
                    if analyze_weight_conflict(solver, bound).complete:
                        self.complete = True
                        return
                    continue

                if bound is not None and self.priority_active and self.top_k is not None:
                    check = relevant_complete_check(solver, self.partition, self._theta_r_score(bound))
                    if check is RelevanceCheck.WEIGHT_CONFLICT_TRIGGER:
                        self.stats.irrelevant_skips += 1
                        if analyze_weight_conflict(solver, bound).complete:
                            self.complete = True
                            return
                        continue

                if solver.restart_due():
                    solver.restart()
                    continue
                if solver.decide() is not None:
                    continue

                record, score = self._make_record()
                emit, tightened = self._accept(record, score)
                if emit:
                    self.emitted.append(record)
                    self.stats.models += 1
                    yield record
                if not self.on_model_found(tightened):
                    self.complete = True
                    return
        finally:
            self.stats.wall_time += time.perf_counter() - started
            if self.top_k is not None:
                self.stats.improvements = self.top_k.improvements
            logger.debug(f"Enumeration {'complete' if self.complete else 'stopped'} after "
                         f"{self.stats.decisions} decisions, {self.stats.conflicts} conflicts, "
                         f"{self.stats.weight_conflicts} weight conflicts")

    def run(self) -> List[ModelRecord]:
        """Consume the whole stream."""
        for _ in self.models():
            pass
        return list(self.emitted)

    def _out_of_resources(self, iteration: int) -> bool:
        stats = self.stats
        if self.conflict_budget is not None and stats.conflicts + stats.weight_conflicts >= self.conflict_budget:
            logger.info(f"Conflict budget of {self.conflict_budget} exhausted")
            return True
        if (self._deadline is not None and iteration % DefaultValues.DEADLINE_CHECK_INTERVAL == 0
                and time.perf_counter() >= self._deadline):
            logger.info(f"Timeout of {self.timeout} s reached")
            self.timed_out = True
            return True
        return False

    def _theta_r_score(self, bound: ActiveBound) -> float:
        if self.config.log_domain:
            return bound.log_weight - self.partition.irrelevant_log_factor
        return bound.weight / self.partition.irrelevant_factor

    # =========================================================================
    # MODELS
    # =========================================================================

    def _make_record(self) -> Tuple[ModelRecord, float]:
        assignment = tuple(self.solver.assignment())
        log_weight = model_log_weight(self.table, assignment)
        # Variable-order product, the same value the bound comparisons settle ties on
        weight = model_weight(self.table, assignment, log_domain=False)
        record = ModelRecord(assignment, weight, log_weight)
        return record, (log_weight if self.config.log_domain else weight)

    def _accept(self, record: ModelRecord, score: float) -> Tuple[bool, bool]:
        if self.top_k is not None:
            return self.top_k.offer(record, score)
        if self.theta_bound is not None:
            return self.solver.weight_state.compare_bound(self.theta_bound) >= 0, False
        return True, False

    def on_model_found(self, tightened: bool) -> bool:
        """
        Move the search past the current total assignment.

        Returns:
            False when the search space is exhausted
        """
        solver = self.solver
        if tightened and self.config.weight_pruning:
            return self._residual_backtrack()
        if solver.config.chronological:
            return solver.flip_last_open_decision()
        return self._block_decisions()

    def _block_decisions(self, resume_level: Optional[int] = None) -> bool:
        solver = self.solver
        decisions = solver.decision_literals()
        if not decisions:
            return False
        top = len(decisions)
        target = top - 1 if resume_level is None else min(resume_level, top - 1)
        solver.backtrack_to(target)
        solver.add_learned([-d for d in reversed(decisions)], ClauseOrigin.BLOCKING)
        return True

    def _residual_backtrack(self) -> bool:
        solver = self.solver
        result = residual_aware_backtrack(solver, self.top_k.bound)
        self.stats.residual_backtracks += 1
        if result.exhausted:
            logger.debug("Residual-aware backtracking reached level 0, no better model remains")
            return False
        if solver.config.chronological:
            solver.backtrack_to(result.level)
            return solver.flip_last_open_decision()
        return self._block_decisions(result.level - 1)


@dataclass
class EnumerationResult:
    """Everything a finished (or stopped) enumeration produced."""

    models: List[ModelRecord]
    top_k: List[ModelRecord]
    complete: bool
    timed_out: bool
    stats: SolverStats
    bound_trace: List[float] = field(default_factory=list)


def enumerate_models(formula: CnfFormula, table: WeightTable, task: EnumerationTask,
                     timeout: Optional[float] = None, conflict_budget: Optional[int] = None,
                     fixpoint_observer: Optional[FixpointObserver] = None) -> EnumerationResult:
    """Run a task to completion (or to its resource limits) and collect the results."""
    enumerator = Enumerator(formula, table, task, timeout, conflict_budget, fixpoint_observer)
    models = enumerator.run()
    return EnumerationResult(models, enumerator.top_k_records(), enumerator.complete,
                             enumerator.timed_out, enumerator.stats, enumerator.bound_trace)


def iterative_top_k(formula: CnfFormula, table: WeightTable, k: int,
                    config: Optional[SolverConfig] = None,
                    timeout: Optional[float] = None) -> EnumerationResult:
    """
    Top-k by k successive top-1 runs.

    Each run sees the formula extended with one full-model blocking clause per
    model already returned.
    """
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    config = config or SolverConfig()
    started = time.perf_counter()
    found: List[ModelRecord] = []
    total = SolverStats()
    complete = True
    timed_out = False
    current = formula
    for _ in range(k):
        remaining = None if timeout is None else max(0.0, timeout - (time.perf_counter() - started))
        result = enumerate_models(current, table, EnumerationTask.top_k(1, config), timeout=remaining)
        for name, value in result.stats.as_dict().items():
            if name in ("mean_weight_set_size", "wall_time"):
                continue
            if name == "peak_clauses":
                total.peak_clauses = max(total.peak_clauses, value)
            else:
                setattr(total, name, getattr(total, name) + value)
        if not result.complete:
            complete = False
            timed_out = result.timed_out
            break
        if not result.top_k:
            break
        best = result.top_k[0]
        found.append(best)
        current = current.with_clauses([[-lit for lit in best.assignment]])
    total.wall_time = time.perf_counter() - started
    return EnumerationResult(list(found), list(found), complete, timed_out, total)
