"""
CDCL core of the enumeration engine.

The Solver owns the trail, the clause database, the weight state and the
decision heuristic. It knows nothing about enumeration tasks; the enumerator
drives it through propagate / decide / resolve_conflict and the backtracking
primitives below.

ARCHITECTURE:
┌──────────────────────────────────────────────────────────────────┐
│ Enumerator (enumeration.py) ← task logic, bound, model emission  │
│    ↓                                                             │
│ Solver ← trail, levels, BCP, conflict analysis, backtracking     │
│    ↓                           ↓                                 │
│ ClauseDb ← original/learned    WeightState ← w(mu), I_max(mu)    │
└──────────────────────────────────────────────────────────────────┘

Two backtracking disciplines are supported:

* non-chronological: first-UIP learning, backjump to the assertion level,
  restarts on a Luby schedule.
* chronological: last-UIP learning, backtrack to the previous level only.
  Every decision level remembers whether its first literal is a left branch
  (an ordinary decision) or a right branch (a flipped decision whose left
  branch is closed). Closing a level flips a left branch or pops a right one,
  which is what keeps enumeration free of blocking clauses.
"""

import heapq
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Collection, Dict, List, Optional, Tuple

import numpy as np

try:
    from .constants import AnalysisMode, Backtracking, ClauseOrigin, DefaultValues
    from .exceptions import ContractViolation
    from .formula import CnfFormula, Literal, WeightTable, lit_index
    from .weight_state import WeightState
except ImportError:
    from constants import AnalysisMode, Backtracking, ClauseOrigin, DefaultValues
    from exceptions import ContractViolation
    from formula import CnfFormula, Literal, WeightTable, lit_index
    from weight_state import WeightState

logger = logging.getLogger(__name__)

TRUE = 1
FALSE = -1
UNASSIGNED = 0


def luby(index: int) -> int:
    """index-th element (1-based) of the Luby sequence 1, 1, 2, 1, 1, 2, 4, ..."""
    x = index - 1
    size, exponent = 1, 0
    while size < x + 1:
        exponent += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        exponent -= 1
        x %= size
    return 1 << exponent


@dataclass
class SolverConfig:
    """
    Configuration of one solver instance.

    Args:
        backtracking: Chronological (CB) or non-chronological (NCB)
        restarts_enabled: Defaults to True for NCB; must be False for CB
        weight_pruning: Weight-conflict pruning and residual-aware backtracking
        log_domain: Keep weights as sums of logs
        seed: Seed of the decision tie-breaking order
        debug_checks: Run the watch-list validator and learned-clause assertions
    """

    backtracking: Backtracking = Backtracking.NON_CHRONOLOGICAL
    restarts_enabled: Optional[bool] = None
    weight_pruning: bool = True
    log_domain: bool = True
    seed: int = 0
    activity_decay: float = DefaultValues.ACTIVITY_DECAY
    restart_base: int = DefaultValues.RESTART_BASE
    learned_clause_budget: int = DefaultValues.LEARNED_CLAUSE_BUDGET
    debug_checks: bool = False
    label: str = ""

    def __post_init__(self):
        if self.restarts_enabled is None:
            self.restarts_enabled = not self.chronological
        elif self.restarts_enabled and self.chronological:
            raise ContractViolation("Restarts cannot be enabled under chronological backtracking")
        if not self.label:
            parts = ["cb" if self.chronological else "ncb"]
            if not self.weight_pruning:
                parts.append("nopruning")
            if not self.chronological and not self.restarts_enabled:
                parts.append("norestarts")
            if not self.log_domain:
                parts.append("linear")
            self.label = "-".join(parts)

    @property
    def chronological(self) -> bool:
        return self.backtracking is Backtracking.CHRONOLOGICAL

    @property
    def analysis_mode(self) -> AnalysisMode:
        return AnalysisMode.LAST_UIP if self.chronological else AnalysisMode.FIRST_UIP

    @classmethod
    def from_label(cls, label: str, seed: int = 0, **overrides) -> "SolverConfig":
        """
        Build a configuration from a label such as "ncb-nopruning".

        Recognized suffixes: nopruning, norestarts, linear. The task-level
        suffix nopriority is accepted and ignored here.
        """
        base, *suffixes = label.split("-")
        if base == "cb":
            backtracking = Backtracking.CHRONOLOGICAL
        elif base == "ncb":
            backtracking = Backtracking.NON_CHRONOLOGICAL
        else:
            raise ValueError(f"Unknown configuration label: {label}")
        unknown = set(suffixes) - {"nopruning", "norestarts", "linear", "nopriority"}
        if unknown:
            raise ValueError(f"Unknown configuration suffix in {label}: {', '.join(sorted(unknown))}")
        restarts = False if backtracking is Backtracking.CHRONOLOGICAL or "norestarts" in suffixes else True
        return cls(backtracking=backtracking,
                   restarts_enabled=restarts,
                   weight_pruning="nopruning" not in suffixes,
                   log_domain="linear" not in suffixes,
                   seed=seed,
                   label=label,
                   **overrides)


@dataclass
class SolverStats:
    """Counters exposed through the CLI statistics output."""

    decisions: int = 0
    flips: int = 0
    propagations: int = 0
    conflicts: int = 0
    weight_conflicts: int = 0
    weight_set_literals: int = 0
    restarts: int = 0
    learned_clauses: int = 0
    blocking_clauses: int = 0
    weight_clauses: int = 0
    deleted_clauses: int = 0
    peak_clauses: int = 0
    models: int = 0
    improvements: int = 0
    irrelevant_skips: int = 0
    residual_backtracks: int = 0
    wall_time: float = 0.0

    @property
    def mean_weight_set_size(self) -> float:
        if not self.weight_conflicts:
            return 0.0
        return self.weight_set_literals / self.weight_conflicts

    def as_dict(self) -> Dict[str, float]:
        values = asdict(self)
        values["mean_weight_set_size"] = self.mean_weight_set_size
        return values


class Clause:
    """A clause of the database. lits[0] and lits[1] are the watched literals."""

    __slots__ = ("lits", "origin", "lbd", "deleted")

    def __init__(self, lits: List[Literal], origin: ClauseOrigin, lbd: int = 0):
        self.lits = lits
        self.origin = origin
        self.lbd = lbd
        self.deleted = False

    def __len__(self) -> int:
        return len(self.lits)

    def __repr__(self) -> str:
        return f"Clause({self.lits}, {self.origin.value})"


class ClauseDb:
    """
    Original and learned clauses.

    Only Boolean-conflict clauses are ever deleted; blocking and
    weight-conflict clauses are permanent.
    """

    def __init__(self, learned_clause_budget: int = DefaultValues.LEARNED_CLAUSE_BUDGET):
        self.original: List[Clause] = []
        self.learned: List[Clause] = []
        self.units: List[Clause] = []
        self.counts: Counter = Counter()
        self.budget = learned_clause_budget
        self.peak = 0

    def add(self, lits: List[Literal], origin: ClauseOrigin, lbd: int = 0) -> Clause:
        clause = Clause(lits, origin, lbd)
        if origin is ClauseOrigin.ORIGINAL:
            self.original.append(clause)
        else:
            self.learned.append(clause)
        if len(lits) == 1:
            self.units.append(clause)
        self.counts[origin] += 1
        self.peak = max(self.peak, len(self))
        return clause

    def __len__(self) -> int:
        return len(self.original) + len(self.learned)

    def learned_of(self, origin: ClauseOrigin) -> List[Clause]:
        return [c for c in self.learned if c.origin is origin and not c.deleted]

    def deletable_count(self) -> int:
        return sum(1 for c in self.learned if c.origin is ClauseOrigin.BOOLEAN_CONFLICT and len(c) > 2)

    def reduce(self, is_locked) -> int:
        """Delete the worse half (by LBD) of unlocked Boolean-conflict clauses."""
        candidates = [c for c in self.learned
                      if c.origin is ClauseOrigin.BOOLEAN_CONFLICT and len(c) > 2 and not is_locked(c)]
        candidates.sort(key=lambda c: (c.lbd, len(c)), reverse=True)
        doomed = candidates[:len(candidates) // 2]
        for clause in doomed:
            clause.deleted = True
        if doomed:
            self.learned = [c for c in self.learned if not c.deleted]
        self.budget *= 2
        return len(doomed)


class Solver:
    """
    CDCL solver state for one formula and weight table.

    Args:
        formula: The CNF formula
        table: Literal weights
        config: Solver configuration
        relevant_vars: Variables decided first (weight-relevant tier). None
            puts every variable in a single tier.
    """

    def __init__(self, formula: CnfFormula, table: WeightTable,
                 config: Optional[SolverConfig] = None,
                 relevant_vars: Optional[Collection[int]] = None):
        self.formula = formula
        self.table = table
        self.config = config or SolverConfig()
        n = formula.num_vars
        self.num_vars = n

        # Trail
        self.values: List[int] = [UNASSIGNED] * (n + 1)
        self.levels: List[int] = [0] * (n + 1)
        self.reasons: List[Optional[Clause]] = [None] * (n + 1)
        self.trail: List[Literal] = []
        self.trail_lim: List[int] = []
        self.level_flipped: List[bool] = []
        self.qhead = 0

        self.watches: List[List[Clause]] = [[] for _ in range(2 * n + 2)]
        self.clause_db = ClauseDb(self.config.learned_clause_budget)
        self.weight_state = WeightState(table, self.config.log_domain)
        self.stats = SolverStats()

        # Decision heuristic
        rng = np.random.default_rng(self.config.seed)
        self._tiebreak: List[int] = [0] + rng.permutation(n).tolist()
        self.activity: List[float] = [0.0] * (n + 1)
        self._activity_inc = 1.0
        self.saved_phase: List[int] = [
            TRUE if table.positive[v] >= table.negative[v] else FALSE for v in range(n + 1)]
        self.priority_active = relevant_vars is not None
        relevant = set(range(1, n + 1)) if relevant_vars is None else set(relevant_vars)
        self._relevant: List[bool] = [v in relevant for v in range(n + 1)]
        self.relevant_count = len(relevant)
        self.relevant_assigned = 0
        self._heaps: Tuple[list, list] = ([], [])
        self._rebuild_heaps()

        # Clauses that need a look after backtracking
        self._reattach: List[Clause] = []
        self._revisit_pending = False
        self._pending_conflict: Optional[Clause] = None

        self._conflicts_since_restart = 0
        self._luby_index = 1
        self._next_watch_check = DefaultValues.WATCH_CHECK_INTERVAL
        self.inconsistent = False

        self._load_formula()

    def _load_formula(self) -> None:
        for lits in self.formula.clauses:
            if not lits:
                self.inconsistent = True
                continue
            clause = self.clause_db.add(list(lits), ClauseOrigin.ORIGINAL)
            if len(lits) == 1:
                value = self.value(lits[0])
                if value == UNASSIGNED:
                    self._assign(lits[0], clause)
                elif value == FALSE:
                    self.inconsistent = True
            else:
                self.watches[lit_index(lits[0])].append(clause)
                self.watches[lit_index(lits[1])].append(clause)
        logger.debug(f"Loaded {len(self.clause_db)} clauses over {self.num_vars} variables")

    # =========================================================================
    # TRAIL ACCESS
    # =========================================================================

    def value(self, lit: Literal) -> int:
        value = self.values[lit if lit > 0 else -lit]
        return value if lit > 0 else -value

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    def level_of(self, lit: Literal) -> int:
        return self.levels[lit if lit > 0 else -lit]

    def decision_literals(self) -> List[Literal]:
        return [self.trail[start] for start in self.trail_lim]

    def is_flipped_level(self, level: int) -> bool:
        return level > 0 and self.level_flipped[level - 1]

    def all_assigned(self) -> bool:
        return len(self.trail) == self.num_vars

    def assignment(self) -> List[Literal]:
        """Current assignment in variable order 1..n (unassigned variables omitted)."""
        return [v if self.values[v] == TRUE else -v for v in range(1, self.num_vars + 1) if self.values[v]]

    def relevant_complete(self) -> bool:
        return self.relevant_assigned == self.relevant_count

    def is_relevant(self, var: int) -> bool:
        return self._relevant[var]

    def _assign(self, lit: Literal, reason: Optional[Clause]) -> None:
        var = lit if lit > 0 else -lit
        self.values[var] = TRUE if lit > 0 else FALSE
        self.levels[var] = len(self.trail_lim)
        self.reasons[var] = reason
        self.trail.append(lit)
        self.weight_state.on_assign(lit)
        if self._relevant[var]:
            self.relevant_assigned += 1

    def _new_level(self, lit: Literal, flipped: bool) -> None:
        self.trail_lim.append(len(self.trail))
        self.level_flipped.append(flipped)
        self._assign(lit, None)

    def push_decision(self, lit: Literal) -> None:
        """Open a new decision level with a given literal (no propagation)."""
        if self.value(lit) != UNASSIGNED:
            raise ContractViolation(f"Decision literal {lit} is already assigned")
        self.stats.decisions += 1
        self._new_level(lit, flipped=False)

    # =========================================================================
    # PROPAGATION
    # =========================================================================

    def propagate(self) -> Optional[Clause]:
        """
        Extend the trail with all unit-implied literals.

        Returns:
            The first falsified clause, or None at a conflict-free fixpoint
        """
        if self._pending_conflict is not None:
            conflict, self._pending_conflict = self._pending_conflict, None
            return conflict
        if self._revisit_pending:
            conflict = self._revisit()
            if conflict is not None:
                return conflict

        trail = self.trail
        values = self.values
        while self.qhead < len(trail):
            false_lit = -trail[self.qhead]
            self.qhead += 1
            slot = lit_index(false_lit)
            watchers = self.watches[slot]
            self.watches[slot] = kept = []
            conflict = None
            for clause in watchers:
                if conflict is not None:
                    kept.append(clause)
                    continue
                if clause.deleted:
                    continue
                lits = clause.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], false_lit
                first = lits[0]
                first_value = values[first] if first > 0 else -values[-first]
                if first_value == TRUE:
                    kept.append(clause)
                    continue
                for j in range(2, len(lits)):
                    candidate = lits[j]
                    if (values[candidate] if candidate > 0 else -values[-candidate]) != FALSE:
                        lits[1], lits[j] = candidate, false_lit
                        self.watches[lit_index(candidate)].append(clause)
                        break
                else:
                    kept.append(clause)
                    if first_value == FALSE:
                        conflict = clause
                    else:
                        self._assign(first, clause)
                        self.stats.propagations += 1
            if conflict is not None:
                self.qhead = len(trail)
                return conflict

        if self.config.debug_checks and self.stats.propagations >= self._next_watch_check:
            self._next_watch_check = self.stats.propagations + DefaultValues.WATCH_CHECK_INTERVAL
            if not self.check_watches():
                raise ContractViolation("Watch-list invariant violated")
        return None

    def _revisit(self) -> Optional[Clause]:
        """Re-assert unit clauses and rescan clauses whose watches a backtrack may have broken."""
        self._revisit_pending = False
        for clause in self.clause_db.units:
            if clause.deleted:
                continue
            lit = clause.lits[0]
            value = self.value(lit)
            if value == UNASSIGNED:
                self._assign(lit, clause)
                self.stats.propagations += 1
            elif value == FALSE:
                return clause

        waiting, self._reattach = self._reattach, []
        for i, clause in enumerate(waiting):
            if clause.deleted:
                continue
            if self._attach(clause, rewatch=True):
                self._reattach.extend(c for c in waiting[i + 1:] if not c.deleted)
                return clause
        return None

    def _attach(self, clause: Clause, rewatch: bool = False) -> bool:
        """
        Watch a clause under the current trail and propagate it if it is unit.

        Watches prefer true literals of lowest level, then unassigned ones,
        then the false literals of highest level. A clause whose watches a
        later backtrack can leave on a false literal beside an unassigned one
        is queued for _revisit.

        Returns:
            True when every literal is false
        """
        lits = clause.lits
        if len(lits) > 1 and rewatch:
            for lit in lits[:2]:
                slot = lit_index(lit)
                self.watches[slot] = [c for c in self.watches[slot] if c is not clause]

        def watch_rank(lit: Literal) -> Tuple[int, int]:
            value = self.value(lit)
            if value == TRUE:
                return (0, self.level_of(lit))
            if value == UNASSIGNED:
                return (1, 0)
            return (2, -self.level_of(lit))

        lits.sort(key=watch_rank)
        first_value = self.value(lits[0])
        second_value = FALSE
        if len(lits) > 1:
            self.watches[lit_index(lits[0])].append(clause)
            self.watches[lit_index(lits[1])].append(clause)
            second_value = self.value(lits[1])

        if first_value == FALSE:
            if len(lits) > 1:
                self._reattach.append(clause)
            return True
        if first_value == UNASSIGNED and second_value == FALSE:
            self._assign(lits[0], clause)
            self.stats.propagations += 1
            first_value = TRUE
        if (len(lits) > 1 and first_value == TRUE and second_value == FALSE
                and self.level_of(lits[0]) > self.level_of(lits[1])):
            self._reattach.append(clause)
        return False

    # =========================================================================
    # CLAUSE LEARNING
    # =========================================================================

    def add_learned(self, lits: List[Literal], origin: ClauseOrigin) -> Clause:
        """
        Add a learned clause and watch it under the current trail.

        A clause that is unit under the trail propagates immediately; a
        falsified one becomes the next conflict returned by propagate().
        """
        lits = list(lits)
        lbd = len({self.level_of(lit) for lit in lits})
        clause = self.clause_db.add(lits, origin, lbd)
        if origin is ClauseOrigin.BOOLEAN_CONFLICT:
            self.stats.learned_clauses += 1
        elif origin is ClauseOrigin.BLOCKING:
            self.stats.blocking_clauses += 1
        elif origin is ClauseOrigin.WEIGHT_CONFLICT:
            self.stats.weight_clauses += 1
        self.stats.peak_clauses = max(self.stats.peak_clauses, self.clause_db.peak)

        if self._attach(clause):
            self._pending_conflict = clause
        return clause

    def analyze_boolean_conflict(self, conflict: Clause,
                                 mode: AnalysisMode) -> Tuple[List[Literal], int]:
        """
        Derive a learned clause from a falsified clause by resolution.

        The conflict must involve the current decision level, which must be
        above 0. FIRST_UIP stops at the first unique implication point;
        LAST_UIP keeps resolving until the level's first literal (its decision
        or flipped decision) is the only current-level literal left.

        Returns:
            (learned literals with the asserting literal first, backtrack level)
        """
        level = self.decision_level
        if level == 0:
            raise ContractViolation("Conflict analysis at decision level 0")
        if self.config.debug_checks and any(self.value(lit) != FALSE for lit in conflict.lits):
            raise ContractViolation(f"{conflict} is not falsified by the trail")

        seen = set()
        learned: List[Literal] = [0]
        pending = 0
        index = len(self.trail) - 1
        clause_lits = conflict.lits
        while True:
            for lit in clause_lits:
                var = lit if lit > 0 else -lit
                if var in seen or self.levels[var] == 0:
                    continue
                seen.add(var)
                self._bump(var)
                if self.levels[var] == level:
                    pending += 1
                else:
                    learned.append(lit)
            while abs(self.trail[index]) not in seen:
                index -= 1
            pivot = self.trail[index]
            index -= 1
            pending -= 1
            reason = self.reasons[abs(pivot)]
            if reason is None:
                break
            if pending == 0:
                if mode is AnalysisMode.FIRST_UIP:
                    break
                # A literal implied from lower levels only ends the level's chain.
                if not any(self.levels[abs(lit)] == level and lit != pivot for lit in reason.lits):
                    break
            clause_lits = reason.lits
        learned[0] = -pivot

        if len(learned) > 1:
            deepest = max(range(1, len(learned)), key=lambda i: self.level_of(learned[i]))
            learned[1], learned[deepest] = learned[deepest], learned[1]
        if mode is AnalysisMode.LAST_UIP:
            backtrack_level = level - 1
        else:
            backtrack_level = self.level_of(learned[1]) if len(learned) > 1 else 0
        return learned, backtrack_level

    def resolve_conflict(self, conflict: Clause) -> bool:
        """
        Learn from a Boolean conflict and backtrack per the configured policy.

        Returns:
            False when the conflict shows the remaining search space is empty
        """
        self.stats.conflicts += 1
        self._conflicts_since_restart += 1
        conflict_level = max(self.level_of(lit) for lit in conflict.lits)
        if conflict_level == 0:
            return False
        # Everything above the conflict level extends a falsified prefix.
        self.backtrack_to(conflict_level)

        learned, backtrack_level = self.analyze_boolean_conflict(conflict, self.config.analysis_mode)
        if self.config.chronological and self.is_flipped_level(conflict_level):
            if not self.flip_last_open_decision():
                return False
        else:
            self.backtrack_to(backtrack_level)
        self.add_learned(learned, ClauseOrigin.BOOLEAN_CONFLICT)
        self._decay_activity()
        self._maybe_reduce()
        return True

    # =========================================================================
    # BACKTRACKING
    # =========================================================================

    def backtrack_to(self, level: int) -> None:
        """Pop every trail entry above a decision level."""
        if level >= self.decision_level:
            return
        start = self.trail_lim[level]
        trail = self.trail
        for i in range(len(trail) - 1, start - 1, -1):
            lit = trail[i]
            var = lit if lit > 0 else -lit
            self.values[var] = UNASSIGNED
            self.reasons[var] = None
            self.saved_phase[var] = TRUE if lit > 0 else FALSE
            self.weight_state.on_unassign(lit)
            if self._relevant[var]:
                self.relevant_assigned -= 1
            heapq.heappush(self._heaps[0 if self._relevant[var] else 1],
                           (-self.activity[var], self._tiebreak[var], var))
        del trail[start:]
        del self.trail_lim[level:]
        del self.level_flipped[level:]
        self.qhead = min(self.qhead, len(trail))
        self._revisit_pending = True
        if sum(len(h) for h in self._heaps) > 4 * self.num_vars + 64:
            self._rebuild_heaps()

    def flip_last_open_decision(self) -> bool:
        """
        Close the current level chronologically.

        Right branches are popped; the deepest left branch is replaced by its
        negation, which opens a right-branch level.

        Returns:
            False when no open decision is left
        """
        while self.decision_level > 0:
            level = self.decision_level
            decision = self.trail[self.trail_lim[level - 1]]
            flipped = self.level_flipped[level - 1]
            self.backtrack_to(level - 1)
            if not flipped:
                self.stats.flips += 1
                self._new_level(-decision, flipped=True)
                return True
        return False

    def restart_due(self) -> bool:
        return bool(self.config.restarts_enabled) and (
            self._conflicts_since_restart >= self.config.restart_base * luby(self._luby_index))

    def restart(self) -> None:
        """Reset the trail to level 0, keeping every learned clause."""
        if self.config.chronological:
            raise ContractViolation("Restarts are disabled under chronological backtracking")
        self.backtrack_to(0)
        self.stats.restarts += 1
        self._conflicts_since_restart = 0
        self._luby_index += 1

    def count_weight_conflict(self) -> None:
        self._conflicts_since_restart += 1

    # =========================================================================
    # DECISIONS
    # =========================================================================

    def decide(self) -> Optional[Literal]:
        """
        Pick an unassigned variable and open a new level with its saved phase.

        Weight-relevant variables come first when the priority tiers are
        active; the initial phase is the higher-weight polarity.

        Returns:
            The decision literal, or None when every variable is assigned
        """
        var = self._pick_branch_var()
        if var is None:
            return None
        lit = var if self.saved_phase[var] == TRUE else -var
        self.stats.decisions += 1
        self._new_level(lit, flipped=False)
        return lit

    def _pick_branch_var(self) -> Optional[int]:
        for heap in self._heaps:
            while heap:
                negative_activity, _, var = heapq.heappop(heap)
                if self.values[var] == UNASSIGNED and -negative_activity == self.activity[var]:
                    return var
        return None

    def _rebuild_heaps(self) -> None:
        relevant, irrelevant = [], []
        for var in range(1, self.num_vars + 1):
            if self.values[var] == UNASSIGNED:
                entry = (-self.activity[var], self._tiebreak[var], var)
                (relevant if self._relevant[var] else irrelevant).append(entry)
        heapq.heapify(relevant)
        heapq.heapify(irrelevant)
        self._heaps = (relevant, irrelevant)

    def _bump(self, var: int) -> None:
        self.activity[var] += self._activity_inc
        if self.activity[var] > DefaultValues.ACTIVITY_RESCALE_LIMIT:
            scale = 1.0 / DefaultValues.ACTIVITY_RESCALE_LIMIT
            self.activity = [a * scale for a in self.activity]
            self._activity_inc *= scale
            self._rebuild_heaps()
        elif self.values[var] == UNASSIGNED:
            heapq.heappush(self._heaps[0 if self._relevant[var] else 1],
                           (-self.activity[var], self._tiebreak[var], var))

    def bump_variables(self, variables) -> None:
        for var in variables:
            self._bump(var)
        self._decay_activity()

    def _decay_activity(self) -> None:
        self._activity_inc /= self.config.activity_decay

    # =========================================================================
    # CLAUSE DATABASE MAINTENANCE AND VALIDATION
    # =========================================================================

    def _is_locked(self, clause: Clause) -> bool:
        first = clause.lits[0]
        return self.reasons[abs(first)] is clause and self.value(first) == TRUE

    def _maybe_reduce(self) -> None:
        if self.clause_db.deletable_count() <= self.clause_db.budget:
            return
        deleted = self.clause_db.reduce(self._is_locked)
        self.stats.deleted_clauses += deleted
        logger.debug(f"Clause database reduced by {deleted} clauses, next budget {self.clause_db.budget}")

    def live_clauses(self) -> List[Clause]:
        return [c for c in self.clause_db.original + self.clause_db.learned if not c.deleted]

    def check_watches(self) -> bool:
        """Every clause of length >= 2 is watched exactly on lits[0] and lits[1]."""
        for clause in self.live_clauses():
            if len(clause) < 2:
                continue
            for lit in clause.lits[:2]:
                if not any(c is clause for c in self.watches[lit_index(lit)]):
                    logger.error(f"{clause} is not watched on {lit}")
                    return False
            if self.qhead == len(self.trail):
                first, second = (self.value(l) for l in clause.lits[:2])
                if (first == FALSE and second != TRUE) or (second == FALSE and first != TRUE):
                    logger.error(f"{clause} has a falsified watch at the fixpoint")
                    return False
        return True

    def check_fixpoint(self) -> bool:
        """No live clause is unit or falsified under the current trail."""
        for clause in self.live_clauses():
            values = [self.value(lit) for lit in clause.lits]
            if TRUE in values:
                continue
            if values.count(UNASSIGNED) <= 1:
                return False
        return True
