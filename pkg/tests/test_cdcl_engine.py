# tests/test_cdcl_engine.py

import numpy as np
import pytest
from src.cdcl_engine import FALSE, TRUE, UNASSIGNED, ClauseDb, Solver, SolverConfig, luby
from src.constants import AnalysisMode, Backtracking, ClauseOrigin
from src.exceptions import ContractViolation
from src.formula import CnfFormula, WeightTable
from src.oracle import brute_force_all

CB = SolverConfig(backtracking=Backtracking.CHRONOLOGICAL)
NCB = SolverConfig(backtracking=Backtracking.NON_CHRONOLOGICAL)


def make_solver(num_vars, clauses, config=None, table=None, relevant_vars=None):
    formula = CnfFormula.build(num_vars, clauses)
    return Solver(formula, table or WeightTable.unit(num_vars), config or SolverConfig(), relevant_vars)


# Deciding 1 implies 2, which implies 3 and 4; (-3 v -4) then fails.
IMPLICATION_CHAIN = [[-1, 2], [-2, 3], [-2, 4], [-3, -4]]


class TestLuby:
    """Test the restart schedule."""

    def test_prefix(self):
        """Test the first fifteen elements of the Luby sequence."""
        assert [luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


class TestSolverConfig:
    """Test solver configuration and labels."""

    def test_defaults(self):
        """Test that the default configuration is NCB with restarts."""
        config = SolverConfig()
        assert not config.chronological
        assert config.restarts_enabled
        assert config.analysis_mode is AnalysisMode.FIRST_UIP
        assert config.label == "ncb"

    def test_chronological_disables_restarts(self):
        """Test that CB defaults to no restarts and last-UIP analysis."""
        assert CB.restarts_enabled is False
        assert CB.analysis_mode is AnalysisMode.LAST_UIP
        assert CB.label == "cb"

    def test_chronological_with_restarts_rejected(self):
        """Test that CB with restarts is a configuration error."""
        with pytest.raises(ContractViolation):
            SolverConfig(backtracking=Backtracking.CHRONOLOGICAL, restarts_enabled=True)

    @pytest.mark.parametrize("label,chrono,pruning,restarts,log_domain", [
        ("cb", True, True, False, True),
        ("ncb", False, True, True, True),
        ("ncb-nopruning", False, False, True, True),
        ("ncb-norestarts", False, True, False, True),
        ("cb-nopruning-linear", True, False, False, False),
        ("cb-nopriority", True, True, False, True),
    ])
    def test_from_label(self, label, chrono, pruning, restarts, log_domain):
        """Test label parsing for every recognized suffix."""
        config = SolverConfig.from_label(label, seed=7)
        assert config.chronological is chrono
        assert config.weight_pruning is pruning
        assert config.restarts_enabled is restarts
        assert config.log_domain is log_domain
        assert config.seed == 7
        assert config.label == label

    @pytest.mark.parametrize("label", ["dpll", "cb-fast", ""])
    def test_unknown_label(self, label):
        """Test that unknown labels and suffixes are rejected."""
        with pytest.raises(ValueError):
            SolverConfig.from_label(label)


class TestSolverLoading:
    """Test formula loading and level-0 facts."""

    def test_unit_clauses_assigned_at_level_zero(self):
        """Test that unit clauses are assigned on load and propagate at level 0."""
        solver = make_solver(3, [[1], [-1, 2], [-2, 3]])
        assert solver.propagate() is None
        assert solver.assignment() == [1, 2, 3]
        assert all(solver.level_of(v) == 0 for v in (1, 2, 3))
        assert solver.all_assigned()

    def test_contradictory_units(self):
        """Test that complementary unit clauses make the solver inconsistent."""
        solver = make_solver(1, [[1], [-1]])
        assert solver.inconsistent

    def test_empty_clause(self):
        """Test that an empty clause makes the solver inconsistent."""
        solver = Solver(CnfFormula(2, ((),)), WeightTable.unit(2))
        assert solver.inconsistent

    def test_level_zero_conflict_is_final(self):
        """Test that a conflict at level 0 ends the search."""
        solver = make_solver(2, [[1], [-2], [-1, 2]])
        conflict = solver.propagate()
        assert conflict is not None
        assert solver.resolve_conflict(conflict) is False


class TestPropagation:
    """Test unit propagation and the watch invariants."""

    def test_decision_propagates(self, assert_sound_fixpoint):
        """Test that a decision propagates its implications at its own level."""
        solver = make_solver(4, [[-1, 2], [-2, 3], [-3, 4]])
        solver.push_decision(1)
        assert solver.propagate() is None
        assert_sound_fixpoint(solver)
        assert solver.assignment() == [1, 2, 3, 4]
        assert all(solver.level_of(v) == 1 for v in (1, 2, 3, 4))
        assert solver.stats.propagations == 3
        assert solver.check_watches()

    def test_decision_on_assigned_literal(self):
        """Test that deciding an assigned literal is rejected."""
        solver = make_solver(2, [[1]])
        with pytest.raises(ContractViolation):
            solver.push_decision(-1)

    def test_conflict_detected(self):
        """Test that a falsified clause is returned."""
        solver = make_solver(4, IMPLICATION_CHAIN)
        solver.push_decision(1)
        conflict = solver.propagate()
        assert conflict is not None
        assert all(solver.value(lit) == FALSE for lit in conflict.lits)

    def test_backtrack_restores_weight_state(self, pruning_weights):
        """Test that backtracking unassigns literals and restores the bound."""
        # Setup
        solver = make_solver(3, [[-1, 2]], table=pruning_weights)
        before = solver.weight_state.upper_bound()

        # Execute
        solver.push_decision(1)
        solver.propagate()
        solver.backtrack_to(0)

        # Verify
        assert solver.assignment() == []
        assert solver.decision_level == 0
        assert solver.weight_state.upper_bound() == pytest.approx(before)
        assert solver.saved_phase[2] == TRUE


class TestConflictAnalysis:
    """Test first-UIP and last-UIP learning."""

    def test_first_uip(self):
        """Test that first-UIP learning stops at the implied literal 2."""
        solver = make_solver(4, IMPLICATION_CHAIN)
        solver.push_decision(1)
        learned, level = solver.analyze_boolean_conflict(solver.propagate(), AnalysisMode.FIRST_UIP)
        assert learned == [-2]
        assert level == 0

    def test_last_uip(self):
        """Test that last-UIP learning resolves back to the decision."""
        solver = make_solver(4, IMPLICATION_CHAIN)
        solver.push_decision(1)
        learned, level = solver.analyze_boolean_conflict(solver.propagate(), AnalysisMode.LAST_UIP)
        assert learned == [-1]
        assert level == 0

    def test_backjump_level(self, assert_sound_fixpoint):
        """Test that first-UIP returns the level of the deepest lower-level literal."""
        # Setup
        solver = make_solver(5, [[-1, 2], [-2, 3], [-2, 4], [-3, -4, -5]])
        solver.push_decision(5)
        assert solver.propagate() is None
        assert_sound_fixpoint(solver)
        solver.push_decision(1)

        # Execute
        learned, level = solver.analyze_boolean_conflict(solver.propagate(), AnalysisMode.FIRST_UIP)

        # Verify
        assert learned == [-2, -5]
        assert level == 1

    def test_analysis_at_level_zero(self):
        """Test that analysis without a decision is a precondition violation."""
        solver = make_solver(2, [[1], [-2], [-1, 2]])
        with pytest.raises(ContractViolation):
            solver.analyze_boolean_conflict(solver.propagate(), AnalysisMode.FIRST_UIP)

    def test_non_falsified_clause_rejected_in_debug(self):
        """Test that debug checks reject a clause that is not falsified."""
        solver = make_solver(2, [[1, 2]], config=SolverConfig(debug_checks=True))
        solver.push_decision(1)
        clause = solver.clause_db.original[0]
        with pytest.raises(ContractViolation):
            solver.analyze_boolean_conflict(clause, AnalysisMode.FIRST_UIP)


class TestResolveConflict:
    """Test learning followed by backtracking under both policies."""

    def test_non_chronological_backjump(self, assert_sound_fixpoint):
        """Test that NCB asserts the learned literal at the backjump level."""
        # Setup
        solver = make_solver(5, [[-1, 2], [-2, 3], [-2, 4], [-3, -4, -5]], config=NCB)
        solver.push_decision(5)
        solver.propagate()
        solver.push_decision(1)

        # Execute
        assert solver.resolve_conflict(solver.propagate())
        assert solver.propagate() is None
        assert_sound_fixpoint(solver)

        # Verify
        assert solver.decision_level == 1
        assert solver.value(2) == FALSE
        assert solver.level_of(2) == 1
        assert solver.value(1) == FALSE
        assert solver.stats.learned_clauses == 1
        assert solver.stats.conflicts == 1

    def test_chronological_backtrack(self):
        """Test that CB learns the negated decision one level down."""
        # Setup
        solver = make_solver(5, [[-1, 2], [-2, 3], [-2, 4], [-3, -4, -5]], config=CB)
        solver.push_decision(5)
        solver.propagate()
        solver.push_decision(1)

        # Execute
        assert solver.resolve_conflict(solver.propagate())

        # Verify
        assert solver.decision_level == 1
        assert solver.value(1) == FALSE
        assert solver.level_of(1) == 1
        assert solver.clause_db.learned_of(ClauseOrigin.BOOLEAN_CONFLICT)[0].lits[0] == -1

    def test_conflict_on_flipped_level(self):
        """Test that a conflict on a right branch flips the next open decision."""
        # Setup
        solver = make_solver(3, [[2, 3], [2, -3]], config=CB)
        solver.push_decision(1)
        solver.push_decision(2)
        solver.flip_last_open_decision()
        assert solver.is_flipped_level(2)

        # Execute
        conflict = solver.propagate()
        assert conflict is not None
        assert solver.resolve_conflict(conflict)

        # Verify
        assert solver.decision_literals() == [-1]
        assert solver.is_flipped_level(1)
        assert solver.value(2) == TRUE
        assert solver.level_of(2) == 1
        assert solver.stats.flips == 2

    def test_conflict_on_last_right_branch(self):
        """Test that a conflict on the only right branch ends the search."""
        solver = make_solver(3, [[2, 3], [2, -3]], config=CB)
        solver.push_decision(2)
        solver.flip_last_open_decision()
        assert solver.resolve_conflict(solver.propagate()) is False


class TestLearnedClauses:
    """Test adding learned clauses under an existing trail."""

    def test_falsified_clause_becomes_next_conflict(self):
        """Test that a clause falsified at attach is returned by propagate()."""
        solver = make_solver(2, [])
        solver.push_decision(1)
        solver.push_decision(2)
        clause = solver.add_learned([-1, -2], ClauseOrigin.BLOCKING)
        assert solver.propagate() is clause
        assert solver.stats.blocking_clauses == 1

    def test_unit_clause_propagates_at_current_level(self):
        """Test that a clause unit at attach assigns its literal immediately."""
        solver = make_solver(2, [])
        solver.push_decision(1)
        solver.add_learned([-1, -2], ClauseOrigin.WEIGHT_CONFLICT)
        assert solver.value(2) == FALSE
        assert solver.level_of(2) == 1
        assert solver.stats.weight_clauses == 1

    def test_satisfied_clause_revisited_after_backtrack(self, assert_sound_fixpoint):
        """Test that a clause satisfied above its false watch propagates after backtracking."""
        # Setup
        solver = make_solver(2, [])
        solver.push_decision(2)
        solver.push_decision(1)
        solver.add_learned([1, -2], ClauseOrigin.BLOCKING)

        # Execute
        solver.backtrack_to(1)
        assert solver.value(1) == UNASSIGNED
        assert solver.propagate() is None
        assert_sound_fixpoint(solver)

        # Verify
        assert solver.value(1) == TRUE
        assert solver.level_of(1) == 1
        assert solver.check_watches()

    def test_falsified_clause_propagates_after_backtrack(self, assert_sound_fixpoint):
        """Test that a clause falsified at attach becomes unit, and propagates, once its top level is popped."""
        # Setup
        solver = make_solver(3, [])
        for lit in (1, 2, 3):
            solver.push_decision(lit)
        clause = solver.add_learned([-1, -3], ClauseOrigin.BLOCKING)
        assert solver.propagate() is clause

        # Execute
        solver.backtrack_to(2)
        assert solver.propagate() is None

        # Verify
        assert solver.value(3) == FALSE
        assert solver.reasons[3] is clause
        assert_sound_fixpoint(solver)

    def test_rescan_skips_clause_satisfied_by_unwatched_literal(self):
        """Test that a rescanned clause with a true literal past its watches implies nothing."""
        # Setup
        solver = make_solver(4, [])
        for lit in (1, 2, 3, 4):
            solver.push_decision(lit)
        clause = solver.add_learned([-1, -2, -3, -4], ClauseOrigin.BLOCKING)
        assert solver.propagate() is clause
        solver.backtrack_to(1)
        solver.push_decision(3)
        solver.push_decision(-2)

        # Execute
        assert solver.propagate() is None

        # Verify
        assert solver.value(4) == UNASSIGNED
        assert clause.lits[0] == -2
        assert solver.check_watches()
        assert solver.check_fixpoint()

    def test_unit_clause_reasserted_after_restart(self):
        """Test that a learned unit clause holds again after returning to level 0."""
        solver = make_solver(2, [])
        solver.push_decision(1)
        solver.add_learned([2], ClauseOrigin.BOOLEAN_CONFLICT)
        solver.restart()
        assert solver.value(2) == UNASSIGNED
        solver.propagate()
        assert solver.value(2) == TRUE
        assert solver.level_of(2) == 0


class TestChronologicalFlips:
    """Test closing levels by flipping decisions."""

    def test_flip_then_pop(self):
        """Test that a left branch is flipped and a right branch popped."""
        solver = make_solver(2, [], config=CB)
        solver.push_decision(1)
        assert solver.flip_last_open_decision()
        assert solver.decision_literals() == [-1]
        assert solver.is_flipped_level(1)
        assert solver.stats.flips == 1
        assert solver.flip_last_open_decision() is False
        assert solver.decision_level == 0

    def test_flip_skips_closed_levels(self):
        """Test that flipping pops right branches above the deepest left branch."""
        solver = make_solver(3, [], config=CB)
        solver.push_decision(1)
        solver.push_decision(2)
        solver.flip_last_open_decision()
        assert solver.decision_literals() == [1, -2]
        assert solver.flip_last_open_decision()
        assert solver.decision_literals() == [-1]


class TestRestarts:
    """Test the restart schedule contract."""

    def test_restart_under_chronological_rejected(self):
        """Test that restarting a CB solver is a contract violation."""
        solver = make_solver(2, [], config=CB)
        with pytest.raises(ContractViolation):
            solver.restart()

    def test_restart_due_follows_luby(self):
        """Test that a restart becomes due after base * luby(i) conflicts."""
        solver = make_solver(2, [], config=SolverConfig(restart_base=2))
        solver.count_weight_conflict()
        assert not solver.restart_due()
        solver.count_weight_conflict()
        assert solver.restart_due()
        solver.push_decision(1)
        solver.restart()
        assert solver.decision_level == 0
        assert solver.stats.restarts == 1
        assert not solver.restart_due()

    def test_no_restarts_when_disabled(self):
        """Test that restart_due() is never true with restarts disabled."""
        solver = make_solver(2, [], config=SolverConfig(restarts_enabled=False, restart_base=1))
        for _ in range(10):
            solver.count_weight_conflict()
        assert not solver.restart_due()


class TestDecisions:
    """Test the decision heuristic."""

    def test_initial_phase_is_heavier_polarity(self):
        """Test that the first decision takes the higher-weight polarity."""
        table = WeightTable.from_pairs([(0.3, 0.7)])
        solver = make_solver(1, [], table=table)
        assert solver.decide() == -1

    def test_relevant_tier_first(self):
        """Test that weight-relevant variables are decided before the others."""
        solver = make_solver(4, [], relevant_vars=[3])
        assert abs(solver.decide()) == 3
        assert solver.relevant_complete()
        assert not solver.is_relevant(1)

    def test_decide_when_complete(self):
        """Test that decide() returns None when every variable is assigned."""
        solver = make_solver(1, [[1]])
        assert solver.decide() is None

    def test_saved_phase(self):
        """Test that a backtracked variable is re-decided with its last polarity."""
        solver = make_solver(1, [])
        solver.push_decision(-1)
        solver.backtrack_to(0)
        assert solver.decide() == -1

    def test_seeded_order_is_deterministic(self):
        """Test that two solvers with the same seed decide in the same order."""
        orders = []
        for _ in range(2):
            solver = make_solver(20, [], config=SolverConfig(seed=11))
            orders.append([solver.decide() for _ in range(20)])
        assert orders[0] == orders[1]
        assert sorted(abs(lit) for lit in orders[0]) == list(range(1, 21))


class TestClauseDb:
    """Test learned-clause reduction."""

    def test_reduce_deletes_worst_half(self):
        """Test that reduction deletes the highest-LBD Boolean-conflict clauses only."""
        # Setup
        db = ClauseDb(learned_clause_budget=2)
        kept = [db.add([1, 2, 3], ClauseOrigin.BOOLEAN_CONFLICT, lbd) for lbd in (1, 2)]
        doomed = [db.add([1, 2, 3], ClauseOrigin.BOOLEAN_CONFLICT, lbd) for lbd in (5, 6)]
        blocking = db.add([1, 2, 3], ClauseOrigin.BLOCKING, 9)
        binary = db.add([1, 2], ClauseOrigin.BOOLEAN_CONFLICT, 9)

        # Execute
        deleted = db.reduce(lambda clause: False)

        # Verify
        assert deleted == 2
        assert all(c.deleted for c in doomed)
        assert not any(c.deleted for c in kept)
        assert not blocking.deleted
        assert not binary.deleted
        assert db.budget == 4

    def test_locked_clauses_survive(self):
        """Test that reason clauses are never deleted."""
        db = ClauseDb()
        clauses = [db.add([1, 2, 3], ClauseOrigin.BOOLEAN_CONFLICT, 5) for _ in range(2)]
        assert db.reduce(lambda clause: True) == 0
        assert not any(c.deleted for c in clauses)

    def test_counts_and_peak(self):
        """Test per-origin counts and the peak size."""
        db = ClauseDb()
        db.add([1, 2], ClauseOrigin.ORIGINAL)
        db.add([1], ClauseOrigin.WEIGHT_CONFLICT)
        assert db.counts[ClauseOrigin.WEIGHT_CONFLICT] == 1
        assert db.peak == 2
        assert len(db.units) == 1


class TestRandomSearch:
    """Test propagation and learning on seeded random instances."""

    @staticmethod
    def push_random_decision(solver, rng):
        free = [v for v in range(1, solver.num_vars + 1) if solver.value(v) == UNASSIGNED]
        var = int(rng.choice(free))
        solver.push_decision(var if rng.random() < 0.5 else -var)

    @pytest.mark.parametrize("config", [CB, NCB, SolverConfig(restart_base=1)], ids=["cb", "ncb", "ncb-restarts"])
    def test_every_fixpoint_is_the_unit_closure(self, random_instance, assert_sound_fixpoint, config):
        """Test that model search keeps reasons unit and reaches the unit closure at every fixpoint."""
        for seed in range(60):
            # Setup
            formula, table = random_instance(7 + seed % 5, ratio=2.0, seed=seed)
            solver = Solver(formula, table, config)
            found = []

            # Execute
            while True:
                conflict = solver.propagate()
                if conflict is not None:
                    if not solver.resolve_conflict(conflict):
                        break
                    continue
                assert_sound_fixpoint(solver)
                if config.restarts_enabled and solver.restart_due():
                    solver.restart()
                    continue
                if solver.decide() is not None:
                    continue
                found.append(tuple(solver.assignment()))
                if config.chronological:
                    if not solver.flip_last_open_decision():
                        break
                    continue
                decisions = solver.decision_literals()
                if not decisions:
                    break
                solver.backtrack_to(len(decisions) - 1)
                solver.add_learned([-d for d in reversed(decisions)], ClauseOrigin.BLOCKING)

            # Verify
            expected = brute_force_all(formula, table).assignments()
            assert sorted(found) == sorted(expected), f"seed {seed}"

    def test_learned_clauses_assert_at_the_conflict_level(self, random_instance, assert_sound_fixpoint):
        """Test first-UIP and last-UIP clauses on random implication graphs."""
        analysed = 0
        for seed in range(150):
            # Setup
            rng = np.random.default_rng(seed)
            formula, table = random_instance(10, ratio=2.5, seed=seed)
            models = brute_force_all(formula, table).assignments()
            solver = Solver(formula, table, SolverConfig(debug_checks=True))
            conflict = solver.propagate()
            while conflict is None and not solver.all_assigned():
                self.push_random_decision(solver, rng)
                conflict = solver.propagate()
                if conflict is None:
                    assert_sound_fixpoint(solver)
            if conflict is None or solver.decision_level == 0:
                continue
            level = solver.decision_level
            decision = solver.decision_literals()[-1]

            # Execute
            first, first_level = solver.analyze_boolean_conflict(conflict, AnalysisMode.FIRST_UIP)
            last, last_level = solver.analyze_boolean_conflict(conflict, AnalysisMode.LAST_UIP)

            # Verify
            for learned in (first, last):
                assert all(solver.value(lit) == FALSE for lit in learned)
                assert [lit for lit in learned if solver.level_of(lit) == level] == [learned[0]]
                assert all(any(lit in model for lit in learned) for model in models)
            lower = [solver.level_of(lit) for lit in first[1:]]
            assert first_level == max(lower, default=0)
            assert last[0] == -decision
            assert last_level == level - 1
            assert solver.trail.index(-first[0]) >= solver.trail.index(-last[0])
            analysed += 1
        assert analysed >= 30
