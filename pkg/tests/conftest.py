# tests/conftest.py

import os
import tempfile
import pytest
from multiprocessing import Queue

from src.bench_harness import GeneratorSpec, generate_instance
from src.cdcl_engine import FALSE
from src.constants import WeightDistribution
from src.formula import CnfFormula, WeightTable, parse_instance

# (A1 v A2) & A3 with the weights of the introductory example
TABLE1_TEXT = """c (A1 v A2) & A3
p cnf 3 2
1 2 0
3 0
w 1 0.6
w -1 0.4
w 2 0.8
w -2 0.2
w 3 0.5
w -3 0.5
"""


@pytest.fixture
def table1():
    """Provides the three-variable introductory instance."""
    return parse_instance(TABLE1_TEXT)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing file operations."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield temp_dir


@pytest.fixture
def table1_path(temp_dir):
    """Writes the introductory instance to disk and returns its path."""
    path = os.path.join(temp_dir, "table1.cnf")
    with open(path, "w") as f:
        f.write(TABLE1_TEXT)
    return path


@pytest.fixture
def pruning_weights():
    """Weights used by the pruning, greedy-set and residual examples (A1 .6/.4, A2 .8/.2, A3 .7/.3)."""
    return WeightTable.from_pairs([(0.6, 0.4), (0.8, 0.2), (0.7, 0.3)])


@pytest.fixture
def priority_example():
    """(A1 v A2) & A3 & (-Z1 v A1) & (-Z2 v A2) with Z1, Z2 weight-irrelevant at 0.5/0.5."""
    formula = CnfFormula.build(5, [[1, 2], [3], [-4, 1], [-5, 2]])
    table = WeightTable.from_pairs([(0.9, 0.1), (0.8, 0.2), (0.7, 0.3), (0.5, 0.5), (0.5, 0.5)])
    return formula, table


@pytest.fixture
def random_instance():
    """Factory for seeded random weighted 3-CNF instances."""
    def make(num_vars, ratio=1.5, seed=0, distribution=WeightDistribution.UNIFORM_OPEN01, **kwargs):
        return generate_instance(GeneratorSpec(num_vars, ratio, distribution, seed, **kwargs))
    return make


@pytest.fixture
def logging_queue():
    """Provides a multiprocessing queue for log records."""
    queue = Queue()
    yield queue
    queue.close()
    queue.join_thread()


@pytest.fixture
def assert_sound_fixpoint():
    """Checks that every reason is unit for its literal and the trail is the unit closure of the decisions."""
    def closure(solver):
        assigned = set(solver.decision_literals())
        changed = True
        while changed:
            changed = False
            for clause in solver.live_clauses():
                if any(lit in assigned for lit in clause.lits):
                    continue
                open_lits = [lit for lit in clause.lits if -lit not in assigned]
                assert open_lits, f"{clause} is falsified by the closure"
                if len(open_lits) == 1:
                    assigned.add(open_lits[0])
                    changed = True
        return assigned

    def check(solver):
        assert solver.check_fixpoint()
        for lit in solver.trail:
            reason = solver.reasons[abs(lit)]
            if reason is None:
                continue
            assert lit in reason.lits
            others = [solver.value(other) for other in reason.lits if other != lit]
            assert all(value == FALSE for value in others), f"{lit} implied by {reason} with values {others}"
        assert closure(solver) == set(solver.trail)
    return check
