"""
Constants and ENUMs for the CDCL weighted model enumeration engine.
This module defines the mode, configuration and command names and other shared
values used across the solver, the oracle, the benchmark harness and the CLI.
"""

from enum import Enum


class EnumerationMode(Enum):
    """Enumeration tasks supported by the engine."""

    ALL = "all"
    THRESHOLD = "threshold"
    TOP_K = "topk"


class Backtracking(Enum):
    """Backtracking style of the CDCL core."""

    CHRONOLOGICAL = "chrono"
    NON_CHRONOLOGICAL = "nonchrono"


class AnalysisMode(Enum):
    """Where Boolean conflict analysis stops resolving."""

    FIRST_UIP = "first_uip"
    LAST_UIP = "last_uip"


class ClauseOrigin(Enum):
    """Origin tag of a clause in the clause database."""

    ORIGINAL = "original"

    # Learned clauses
    BOOLEAN_CONFLICT = "boolean_conflict"
    WEIGHT_CONFLICT = "weight_conflict"
    BLOCKING = "blocking"


class RelevanceCheck(Enum):
    """Outcome of the weight-relevant completion check."""

    SKIP_IRRELEVANT = "skip_irrelevant"
    EXTEND_AND_VALIDATE = "extend_and_validate"
    WEIGHT_CONFLICT_TRIGGER = "weight_conflict_trigger"


class WeightDistribution(Enum):
    """Literal weight distributions used by the instance generator."""

    UNIFORM_OPEN01 = "uniform"
    FIXED = "fixed"
    TWO_POINT = "two-point"


class BenchmarkFamily(Enum):
    """Synthetic benchmark families produced by the harness."""

    RND3SAT_1_5 = "rnd3sat-1.5"
    UF200_860 = "uf200-860"


class Outcome(Enum):
    """Outcome of a single sweep cell."""

    COMPLETE = "complete"
    TIMEOUT = "timeout"
    ERROR = "error"


class Subcommands(Enum):
    """CLI subcommands."""

    ENUMERATE = "enumerate"
    ORACLE = "oracle"
    GEN = "gen"
    SWEEP = "sweep"
    CHECK = "check"


class ExitCodes(Enum):
    """Process exit codes of the CLI."""

    COMPLETE = 0
    MISMATCH = 1
    INPUT_ERROR = 2
    TIMEOUT = 10


class DefaultValues:
    """Default configuration values for the engine and the harness."""

    # Decision heuristic and restarts
    ACTIVITY_DECAY = 0.95
    ACTIVITY_RESCALE_LIMIT = 1e100
    RESTART_BASE = 256  # conflicts per Luby unit

    # Clause database
    LEARNED_CLAUSE_BUDGET = 2000  # deletable clauses before the first reduction

    # Weight arithmetic
    LINEAR_RECOMPUTE_INTERVAL = 1 << 16  # assign/unassign operations
    UNIFORM_EPSILON = 1e-6
    DEFAULT_WEIGHT = 1.0

    # Output
    WEIGHT_DIGITS = 12  # significant digits

    # Verification
    ORACLE_MAX_VARS = 24
    WATCH_CHECK_INTERVAL = 10_000  # propagations
    DEADLINE_CHECK_INTERVAL = 256  # main loop iterations

    # Benchmark families
    RND3SAT_RATIO = 1.5
    RND3SAT_MIN_VARS = 25
    RND3SAT_MAX_VARS = 45
    RND3SAT_TIMEOUT = 600  # seconds
    UF200_VARS = 200
    UF200_RATIO = 4.28
    UF200_TIMEOUT = 60  # seconds
    CLAUSE_WIDTH = 3

    # Sweep
    SWEEP_TIMEOUT = 60  # seconds
    SWEEP_WORKERS = 4
    PAR2_FACTOR = 2
