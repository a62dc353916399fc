"""
Benchmark harness: random weighted 3-CNF generation and configuration sweeps.

A sweep runs every (instance, task, configuration) cell, optionally in a pool
of worker processes, and writes one RunRecord per cell to CSV. Worker logging
is funnelled back to the parent through a multiprocessing queue.
"""

import csv
import hashlib
import json
import logging
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as scipy_stats

try:
    from .cdcl_engine import SolverConfig, SolverStats
    from .constants import (BenchmarkFamily, DefaultValues, EnumerationMode,
                            Outcome, WeightDistribution)
    from .enumeration import EnumerationResult, EnumerationTask, enumerate_models, iterative_top_k
    from .formula import CnfFormula, WeightTable, read_instance, write_instance
    from . import multi_logging as ml
except ImportError:
    from cdcl_engine import SolverConfig, SolverStats
    from constants import (BenchmarkFamily, DefaultValues, EnumerationMode,
                           Outcome, WeightDistribution)
    from enumeration import EnumerationResult, EnumerationTask, enumerate_models, iterative_top_k
    from formula import CnfFormula, WeightTable, read_instance, write_instance
    import multi_logging as ml

logger = logging.getLogger(__name__)

STATS_COLUMNS = [name for name in SolverStats().as_dict() if name != "wall_time"]
BASE_COLUMNS = ["instance_id", "task", "config", "wall_time", "outcome",
                "model_count", "topk_weights", "models_digest"]
CSV_COLUMNS = BASE_COLUMNS + STATS_COLUMNS


# =========================================================================
# INSTANCE GENERATION
# =========================================================================

@dataclass
class GeneratorSpec:
    """
    Parameters of one random weighted 3-CNF instance.

    Args:
        num_vars: Variable count (>= 3)
        clause_ratio: Clauses per variable; the count is rounded half up
        distribution: Literal weight distribution
        seed: Seed of the NumPy generator
        fixed_value: Weight of every literal under FIXED
        two_point_p: Weight pair (p, 1 - p) under TWO_POINT, randomly oriented
    """

    num_vars: int
    clause_ratio: float
    distribution: WeightDistribution = WeightDistribution.UNIFORM_OPEN01
    seed: int = 0
    fixed_value: float = DefaultValues.DEFAULT_WEIGHT
    two_point_p: float = 0.5

    def __post_init__(self):
        if self.num_vars < DefaultValues.CLAUSE_WIDTH:
            raise ValueError(f"At least {DefaultValues.CLAUSE_WIDTH} variables required, got {self.num_vars}")
        if self.clause_ratio < 0:
            raise ValueError(f"Clause ratio must be non-negative, got {self.clause_ratio}")
        if not 0.0 < self.two_point_p < 1.0:
            raise ValueError(f"Two-point weight must lie in (0, 1), got {self.two_point_p}")

    @property
    def num_clauses(self) -> int:
        return int(math.floor(self.clause_ratio * self.num_vars + 0.5))


@dataclass
class BenchInstance:
    instance_id: str
    formula: CnfFormula
    table: WeightTable


def generate_instance(spec: GeneratorSpec) -> Tuple[CnfFormula, WeightTable]:
    """Deterministic random 3-CNF with distinct variables per clause; duplicate clauses may occur."""
    rng = np.random.default_rng(spec.seed)
    n = spec.num_vars
    clauses = []
    for _ in range(spec.num_clauses):
        variables = rng.choice(n, size=DefaultValues.CLAUSE_WIDTH, replace=False) + 1
        signs = rng.integers(0, 2, size=DefaultValues.CLAUSE_WIDTH)
        clauses.append(tuple(int(v) if s else -int(v) for v, s in zip(variables, signs)))

    if spec.distribution is WeightDistribution.UNIFORM_OPEN01:
        eps = DefaultValues.UNIFORM_EPSILON
        pairs = rng.uniform(eps, 1.0 - eps, size=(n, 2))
    elif spec.distribution is WeightDistribution.FIXED:
        pairs = np.full((n, 2), spec.fixed_value)
    else:
        orientation = rng.integers(0, 2, size=n).astype(bool)
        positive = np.where(orientation, spec.two_point_p, 1.0 - spec.two_point_p)
        pairs = np.column_stack([positive, 1.0 - positive])

    table = WeightTable.from_pairs([(float(p), float(q)) for p, q in pairs])
    return CnfFormula(n, tuple(clauses)), table


def family_specs(family: BenchmarkFamily, count: int, seed: int = 0) -> List[GeneratorSpec]:
    """Seeded generator specs for a benchmark family."""
    children = np.random.SeedSequence(seed).spawn(count)
    specs = []
    for child in children:
        child_seed = int(child.generate_state(1)[0])
        if family is BenchmarkFamily.RND3SAT_1_5:
            rng = np.random.default_rng(child_seed)
            n = int(rng.integers(DefaultValues.RND3SAT_MIN_VARS, DefaultValues.RND3SAT_MAX_VARS + 1))
            specs.append(GeneratorSpec(n, DefaultValues.RND3SAT_RATIO, seed=child_seed))
        else:
            specs.append(GeneratorSpec(DefaultValues.UF200_VARS, DefaultValues.UF200_RATIO, seed=child_seed))
    return specs


def family_defaults(family: BenchmarkFamily) -> Tuple[str, float]:
    """Default task label and timeout of a family."""
    if family is BenchmarkFamily.RND3SAT_1_5:
        return "threshold", DefaultValues.RND3SAT_TIMEOUT
    return "topk:1", DefaultValues.UF200_TIMEOUT


def generate_family(family: BenchmarkFamily, count: int, seed: int = 0) -> List[BenchInstance]:
    instances = []
    for index, spec in enumerate(family_specs(family, count, seed)):
        formula, table = generate_instance(spec)
        instances.append(BenchInstance(f"{family.value}-{index:04d}", formula, table))
    return instances


def write_family(directory: str, instances: Iterable[BenchInstance]) -> List[str]:
    os.makedirs(directory, exist_ok=True)
    paths = []
    for instance in instances:
        path = os.path.join(directory, f"{instance.instance_id}.cnf")
        write_instance(path, instance.formula, instance.table, [instance.instance_id])
        paths.append(path)
    logger.info(f"Wrote {len(paths)} instances to {directory}")
    return paths


def load_instances(paths: Iterable[str]) -> List[BenchInstance]:
    instances = []
    for path in paths:
        formula, table = read_instance(path)
        instances.append(BenchInstance(os.path.splitext(os.path.basename(path))[0], formula, table))
    return instances


# =========================================================================
# TASKS AND RUN RECORDS
# =========================================================================

def build_task(task_label: str, config_label: str, num_vars: int, seed: int = 0) -> Tuple[EnumerationTask, bool]:
    """
    Turn sweep labels into an enumeration task.

    Task labels: all, threshold (theta = 0.5^n), threshold:<theta>,
    topk:<k>, topk-iterative:<k>.

    Returns:
        (task, iterative)
    """
    config = SolverConfig.from_label(config_label, seed=seed)
    priority = "nopriority" not in config_label.split("-")
    kind, _, value = task_label.partition(":")
    if kind == EnumerationMode.ALL.value:
        return EnumerationTask.all_models(config, priority_optimization=priority), False
    if kind == EnumerationMode.THRESHOLD.value:
        theta = float(value) if value else 0.5 ** num_vars
        return EnumerationTask.threshold(theta, config, priority_optimization=priority), False
    if kind in (EnumerationMode.TOP_K.value, "topk-iterative"):
        return EnumerationTask.top_k(int(value), config, priority_optimization=priority), kind != "topk"
    raise ValueError(f"Unknown task label: {task_label}")


def models_digest(assignments: Iterable[Sequence[int]]) -> str:
    """SHA-1 of the sorted model set."""
    lines = sorted(" ".join(str(lit) for lit in assignment) for assignment in assignments)
    return hashlib.sha1("\n".join(lines).encode("ascii")).hexdigest()


@dataclass
class RunRecord:
    instance_id: str
    task: str
    config: str
    wall_time: float
    outcome: Outcome
    model_count: int = 0
    topk_weights: List[float] = field(default_factory=list)
    models_digest: str = ""
    stats: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.wall_time < 0:
            raise ValueError(f"Negative wall time: {self.wall_time}")

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.COMPLETE

    def as_row(self) -> List[str]:
        row = [self.instance_id, self.task, self.config, f"{self.wall_time:.6f}", self.outcome.value,
               str(self.model_count), ";".join(f"{w:.12g}" for w in self.topk_weights), self.models_digest]
        row.extend(str(self.stats.get(name, "")) for name in STATS_COLUMNS)
        return row

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "RunRecord":
        stats = {}
        for name in STATS_COLUMNS:
            text = row.get(name, "")
            if text:
                stats[name] = float(text) if "." in text or "e" in text else int(text)
        return cls(row["instance_id"], row["task"], row["config"], float(row["wall_time"]),
                   Outcome(row["outcome"]), int(row["model_count"] or 0),
                   [float(w) for w in row["topk_weights"].split(";") if w], row["models_digest"], stats)


def run_cell(instance: BenchInstance, task_label: str, config_label: str,
             timeout: Optional[float], seed: int = 0) -> RunRecord:
    """Run one sweep cell; any exception becomes an ERROR record."""
    try:
        task, iterative = build_task(task_label, config_label, instance.formula.num_vars, seed)
        if iterative:
            result: EnumerationResult = iterative_top_k(instance.formula, instance.table, task.k,
                                                        task.config, timeout)
        else:
            result = enumerate_models(instance.formula, instance.table, task, timeout=timeout)
    except Exception as e:
        logger.error(f"Cell {instance.instance_id}/{task_label}/{config_label} failed: {e}")
        return RunRecord(instance.instance_id, task_label, config_label, 0.0, Outcome.ERROR)

    outcome = Outcome.COMPLETE if result.complete else Outcome.TIMEOUT
    stats = result.stats.as_dict()
    wall_time = stats.pop("wall_time")
    reported = result.top_k if task.mode is EnumerationMode.TOP_K else result.models
    logger.info(f"{instance.instance_id} {task_label} {config_label}: {outcome.value} "
                f"in {wall_time:.3f} s, {len(reported)} models")
    return RunRecord(instance.instance_id, task_label, config_label, wall_time, outcome,
                     len(reported), [m.weight for m in result.top_k],
                     models_digest(m.assignment for m in reported), stats)


# =========================================================================
# SWEEP EXECUTION
# =========================================================================

@dataclass
class SweepCell:
    index: int
    instance: BenchInstance
    task: str
    config: str
    timeout: Optional[float]
    seed: int = 0


class SweepWorker(multiprocessing.Process):
    """
    Worker process running sweep cells.

    ARCHITECTURE:
    ┌─────────────────────────────────────────────────────────────────┐
    │ Parent (run_sweep)                                              │
    │    ↓ (SweepCell via cell queue, None to stop)                   │
    │ run() ← Process entry point & cell loop                         │
    │    ↓                                                            │
    │ run_cell() ← one solver per cell, errors become records         │
    │    ↓ ((index, RunRecord) via result queue)                      │
    │ Parent merges by cell index                                     │
    └─────────────────────────────────────────────────────────────────┘
    """

    def __init__(self, cell_queue: multiprocessing.Queue,
                 result_queue: multiprocessing.Queue,
                 logging_queue: multiprocessing.Queue):
        super(SweepWorker, self).__init__()
        self.cell_queue = cell_queue
        self.result_queue = result_queue
        self.logging_queue = logging_queue
        self.logger: Optional[logging.Logger] = None

    def run(self) -> None:
        ml.configure_worker_logging(self.logging_queue)
        self.logger = logging.getLogger(__name__)

        while True:
            cell = self.cell_queue.get()
            if cell is None:
                break
            try:
                record = run_cell(cell.instance, cell.task, cell.config, cell.timeout, cell.seed)
            except Exception as e:
                self.logger.error(f"Error processing cell {cell.index}: {e}")
                record = RunRecord(cell.instance.instance_id, cell.task, cell.config, 0.0, Outcome.ERROR)
            self.result_queue.put((cell.index, record))


def run_sweep(instances: Sequence[BenchInstance], tasks: Sequence[str], configs: Sequence[str],
              timeout: Optional[float] = DefaultValues.SWEEP_TIMEOUT,
              workers: int = DefaultValues.SWEEP_WORKERS, seed: int = 0) -> List[RunRecord]:
    """
    Run every (instance, task, config) cell.

    With workers=0 the cells run in this process. Records come back in cell
    order whatever the completion order.
    """
    cells = [SweepCell(index, instance, task, config, timeout, seed)
             for index, (instance, task, config) in enumerate(
                 (i, t, c) for i in instances for t in tasks for c in configs)]
    logger.info(f"Sweep of {len(cells)} cells on {workers or 'no'} worker processes")

    if workers <= 0:
        return [run_cell(c.instance, c.task, c.config, c.timeout, c.seed) for c in cells]

    cell_queue = multiprocessing.Queue()
    result_queue = multiprocessing.Queue()
    logging_queue = multiprocessing.Queue()
    lp = ml.start_logger_thread(logging_queue)

    processes = [SweepWorker(cell_queue, result_queue, logging_queue) for _ in range(min(workers, len(cells)))]
    for process in processes:
        process.daemon = True
        process.start()
    for cell in cells:
        cell_queue.put(cell)
    for _ in processes:
        cell_queue.put(None)

    results: Dict[int, RunRecord] = {}
    for _ in cells:
        index, record = result_queue.get()
        results[index] = record
    for process in processes:
        process.join()
    ml.stop_logger_thread(logging_queue, lp)
    return [results[index] for index in range(len(cells))]


# =========================================================================
# RESULTS
# =========================================================================

def write_records_csv(path: str, records: Iterable[RunRecord]) -> None:
    logger.info(f'Saving sweep results to: {path}')
    with open(path, "w", newline='') as output:
        writer = csv.writer(output)
        writer.writerow(CSV_COLUMNS)
        writer.writerows(record.as_row() for record in records)


def read_records_csv(path: str) -> List[RunRecord]:
    with open(path, "r", newline='', encoding='utf-8') as csvfile:
        return [RunRecord.from_row(row) for row in csv.DictReader(csvfile)]


@dataclass
class SummaryRow:
    task: str
    config: str
    cells: int
    solved: int
    par2: float
    median_time: float
    gmean_time: float


def summarize(records: Sequence[RunRecord], timeout: float) -> List[SummaryRow]:
    """PAR-2 (unsolved cells count twice the timeout), median and geometric-mean time per (task, config)."""
    groups: Dict[Tuple[str, str], List[RunRecord]] = {}
    for record in records:
        groups.setdefault((record.task, record.config), []).append(record)
    rows = []
    for (task, config), group in groups.items():
        penalized = np.array([r.wall_time if r.solved else DefaultValues.PAR2_FACTOR * timeout for r in group])
        times = np.array([max(r.wall_time, 1e-6) for r in group])
        rows.append(SummaryRow(task, config, len(group), sum(r.solved for r in group),
                               float(penalized.mean()), float(np.median(times)),
                               float(scipy_stats.gmean(times))))
    return rows


# =========================================================================
# SWEEP CONFIGURATION FILES
# =========================================================================

@dataclass
class SweepConfig:
    family: BenchmarkFamily = BenchmarkFamily.RND3SAT_1_5
    count: int = 10
    seed: int = 0
    tasks: List[str] = field(default_factory=list)
    configs: List[str] = field(default_factory=lambda: ["cb", "ncb"])
    timeout: Optional[float] = None
    workers: int = DefaultValues.SWEEP_WORKERS

    def __post_init__(self):
        default_task, default_timeout = family_defaults(self.family)
        if not self.tasks:
            self.tasks = [default_task]
        if self.timeout is None:
            self.timeout = default_timeout

    @classmethod
    def from_dict(cls, data: Dict) -> "SweepConfig":
        def as_list(value):
            return [v.strip() for v in value.split(";") if v.strip()] if isinstance(value, str) else list(value)

        kwargs = {}
        if "family" in data:
            kwargs["family"] = BenchmarkFamily(data["family"])
        for key in ("count", "seed", "workers"):
            if key in data:
                kwargs[key] = int(data[key])
        if "timeout" in data:
            kwargs["timeout"] = float(data["timeout"])
        for key in ("tasks", "configs"):
            if key in data:
                kwargs[key] = as_list(data[key])
        return cls(**kwargs)


def load_sweep_config(file_name: str) -> SweepConfig:
    """Load a sweep description from a JSON object or key,value CSV rows."""
    logger.info(f'Loading sweep configuration from: {file_name}')
    file_ext = os.path.splitext(file_name)[1].lower()
    if file_ext == '.json':
        return SweepConfig.from_dict(_load_json_config(file_name))
    if file_ext == '.csv':
        return SweepConfig.from_dict(_load_csv_config(file_name))
    with open(file_name, 'r') as f:
        first_char = f.read(1)
    if first_char == '{':
        return SweepConfig.from_dict(_load_json_config(file_name))
    return SweepConfig.from_dict(_load_csv_config(file_name))


def _load_csv_config(file_name: str) -> Dict[str, str]:
    config = {}
    with open(file_name, 'r', newline='', encoding='utf-8') as csvfile:
        for row in csv.reader(csvfile):
            if len(row) >= 2 and row[0] and row[0].lower() not in ('parameter', 'key'):
                config[row[0].strip().lower().replace(' ', '_')] = row[1].strip()
    return config


def _load_json_config(file_name: str) -> Dict:
    with open(file_name, 'r', encoding='utf-8') as jsonfile:
        data = json.load(jsonfile)
    return data.get('sweep', data)
