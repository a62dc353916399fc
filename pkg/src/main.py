"""
Command-line entry point: enumerate, oracle, gen, sweep and check.

Models stream to stdout, one line each, as they are found:

    v 1 -2 3 0 w 0.24 lw -1.42711635564

Logs and statistics go to stderr (or to a --stats-json file).
"""

import argparse
import json
import logging
import math
import os
import sys
from multiprocessing import freeze_support
from typing import Iterable, List, Optional, Sequence, TextIO

# Add the src directory to the path when running directly
if __name__ == '__main__' and __package__ is None:
    sys.path.insert(0, os.path.dirname(__file__))

try:
    from . import bench_harness as bh
    from . import multi_logging as ml
    from .cdcl_engine import SolverConfig
    from .constants import (Backtracking, BenchmarkFamily, DefaultValues, EnumerationMode,
                            ExitCodes, Subcommands, WeightDistribution)
    from .enumeration import (EnumerationTask, Enumerator, ModelRecord, iterative_top_k,
                              partition_weight_relevant)
    from .exceptions import WmeError
    from .formula import Literal, read_instance, serialize_instance
    from .oracle import (OracleResult, brute_force_all, brute_force_threshold, brute_force_top_k,
                         compare_model_sets, compare_top_k)
except ImportError:
    import bench_harness as bh
    import multi_logging as ml
    from cdcl_engine import SolverConfig
    from constants import (Backtracking, BenchmarkFamily, DefaultValues, EnumerationMode,
                           ExitCodes, Subcommands, WeightDistribution)
    from enumeration import (EnumerationTask, Enumerator, ModelRecord, iterative_top_k,
                             partition_weight_relevant)
    from exceptions import WmeError
    from formula import Literal, read_instance, serialize_instance
    from oracle import (OracleResult, brute_force_all, brute_force_threshold, brute_force_top_k,
                        compare_model_sets, compare_top_k)

logger = logging.getLogger(__name__)


# =========================================================================
# OUTPUT FORMAT
# =========================================================================

def format_weight(value: float) -> str:
    return f"{value:.{DefaultValues.WEIGHT_DIGITS}g}"


def format_model(assignment: Sequence[Literal], weight: float, log_weight: Optional[float] = None,
                 prefix: str = "v") -> str:
    line = f"{prefix} {' '.join(str(lit) for lit in assignment)} 0 w {format_weight(weight)}"
    if log_weight is not None:
        line += f" lw {format_weight(log_weight)}"
    return line


def write_top_k_block(out: TextIO, models: Iterable, log_domain: bool) -> None:
    models = list(models)
    out.write(f"s TOPK {len(models)}\n")
    for rank, model in enumerate(models, start=1):
        line = format_model(model.assignment, model.weight, model.log_weight if log_domain else None,
                            prefix=f"r {rank}")
        out.write(line + "\n")


def write_stats(stats: dict, json_path: Optional[str]) -> None:
    if json_path:
        with open(json_path, 'w') as f:
            json.dump(stats, f, indent=2, sort_keys=True)
        return
    for name, value in stats.items():
        sys.stderr.write(f"c {name} {value}\n")


# =========================================================================
# ARGUMENT PARSING
# =========================================================================

def add_task_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--mode', choices=[m.value for m in EnumerationMode], default=EnumerationMode.ALL.value)
    parser.add_argument('--theta', type=float, help='Inclusive weight threshold (threshold mode)')
    parser.add_argument('--k', type=int, help='Number of best models (topk mode)')
    parser.add_argument('--backtracking', choices=[b.value for b in Backtracking],
                        help='Default: nonchrono for topk, chrono otherwise')
    parser.add_argument('--no-weight-pruning', action='store_true')
    parser.add_argument('--no-priority-opt', action='store_true')
    parser.add_argument('--linear-weights', action='store_true', help='Disable the log-domain weight representation')
    parser.add_argument('--no-restarts', action='store_true')
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--timeout', type=float, help='Wall-clock limit in seconds')
    parser.add_argument('--conflict-budget', type=int)
    parser.add_argument('--iterative', action='store_true', help='Top-k by successive top-1 runs')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cdcl-wme', description='CDCL weighted model enumeration')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    sub = parser.add_subparsers(dest='command', required=True)

    enumerate_parser = sub.add_parser(Subcommands.ENUMERATE.value, help='Enumerate weighted models')
    enumerate_parser.add_argument('instance')
    add_task_arguments(enumerate_parser)
    enumerate_parser.add_argument('--stats-json', help='Write statistics as JSON instead of stderr')

    oracle_parser = sub.add_parser(Subcommands.ORACLE.value, help='Brute-force reference enumeration')
    oracle_parser.add_argument('instance')
    oracle_parser.add_argument('--mode', choices=[m.value for m in EnumerationMode], default=EnumerationMode.ALL.value)
    oracle_parser.add_argument('--theta', type=float)
    oracle_parser.add_argument('--k', type=int)

    gen_parser = sub.add_parser(Subcommands.GEN.value, help='Generate random weighted 3-CNF instances')
    gen_parser.add_argument('--family', choices=[f.value for f in BenchmarkFamily])
    gen_parser.add_argument('--count', type=int, default=1)
    gen_parser.add_argument('--vars', type=int, default=30)
    gen_parser.add_argument('--ratio', type=float, default=DefaultValues.RND3SAT_RATIO)
    gen_parser.add_argument('--distribution', choices=[d.value for d in WeightDistribution],
                            default=WeightDistribution.UNIFORM_OPEN01.value)
    gen_parser.add_argument('--weight', type=float, default=DefaultValues.DEFAULT_WEIGHT, help='Fixed weight')
    gen_parser.add_argument('--p', type=float, default=0.5, help='Two-point weight')
    gen_parser.add_argument('--seed', type=int, default=0)
    gen_parser.add_argument('--out', help='Output file (single instance) or directory (family)')

    sweep_parser = sub.add_parser(Subcommands.SWEEP.value, help='Run a configuration sweep')
    sweep_parser.add_argument('--config', help='Sweep description (.json or key,value .csv)')
    sweep_parser.add_argument('--family', choices=[f.value for f in BenchmarkFamily])
    sweep_parser.add_argument('--count', type=int)
    sweep_parser.add_argument('--seed', type=int)
    sweep_parser.add_argument('--task', action='append', dest='tasks')
    sweep_parser.add_argument('--solver', action='append', dest='configs', help='Configuration label, e.g. ncb-nopruning')
    sweep_parser.add_argument('--timeout', type=float)
    sweep_parser.add_argument('--workers', type=int)
    sweep_parser.add_argument('--instances', nargs='*', help='Instance files instead of a generated family')
    sweep_parser.add_argument('--output', default='sweep.csv')

    check_parser = sub.add_parser(Subcommands.CHECK.value, help='Validate an instance or compare with the oracle')
    check_parser.add_argument('instance')
    check_parser.add_argument('--against-oracle', action='store_true')
    add_task_arguments(check_parser)
    return parser


def validate_task_arguments(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.mode == EnumerationMode.THRESHOLD.value and args.theta is None:
        parser.error('--mode threshold requires --theta')
    if args.mode == EnumerationMode.TOP_K.value and args.k is None:
        parser.error('--mode topk requires --k')
    if args.theta is not None and args.mode != EnumerationMode.THRESHOLD.value:
        parser.error('--theta is only valid with --mode threshold')
    if args.k is not None and args.mode != EnumerationMode.TOP_K.value:
        parser.error('--k is only valid with --mode topk')
    if getattr(args, 'iterative', False) and args.mode != EnumerationMode.TOP_K.value:
        parser.error('--iterative is only valid with --mode topk')


def task_from_args(args: argparse.Namespace) -> EnumerationTask:
    mode = EnumerationMode(args.mode)
    if args.backtracking is None:
        backtracking = Backtracking.NON_CHRONOLOGICAL if mode is EnumerationMode.TOP_K else Backtracking.CHRONOLOGICAL
    else:
        backtracking = Backtracking(args.backtracking)
    restarts = False if args.no_restarts or backtracking is Backtracking.CHRONOLOGICAL else None
    config = SolverConfig(backtracking=backtracking,
                          restarts_enabled=restarts,
                          weight_pruning=not args.no_weight_pruning,
                          log_domain=not args.linear_weights,
                          seed=args.seed)
    return EnumerationTask(mode, theta=args.theta, k=args.k, config=config,
                           priority_optimization=not args.no_priority_opt)


# =========================================================================
# SUBCOMMANDS
# =========================================================================

def run_enumerate(args: argparse.Namespace, out: TextIO) -> int:
    formula, table = read_instance(args.instance)
    task = task_from_args(args)
    log_domain = task.config.log_domain

    if args.iterative:
        result = iterative_top_k(formula, table, task.k, task.config, args.timeout)
        for model in result.models:
            out.write(format_model(model.assignment, model.weight, model.log_weight if log_domain else None) + "\n")
        write_top_k_block(out, result.top_k, log_domain)
        complete, stats = result.complete, result.stats.as_dict()
    else:
        enumerator = Enumerator(formula, table, task, timeout=args.timeout, conflict_budget=args.conflict_budget)
        for model in enumerator.models():
            out.write(format_model(model.assignment, model.weight, model.log_weight if log_domain else None) + "\n")
            out.flush()
        if task.mode is EnumerationMode.TOP_K:
            write_top_k_block(out, enumerator.top_k_records(), log_domain)
        complete, stats = enumerator.complete, enumerator.stats.as_dict()

    stats['complete'] = complete
    write_stats(stats, args.stats_json)
    if not complete:
        logger.warning('Enumeration stopped before the search space was exhausted')
        return ExitCodes.TIMEOUT.value
    return ExitCodes.COMPLETE.value


def oracle_result(formula, table, mode: EnumerationMode, theta: Optional[float], k: Optional[int]) -> OracleResult:
    if mode is EnumerationMode.THRESHOLD:
        return brute_force_threshold(formula, table, theta)
    if mode is EnumerationMode.TOP_K:
        return brute_force_top_k(formula, table, k)
    return brute_force_all(formula, table)


def run_oracle(args: argparse.Namespace, out: TextIO) -> int:
    formula, table = read_instance(args.instance)
    mode = EnumerationMode(args.mode)
    result = oracle_result(formula, table, mode, args.theta, args.k)
    for model in result.models:
        out.write(format_model(model.assignment, model.weight, model.log_weight) + "\n")
    if mode is EnumerationMode.TOP_K:
        write_top_k_block(out, result.models, True)
        group = result.tie_group
        if group is not None:
            out.write(f"c tie-group w {format_weight(group.weight)} members {len(group.members)} "
                      f"slots {group.slots}\n")
    return ExitCodes.COMPLETE.value


def run_gen(args: argparse.Namespace, out: TextIO) -> int:
    if args.family:
        instances = bh.generate_family(BenchmarkFamily(args.family), args.count, args.seed)
        if not args.out:
            for instance in instances:
                out.write(serialize_instance(instance.formula, instance.table, [instance.instance_id]))
            return ExitCodes.COMPLETE.value
        for path in bh.write_family(args.out, instances):
            out.write(path + "\n")
        return ExitCodes.COMPLETE.value

    spec = bh.GeneratorSpec(args.vars, args.ratio, WeightDistribution(args.distribution), args.seed,
                            fixed_value=args.weight, two_point_p=args.p)
    formula, table = bh.generate_instance(spec)
    text = serialize_instance(formula, table, [f"n={spec.num_vars} ratio={spec.clause_ratio} seed={spec.seed}"])
    if args.out:
        with open(args.out, 'w') as f:
            f.write(text)
    else:
        out.write(text)
    return ExitCodes.COMPLETE.value


def run_sweep(args: argparse.Namespace, out: TextIO) -> int:
    config = bh.load_sweep_config(args.config) if args.config else bh.SweepConfig(
        family=BenchmarkFamily(args.family) if args.family else BenchmarkFamily.RND3SAT_1_5)
    for key in ('count', 'seed', 'tasks', 'configs', 'timeout', 'workers'):
        value = getattr(args, key)
        if value is not None:
            setattr(config, key, value)

    if args.instances:
        instances = bh.load_instances(args.instances)
    else:
        instances = bh.generate_family(config.family, config.count, config.seed)
    records = bh.run_sweep(instances, config.tasks, config.configs, config.timeout, config.workers, config.seed)
    bh.write_records_csv(args.output, records)

    for row in bh.summarize(records, config.timeout):
        out.write(f"{row.task} {row.config} solved {row.solved}/{row.cells} par2 {row.par2:.3f} "
                  f"median {row.median_time:.3f} gmean {row.gmean_time:.3f}\n")
    return ExitCodes.COMPLETE.value


def run_check(args: argparse.Namespace, out: TextIO) -> int:
    formula, table = read_instance(args.instance)
    if not args.against_oracle:
        partition = partition_weight_relevant(table)
        out.write(f"c variables {formula.num_vars}\n")
        out.write(f"c clauses {formula.num_clauses}\n")
        out.write(f"c declared-weights {len(table.declared)}\n")
        out.write(f"c weight-irrelevant {len(partition.irrelevant)}\n")
        out.write(f"c irrelevant-factor {format_weight(partition.irrelevant_factor)}\n")
        return ExitCodes.COMPLETE.value

    task = task_from_args(args)
    expected = oracle_result(formula, table, task.mode, task.theta, task.k)
    if args.iterative:
        result = iterative_top_k(formula, table, task.k, task.config, args.timeout)
        emitted: List[ModelRecord] = result.top_k
        complete = result.complete
    else:
        enumerator = Enumerator(formula, table, task, timeout=args.timeout, conflict_budget=args.conflict_budget)
        enumerator.run()
        emitted = enumerator.top_k_records() if task.mode is EnumerationMode.TOP_K else enumerator.emitted
        complete = enumerator.complete
    if not complete:
        out.write("MISMATCH: enumeration did not complete\n")
        return ExitCodes.TIMEOUT.value

    if task.mode is EnumerationMode.TOP_K:
        ok, reason = compare_top_k([(m.assignment, m.weight) for m in emitted], expected)
    else:
        ok, reason = compare_model_sets((m.assignment for m in emitted), expected)
        if ok:
            weights = {m.assignment: m.weight for m in expected.models}
            for m in emitted:
                if not math.isclose(m.weight, weights[m.assignment], rel_tol=1e-9):
                    ok, reason = False, f"{m.assignment} has weight {m.weight}, expected {weights[m.assignment]}"
                    break
    if ok:
        out.write("MATCH\n")
        return ExitCodes.COMPLETE.value
    out.write(f"MISMATCH: {reason}\n")
    return ExitCodes.MISMATCH.value


HANDLERS = {
    Subcommands.ENUMERATE.value: run_enumerate,
    Subcommands.ORACLE.value: run_oracle,
    Subcommands.GEN.value: run_gen,
    Subcommands.SWEEP.value: run_sweep,
    Subcommands.CHECK.value: run_check,
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in (Subcommands.ENUMERATE.value, Subcommands.ORACLE.value, Subcommands.CHECK.value):
            validate_task_arguments(parser, args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else ExitCodes.INPUT_ERROR.value

    ml.load_logging_config(args.verbose)
    out = out or sys.stdout
    try:
        return HANDLERS[args.command](args, out)
    except (WmeError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return ExitCodes.INPUT_ERROR.value


if __name__ == '__main__':
    freeze_support()
    raise SystemExit(main())
