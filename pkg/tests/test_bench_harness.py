# tests/test_bench_harness.py

import json
import multiprocessing
import os
import pytest
from src.bench_harness import (CSV_COLUMNS, BenchInstance, GeneratorSpec, RunRecord, SweepCell, SweepConfig,
                               SweepWorker, build_task, family_specs, generate_family, generate_instance,
                               load_instances, load_sweep_config, models_digest, read_records_csv, run_cell,
                               run_sweep, summarize, write_family, write_records_csv)
from src.constants import BenchmarkFamily, DefaultValues, EnumerationMode, Outcome, WeightDistribution
from src.formula import serialize_instance


@pytest.fixture
def table1_instance(table1):
    """The introductory instance wrapped for the harness."""
    formula, table = table1
    return BenchInstance("table1", formula, table)


class TestGeneratorSpec:
    """Test generator parameters."""

    @pytest.mark.parametrize("num_vars,ratio,expected", [(30, 1.5, 45), (200, 4.28, 856), (25, 1.5, 38)])
    def test_clause_count_rounds_half_up(self, num_vars, ratio, expected):
        """Test floor(r * n + 0.5) clause counts."""
        assert GeneratorSpec(num_vars, ratio).num_clauses == expected

    @pytest.mark.parametrize("kwargs", [
        {"num_vars": 2, "clause_ratio": 1.0},
        {"num_vars": 10, "clause_ratio": -1.0},
        {"num_vars": 10, "clause_ratio": 1.0, "two_point_p": 1.0},
    ])
    def test_invalid_specs(self, kwargs):
        """Test that impossible parameters are rejected."""
        with pytest.raises(ValueError):
            GeneratorSpec(**kwargs)


class TestGenerateInstance:
    """Test random weighted 3-CNF generation."""

    def test_deterministic(self):
        """Test that the same generator settings give byte-identical instances."""
        spec = GeneratorSpec(30, 1.5, seed=42)
        assert serialize_instance(*generate_instance(spec)) == serialize_instance(*generate_instance(spec))

    def test_seeds_differ(self):
        """Test that different seeds give different instances."""
        first = serialize_instance(*generate_instance(GeneratorSpec(30, 1.5, seed=1)))
        second = serialize_instance(*generate_instance(GeneratorSpec(30, 1.5, seed=2)))
        assert first != second

    def test_clause_shape(self):
        """Test that every clause has three distinct variables in range."""
        formula, _ = generate_instance(GeneratorSpec(200, 4.28, seed=7))
        assert formula.num_clauses == 856
        for clause in formula.clauses:
            variables = {abs(lit) for lit in clause}
            assert len(variables) == 3
            assert all(1 <= v <= 200 for v in variables)

    def test_uniform_weights_in_open_interval(self):
        """Test that uniform weights lie strictly inside (0, 1)."""
        _, table = generate_instance(GeneratorSpec(50, 1.5, seed=3))
        weights = list(table.declared.values())
        assert len(weights) == 100
        assert all(DefaultValues.UNIFORM_EPSILON <= w <= 1.0 - DefaultValues.UNIFORM_EPSILON for w in weights)

    def test_fixed_weights(self):
        """Test that fixed weights make every variable weight-irrelevant."""
        _, table = generate_instance(GeneratorSpec(10, 1.5, WeightDistribution.FIXED, fixed_value=0.5))
        assert all(table.has_equal_polarities(v) for v in range(1, 11))

    def test_two_point_weights(self):
        """Test that two-point weights are p and 1 - p."""
        _, table = generate_instance(GeneratorSpec(10, 1.5, WeightDistribution.TWO_POINT, two_point_p=0.8))
        for v in range(1, 11):
            assert sorted([table.weight(v), table.weight(-v)]) == pytest.approx([0.2, 0.8])


class TestFamilies:
    """Test benchmark family generation."""

    def test_rnd3sat_sizes(self):
        """Test that rnd3sat-1.5 instances have 25 to 45 variables at ratio 1.5."""
        specs = family_specs(BenchmarkFamily.RND3SAT_1_5, 20, seed=1)
        assert all(DefaultValues.RND3SAT_MIN_VARS <= s.num_vars <= DefaultValues.RND3SAT_MAX_VARS for s in specs)
        assert all(s.clause_ratio == 1.5 for s in specs)

    def test_uf200_sizes(self):
        """Test that uf200-860 instances have 200 variables and 856 clauses."""
        specs = family_specs(BenchmarkFamily.UF200_860, 3)
        assert all(s.num_vars == 200 and s.num_clauses == 856 for s in specs)

    def test_family_is_deterministic(self):
        """Test that a family seed fixes every instance."""
        first = [s.seed for s in family_specs(BenchmarkFamily.RND3SAT_1_5, 5, seed=9)]
        second = [s.seed for s in family_specs(BenchmarkFamily.RND3SAT_1_5, 5, seed=9)]
        assert first == second
        assert len(set(first)) == 5

    def test_write_and_load(self, temp_dir):
        """Test that written family files load back with their ids."""
        instances = generate_family(BenchmarkFamily.RND3SAT_1_5, 3, seed=4)
        paths = write_family(os.path.join(temp_dir, "family"), instances)
        loaded = load_instances(paths)
        assert [i.instance_id for i in loaded] == ["rnd3sat-1.5-0000", "rnd3sat-1.5-0001", "rnd3sat-1.5-0002"]
        assert loaded[1].formula == instances[1].formula


class TestBuildTask:
    """Test sweep task labels."""

    def test_threshold_default(self):
        """Test that a bare threshold label uses 0.5^n."""
        task, iterative = build_task("threshold", "cb", 10)
        assert task.mode is EnumerationMode.THRESHOLD
        assert task.theta == 0.5 ** 10
        assert task.config.chronological
        assert not iterative

    def test_explicit_threshold(self):
        """Test an explicit threshold value."""
        task, _ = build_task("threshold:0.01", "ncb", 10)
        assert task.theta == 0.01

    def test_top_k(self):
        """Test plain and iterative top-k labels."""
        task, iterative = build_task("topk:3", "ncb-nopriority", 10)
        assert task.k == 3
        assert not task.priority_optimization
        assert not iterative
        _, iterative = build_task("topk-iterative:2", "ncb", 10)
        assert iterative

    def test_unknown_label(self):
        """Test that unknown task labels are rejected."""
        with pytest.raises(ValueError):
            build_task("maxsat", "ncb", 10)


class TestRunCell:
    """Test single sweep cells."""

    def test_complete_threshold_cell(self, table1_instance):
        """Test a threshold cell on the introductory instance."""
        record = run_cell(table1_instance, "threshold:0.05", "cb", timeout=10)
        assert record.solved
        assert record.model_count == 3
        assert record.models_digest == models_digest([(1, 2, 3), (-1, 2, 3), (1, -2, 3)])
        assert record.stats["models"] == 3

    def test_top_k_cell(self, table1_instance):
        """Test that top-k cells report the heap weights."""
        record = run_cell(table1_instance, "topk:2", "ncb", timeout=10)
        assert record.topk_weights == pytest.approx([0.24, 0.16])

    def test_iterative_cell(self, table1_instance):
        """Test the iterative top-k baseline cell."""
        record = run_cell(table1_instance, "topk-iterative:2", "ncb", timeout=10)
        assert record.solved
        assert record.topk_weights == pytest.approx([0.24, 0.16])

    def test_error_cell(self, table1_instance):
        """Test that a failing cell becomes an ERROR record."""
        record = run_cell(table1_instance, "threshold", "dpll", timeout=10)
        assert record.outcome is Outcome.ERROR
        assert not record.solved

    def test_digest_ignores_order(self):
        """Test that the model digest depends only on the set of models."""
        assert models_digest([(1, 2), (-1, 2)]) == models_digest([(-1, 2), (1, 2)])


class TestRecords:
    """Test CSV persistence and summaries."""

    def test_csv_round_trip(self, temp_dir, table1_instance):
        """Test that records read back from CSV equal the written ones."""
        # Setup
        records = [run_cell(table1_instance, "topk:2", label, timeout=10) for label in ("cb", "ncb")]
        records.append(RunRecord("x", "threshold", "cb", 3.5, Outcome.TIMEOUT))
        path = os.path.join(temp_dir, "results.csv")

        # Execute
        write_records_csv(path, records)
        loaded = read_records_csv(path)

        # Verify
        with open(path) as f:
            assert f.readline().strip().split(",") == CSV_COLUMNS
        assert [r.outcome for r in loaded] == [Outcome.COMPLETE, Outcome.COMPLETE, Outcome.TIMEOUT]
        assert loaded[0].topk_weights == pytest.approx([0.24, 0.16])
        assert loaded[0].models_digest == records[0].models_digest
        assert loaded[1].stats["models"] == records[1].stats["models"]
        assert loaded[2].stats == {}

    def test_negative_wall_time(self):
        """Test that a negative wall time is rejected."""
        with pytest.raises(ValueError):
            RunRecord("x", "all", "cb", -1.0, Outcome.COMPLETE)

    def test_summarize_par2(self):
        """Test PAR-2, median and geometric mean per (task, config)."""
        records = [RunRecord("a", "t", "cb", 1.0, Outcome.COMPLETE),
                   RunRecord("b", "t", "cb", 4.0, Outcome.COMPLETE),
                   RunRecord("c", "t", "cb", 10.0, Outcome.TIMEOUT),
                   RunRecord("a", "t", "ncb", 2.0, Outcome.COMPLETE)]
        rows = {row.config: row for row in summarize(records, timeout=10.0)}
        assert rows["cb"].cells == 3
        assert rows["cb"].solved == 2
        assert rows["cb"].par2 == pytest.approx((1.0 + 4.0 + 20.0) / 3)
        assert rows["cb"].median_time == pytest.approx(4.0)
        assert rows["cb"].gmean_time == pytest.approx(40.0 ** (1 / 3))
        assert rows["ncb"].par2 == pytest.approx(2.0)


class TestSweepConfig:
    """Test sweep configuration loading."""

    def test_family_defaults(self):
        """Test that an empty config takes the family's task and timeout."""
        config = SweepConfig(family=BenchmarkFamily.UF200_860)
        assert config.tasks == ["topk:1"]
        assert config.timeout == DefaultValues.UF200_TIMEOUT

    def test_load_json(self, temp_dir):
        """Test loading a JSON sweep description."""
        path = os.path.join(temp_dir, "sweep.json")
        with open(path, "w") as f:
            json.dump({"sweep": {"family": "rnd3sat-1.5", "count": 4, "tasks": ["threshold", "topk:3"],
                                 "configs": "cb;ncb-nopruning", "timeout": 5}}, f)
        config = load_sweep_config(path)
        assert config.count == 4
        assert config.tasks == ["threshold", "topk:3"]
        assert config.configs == ["cb", "ncb-nopruning"]
        assert config.timeout == 5.0

    def test_load_csv(self, temp_dir):
        """Test loading key,value CSV rows."""
        path = os.path.join(temp_dir, "sweep.csv")
        with open(path, "w") as f:
            f.write("Parameter,Value\nFamily,uf200-860\nCount,2\nConfigs,cb;ncb\nWorkers,0\n")
        config = load_sweep_config(path)
        assert config.family is BenchmarkFamily.UF200_860
        assert config.count == 2
        assert config.configs == ["cb", "ncb"]
        assert config.workers == 0

    def test_load_without_extension(self, temp_dir):
        """Test that JSON content is detected without an extension."""
        path = os.path.join(temp_dir, "sweep")
        with open(path, "w") as f:
            json.dump({"count": 7}, f)
        assert load_sweep_config(path).count == 7


class TestSweep:
    """Test running sweeps."""

    def test_inline_sweep_order(self, random_instance):
        """Test that an inline sweep returns records in cell order."""
        instances = [BenchInstance(f"i{s}", *random_instance(10, seed=s)) for s in range(2)]
        records = run_sweep(instances, ["threshold", "topk:2"], ["cb", "ncb"], timeout=30, workers=0)
        assert [(r.instance_id, r.task, r.config) for r in records] == [
            (i, t, c) for i in ("i0", "i1") for t in ("threshold", "topk:2") for c in ("cb", "ncb")]
        assert all(r.solved for r in records)

    def test_configurations_agree(self, random_instance):
        """Test that every configuration reports the same model set for a cell."""
        instances = [BenchInstance(f"i{s}", *random_instance(12, seed=s)) for s in range(3)]
        records = run_sweep(instances, ["threshold"], ["cb", "ncb", "cb-nopruning", "ncb-nopruning"],
                            timeout=30, workers=0)
        for instance in instances:
            digests = {r.models_digest for r in records if r.instance_id == instance.instance_id}
            assert len(digests) == 1

    def test_worker_processes_cells(self, table1_instance, mocker):
        """Test the worker loop in-process, stopping at the sentinel."""
        # Setup
        mocker.patch("src.bench_harness.ml.configure_worker_logging")
        cell_queue, result_queue = multiprocessing.Queue(), multiprocessing.Queue()
        worker = SweepWorker(cell_queue, result_queue, multiprocessing.Queue())
        cell_queue.put(SweepCell(0, table1_instance, "threshold:0.05", "cb", 10))
        cell_queue.put(SweepCell(1, table1_instance, "topk:1", "ncb", 10))
        cell_queue.put(None)

        # Execute
        worker.run()

        # Verify
        results = dict(result_queue.get(timeout=5) for _ in range(2))
        assert results[0].model_count == 3
        assert results[1].topk_weights == pytest.approx([0.24])

    def test_parallel_sweep_matches_inline(self, random_instance):
        """Test that a worker-process sweep gives the same results as an inline one."""
        instances = [BenchInstance(f"i{s}", *random_instance(9, seed=s)) for s in range(3)]
        inline = run_sweep(instances, ["threshold"], ["cb", "ncb"], timeout=30, workers=0)
        parallel = run_sweep(instances, ["threshold"], ["cb", "ncb"], timeout=30, workers=2)
        assert [r.models_digest for r in parallel] == [r.models_digest for r in inline]
        assert [r.outcome for r in parallel] == [Outcome.COMPLETE] * 6
