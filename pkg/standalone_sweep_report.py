import argparse
import sys
from typing import Dict, List, Sequence, Tuple

from src.bench_harness import RunRecord, SummaryRow, read_records_csv, summarize
from src.constants import DefaultValues


def load_records(paths: Sequence[str]) -> List[RunRecord]:
    """Reads and concatenates one or more sweep CSV files."""
    records = []
    for path in paths:
        try:
            records.extend(read_records_csv(path))
        except (OSError, KeyError, ValueError) as e:
            print(f"Error reading file {path}: {e}", file=sys.stderr)
    return records


def disagreements(records: Sequence[RunRecord]) -> List[Tuple[str, str]]:
    """(instance, task) cells whose completed configurations report different model sets."""
    digests: Dict[Tuple[str, str], set] = {}
    for record in records:
        if record.solved and record.models_digest:
            digests.setdefault((record.instance_id, record.task), set()).add(record.models_digest)
    return sorted(key for key, found in digests.items() if len(found) > 1)


def format_table(rows: Sequence[SummaryRow]) -> List[str]:
    header = f"{'task':<20} {'config':<22} {'solved':>9} {'PAR-2':>10} {'median':>10} {'gmean':>10}"
    lines = [header, "-" * len(header)]
    for row in sorted(rows, key=lambda r: (r.task, r.par2)):
        lines.append(f"{row.task:<20} {row.config:<22} {f'{row.solved}/{row.cells}':>9} "
                     f"{row.par2:>10.3f} {row.median_time:>10.3f} {row.gmean_time:>10.3f}")
    return lines


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Print the PAR-2 table of one or more sweep result files")
    parser.add_argument("files", nargs="+")
    parser.add_argument("--timeout", type=float, default=DefaultValues.SWEEP_TIMEOUT,
                        help="Timeout the sweep ran with, in seconds")
    args = parser.parse_args(argv)

    records = load_records(args.files)
    if not records:
        print("No records found.", file=sys.stderr)
        return 1
    for line in format_table(summarize(records, args.timeout)):
        print(line)

    conflicts = disagreements(records)
    for instance_id, task in conflicts:
        print(f"Warning: configurations disagree on {instance_id} ({task})")
    return 1 if conflicts else 0


if __name__ == '__main__':
    sys.exit(main())
