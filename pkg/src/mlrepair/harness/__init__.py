"""Bug corpus, statistics, benchmarking and the command line."""

from .bench import BenchConfig, BenchRow, RunOptions, bench, check_result, run_strategy, table_json
from .corpus import BugEntry, BugMeta, CorpusError, load_bug, load_corpus, percentage, stats

__all__ = [
    "BenchConfig",
    "BenchRow",
    "BugEntry",
    "BugMeta",
    "CorpusError",
    "RunOptions",
    "bench",
    "check_result",
    "load_bug",
    "load_corpus",
    "percentage",
    "run_strategy",
    "stats",
    "table_json",
]
