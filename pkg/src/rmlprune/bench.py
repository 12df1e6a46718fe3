"""Benchmark harness: prune, materialize and query, with timings.

For every query the harness prunes the mapping, materializes the surviving
triples-map expressions, evaluates the query over the pruned output, and
checks that the answers equal those over the full, unpruned output.  Each
stage is run once as a warm-up and then *repetitions* times; the reported
milliseconds are the average of the measured runs (monotonic clock).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .algebra import RmlMappingExpr, SourceAssignment, materialize
from .pruning import FullyPruned, prune
from .rdf import Bgp, RdfGraph, eval_bgp
from .sparql import SelectQuery, collect_triple_patterns, flatten_bgp

BENCH_HEADER = "query,trmaps_before,trmaps_after,prune_ms,materialize_ms,triples,query_ms,equal"


@dataclass
class BenchRow:
    query: str
    trmaps_before: int
    trmaps_after: int
    prune_ms: float
    materialize_ms: float
    triples: int
    query_ms: float
    equal: str  # "PASS" | "FAIL" | "n/a"
    result_rows: int


def _timed(fn: Callable[[], object], repetitions: int) -> tuple[object, float]:
    """Average wall-clock ms over *repetitions* runs after one warm-up."""
    result = fn()
    total = 0.0
    for _ in range(repetitions):
        t0 = time.monotonic()
        result = fn()
        total += time.monotonic() - t0
    return result, total * 1000.0 / repetitions


def run_benchmark(
    mapping: RmlMappingExpr,
    queries: Sequence[tuple[str, SelectQuery]],
    sigma: SourceAssignment,
    repetitions: int = 4,
    assume_nonempty: bool = True,
) -> tuple[list[BenchRow], RdfGraph]:
    """Benchmark every query; returns the rows and the full output graph."""
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    full_graph = materialize(mapping, sigma)
    rows: list[BenchRow] = []
    for name, query in queries:
        patterns = collect_triple_patterns(query.where)
        pruned, prune_ms = _timed(
            lambda: prune(patterns, mapping, assume_nonempty), repetitions
        )
        if isinstance(pruned, FullyPruned):
            after = 0
            graph, mat_ms = RdfGraph(frozenset()), 0.0
        else:
            after = len(pruned.trmaps)
            graph, mat_ms = _timed(lambda: materialize(pruned, sigma), repetitions)

        flat = flatten_bgp(query)
        if flat:
            bgp = Bgp(tuple(flat))
            answers, query_ms = _timed(lambda: eval_bgp(bgp, graph), repetitions)
            full_answers = eval_bgp(bgp, full_graph)
            equal = "PASS" if answers == full_answers else "FAIL"
            result_rows = len(answers)
        else:
            query_ms = 0.0
            equal = "n/a"
            result_rows = 0
        rows.append(
            BenchRow(
                query=name,
                trmaps_before=len(mapping.trmaps),
                trmaps_after=after,
                prune_ms=prune_ms,
                materialize_ms=mat_ms,
                triples=len(graph.triples),
                query_ms=query_ms,
                equal=equal,
                result_rows=result_rows,
            )
        )
    return rows, full_graph


def format_csv(rows: Sequence[BenchRow]) -> str:
    lines = [BENCH_HEADER]
    for r in rows:
        lines.append(
            f"{r.query},{r.trmaps_before},{r.trmaps_after},{r.prune_ms:.2f},"
            f"{r.materialize_ms:.2f},{r.triples},{r.query_ms:.2f},{r.equal}"
        )
    return "\n".join(lines) + "\n"
