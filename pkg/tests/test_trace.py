import csv

import numpy as np

from rlsopt.app.output import emit_trace, trace_filename, write_summary
from rlsopt.core.rls import SolverConfig, rls_run
from rlsopt.core.trace import TRACE_HEADER, CsvSink, MemorySink, TraceRecord, write_trace_csv
from rlsopt.experiments.fairness import warm_start_feasible


def test_header_only_for_empty_run(tmp_path):
    path = tmp_path / "t.csv"
    assert emit_trace([], path) == 0
    assert path.read_text() == ",".join(TRACE_HEADER) + "\n"


def test_missing_fstar_leaves_cell_empty():
    row = TraceRecord(3, 12, 40, 0.5, -0.1, None, 1, None).as_row()
    assert row == ["3", "12", "40", "0.5", "-0.1", "", "1", "", "iteration"]


def test_floats_read_back_exactly(tmp_path):
    value = 0.1 + 0.2
    path = tmp_path / "t.csv"
    write_trace_csv([TraceRecord(1, 1, 1, value, 1 / 3, 2 / 7, 0, 4)], path)
    with path.open() as f:
        rows = list(csv.DictReader(f))
    assert float(rows[0]["f"]) == value
    assert float(rows[0]["g"]) == 1 / 3
    assert float(rows[0]["p_at_fstar"]) == 2 / 7


def test_ring_trace_has_fstar_column(ring1, tmp_path):
    report = rls_run(ring1, np.zeros(2), -11.0, SolverConfig(epsilon=1.0, budget=780))
    path = tmp_path / "ring.csv"
    emit_trace(report.trace, path)
    with path.open() as f:
        rows = list(csv.DictReader(f))
    assert sum(row["event"] == "iteration" for row in rows) == 10
    assert len(rows) == 10 + report.restarts
    assert all(row["p_at_fstar"] != "" for row in rows)


def test_fairness_trace_without_estimate(fairness_small):
    x_ini = warm_start_feasible(fairness_small)
    report = rls_run(fairness_small, x_ini, 0.0, SolverConfig(epsilon=0.05, budget=200))
    assert all(r.p_at_fstar is None for r in report.trace)


def test_identical_runs_write_identical_files(ring1, tmp_path):
    paths = []
    for name in ("a.csv", "b.csv"):
        sink = MemorySink()
        rls_run(ring1, np.zeros(2), -11.0, SolverConfig(epsilon=0.5, budget=1000), sink=sink)
        emit_trace(sink, tmp_path / name)
        paths.append(tmp_path / name)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_csv_sink_streams(tmp_path):
    with CsvSink.open(tmp_path / "sub" / "s.csv") as sink:
        sink.write(TraceRecord(1, 2, 3, 1.0, 0.0, 0.0, 0, None))
        assert sink.count == 1
    assert (tmp_path / "sub" / "s.csv").read_text().count("\n") == 2


def test_trace_filename():
    assert trace_filename(1.0, 0.0625) == "trace_rho1_eps0.0625.csv"


def test_write_summary(tmp_path):
    path = tmp_path / "out" / "s.json"
    write_summary({"b": 1, "a": [1.5]}, path)
    assert path.read_text().startswith('{\n  "a"')
