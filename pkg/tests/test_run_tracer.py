"""Run tracer: phases, JSONL persistence and summaries."""

import io
import json

import pytest

from run_tracer import RunTracer


def test_phase_entries_carry_duration():
    stream = io.StringIO()
    tracer = RunTracer("price", stream=stream)
    tracer.start_phase("LOAD_MODEL", input_file="heston.json")
    tracer.end_phase("LOAD_MODEL", metrics={"model_hash": "abc"})
    started, finished = tracer.entries
    assert started["status"] == "started" and started["input"] == "heston.json"
    assert finished["metrics"]["model_hash"] == "abc"
    assert finished["metrics"]["duration_ms"] >= 0
    assert "[LOAD_MODEL] started" in stream.getvalue()


def test_unknown_phase():
    with pytest.raises(ValueError):
        RunTracer("price", quiet=True).log("RENDER", "started")


def test_quiet_prints_nothing(capsys):
    tracer = RunTracer("moments", quiet=True)
    tracer.done()
    assert capsys.readouterr().err == ""


def test_fail_closes_open_phase():
    tracer = RunTracer("price", quiet=True)
    tracer.start_phase("COMPUTE")
    tracer.fail("integrand stalled", code="E-NUMERIC")
    phases = [(e["phase"], e["status"]) for e in tracer.entries]
    assert phases == [("COMPUTE", "started"), ("COMPUTE", "failed"), ("FAILED", "failed")]
    assert tracer.current_phase is None
    summary = tracer.get_summary()
    assert summary["failed"]
    assert summary["errors"] == ["integrand stalled", "integrand stalled"]


def test_save_appends_jsonl(tmp_path):
    trace = tmp_path / "logs" / "runs.jsonl"
    first = RunTracer("simulate", trace_file=str(trace), quiet=True)
    first.start_phase("COMPUTE")
    first.end_phase("COMPUTE")
    first.done()
    first.save()
    assert first.entries == []

    second = RunTracer("simulate", trace_file=str(trace), quiet=True)
    second.done()
    second.save()

    lines = [json.loads(line) for line in trace.read_text(encoding="utf-8").splitlines()]
    assert len(lines) == 4
    assert lines[-1]["trace_id"] == second.trace_id

    summary = first.get_summary()
    assert summary["total_entries"] == 3
    assert summary["phases_completed"] == ["COMPUTE", "DONE"]
    assert not summary["failed"]


def test_save_without_file_is_noop():
    tracer = RunTracer("wings", quiet=True)
    tracer.done()
    tracer.save()
    assert len(tracer.entries) == 1
