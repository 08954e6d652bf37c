# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
#
# Based on Ag-ppt-create by aktsmm (https://github.com/aktsmm/Ag-ppt-create)
# License: CC BY-NC-SA 4.0
# =============================================================================
"""
Run tracer for CLI invocations.

Each CLI run goes through the phases LOAD_MODEL, VALIDATE, COMPUTE, WRITE and
ends in DONE or FAILED. Entries carry durations, metrics and error text; they
are appended to a JSONL file when a trace path is given. A one-line status per
entry goes to stderr so stdout stays reserved for results.

Usage:
    from run_tracer import RunTracer

    tracer = RunTracer("price", trace_file="runs.jsonl")
    tracer.start_phase("COMPUTE")
    # ... do work ...
    tracer.end_phase("COMPUTE", metrics={"panels": 4})
    tracer.save()

Trace file format (JSONL):
    {"trace_id": "...", "command": "price", "phase": "LOAD_MODEL", "status": "started", ...}
"""

import json
import sys
import uuid
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO


class RunTracer:
    """
    Trace CLI execution for post-mortem analysis.
    """

    PHASES = [
        "LOAD_MODEL",
        "VALIDATE",
        "COMPUTE",
        "WRITE",
        "DONE",
        "FAILED",
    ]

    STATUS_ICONS = {
        "started": "🚀",
        "success": "✅",
        "failed": "❌",
        "warning": "⚠️",
    }

    def __init__(self, command: str, trace_file: Optional[str] = None,
                 stream: Optional[TextIO] = None, quiet: bool = False):
        """
        Args:
            command: Subcommand being run (price, simulate, ...)
            trace_file: JSONL file to append entries to; None keeps them in memory
            stream: Where status lines go (stderr by default)
            quiet: Suppress status lines
        """
        self.command = command
        self.trace_id = f"{command}_{uuid.uuid4().hex[:8]}"
        self.trace_file = Path(trace_file) if trace_file else None
        self.stream = stream
        self.quiet = quiet
        self.entries: List[Dict[str, Any]] = []
        self.current_phase: Optional[str] = None
        self.phase_start_time: Optional[datetime] = None

    def log(self, phase: str, status: str, message: str = "",
            metrics: Optional[Dict[str, Any]] = None,
            input_file: str = "", output_file: str = "",
            error: str = "") -> Dict[str, Any]:
        """Record a trace entry and print its status line."""
        if phase not in self.PHASES:
            raise ValueError(f"Unknown phase: {phase}")
        entry = {
            "trace_id": self.trace_id,
            "command": self.command,
            "timestamp": datetime.now().isoformat(),
            "phase": phase,
            "status": status,
            "message": message,
        }
        if input_file:
            entry["input"] = input_file
        if output_file:
            entry["output"] = output_file
        if metrics:
            entry["metrics"] = metrics
        if error:
            entry["error"] = error

        self.entries.append(entry)

        if not self.quiet:
            icon = self.STATUS_ICONS.get(status, "ℹ️")
            print(f"{icon} [{phase}] {status}: {message}", file=self.stream or sys.stderr)
        return entry

    def start_phase(self, phase: str, input_file: str = "", message: str = "") -> None:
        self.current_phase = phase
        self.phase_start_time = datetime.now()
        self.log(phase, "started", message or f"Starting {phase}", input_file=input_file)

    def end_phase(self, phase: str, status: str = "success",
                  output_file: str = "", message: str = "",
                  metrics: Optional[Dict[str, Any]] = None,
                  error: str = "") -> None:
        duration_ms = 0
        if self.phase_start_time:
            duration_ms = int((datetime.now() - self.phase_start_time).total_seconds() * 1000)

        final_metrics = dict(metrics or {})
        final_metrics["duration_ms"] = duration_ms

        self.log(
            phase, status,
            message or f"{phase} completed",
            metrics=final_metrics,
            output_file=output_file,
            error=error,
        )
        self.current_phase = None
        self.phase_start_time = None

    def fail(self, error: str, code: str = "") -> None:
        """Close the open phase as failed and record FAILED."""
        if self.current_phase:
            self.end_phase(self.current_phase, status="failed", message="aborted", error=error)
        self.log("FAILED", "failed", code or "run failed", error=error)

    def done(self, metrics: Optional[Dict[str, Any]] = None) -> None:
        self.log("DONE", "success", f"{self.command} finished", metrics=metrics)

    def save(self) -> None:
        """Append entries to the JSONL trace file, if one is configured."""
        if self.trace_file is None:
            return
        self.trace_file.parent.mkdir(parents=True, exist_ok=True)
        with open(self.trace_file, "a", encoding="utf-8") as f:
            for entry in self.entries:
                f.write(json.dumps(entry, ensure_ascii=False) + "\n")
        self.entries = []

    def get_summary(self) -> Dict[str, Any]:
        """Summary over the entries of this run (saved and unsaved)."""
        all_entries = []
        if self.trace_file is not None and self.trace_file.exists():
            with open(self.trace_file, "r", encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        entry = json.loads(line)
                        if entry.get("trace_id") == self.trace_id:
                            all_entries.append(entry)
        all_entries.extend(self.entries)

        phases_completed = []
        total_duration = 0
        errors = []
        for entry in all_entries:
            if entry.get("status") == "success" and entry["phase"] not in phases_completed:
                phases_completed.append(entry["phase"])
            total_duration += entry.get("metrics", {}).get("duration_ms", 0)
            if entry.get("error"):
                errors.append(entry["error"])

        return {
            "trace_id": self.trace_id,
            "command": self.command,
            "phases_completed": phases_completed,
            "total_duration_ms": total_duration,
            "total_entries": len(all_entries),
            "errors": errors,
            "failed": any(e.get("phase") == "FAILED" for e in all_entries),
        }
