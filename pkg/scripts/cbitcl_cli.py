# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
# =============================================================================
"""
Command-line front end.

Subcommands:
    price              Fourier call prices (optionally with a Monte Carlo check)
    simulate           paths of (X, Y, Z) as CSV
    moments            χ, lifetime, moment domain and long-run limit
    transform-measure  the model after an Esscher-type change of probability
    wings              critical moments, Lee wing slopes, implied-vol smile CSV
    char-fn            characteristic function of log S or of (X, Y, Z)

Usage:
    python scripts/cbitcl_cli.py price --model workspace/heston.example.json --strike 0.9 1.0 --maturity 1
    python scripts/cbitcl_cli.py moments --model workspace/alpha_cir.example.json --u3 1.2
    python scripts/cbitcl_cli.py --seed 7 --paths 20000 simulate --model m.json --maturity 1 -o paths.csv

Every result echoes the resolved model and its sha256 hash. Errors go to
stderr as "<code>: <message>" with code E-DOMAIN, E-NUMERIC or E-CONFIG.

Exit codes:
    0: success
    1: domain or validation error (E-DOMAIN, E-CONFIG)
    2: numerical failure (E-NUMERIC)
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from errors import CbitclError, ConfigError, DomainError
from measure import EsscherSpec, esscher_transform
from mechanisms import CBITCLModel
from model_config import SCHEMA_VERSION, dumps_model, model_from_document, model_hash, model_to_dict, read_model_file
from moments import chi, lifetime, moment_domain_full, wing_slopes, xi_asymptotic
from pricing import (
    DEFAULT_DAMPING,
    LogPriceSpec,
    QuadConfig,
    char_fn_logS,
    implied_smile,
    implied_vol,
    mc_call_price,
    price_call,
)
from riccati import SolverConfig, char_fn_joint, transform
from run_tracer import RunTracer
from simulate import SimConfig, simulate_lamperti, simulate_paths

logger = logging.getLogger(__name__)

TOOL_NAME = "cbitcl-toolkit"
TOOL_VERSION = "1.0.0"
DEFAULT_STEP = 2.0 ** -8
DEFAULT_PATHS = 10_000


class _Parser(argparse.ArgumentParser):
    """Usage errors become E-CONFIG instead of argparse's exit status 2."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}", location="argv")


# =============================================================================
# Output helpers
# =============================================================================

def to_jsonable(value: Any) -> Any:
    """Non-finite floats become "inf"/"-inf"/"nan"; complex numbers become [re, im]."""
    if isinstance(value, dict):
        return {k: to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _provenance(model: CBITCLModel) -> Dict[str, Any]:
    return {"tool": TOOL_NAME, "version": TOOL_VERSION, "schema_version": SCHEMA_VERSION,
            "model_hash": model_hash(model)}


def _envelope(command: str, model: CBITCLModel, name: Optional[str], body: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "command": command,
        "model": model_to_dict(model, name),
        "model_hash": model_hash(model),
        **body,
        "_provenance": _provenance(model),
    }


def _dump_json(payload: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _write_text(text: str, output: Optional[str], stdout) -> str:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return str(path)
    stdout.write(text)
    return "<stdout>"


def _solver_config(args) -> Optional[SolverConfig]:
    if args.tol is None:
        return None
    return SolverConfig(rtol=args.tol, atol=args.tol * 1e-2)


def _quad_config(args) -> QuadConfig:
    if args.tol is None:
        return QuadConfig()
    return QuadConfig(epsrel=args.tol)


def _sim_config(args, horizon: float) -> SimConfig:
    return SimConfig(
        horizon=horizon,
        step=args.step,
        paths=args.paths,
        seed=args.seed,
        eps=args.eps,
        workers=args.workers,
        record_stride=args.record_stride,
    )


# =============================================================================
# Subcommands
# =============================================================================
# Each handler returns (text to write, metrics for the trace).

def cmd_price(args, model: CBITCLModel, name: Optional[str]) -> Tuple[str, Dict[str, Any]]:
    spec = LogPriceSpec(model, args.zeta, args.lam)
    quad = _quad_config(args)
    cfg = _solver_config(args)
    paths = None
    if args.mc:
        paths = simulate_paths(model, _sim_config(args, args.maturity))

    results = []
    for K in args.strike:
        priced = price_call(spec, args.maturity, K, args.damping, quad, cfg)
        row: Dict[str, Any] = {"strike": K, **priced.to_dict()}
        try:
            row["implied_vol"] = implied_vol(priced.price, K, args.maturity)
        except DomainError:
            row["implied_vol"] = None
        if paths is not None:
            mc_price, stderr = mc_call_price(spec, paths, K)
            row["mc_price"] = mc_price
            row["mc_stderr"] = stderr
        results.append(row)

    body = {
        "maturity": args.maturity,
        "zeta": args.zeta,
        "lambda": args.lam,
        "results": results,
    }
    if paths is not None:
        body["simulation"] = paths.config
    return _dump_json(_envelope("price", model, name, body)), {"strikes": len(results)}


def cmd_simulate(args, model: CBITCLModel, name: Optional[str]) -> Tuple[str, Dict[str, Any]]:
    cfg = _sim_config(args, args.maturity)
    runner = simulate_lamperti if args.scheme == "lamperti" else simulate_paths
    paths = runner(model, cfg)
    paths.config = {
        **paths.config,
        "model": json.dumps(model_to_dict(model, name), sort_keys=True, separators=(",", ":")),
        "model_hash": model_hash(model),
    }
    return paths.to_csv_string(), {"paths": paths.n_paths, "steps": cfg.n_steps}


def cmd_moments(args, model: CBITCLModel, name: Optional[str]) -> Tuple[str, Dict[str, Any]]:
    u1, u2, u3 = args.u1, args.u2, args.u3
    life = lifetime(model, u1, u2, u3)
    body: Dict[str, Any] = {
        "arguments": {"u1": u1, "u2": u2, "u3": u3},
        "domain": model.domain_info().to_dict(),
        "chi": chi(model, u2, u3),
        "lifetime": life.to_dict(),
        "moment_domain_full": moment_domain_full(model, u2, u3),
    }
    try:
        body["asymptotic"] = xi_asymptotic(model, u3).to_dict()
    except DomainError as e:
        body["asymptotic"] = {"unavailable": str(e)}
    if args.maturity is not None:
        if args.maturity < life.value:
            body["transform"] = {
                "maturity": args.maturity,
                "value": transform(model, args.maturity, u1, u2, u3, cfg=_solver_config(args)),
            }
        else:
            body["transform"] = {"maturity": args.maturity, "value": math.inf}
    return _dump_json(_envelope("moments", model, name, body)), {"lifetime": to_jsonable(life.value)}


def cmd_transform_measure(args, model: CBITCLModel, name: Optional[str]) -> Tuple[str, Dict[str, Any]]:
    tilted = esscher_transform(model, EsscherSpec(model, args.zeta, args.lam))
    return dumps_model(tilted, name), {"model_hash": model_hash(tilted)}


def cmd_wings(args, model: CBITCLModel, name: Optional[str]) -> Tuple[str, Dict[str, Any]]:
    slopes = wing_slopes(model, args.zeta, args.lam, args.maturity)
    body: Dict[str, Any] = {
        "maturity": args.maturity,
        "zeta": args.zeta,
        "lambda": args.lam,
        "wings": slopes.to_dict(),
    }
    if args.smile:
        spec = LogPriceSpec(model, args.zeta, args.lam)
        ks = np.linspace(args.k_min, args.k_max, args.k_count)
        rows = implied_smile(spec, args.maturity, [float(k) for k in ks], args.damping, _quad_config(args))
        buf = io.StringIO()
        buf.write(f"# model_hash: {model_hash(model)}\n")
        buf.write(f"# maturity: {args.maturity!r}\n")
        buf.write(f"# lee_left: {slopes.left!r}\n")
        buf.write(f"# lee_right: {slopes.right!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "K", "price", "iv", "slope"])
        for row in rows:
            writer.writerow([repr(float(row[key])) for key in ("k", "K", "price", "iv", "slope")])
        _write_text(buf.getvalue(), args.smile, sys.stdout)
        body["smile"] = args.smile
    return _dump_json(_envelope("wings", model, name, body)), {"p_plus": to_jsonable(slopes.p_plus)}


def cmd_char_fn(args, model: CBITCLModel, name: Optional[str]) -> Tuple[str, Dict[str, Any]]:
    cfg = _solver_config(args)
    body: Dict[str, Any] = {"maturity": args.maturity}
    if args.joint is not None:
        w1, w2, w3 = (1j * w for w in args.joint)
        body["joint"] = {
            "imaginary_parts": args.joint,
            "value": char_fn_joint(model, args.maturity, w1, w2, w3, cfg),
        }
    else:
        spec = LogPriceSpec(model, args.zeta, args.lam)
        body["zeta"] = args.zeta
        body["lambda"] = args.lam
        body["log_price"] = [
            {"u": u, "value": char_fn_logS(spec, args.maturity, u, cfg)} for u in args.u
        ]
    return _dump_json(_envelope("char-fn", model, name, body)), {}


COMMANDS: Dict[str, Callable] = {
    "price": cmd_price,
    "simulate": cmd_simulate,
    "moments": cmd_moments,
    "transform-measure": cmd_transform_measure,
    "wings": cmd_wings,
    "char-fn": cmd_char_fn,
}


# =============================================================================
# Argument parsing
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Master seed (default 0)")
    common.add_argument("--paths", type=int, default=argparse.SUPPRESS, help=f"Monte Carlo paths (default {DEFAULT_PATHS})")
    common.add_argument("--step", type=float, default=argparse.SUPPRESS, help="Time step (default 2^-8)")
    common.add_argument("--damping", type=float, default=argparse.SUPPRESS, help="Fourier damping in (-1, 0)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="Relative tolerance of solvers")
    common.add_argument("--trace", default=argparse.SUPPRESS, help="Append a JSONL run trace to this file")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="Simulation threads")
    common.add_argument("--quiet", "-q", action="store_true", default=argparse.SUPPRESS, help="No status lines")

    parser = _Parser(
        prog="cbitcl_cli.py",
        description="CBI-time-changed Lévy processes: pricing, simulation and moment diagnostics",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("--model", "-m", required=True, help="Model JSON file")
        p.add_argument("--output", "-o", help="Output file (default stdout)")
        return p

    def add_tilt(p: argparse.ArgumentParser, lam_default: float) -> None:
        p.add_argument("--zeta", type=float, default=0.0, help="Weight of X − X0 in log S (default 0)")
        p.add_argument("--lambda", dest="lam", type=float, default=lam_default,
                       help=f"Weight of Z in log S (default {lam_default:g})")

    p = add("price", "European call prices")
    p.add_argument("--strike", "-K", type=float, nargs="+", required=True)
    p.add_argument("--maturity", "-T", type=float, required=True)
    p.add_argument("--mc", action="store_true", help="Add Monte Carlo prices with standard errors")
    p.add_argument("--eps", type=float, default=1e-3, help="Small-jump threshold for --mc")
    p.add_argument("--record-stride", type=int, default=1)
    add_tilt(p, 1.0)

    p = add("simulate", "Simulate paths of (X, Y, Z) to CSV")
    p.add_argument("--maturity", "-T", type=float, required=True, help="Horizon")
    p.add_argument("--scheme", choices=["euler", "lamperti"], default="euler")
    p.add_argument("--eps", type=float, default=1e-3, help="Small-jump threshold")
    p.add_argument("--record-stride", type=int, default=1)

    p = add("moments", "Lifetime and moment diagnostics")
    p.add_argument("--u1", type=float, default=0.0)
    p.add_argument("--u2", type=float, default=0.0)
    p.add_argument("--u3", type=float, default=0.0)
    p.add_argument("--maturity", "-T", type=float, help="Also evaluate E[exp(u1 X + u2 Y + u3 Z)] at T")

    p = add("transform-measure", "Model under an Esscher-type change of probability")
    add_tilt(p, 0.0)

    p = add("wings", "Critical moments, Lee slopes and implied-vol smile")
    p.add_argument("--maturity", "-T", type=float, required=True)
    p.add_argument("--smile", help="Write an implied-vol smile CSV to this file")
    p.add_argument("--k-min", type=float, default=-4.0)
    p.add_argument("--k-max", type=float, default=4.0)
    p.add_argument("--k-count", type=int, default=33)
    add_tilt(p, 1.0)

    p = add("char-fn", "Characteristic functions")
    p.add_argument("--maturity", "-T", type=float, required=True)
    p.add_argument("--u", type=float, nargs="+", default=[1.0], help="Arguments of φ(u) = E[exp(iu log S)]")
    p.add_argument("--joint", type=float, nargs=3, metavar=("W1", "W2", "W3"),
                   help="Imaginary parts of (w1, w2, w3) for E[exp(w1 X + w2 Y + w3 Z)]")
    add_tilt(p, 1.0)

    return parser


def parse_args(argv: Optional[List[str]]) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    defaults = {
        "seed": 0,
        "paths": DEFAULT_PATHS,
        "step": DEFAULT_STEP,
        "damping": DEFAULT_DAMPING,
        "tol": None,
        "trace": None,
        "workers": None,
        "quiet": False,
    }
    for key, value in defaults.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    return args


# =============================================================================
# Entry point
# =============================================================================

def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    """Parse argv, run one subcommand and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except ConfigError as e:
        print(f"{e.code}: {e}", file=stderr)
        return e.exit_status

    tracer = RunTracer(args.command, trace_file=args.trace, stream=stderr, quiet=args.quiet)
    try:
        tracer.start_phase("LOAD_MODEL", input_file=args.model)
        data = read_model_file(args.model)
        name = data.get("name")
        model, report = model_from_document(data)
        tracer.end_phase("LOAD_MODEL", metrics={"model_hash": model_hash(model)})

        tracer.start_phase("VALIDATE")
        for warn in report.warnings:
            tracer.log("VALIDATE", "warning", f"{warn.path}: {warn.message}")
        tracer.end_phase("VALIDATE", metrics={"status": report.status})

        tracer.start_phase("COMPUTE")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            text, metrics = COMMANDS[args.command](args, model, name)
        for w in caught:
            tracer.log("COMPUTE", "warning", f"{w.category.__name__}: {w.message}")
        tracer.end_phase("COMPUTE", metrics=metrics)

        tracer.start_phase("WRITE")
        target = _write_text(text, args.output, stdout)
        tracer.end_phase("WRITE", output_file=target)
        tracer.done()
        return 0
    except CbitclError as e:
        print(f"{e.code}: {e}", file=stderr)
        tracer.fail(str(e), e.code)
        return e.exit_status
    except (OSError, json.JSONDecodeError) as e:
        err = ConfigError(str(e), location="file")
        print(f"{err.code}: {err}", file=stderr)
        tracer.fail(str(e), err.code)
        return err.exit_status
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
        print(f"E-NUMERIC: {type(e).__name__}: {e}", file=stderr)
        tracer.fail(str(e), "E-NUMERIC")
        return 2
    finally:
        tracer.save()


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    # Fix Windows console encoding issues
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", errors="replace")
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding="utf-8", errors="replace")
    main()
