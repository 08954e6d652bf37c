# -*- coding: utf-8 -*-
# =============================================================================
# cbitcl-toolkit - CBI-time-changed Lévy processes: transforms, moments,
# measure changes, simulation and Fourier pricing
#
# Based on Ag-ppt-create by aktsmm (https://github.com/aktsmm/Ag-ppt-create)
# License: CC BY-NC-SA 4.0
# =============================================================================
"""
Load, validate and write CBITCL model files.

Model files are JSON documents checked in two stages:
1. JSON Schema compliance (workspace/model.schema.json) and schema version
2. Semantic checks (family parameter ranges per role, drift conventions)

Loading, dumping and reloading a model is exact.

Usage:
    python scripts/model_config.py <model.json> [--json] [--strict]

Exit codes:
    0: PASS (no errors)
    1: FAIL (fatal errors found)
    2: WARN (warnings only, can continue)
"""

import argparse
import hashlib
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from jsonschema import Draft7Validator

from errors import CbitclError, ConfigError
from measure import martingale_drift
from mechanisms import (
    CGMY,
    BranchingMechanism,
    CBITCLModel,
    ImmigrationMechanism,
    LevyMeasureSpec,
    NoiseExponent,
    StablePositive,
    TemperedStablePositive,
)

SCHEMA_PATH = Path(__file__).parent.parent / "workspace" / "model.schema.json"
SCHEMA_VERSION = "1.0.0"
MARTINGALE_DRIFT = "martingale"
MODEL_SECTIONS = ("schema_version", "name", "initial_state", "immigration", "branching", "noise", "correlation")


@dataclass(frozen=True)
class Finding:
    """One problem in a model file, located by its dotted path (e.g. "branching.pi.alpha")."""

    kind: str
    path: str
    message: str
    hint: Optional[str] = None

    @property
    def section(self) -> str:
        return self.path.split(".", 1)[0]


@dataclass
class ModelReport:
    """Fatal errors and regime warnings collected while reading one model file."""

    source: Optional[str] = None
    errors: List[Finding] = field(default_factory=list)
    warnings: List[Finding] = field(default_factory=list)

    def error(self, kind: str, path: str, message: str, hint: Optional[str] = None) -> None:
        self.errors.append(Finding(kind, path, message, hint))

    def warn(self, kind: str, path: str, message: str, hint: Optional[str] = None) -> None:
        self.warnings.append(Finding(kind, path, message, hint))

    @property
    def status(self) -> str:
        if self.errors:
            return "FAIL"
        if self.warnings:
            return "WARN"
        return "PASS"

    def sections(self) -> List[str]:
        """Model-file sections with at least one finding, in file order."""
        seen = {f.section for f in self.errors + self.warnings}
        order = [s for s in MODEL_SECTIONS if s in seen]
        return order + sorted(seen.difference(order))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.source,
            "status": self.status,
            "errors": [asdict(f) for f in self.errors],
            "warnings": [asdict(f) for f in self.warnings],
        }


def load_schema() -> Dict[str, Any]:
    """The model-file JSON schema."""
    if not SCHEMA_PATH.exists():
        raise ConfigError(f"Schema not found: {SCHEMA_PATH}", location="schema")
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def schema_version_tuple(version: Any) -> Optional[Tuple[int, int, int]]:
    """(major, minor, patch) of a "MAJOR.MINOR.PATCH" string; None when malformed."""
    if not isinstance(version, str):
        return None
    parts = version.split(".")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        return None
    return int(parts[0]), int(parts[1]), int(parts[2])


def check_schema_version(model_version: Any, supported: str, report: ModelReport) -> bool:
    """Whether a model file written for `model_version` can be read by this toolkit.

    A different major version, or a malformed one, is fatal. A newer minor
    version only warns: fields it introduced are not read.
    """
    found = schema_version_tuple(model_version)
    ours = schema_version_tuple(supported)
    if found is None:
        report.error("version", "schema_version", f"schema_version {model_version!r} is not MAJOR.MINOR.PATCH")
        return False
    if found[0] != ours[0]:
        report.error(
            "version",
            "schema_version",
            f"model file targets schema {model_version}, this toolkit reads {supported}",
            f"Rewrite the model file for schema {ours[0]}.x",
        )
        return False
    if found[1] > ours[1]:
        report.warn(
            "version",
            "schema_version",
            f"model file targets schema {model_version}, newer than {supported}",
            "Fields added after this version are not read",
        )
    return True


def validate_schema(data: Dict[str, Any], report: ModelReport) -> None:
    """Schema version and JSON Schema structure of a parsed model file."""
    schema = load_schema()
    check_schema_version(data.get("schema_version", SCHEMA_VERSION), schema.get("version", SCHEMA_VERSION), report)
    for error in Draft7Validator(schema).iter_errors(data):
        path = ".".join(str(p) for p in error.absolute_path) or "root"
        report.error("schema", path, error.message, f"See {SCHEMA_PATH.name}")


# =============================================================================
# dict -> model
# =============================================================================

def _measure_from_dict(spec: Optional[Dict[str, Any]], location: str) -> LevyMeasureSpec:
    if spec is None:
        return None
    family = spec.get("family")
    try:
        if family == "stable":
            return StablePositive(spec["alpha"], spec.get("eta", 1.0), spec.get("c_alpha"))
        if family == "tempered_stable":
            return TemperedStablePositive(spec["alpha"], spec["theta"], spec.get("c_alpha"))
        if family == "cgmy":
            return CGMY(spec.get("c"), spec["g"], spec["m"], spec["y"])
    except KeyError as e:
        raise ConfigError(f"{location}: missing key {e.args[0]!r}", location=f"{location}.{e.args[0]}") from e
    except ConfigError as e:
        raise ConfigError(f"{location}: {e}", location=f"{location}.{e.location}" if e.location else location) from e
    raise ConfigError(f"{location}: unknown family {family!r}", location=f"{location}.family")


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = data.get(name)
    if not isinstance(section, dict):
        raise ConfigError(f"missing section {name!r}", location=name)
    return section


def _number(section: Dict[str, Any], key: str, location: str) -> float:
    if key not in section:
        raise ConfigError(f"{location}: missing key {key!r}", location=f"{location}.{key}")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{location}.{key}: expected a number, got {value!r}", location=f"{location}.{key}")
    return float(value)


def model_from_dict(data: Dict[str, Any]) -> CBITCLModel:
    """Build a model from a parsed model file.

    Raises:
        ConfigError: naming the section and key at fault
    """
    init = _section(data, "initial_state")
    im = _section(data, "immigration")
    br = _section(data, "branching")
    no = _section(data, "noise")
    corr = _section(data, "correlation")

    immigration = ImmigrationMechanism(
        _number(im, "beta", "immigration"), _measure_from_dict(im.get("nu"), "immigration.nu")
    )
    branching = BranchingMechanism(
        _number(br, "b", "branching"),
        _number(br, "sigma", "branching"),
        _measure_from_dict(br.get("pi"), "branching.pi"),
    )
    gamma = _measure_from_dict(no.get("gamma"), "noise.gamma")
    sigma_z = _number(no, "sigma", "noise")
    if no.get("b") == MARTINGALE_DRIFT:
        try:
            b_z = martingale_drift(NoiseExponent(0.0, sigma_z, gamma))
        except CbitclError as e:
            raise ConfigError(f"noise.b: {e}", location="noise.b") from e
    else:
        b_z = _number(no, "b", "noise")
    noise = NoiseExponent(b_z, sigma_z, gamma)

    return CBITCLModel(
        x0=_number(init, "x0", "initial_state"),
        immigration=immigration,
        branching=branching,
        noise=noise,
        rho=_number(corr, "rho", "correlation"),
    )


# =============================================================================
# model -> dict
# =============================================================================

def _measure_to_dict(spec: LevyMeasureSpec) -> Optional[Dict[str, Any]]:
    if spec is None:
        return None
    if isinstance(spec, StablePositive):
        return {"family": "stable", "alpha": spec.alpha, "eta": spec.eta, "c_alpha": spec.c_alpha}
    if isinstance(spec, TemperedStablePositive):
        return {"family": "tempered_stable", "alpha": spec.alpha, "theta": spec.theta, "c_alpha": spec.c_alpha}
    return {"family": "cgmy", "c": spec.c, "g": spec.g, "m": spec.m, "y": spec.y}


def model_to_dict(model: CBITCLModel, name: Optional[str] = None) -> Dict[str, Any]:
    """Model file contents for `model`; every constant is written explicitly."""
    data: Dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if name:
        data["name"] = name
    data.update({
        "initial_state": {"x0": model.x0},
        "immigration": {"beta": model.immigration.beta, "nu": _measure_to_dict(model.immigration.nu)},
        "branching": {
            "b": model.branching.b,
            "sigma": model.branching.sigma,
            "pi": _measure_to_dict(model.branching.pi),
        },
        "noise": {
            "b": model.noise.b,
            "sigma": model.noise.sigma,
            "gamma": _measure_to_dict(model.noise.gamma),
        },
        "correlation": {"rho": model.rho},
    })
    return data


def dumps_model(model: CBITCLModel, name: Optional[str] = None) -> str:
    return json.dumps(model_to_dict(model, name), indent=2, ensure_ascii=False) + "\n"


def model_hash(model: CBITCLModel) -> str:
    """sha256 of the canonical (sorted, compact) model document."""
    canonical = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# =============================================================================
# Semantic checks
# =============================================================================

def validate_semantics(data: Dict[str, Any], report: ModelReport) -> Optional[CBITCLModel]:
    """Build the model and collect warnings about regimes some operations refuse."""
    try:
        model = model_from_dict(data)
    except ConfigError as e:
        report.error("parameters", e.location or "root", str(e))
        return None

    if model.branching.b <= 0.0:
        report.warn(
            "regime",
            "branching.b",
            f"b_X={model.branching.b} <= 0: no stationary law and no long-run limit",
            "stationary_laplace and xi_asymptotic require b_X > 0",
        )
    if model.rho != 0.0 and model.cross == 0.0:
        report.warn(
            "regime",
            "correlation.rho",
            f"rho={model.rho} has no effect because σ_X·σ_Z = 0",
        )
    info = model.domain_info()
    if info.in_dz(1.0) and model.noise.xi(1.0) != 0.0:
        report.warn(
            "regime",
            "noise.b",
            "exp(Z) is not a martingale (Ξ(1) ≠ 0)",
            'Use "b": "martingale" if Z is a discounted log price',
        )
    return model


def validate_model(data: Dict[str, Any], source: Optional[str] = None) -> Tuple[ModelReport, Optional[CBITCLModel]]:
    """Schema, version and parameter checks of a parsed model file."""
    report = ModelReport(source)
    validate_schema(data, report)
    if report.errors:
        return report, None
    model = validate_semantics(data, report)
    return report, model


def read_model_file(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}", location="file") from e
    except FileNotFoundError as e:
        raise ConfigError(f"Model file not found: {path}", location="file") from e


def load_model(path: Union[str, Path]) -> Tuple[CBITCLModel, ModelReport]:
    """Read, validate and build a model.

    Raises:
        ConfigError: unreadable file or any fatal validation error
    """
    return model_from_document(read_model_file(path))


def model_from_document(data: Dict[str, Any]) -> Tuple[CBITCLModel, ModelReport]:
    """Validate a parsed model file and build the model.

    Raises:
        ConfigError: the first fatal validation error
    """
    report, model = validate_model(data)
    if model is None:
        first = report.errors[0]
        raise ConfigError(f"{first.path}: {first.message}", location=first.path)
    return model, report


def format_report(report: ModelReport) -> str:
    """Findings grouped by model-file section, errors before warnings."""
    icon = {"PASS": "✅", "WARN": "⚠️", "FAIL": "❌"}[report.status]
    title = f"{icon} {report.source or 'model file'}: {report.status}"
    lines = ["", title, "=" * max(50, len(title))]
    for section in report.sections():
        lines.append(f"\n[{section}]")
        for label, found in (("error", report.errors), ("warning", report.warnings)):
            for f in found:
                if f.section != section:
                    continue
                lines.append(f"  {label} ({f.kind}) {f.path}: {f.message}")
                if f.hint:
                    lines.append(f"    → {f.hint}")
    if report.status == "PASS":
        lines.append("\n  Schema, version and parameter checks passed.")
    lines.append("")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        description="Validate a CBITCL model file",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("model", help="Path to model JSON file")
    parser.add_argument("--json", action="store_true", help="Output as JSON")
    parser.add_argument("--strict", action="store_true", help="Treat warnings as errors")
    args = parser.parse_args(argv)

    try:
        report, _ = validate_model(read_model_file(args.model), args.model)
    except ConfigError as e:
        report = ModelReport(args.model)
        report.error("file", e.location or "file", str(e))

    if args.json:
        print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    else:
        print(format_report(report))

    if report.errors:
        return 1
    if report.warnings and args.strict:
        return 1
    if report.warnings:
        return 2
    return 0


if __name__ == "__main__":
    # Fix Windows console encoding issues
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", errors="replace")
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding="utf-8", errors="replace")
    sys.exit(main())
