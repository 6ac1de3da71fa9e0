"""Curve files and run manifests.

Floats are written with 17 significant digits, which round-trips IEEE
doubles exactly.  Every curve file has a sidecar ``<file>.manifest.json``;
JSON curve files also carry the manifest inline.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError
from .flow import IntegratorConfig, SampledCurve
from .geometry import CurveState, FamilySpec

SCHEMA = 1
COLUMNS = ("t", "u", "v", "theta", "kappa_target", "kappa_actual", "residual", "first_integral")


def fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return "%.17g" % x


def _columns(curve: SampledCurve) -> dict[str, np.ndarray]:
    n = len(curve)
    nan = np.full(n, np.nan)
    kt = curve.kappa_target if curve.kappa_target is not None else nan
    ka = curve.kappa_actual if curve.kappa_actual is not None else nan
    fi = curve.first_integral if curve.first_integral is not None else nan
    return {"t": curve.t, "u": curve.u, "v": curve.v, "theta": curve.theta,
            "kappa_target": kt, "kappa_actual": ka, "residual": ka - kt, "first_integral": fi}


def manifest_path(path) -> Path:
    return Path(str(path) + ".manifest.json")


def build_manifest(family: FamilySpec, initial: CurveState, cfg: IntegratorConfig,
                   curve: SampledCurve, fmt_name: str) -> dict:
    res = curve.residual
    max_res = float(np.nanmax(np.abs(res))) if res is not None and len(res) else math.nan
    drift = curve.first_integral_drift()
    return {
        "schema": SCHEMA,
        "family": family.kind,
        "alpha": family.alpha,
        "c": family.paper_c,
        "initial": {"u": initial.u, "v": initial.v, "theta": initial.theta},
        "cfg": asdict(cfg),
        "format": fmt_name,
        "stop_reason": curve.stop_reason,
        "samples": len(curve),
        "diagnostics": {
            "max_residual": None if math.isnan(max_res) else max_res,
            "first_integral_drift": None if math.isnan(drift) else drift,
        },
        "warnings": list(curve.warnings),
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def manifest_inputs(manifest: dict) -> tuple[FamilySpec, CurveState, IntegratorConfig, str]:
    """Recover the solver inputs recorded in a manifest."""
    try:
        if manifest.get("schema") != SCHEMA:
            raise InputError(f"unsupported manifest schema {manifest.get('schema')!r}")
        fam = FamilySpec(manifest["family"], float(manifest["alpha"]), manifest.get("c"))
        ini = manifest["initial"]
        state = CurveState(float(ini["u"]), float(ini["v"]), float(ini["theta"]))
        cfg = IntegratorConfig(**manifest["cfg"])
        return fam, state, cfg, manifest.get("format", "csv")
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed manifest: {exc}") from exc


def write_curve(curve: SampledCurve, path, manifest: dict, fmt_name: str = "csv") -> None:
    path = Path(path)
    cols = _columns(curve)
    if fmt_name == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for i in range(len(curve)):
                w.writerow([fmt(float(cols[c][i])) for c in COLUMNS])
    elif fmt_name == "json":
        data = {c: [None if math.isnan(x) else float(x) for x in cols[c]] for c in COLUMNS}
        path.write_text(json.dumps({"schema": SCHEMA, "manifest": manifest, "columns": list(COLUMNS),
                                    "data": data}, indent=1, allow_nan=False))
    else:
        raise InputError(f"unknown format {fmt_name!r}")
    manifest_path(path).write_text(json.dumps(manifest, indent=2, allow_nan=False))


def _parse_float(text: str, row: int, col: str) -> float:
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise InputError(f"row {row}: column {col!r} is not a number: {text!r}") from None


def read_columns(path) -> dict[str, np.ndarray]:
    """Read a curve file (CSV or JSON, by content) into column arrays."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            data = doc["data"]
            return {c: np.array([math.nan if x is None else float(x) for x in data[c]]) for c in COLUMNS}
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"malformed curve JSON: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise InputError("CSV header must be " + ",".join(COLUMNS))
    body = rows[1:]
    for i, r in enumerate(body):
        if len(r) != len(COLUMNS):
            raise InputError(f"row {i}: expected {len(COLUMNS)} fields, got {len(r)}")
    return {c: np.array([_parse_float(r[k], i, c) for i, r in enumerate(body)])
            for k, c in enumerate(COLUMNS)}


def read_curve(path, family: FamilySpec) -> SampledCurve:
    cols = read_columns(path)
    if len(cols["t"]) == 0:
        raise InputError("curve file has no samples")
    for c in ("t", "u", "v", "theta"):
        if not np.all(np.isfinite(cols[c])):
            raise InputError(f"column {c!r} has missing or non-finite values")
    return SampledCurve(family, cols["t"], cols["u"], cols["v"], cols["theta"],
                        first_integral=cols["first_integral"],
                        kappa_target=cols["kappa_target"], kappa_actual=cols["kappa_actual"])


def read_manifest(path) -> dict | None:
    """Sidecar manifest of a curve file, or None if absent."""
    mp = manifest_path(path)
    if not mp.exists():
        return None
    try:
        return json.loads(mp.read_text())
    except ValueError as exc:
        raise InputError(f"malformed manifest {mp}: {exc}") from exc
