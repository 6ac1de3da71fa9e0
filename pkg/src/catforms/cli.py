"""Command-line interface: solve, verify, oracle, surface, sweep.

Exit codes: 0 success, 1 check failed (or immediate domain violation),
2 minimizer did not converge, 3 bad input.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import geometry as geo
from . import io
from .errors import CatformsError, DomainError, InputError, ResampleError
from .flow import IntegratorConfig, SampledCurve, attach_curvature, integrate
from .geometry import CurveState, FamilySpec

EXIT_OK, EXIT_FAIL, EXIT_NONCONVERGED, EXIT_INPUT = 0, 1, 2, 3
RESIDUAL_TOL = 1e-5
MINIMAL_TOL = 1e-5
SWEEP_PARAMS = ("alpha", "u0", "v0", "theta0", "c", "step", "length")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _point(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected U,V, got {text!r}") from None
    return a, b


def _add_family(p):
    p.add_argument("--family", choices=geo.KINDS, required=True)
    p.add_argument("--alpha", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="catforms", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="integrate one catenary")
    p.add_argument("--family", choices=geo.KINDS)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--u0", type=float)
    p.add_argument("--v0", type=float)
    p.add_argument("--theta0", type=float, help="initial chart heading, radians")
    p.add_argument("--c", type=float, help="fixed first integral (sphere, alpha=1)")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--length", type=float, default=10.0)
    p.add_argument("--format", choices=("csv", "json"), help="default csv, or the manifest's")
    p.add_argument("--from-manifest", type=Path, help="rerun the inputs recorded in a manifest")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("verify", help="recompute law residuals of a curve file")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    _add_family(p)
    p.add_argument("--tol", type=float, default=RESIDUAL_TOL)

    p = sub.add_parser("oracle", help="compare shooting and polyline minimization")
    _add_family(p)
    p.add_argument("--a", type=_point, required=True)
    p.add_argument("--b", type=_point, required=True)
    p.add_argument("--nodes", type=int, default=201)
    p.add_argument("--iters", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-5, help="gradient tolerance")
    p.add_argument("--bracket", type=_point, help="heading bracket LO,HI for shooting")
    p.add_argument("--step", type=float, default=1e-3)

    p = sub.add_parser("surface", help="mean curvature of the revolved surface")
    p.add_argument("--space", choices=("s3", "h3"), required=True)
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--angular", type=int, default=64)
    p.add_argument("--t-samples", type=int, default=201, help="generating samples in the mesh")
    p.add_argument("--export", type=Path)
    p.add_argument("--expect-minimal", action="store_true")
    p.add_argument("--family", choices=geo.KINDS, help="override the manifest's family")
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("sweep", help="run a grid of solves")
    p.add_argument("--family", choices=geo.KINDS, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--u0", type=float)
    p.add_argument("--v0", type=float)
    p.add_argument("--theta0", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--length", type=float, default=10.0)
    p.add_argument("--grid", action="append", default=[], metavar="NAME=SPEC",
                   help="v1,v2,... or start:stop:count; repeat for a product grid")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path, required=True)
    return parser


# ----------------------------------------------------------------------------
# solve

def _solve_to_file(fam: FamilySpec, state: CurveState, cfg: IntegratorConfig, out: Path, fmt: str) -> dict:
    curve = integrate(fam, state, cfg)
    manifest = io.build_manifest(fam, state, cfg, curve, fmt)
    io.write_curve(curve, out, manifest, fmt)
    return manifest


def _initial_violation(fam: FamilySpec, state: CurveState, cfg: IntegratorConfig) -> str | None:
    return geo.guard(fam.kind, fam.alpha, state.u, state.v, 2 * cfg.eps_d, 2 * cfg.eps_pole)


def cmd_solve(args) -> int:
    if args.from_manifest is not None:
        try:
            manifest = json.loads(args.from_manifest.read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read manifest: {exc}") from exc
        fam, state, cfg, fmt = io.manifest_inputs(manifest)
        fmt = args.format or fmt
    else:
        missing = [n for n in ("family", "u0", "v0", "theta0") if getattr(args, n) is None]
        if missing:
            raise InputError("missing " + ", ".join("--" + m for m in missing))
        fam = FamilySpec(args.family, args.alpha, args.c)
        state = CurveState(args.u0, args.v0, args.theta0)
        cfg = IntegratorConfig(h=args.step, max_length=args.length)
        fmt = args.format or "csv"
    if not all(math.isfinite(x) for x in (state.u, state.v, state.theta)):
        raise InputError("initial state must be finite")
    reason = _initial_violation(fam, state, cfg)
    if reason is not None:
        print(f"initial state outside the admissible region ({reason})", file=sys.stderr)
        return EXIT_FAIL
    m = _solve_to_file(fam, state, cfg, args.out, fmt)
    for w in m["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    d = m["diagnostics"]
    print(f"samples={m['samples']} stop_reason={m['stop_reason']} "
          f"max_residual={d['max_residual']} first_integral_drift={d['first_integral_drift']}")
    return EXIT_OK


# ----------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    fam = FamilySpec(args.family, args.alpha)
    cols = io.read_columns(args.inp)
    n = len(cols["t"])
    if n < 3:
        raise InputError("need at least 3 samples to differentiate")
    for c in ("t", "u", "v", "theta"):
        if not np.all(np.isfinite(cols[c])):
            raise InputError(f"column {c!r} has missing or non-finite values")
    curve = SampledCurve(fam, cols["t"], cols["u"], cols["v"], cols["theta"])
    with np.errstate(all="ignore"):
        attach_curvature(curve)
        res = np.abs(curve.residual)
    res = np.where(np.isfinite(res), res, np.inf)
    i = int(np.argmax(res))
    drift = curve.first_integral_drift()
    print(f"samples={n} max_residual={res[i]:.3e} row={i} mean_residual={float(np.mean(res)):.3e} "
          f"first_integral_drift={drift:.3e}")
    if res[i] < args.tol:
        return EXIT_OK
    print(f"residual exceeds {args.tol:g} at row {i}", file=sys.stderr)
    return EXIT_FAIL


# ----------------------------------------------------------------------------
# oracle

def cmd_oracle(args) -> int:
    from .oracle import MinimizerConfig, Polyline, compare_to_ode, minimize, shoot

    fam = FamilySpec(args.family, args.alpha)
    if args.nodes < 3:
        raise InputError("--nodes must be at least 3")
    if np.allclose(args.a, args.b, rtol=0, atol=1e-14):
        raise InputError("endpoints coincide")
    cfg = MinimizerConfig(max_iters=args.iters, grad_tol=args.tol)
    shot = shoot(fam, args.a, args.b, bracket=args.bracket, cfg=IntegratorConfig(h=args.step))
    result = minimize(Polyline.chord(fam, args.a, args.b, args.nodes), cfg)
    dist = compare_to_ode(result.polyline, shot.curve)
    limit = 10 / args.nodes ** 2
    print(f"theta0={shot.theta0:.15g} miss={shot.miss:.3e} iterations={result.iterations} "
          f"grad_max={result.grad_max:.3e} converged={result.converged} "
          f"energy={result.energies[-1]:.15g} distance={dist:.3e} limit={limit:.3e}")
    if not result.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK if dist < limit else EXIT_FAIL


# ----------------------------------------------------------------------------
# surface

def cmd_surface(args) -> int:
    from .surfaces import RevolutionPatch, export_mesh, minimality_report

    manifest = io.read_manifest(args.inp)
    kind = args.family or (manifest or {}).get("family")
    if kind is None:
        raise InputError("no manifest next to the curve file; pass --family")
    alpha = args.alpha if args.alpha is not None else (manifest or {}).get("alpha", 1.0)
    c = (manifest or {}).get("c") if args.family is None else None
    fam = FamilySpec(kind, float(alpha), c)
    curve = io.read_curve(args.inp, fam)
    report = minimality_report(curve, args.space)
    print(f"space={args.space} samples={len(curve)} max_abs_H={report.max_abs:.3e} "
          f"mean_abs_H={report.mean_abs:.3e}")
    if args.export is not None:
        patch = RevolutionPatch.from_curve(curve, args.space, args.angular, n_t=args.t_samples)
        nv, nf = export_mesh(patch, args.export)
        print(f"mesh={args.export} vertices={nv} triangles={nf}")
    if args.expect_minimal and not report.max_abs < MINIMAL_TOL:
        print(f"surface is not minimal: max |H| = {report.max_abs:.3e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ----------------------------------------------------------------------------
# sweep

def parse_grid(specs: list[str]) -> list[dict[str, float]]:
    """Cartesian product of NAME=v1,v2 / NAME=start:stop:count specs, in given order."""
    axes = []
    for spec in specs:
        name, sep, body = spec.partition("=")
        name = name.strip()
        if not sep or name not in SWEEP_PARAMS:
            raise InputError(f"grid spec {spec!r}: expected NAME=... with NAME in {SWEEP_PARAMS}")
        try:
            if ":" in body:
                a, b, k = body.split(":")
                vals = list(np.linspace(float(a), float(b), int(k)))
            else:
                vals = [float(x) for x in body.split(",") if x.strip()]
        except ValueError:
            raise InputError(f"grid spec {spec!r} is not numeric") from None
        axes.append((name, [float(x) for x in vals]))
    if not axes or any(not vals for _, vals in axes):
        raise InputError("empty grid")
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise InputError("grid names must be distinct")
    return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]


def _sweep_run(job: tuple[int, dict, str, Path, str]) -> dict:
    idx, params, kind, out_dir, fmt = job
    name = f"run_{idx:04d}"
    path = out_dir / f"{name}.{fmt}"
    entry = {"run": name, "params": params, "file": path.name}
    try:
        fam = FamilySpec(kind, params["alpha"], params.get("c"))
        state = CurveState(params["u0"], params["v0"], params["theta0"])
        cfg = IntegratorConfig(h=params["step"], max_length=params["length"])
        reason = _initial_violation(fam, state, cfg)
        if reason is not None:
            raise DomainError(f"initial state outside the admissible region ({reason})")
        m = _solve_to_file(fam, state, cfg, path, fmt)
        entry.update(status="ok", stop_reason=m["stop_reason"], diagnostics=m["diagnostics"])
    except (CatformsError, ValueError, ArithmeticError) as exc:
        entry.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return entry


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    base = {"alpha": args.alpha, "u0": args.u0, "v0": args.v0, "theta0": args.theta0,
            "c": args.c, "step": args.step, "length": args.length}
    runs = []
    for point in grid:
        params = dict(base, **point)
        missing = [k for k in ("u0", "v0", "theta0") if params[k] is None]
        if missing:
            raise InputError("missing " + ", ".join("--" + m for m in missing))
        runs.append(params)
    jobs = args.jobs if args.jobs is not None else int(os.environ.get("CATFORMS_JOBS", "1"))
    if jobs < 1:
        raise InputError("--jobs must be positive")
    args.out.mkdir(parents=True, exist_ok=True)
    work = [(i, p, args.family, args.out, args.format) for i, p in enumerate(runs)]
    if jobs == 1:
        entries = [_sweep_run(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_sweep_run, work))
    (args.out / "sweep.json").write_text(json.dumps({"schema": io.SCHEMA, "family": args.family,
                                                      "runs": entries}, indent=2))
    ok = sum(e["status"] == "ok" for e in entries)
    for e in entries:
        if e["status"] != "ok":
            print(f"{e['run']}: {e['error']}", file=sys.stderr)
    print(f"runs={len(entries)} succeeded={ok} failed={len(entries) - ok}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle,
            "surface": cmd_surface, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except ResampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CatformsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
