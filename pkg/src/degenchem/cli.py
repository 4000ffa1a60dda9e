"""Batch front end.

Subcommands:
  transform  radial density CSV -> accumulation + signal profiles
  run        evolve one configuration into a run directory
  certify    assemble the blow-up evidence chain for a finished run
  verify     re-check recorded invariants of a run (or sweep) directory
  sweep      evolve a regularized family over an eps list

Configs are flat key=value files with dotted section prefixes (params.n=2).
Unknown keys are rejected.  Everything is deterministic: same config, same
bytes in every CSV.  The --seedless flag is reserved; there is no random
number generator anywhere in the package, so the flag is rejected rather
than silently accepted.
"""

from __future__ import annotations

import argparse
import glob
import math
import os
import sys

import numpy as np

from . import analysis, io, solver, transform
from .domain import Params, SGrid, make_params, make_sgrid
from .initial_data import (WInitial, eps_subgrid, make_concave_compatible,
                           make_concentrated, regularized_initial, validate)
from .solver import EvolutionResult, SolverConfig, default_max_gradient, evolve

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
EXIT_GRADIENT = 4
EXIT_STEP_FAILURE = 5

_CERTIFY_EXIT = {"certified": EXIT_OK,
                 "hypotheses-not-met": EXIT_CONFIG,
                 "inconclusive": EXIT_INCONCLUSIVE}


class ConfigError(Exception):
    pass


def _float_list(text: str):
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated floats, got {text!r}") from None


def _flag(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# key -> caster; this is the whole config surface, anything else is rejected
_SCHEMA = {
    "params.n": int,
    "params.R": float,
    "params.beta": float,
    "params.m": float,
    "grid.n_nodes": int,
    "grid.grading": str,
    "grid.ratio": float,
    "grid.min_spacing_frac": float,
    "init.generator": str,
    "init.steepness": float,
    "init.shape": str,
    "init.m0": float,
    "init.s0": float,
    "init.ramp_frac": float,
    "init.path": str,
    "solver.t_end": float,
    "solver.theta": float,
    "solver.dt_policy": str,
    "solver.dt": float,
    "solver.dt_max": float,
    "solver.cfl_safety": float,
    "solver.max_gradient": float,
    "solver.snapshot_dt": float,
    "solver.snapshot_stride": int,
    "solver.eps": float,
    "solver.eps_list": _float_list,
    "analysis.gamma": float,
    "analysis.m0": float,
    "output.dir": str,
    "output.plot_script": _flag,
}


def parse_config(path) -> dict:
    """Read a flat key=value config, rejecting unknown or repeated keys."""
    cfg = {}
    try:
        fh = open(path, "r")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in cfg:
                raise ConfigError(f"{path}:{lineno}: repeated key {key!r}")
            try:
                cfg[key] = _SCHEMA[key](raw.strip())
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for "
                                  f"{key!r}: {exc}") from None
    return cfg


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing required config key {key!r}")
    return cfg[key]


def _build_params(cfg: dict) -> Params:
    try:
        return make_params(n=_need(cfg, "params.n"), R=_need(cfg, "params.R"),
                           beta=_need(cfg, "params.beta"),
                           m=_need(cfg, "params.m"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _build_grid(cfg: dict, params: Params, grid_n=None) -> SGrid:
    n_nodes = grid_n if grid_n is not None else _need(cfg, "grid.n_nodes")
    kwargs = {}
    if "grid.ratio" in cfg:
        kwargs["ratio"] = cfg["grid.ratio"]
    if "grid.min_spacing_frac" in cfg:
        kwargs["min_spacing_frac"] = cfg["grid.min_spacing_frac"]
    grading = cfg.get("grid.grading", "geometric")
    try:
        return make_sgrid(params.s_max, n_nodes, grading=grading, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _build_initial(cfg: dict, params: Params, grid: SGrid) -> WInitial:
    gen = cfg.get("init.generator", "concave")
    try:
        if gen == "concave":
            return make_concave_compatible(
                params, cfg.get("init.steepness", 1.0), grid,
                shape=cfg.get("init.shape", "quartic"))
        if gen == "concentrated":
            m0 = cfg.get("init.m0", params.m)
            s0 = _need(cfg, "init.s0")
            kwargs = {}
            if "init.ramp_frac" in cfg:
                kwargs["ramp_frac"] = cfg["init.ramp_frac"]
            return make_concentrated(params, m0, s0, grid, **kwargs)
        if gen == "file":
            prof = io.read_w_profile(_need(cfg, "init.path"))
            if prof.params != params:
                raise ConfigError(
                    "initial profile header disagrees with params block")
            return WInitial.from_profile(prof)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown init.generator {gen!r} "
                      "(expected concave, concentrated, or file)")


def _build_solver_config(cfg: dict, params: Params,
                         eps_list=None) -> SolverConfig:
    kwargs = {"t_end": _need(cfg, "solver.t_end")}
    passthrough = ("theta", "dt_policy", "dt", "dt_max", "cfl_safety",
                   "max_gradient", "snapshot_dt", "snapshot_stride")
    for name in passthrough:
        key = f"solver.{name}"
        if key in cfg:
            kwargs[name] = cfg[key]
    if eps_list is not None:
        kwargs["eps_list"] = eps_list
    elif "solver.eps_list" in cfg:
        kwargs["eps_list"] = cfg["solver.eps_list"]
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _echo_entries(cfg: dict, params: Params, grid: SGrid,
                  w0: WInitial) -> dict:
    entries = {
        "params.n": params.n,
        "params.R": repr(params.R),
        "params.beta": repr(params.beta),
        "params.m": repr(params.m),
        "grid.n_nodes": grid.n_nodes,
        "grid.grading": grid.grading,
    }
    for key in ("grid.ratio", "grid.min_spacing_frac", "init.generator",
                "init.steepness", "init.shape", "init.m0", "init.s0",
                "init.ramp_frac", "init.path", "solver.t_end", "solver.theta",
                "solver.dt_policy", "solver.dt", "solver.dt_max",
                "solver.cfl_safety", "solver.max_gradient",
                "solver.snapshot_dt", "solver.snapshot_stride", "solver.eps",
                "analysis.gamma", "analysis.m0"):
        if key in cfg:
            val = cfg[key]
            entries[key] = repr(val) if isinstance(val, float) else val
    entries["init.tag"] = w0.smoothness_tag
    return entries


def _write_run_dir(out_dir, entries: dict, run: EvolutionResult) -> None:
    os.makedirs(out_dir, exist_ok=True)
    snap_dir = io.snapshot_dir(out_dir)
    os.makedirs(snap_dir, exist_ok=True)
    for stale in glob.glob(os.path.join(snap_dir, "snap_*.csv")):
        os.remove(stale)
    for i, snap in enumerate(run.snapshots):
        io.write_w_profile(os.path.join(snap_dir, io.snapshot_filename(i)), snap)
    io.write_diagnostics(os.path.join(out_dir, "diagnostics.csv"),
                         run.diagnostics)
    manifest = dict(entries)
    manifest.update({
        "solver.eps": repr(run.eps),
        "run.termination": run.termination,
        "run.t_final": repr(run.t_final),
        "run.steps": run.steps,
        "run.snapshots": len(run.snapshots),
        "run.initial_max_slope": repr(run.initial_max_slope),
        "run.backend": run.backend,
        "run.wall_time_s": repr(run.wall_time_s),
    })
    if run.message:
        manifest["run.message"] = run.message
    io.write_manifest(os.path.join(out_dir, "manifest.txt"), manifest)


_PLOT_SCRIPT = """\
#!/usr/bin/env python
# Render the snapshots of this run directory (requires matplotlib).
import glob, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "snapshots", "snap_*.csv"))):
    with open(path) as fh:
        header = fh.readline()
        rows = [tuple(map(float, line.split(","))) for line in fh if line.strip()]
    t = header.rsplit("t=", 1)[1].strip() if "t=" in header else "0.0"
    plt.plot([r[0] for r in rows], [r[1] for r in rows], label=f"t={t}")
plt.xlabel("s")
plt.ylabel("w")
plt.legend(fontsize="small")
plt.savefig(os.path.join(here, "snapshots.png"), dpi=150)
print("wrote", os.path.join(here, "snapshots.png"))
"""


def _termination_exit(run: EvolutionResult) -> int:
    if run.termination == "t_end":
        return EXIT_OK
    if run.termination == "gradient_threshold":
        return EXIT_GRADIENT
    return EXIT_STEP_FAILURE


def cmd_transform(args) -> int:
    with open(args.input, "r") as fh:
        first = fh.readline()
    if not first.strip():
        print(f"{args.input}:1: empty file", file=sys.stderr)
        return EXIT_CONFIG
    if first.startswith("# degenchem radial-profile"):
        kind, r, u, header_params = io.read_radial_profile(args.input)
        if kind != "u":
            print(f"{args.input}: expected kind=u, got kind={kind}",
                  file=sys.stderr)
            return EXIT_CONFIG
        n, R, beta = header_params.n, header_params.R, header_params.beta
    else:
        if args.n is None or args.R is None or args.beta is None:
            print("bare CSV input needs --n, --R, and --beta", file=sys.stderr)
            return EXIT_CONFIG
        n, R, beta = args.n, args.R, args.beta
        with open(args.input, "r") as fh:
            lines = fh.readlines()
        try:
            r, u = io._read_rows(lines, args.input, start_lineno=1)
        except ValueError as exc:
            print(exc, file=sys.stderr)
            return EXIT_CONFIG
    if len(r) < 2:
        print(f"{args.input}: need at least 2 rows, got {len(r)}",
              file=sys.stderr)
        return EXIT_CONFIG

    # mass comes from the data; the header's m is only a cross-check
    probe = transform.RadialProfile(r, u, make_params(n=n, R=R, beta=beta, m=1.0))
    mass = transform.radial_mass(probe)
    if mass <= 0:
        print(f"{args.input}: data carries nonpositive mass {mass}",
              file=sys.stderr)
        return EXIT_CONFIG
    params = make_params(n=n, R=R, beta=beta, m=mass)
    u_prof = transform.RadialProfile(r, u, params)

    if args.grid_n is not None:
        grid = make_sgrid(params.s_max, args.grid_n, grading="uniform")
    else:
        grid = SGrid(nodes=np.concatenate(([0.0], r**n)), grading="file")
    w = transform.accumulate(u_prof, grid)
    vr = transform.signal_gradient(u_prof, params)
    v = transform.signal_reconstruct(vr)

    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    io.write_w_profile(os.path.join(out, "w.csv"), w)
    io.write_radial_profile(os.path.join(out, "v_r.csv"), "v_r",
                            vr.r_nodes, vr.values, params)
    io.write_radial_profile(os.path.join(out, "v.csv"), "v",
                            v.r_nodes, v.values, params)

    sup_ratio = float(np.max(np.abs(vr.values) / vr.r_nodes))
    bound = 2.0 / params.n * float(np.max(u))
    print(f"mass={mass!r} mu={params.mu!r} "
          f"sup|v_r|/r={sup_ratio!r} bound={bound!r}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    params = _build_params(cfg)
    grid = _build_grid(cfg, params, grid_n=args.grid_n)
    w0 = _build_initial(cfg, params, grid)
    if cfg.get("solver.eps_list"):
        raise ConfigError("solver.eps_list is only valid for sweep")
    scfg = _build_solver_config(cfg, params)
    eps = cfg.get("solver.eps", 0.0)

    report = validate(w0, params)
    for name in ("boundary_values", "monotone"):
        entry = report.entries[name]
        if not entry.passed:
            raise ConfigError(f"initial data fails {name}: {entry.detail}")

    if eps > 0.0:
        run_grid = eps_subgrid(w0.profile.grid, eps)
        w_start = regularized_initial(w0, eps, grid=run_grid)
    else:
        w_start = w0.profile
    run = evolve(w_start, params, scfg, eps=eps)

    out = args.out or cfg.get("output.dir")
    if not out:
        raise ConfigError("no output directory (output.dir or --out)")
    _write_run_dir(out, _echo_entries(cfg, params, grid, w0), run)
    if cfg.get("output.plot_script", False):
        with open(os.path.join(out, "plot_snapshots.py"), "w",
                  newline="\n") as fh:
            fh.write(_PLOT_SCRIPT)
    print(f"termination={run.termination} t_final={run.t_final!r} "
          f"steps={run.steps} snapshots={len(run.snapshots)} "
          f"backend={run.backend} out={out}")
    return _termination_exit(run)


def _load_run(run_dir):
    """Rebuild (params, manifest, EvolutionResult) from a run directory."""
    manifest = io.read_manifest(os.path.join(run_dir, "manifest.txt"))
    params = make_params(n=int(manifest["params.n"]),
                         R=float(manifest["params.R"]),
                         beta=float(manifest["params.beta"]),
                         m=float(manifest["params.m"]))
    snap_paths = sorted(glob.glob(os.path.join(io.snapshot_dir(run_dir),
                                               "snap_*.csv")))
    if not snap_paths:
        raise OSError(f"{run_dir}: no snapshots found")
    snapshots = [io.read_w_profile(p) for p in snap_paths]
    diagnostics = io.read_diagnostics(os.path.join(run_dir, "diagnostics.csv"))
    run = EvolutionResult(
        snapshots=snapshots,
        diagnostics=diagnostics,
        termination=manifest.get("run.termination", "unknown"),
        t_final=float(manifest.get("run.t_final", snapshots[-1].time)),
        eps=float(manifest.get("solver.eps", 0.0)),
        params=params,
        initial_max_slope=float(manifest.get("run.initial_max_slope", "nan")),
        steps=int(manifest.get("run.steps", 0)),
        wall_time_s=float(manifest.get("run.wall_time_s", 0.0)),
        backend=manifest.get("run.backend", "unknown"),
        message=manifest.get("run.message", ""),
    )
    return params, manifest, run


def cmd_certify(args) -> int:
    try:
        params, manifest, run = _load_run(args.run_dir)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot load run: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    m0 = args.m0
    if m0 is None and "analysis.m0" in manifest:
        m0 = float(manifest["analysis.m0"])
    if m0 is None and "init.m0" in manifest:
        m0 = float(manifest["init.m0"])
    if m0 is None:
        m0 = params.m
    gamma = args.gamma
    if gamma is None and "analysis.gamma" in manifest:
        gamma = float(manifest["analysis.gamma"])

    try:
        config = analysis.make_moment_config(params, m0, gamma_override=gamma)
    except ValueError as exc:
        print(f"no admissible moment config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    w0 = WInitial.from_profile(run.snapshots[0])
    cert = analysis.certify_blowup(run, w0, config, params)

    io.write_moment_series(os.path.join(args.run_dir, "moment_series.csv"),
                           cert.moment_times, cert.moment_values,
                           cert.lower_values)
    manifest_path = os.path.join(args.run_dir, "manifest.txt")
    kept = {k: v for k, v in io.read_manifest(manifest_path).items()
            if not k.startswith("certificate.")}
    io.write_manifest(manifest_path, kept)
    block = {
        "certificate.verdict": cert.verdict,
        "certificate.gamma": repr(config.gamma),
        "certificate.s0": repr(config.s0),
        "certificate.s1": repr(config.s1),
        "certificate.c1": repr(config.c1),
        "certificate.c2": repr(config.c2),
        "certificate.c3": repr(config.c3),
        "certificate.m0": repr(config.m0),
        "certificate.initial_moment": repr(cert.y0),
        "certificate.A": repr(cert.lower.A),
        "certificate.B": repr(cert.lower.B),
        "certificate.ratio": repr(cert.lower.ratio),
        "certificate.blowup_time": repr(cert.lower_ode_blowup_time),
        "certificate.blowup_time_numeric": repr(cert.lower.blowup_time_numeric),
    }
    for name, outcome in cert.checks.items():
        block[f"certificate.check.{name}"] = "pass" if outcome.passed else "fail"
        block[f"certificate.check.{name}.detail"] = outcome.detail
    io.append_manifest(manifest_path, block)

    for name, outcome in cert.checks.items():
        print(f"{'PASS' if outcome.passed else 'FAIL'} {name}: {outcome.detail}")
    print(f"verdict={cert.verdict} initial_moment={cert.y0!r} "
          f"blowup_time={cert.lower_ode_blowup_time!r}")
    return _CERTIFY_EXIT[cert.verdict]


def _verify_single(run_dir) -> int:
    params, manifest, run = _load_run(run_dir)
    lines = []

    rel = [abs(transform.retransformed_mass(s) - params.m) / params.m
           for s in run.snapshots]
    worst = max(rel)
    pinned = max(abs(transform.total_mass(s) - params.m) for s in run.snapshots)
    lines.append((worst <= 1e-8 and pinned == 0.0,
                  f"mass: worst relative drift {worst:.3e}, "
                  f"boundary-pinned error {pinned:.3e}"))

    lo = min(float(np.min(s.values)) for s in run.snapshots)
    hi = max(float(np.max(s.values)) for s in run.snapshots)
    ok_range = lo >= -1e-10 and hi <= params.w_max + 1e-10
    lines.append((ok_range, f"range: min {lo:.6g}, max {hi:.6g} "
                  f"(cap {params.w_max:.6g})"))

    slope_min = min(float(np.min(s.slopes())) for s in run.snapshots)
    lines.append((slope_min >= -1e-10,
                  f"monotonicity: worst slope {slope_min:.3e}"))

    if manifest.get("init.generator", "") == "concave":
        d2 = max(analysis.check_concavity(s) for s in run.snapshots)
        lines.append((d2 <= 1e-9,
                      f"concavity: worst scaled second difference {d2:.3e}"))

    y0 = float(np.max(run.snapshots[0].slopes()))
    if y0 > 0:
        rep = analysis.check_supersolution(run, y0, params)
        lines.append((rep.passed,
                      f"supersolution: worst margin {rep.worst_violation:.3e} "
                      f"at t={rep.worst_time:.6g} "
                      f"({rep.checked_snapshots} snapshots below 0.95*T*)"))

    all_ok = True
    for ok, text in lines:
        print(("PASS " if ok else "FAIL ") + text)
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_FAILURE


def _verify_sweep(sweep_dir, member_dirs) -> int:
    loaded = []
    for d in member_dirs:
        params, manifest, run = _load_run(d)
        loaded.append((float(manifest["solver.eps"]), params, run))
    loaded.sort(key=lambda t: -t[0])
    params = loaded[0][1]
    n_snap = min(len(run.snapshots) for _, _, run in loaded)
    finest = loaded[-1][2]
    probe = finest.snapshots[0].grid.nodes
    probe = probe[probe >= params.s_max / 10.0 - 1e-12]

    worst = -math.inf
    for k in range(n_snap):
        prev = None
        for _, _, run in loaded:
            snap = run.snapshots[k]
            vals = np.interp(probe, snap.grid.nodes, snap.values,
                             left=0.0, right=float(snap.values[-1]))
            vals[probe < snap.grid.start] = 0.0
            if prev is not None:
                worst = max(worst, float(np.max(prev - vals)))
            prev = vals
    ok = worst <= 1e-8
    print(("PASS " if ok else "FAIL ") +
          f"eps-monotonicity: worst ordering violation {worst:.3e} over "
          f"{len(loaded)} members, {n_snap} snapshots")

    codes = [_verify_single(d) for d in member_dirs]
    return EXIT_OK if ok and all(c == EXIT_OK for c in codes) else EXIT_FAILURE


def cmd_verify(args) -> int:
    member_dirs = sorted(
        d for d in glob.glob(os.path.join(args.run_dir, "member_*"))
        if os.path.isdir(d))
    try:
        if member_dirs:
            return _verify_sweep(args.run_dir, member_dirs)
        return _verify_single(args.run_dir)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot verify run: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    params = _build_params(cfg)
    grid = _build_grid(cfg, params, grid_n=args.grid_n)
    w0 = _build_initial(cfg, params, grid)
    eps_override = _float_list(args.eps_list) if args.eps_list else None
    scfg = _build_solver_config(cfg, params, eps_list=eps_override)
    if not scfg.eps_list:
        raise ConfigError("sweep needs solver.eps_list or --eps-list")

    family = solver.limit_family(w0, params, scfg)

    out = args.out or cfg.get("output.dir")
    if not out:
        raise ConfigError("no output directory (output.dir or --out)")
    os.makedirs(out, exist_ok=True)
    entries = _echo_entries(cfg, params, grid, w0)
    for i, (eps, run) in enumerate(zip(family.eps_list, family.results)):
        _write_run_dir(os.path.join(out, f"member_{i:02d}"), entries, run)

    lines = [f"eps_list={','.join(repr(e) for e in family.eps_list)}",
             f"snapshots={len(family.snapshot_times)}",
             f"probe_nodes={len(family.probe_s)}",
             f"worst_monotonicity_violation={family.worst_monotonicity_violation!r}",
             f"t0_departure={family.t0_departure!r}"]
    for i, inc in enumerate(family.increments):
        lines.append(f"increment_{i}={inc!r}")
    for eps in sorted(family.failed):
        lines.append(f"failed_eps={eps!r}")
    with open(os.path.join(out, "family_report.txt"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    print(f"members={len(family.eps_list)} failed={len(family.failed)} "
          f"worst_ordering={family.worst_monotonicity_violation!r} out={out}")
    if family.failed:
        return EXIT_STEP_FAILURE
    worst_term = [r.termination for r in family.results]
    if any(t == "gradient_threshold" for t in worst_term):
        return EXIT_GRADIENT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a pre-subcommand --seedless visible: a plain default
    # would be re-applied by the subparser and overwrite the parsed value
    common.add_argument("--seedless", action="store_true",
                        default=argparse.SUPPRESS,
                        help="reserved; the package has no RNG, so this flag "
                             "is rejected to make determinism explicit")
    parser = argparse.ArgumentParser(
        prog="degenchem", parents=[common],
        description="Accumulation-variable laboratory for radially symmetric "
                    "degenerate aggregation-diffusion dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common],
                       help="radial density CSV -> w/v_r/v profiles")
    p.add_argument("input", help="radial density CSV (kind=u, or bare r,u rows)")
    p.add_argument("--out", default=None, help="output directory (default .)")
    p.add_argument("--grid-n", type=int, default=None,
                   help="resample w onto a uniform grid with this many nodes")
    p.add_argument("--n", type=int, default=None, help="dimension (bare CSV)")
    p.add_argument("--R", type=float, default=None, help="ball radius (bare CSV)")
    p.add_argument("--beta", type=float, default=None,
                   help="degeneracy exponent (bare CSV)")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("run", parents=[common],
                       help="evolve one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override output.dir")
    p.add_argument("--grid-n", type=int, default=None,
                   help="override grid.n_nodes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", parents=[common],
                       help="blow-up evidence chain for a run")
    p.add_argument("run_dir")
    p.add_argument("--m0", type=float, default=None,
                   help="concentrated mass (default: analysis.m0, init.m0, or m)")
    p.add_argument("--gamma", type=float, default=None,
                   help="override the singular exponent")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", parents=[common],
                       help="re-check recorded invariants")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common],
                       help="evolve a regularized family")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override output.dir")
    p.add_argument("--eps-list", default=None,
                   help="override solver.eps_list (comma floats)")
    p.add_argument("--grid-n", type=int, default=None,
                   help="override grid.n_nodes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seedless", False):
        print("--seedless is reserved: this package contains no random "
              "number generator, so there is no seed to remove; rerun "
              "without the flag", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
