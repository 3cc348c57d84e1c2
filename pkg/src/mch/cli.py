"""Command line: ``mch run``, ``mch presets`` and ``mch check``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, besov, diagnostics as diag, exact, kernels
from .characteristics import evolve_flow, lagrangian_invariant_error, sign_preservation_check
from .config import ConfigError, RunConfig, parse_config
from .grid import Field, Grid, deriv_array, make_grid
from .model import m_from_u
from .presets import describe
from .timestep import TIMESERIES_COLUMNS, Termination, Trajectory, simulate

log = logging.getLogger("mch")

EXIT_CODES = {
    Termination.REACHED_T_END: 0,
    Termination.BLOWUP_DETECTED: 2,
    Termination.DT_UNDERFLOW: 3,
    Termination.NONFINITE: 4,
}
EXIT_USAGE = 1
THREADS_ENV = "MCH_THREADS"


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    trajectory: Trajectory | None = None
    bounds: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def initial_field(cfg: RunConfig, grid: Grid) -> Field:
    kind = cfg.initial_kind
    p = cfg.section("initial")
    if kind == "gaussian":
        return exact.gaussian(grid, p["amplitude"], p["width"] or 1.0, p["center"])
    if kind == "peakon":
        spec = exact.PeakonSpec(p["c"], p["epsilon_dx"] * grid.dx)
        return exact.peakon(grid, spec, p["t"], p["center"])
    if kind == "two_peakon":
        return exact.two_peakon(grid, p["c1"], p["c2"], p["t"])
    if kind == "bump_momentum":
        return exact.bump_momentum(grid, p["amplitude"], p["width"], p["center"])
    data = np.genfromtxt(p["path"], delimiter=",", names=True)
    if "u" not in data.dtype.names:
        raise ConfigError("initial.path: file needs a 'u' column")
    return Field(grid, np.asarray(data["u"], dtype=float))


def _blowup_bounds(cfg: RunConfig, u0: Field) -> dict:
    if cfg.gamma != 0:
        return {"applicable": False, "reason": "dispersion is nonzero"}
    m0 = m_from_u(u0).values
    if m0.min() < -1e-10 * max(1.0, float(np.abs(m0).max())):
        return {"applicable": False, "reason": "momentum changes sign"}
    x0 = cfg["diagnostics.x0"]
    wanted = cfg["diagnostics.blowup_case"]
    if x0 is None:
        order = ("i", "ii", "iii") if wanted == "auto" else (wanted,)
        for case in order:
            x0 = diag.best_probe_point(u0, case)
            if x0 is not None:
                break
    if x0 is None:
        return {"applicable": False, "reason": f"no grid point satisfies case {wanted}"}
    b = diag.blowup_upper_bound(u0, x0)
    out = {"applicable": bool(b.cases), **b.as_dict()}
    tc = diag.threshold_comparison(u0, b.x0)
    out["threshold_comparison"] = {
        "current": tc.current, "earlier": tc.earlier,
        "current_is_weaker_requirement": tc.current_is_weaker_requirement,
    }
    return out


def _run_diagnostics(cfg: RunConfig, traj: Trajectory, u0: Field) -> dict:
    out = {}
    g = traj.grid
    if cfg["diagnostics.blowup_monitor"]:
        mon = diag.blowup_monitor(traj)
        out["blowup_monitor"] = {
            "min_M": float(mon.min_M.min()),
            "max_cumulative": float(mon.cumulative[-1]),
            "final_phase_monotone": mon.final_phase_monotone(),
        }
        if traj.termination is Termination.BLOWUP_DETECTED:
            try:
                probe = diag.blowup_rate_probe(traj)
                out["rate_probe"] = {"T0": probe.T0, "minimum": probe.minimum,
                                     "products": probe.products}
            except ValueError as exc:
                out["rate_probe"] = {"error": str(exc)}
    if cfg.gamma == 0 and traj.records[0].min_m >= -1e-10:
        out["min_m"] = sign_preservation_check(traj)
    if cfg["diagnostics.flow"]:
        w = cfg["diagnostics.flow_window"]
        labels = g.x[np.abs(g.x) < w]
        labels = labels[:: max(1, labels.size // cfg["diagnostics.flow_labels"])]
        flow = evolve_flow(traj, labels)
        out["flow"] = {"min_qx": float(flow.deformation.min()), "monotone": flow.is_monotone()}
        if cfg.gamma == 0:
            out["flow"]["invariant_error"] = lagrangian_invariant_error(traj, flow)
    theta = cfg["diagnostics.persistence.theta"]
    if theta is not None:
        w = diag.WeightProfile(theta, cfg["diagnostics.persistence.N"])
        norms = [diag.persistence_norms(s, w) for s in traj.snapshots]
        out["persistence"] = {
            "times": [s.t for s in traj.snapshots], "norms": norms,
            "growth": max(sum(v) for v in norms) / sum(norms[0]) if norms else None,
            "tail_exponent": diag.tail_exponent(traj.snapshots[-1].u) if norms else None,
        }
    s = cfg["diagnostics.besov.s"]
    if s is not None:
        spec = besov.build_cutoffs(g)
        p, r = cfg["diagnostics.besov.p"], cfg["diagnostics.besov.r"]
        out["besov"] = {
            "q_max": spec.q_max, "q_top": spec.q_top,
            "partition_error": spec.partition_error(),
            "norms": [besov.besov_norm(st.u, s, p, r, spec) for st in traj.snapshots],
        }
        eps = cfg["diagnostics.stability.perturbation"]
        if eps is not None:
            v0 = u0 + eps * exact.gaussian(g).values
            rep = besov.stability_experiment(
                u0, v0, cfg.gamma, traj.control, traj.control.t_end
            )
            out["stability"] = {"C_hat": rep.C_hat, "complete": rep.complete,
                                "distance": rep.distance, "accumulated": rep.accumulated}
    lam = cfg["diagnostics.zero_curvature.lambda"]
    if lam is not None:
        out["zero_curvature"] = {
            "lambda": lam, "form": cfg["diagnostics.zero_curvature.form"],
            "residual": diag.zero_curvature_residual(
                traj, lam, cfg["diagnostics.zero_curvature.form"]
            ),
        }
    if cfg.initial_kind == "peakon" and len(traj.snapshots) >= 2:
        first, last = traj.snapshots[0], traj.snapshots[-1]
        if last.t > first.t:
            speed = (exact.crest_position(last.u) - exact.crest_position(first.u)) / (
                last.t - first.t
            )
            c0 = cfg["initial.c"]
            out["peakon"] = {"c": c0, "crest_speed": speed,
                             "relative_error": abs(speed - c0) / c0}
    c = cfg["diagnostics.traveling_wave.c"]
    if c is not None:
        probe = diag.traveling_wave_residual(u0, c)
        out["traveling_wave"] = {"c": c, "pde_residual": probe.pde_norm,
                                 "identity_residual": probe.identity_norm}
    return out


def write_timeseries(path: Path, traj: Trajectory):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMESERIES_COLUMNS)
        for r in traj.records:
            w.writerow([_fmt(v) for v in r.row()])


def write_snapshot(path: Path, state):
    g = state.grid
    ux = deriv_array(g, state.u.values, 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u", "m", "ux"])
        for row in zip(g.x, state.u.values, state.m.values, ux):
            w.writerow([_fmt(v) for v in row])


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> RunResult:
    out = Path(out_dir if out_dir is not None else cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    g = make_grid(cfg.L, cfg.n)
    u0 = initial_field(cfg, g)
    existence = diag.existence_lower_bound(u0, cfg.gamma)
    t_end = cfg["control.t_end"]
    if cfg["control.t_end_fraction"] is not None:
        t_end = cfg["control.t_end_fraction"] * existence.T_lower
    snaps = [t for t in cfg["output.snapshots"] if t <= t_end] or [0.0, t_end]
    ctrl = cfg.step_control(t_end)
    log.info("running %s on L=%g n=%d to t=%g", cfg.initial_kind, cfg.L, cfg.n, t_end)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        traj = simulate(u0, cfg.gamma, ctrl, outputs=snaps, store_steps=cfg["diagnostics.flow"])
        diags = _run_diagnostics(cfg, traj, u0)
    code = EXIT_CODES[traj.termination]

    bounds = {"existence": existence.as_dict()}
    bounds["existence"]["sup_ratio"] = (
        diag.m_sup_bound_check(traj, existence)
        if traj.final_time < existence.curve_horizon else None
    )
    bounds["existence"]["early_blowup"] = diag.early_blowup(traj, existence)
    if cfg["diagnostics.bounds"]:
        bounds["blowup"] = _blowup_bounds(cfg, u0)
    detected = {"termination": traj.termination.value, "reason": traj.blowup_reason,
                "stop_time": traj.final_time}
    if "rate_probe" in diags and "T0" in diags["rate_probe"]:
        detected["breaking_time_estimate"] = diags["rate_probe"]["T0"]
    bounds["detected"] = detected
    blow = bounds.get("blowup", {})
    if traj.termination is Termination.BLOWUP_DETECTED and blow.get("applicable"):
        limit = 1.05 * blow["bound"]
        detected["within_upper_bound"] = bool(traj.final_time <= limit)
        if "breaking_time_estimate" in detected:
            detected["estimate_within_upper_bound"] = bool(
                detected["breaking_time_estimate"] <= limit
            )

    write_timeseries(out / "timeseries.csv", traj)
    files = ["timeseries.csv"]
    for i, st in enumerate(traj.snapshots):
        name = f"snapshot_{i:03d}.csv"
        write_snapshot(out / name, st)
        files.append(name)
    with open(out / "bounds.json", "w") as fh:
        json.dump(_jsonable(bounds), fh, indent=2, sort_keys=True)
    with open(out / "diagnostics.json", "w") as fh:
        json.dump(_jsonable(diags), fh, indent=2, sort_keys=True)
    files += ["bounds.json", "diagnostics.json"]
    manifest = {
        "config": cfg.to_text(),
        "resolved_t_end": t_end,
        "termination": traj.termination.value,
        "blowup_reason": traj.blowup_reason,
        "exit_code": code,
        "final_time": traj.final_time,
        "accepted_steps": len(traj.records) - 1,
        "snapshot_times": [s.t for s in traj.snapshots],
        "warnings": sorted({str(w.message) for w in caught}),
        "files": files,
        "versions": {"mch": __version__, "numpy": np.__version__,
                     "python": platform.python_version(), "kernels": kernels.BACKEND},
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
    return RunResult(code, out, traj, bounds, diags)


def check(out_dir: str | Path) -> list[str]:
    """Re-validate invariants from the files of a finished run; returns problems."""
    out = Path(out_dir)
    problems = []
    manifest = json.loads((out / "manifest.json").read_text())
    cfg = parse_config(manifest["config"])
    term = Termination(manifest["termination"])
    if EXIT_CODES[term] != manifest["exit_code"]:
        problems.append("exit code does not match termination")
    with open(out / "timeseries.csv") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TIMESERIES_COLUMNS:
        problems.append("timeseries header differs from the fixed column order")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    col = {name: data[:, i] for i, name in enumerate(TIMESERIES_COLUMNS)}
    if not np.all(np.isfinite(data)):
        problems.append("non-finite entries in timeseries")
    if np.any(np.diff(col["t"]) <= 0):
        problems.append("time column is not strictly increasing")
    if np.any(np.diff(col["cum_int_mux"]) < 0):
        problems.append("cumulative integral decreases")
    if not np.allclose(col["H0"], col["I1"], rtol=1e-8, atol=1e-14):
        problems.append("H0 differs from I1")
    if not np.allclose(col["H1"], col["I2"] / 4, rtol=1e-12, atol=1e-15):
        problems.append("H1 differs from I2 / 4")
    g = make_grid(cfg.L, cfg.n)
    for name in manifest["files"]:
        if not name.startswith("snapshot_"):
            continue
        snap = np.genfromtxt(out / name, delimiter=",", names=True)
        u = Field(g, snap["u"])
        if np.max(np.abs(m_from_u(u).values - snap["m"])) > 1e-8:
            problems.append(f"{name}: m is not u - u_xx")
    bounds = json.loads((out / "bounds.json").read_text())
    if bounds["existence"].get("early_blowup"):
        problems.append("blow-up detected before the guaranteed lifespan")
    ratio = bounds["existence"].get("sup_ratio")
    if ratio is not None and ratio > 1 + 1e-6:
        problems.append(f"sup m exceeds the growth curve (ratio {ratio:.6g})")
    if bounds["detected"].get("within_upper_bound") is False:
        problems.append("breaking detected later than 1.05 times the upper bound")
    return problems


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mch", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one configuration (or a sweep)")
    r.add_argument("--config", help="key = value document")
    r.add_argument("--preset", help="start from a named preset")
    r.add_argument("--out", help="output directory (default: output.dir)")
    r.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--sweep", metavar="KEY=V1,V2,...",
                   help=f"run one configuration per value concurrently (threads: ${THREADS_ENV})")
    sub.add_parser("presets", help="list preset names")
    c = sub.add_parser("check", help="re-validate invariants of an output directory")
    c.add_argument("dir")
    return ap


def _load(args) -> str:
    text = Path(args.config).read_text() if args.config else ""
    if args.preset:
        text = f"preset = {args.preset}\n" + text
    return text


def _sweep(args, text) -> int:
    key, _, values = args.sweep.partition("=")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not key or not items:
        raise ConfigError("--sweep: expected KEY=V1,V2,...")
    cfgs = [parse_config(text, args.override + [f"{key}={v}"]) for v in items]
    root = Path(args.out or cfgs[0]["output.dir"])
    workers = int(os.environ.get(THREADS_ENV, "0")) or min(len(cfgs), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda cv: run(cv[0], root / f"{key}={cv[1]}"), zip(cfgs, items)))
    for v, res in zip(items, results):
        print(f"{key}={v}: {res.trajectory.termination.value} (exit {res.exit_code})")
    return max(r.exit_code for r in results)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "presets":
            for name, text in describe():
                print(f"{name:18s} {text}")
            return 0
        if args.command == "check":
            problems = check(args.dir)
            for p in problems:
                print(f"FAIL {p}")
            print("ok" if not problems else f"{len(problems)} problem(s)")
            return 0 if not problems else EXIT_USAGE
        text = _load(args)
        if not text.strip() and not args.override:
            raise ConfigError("run: give --config, --preset or --override")
        if args.sweep:
            return _sweep(args, text)
        cfg = parse_config(text, args.override)
        res = run(cfg, args.out)
        print(f"{res.trajectory.termination.value} at t={res.trajectory.final_time:.6g}; "
              f"wrote {res.out_dir}")
        return res.exit_code
    except (ConfigError, OSError) as exc:
        print(f"mch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
