"""Command-line front end.

Subcommands:

* ``simulate``     run true and model flows from a config file, write both
                   trajectories, the measured and recurrence deviation
                   series, and a run manifest
* ``sphere-plane`` canonical curved-truth / flat-model demo with the
                   closed-form comparison and frequency report
* ``stability``    sweep a (K, h) grid through the regime classifier
* ``estimate-k``   per-step curvature estimates from a deviation CSV

Exit codes: 0 success, 2 invalid configuration or input file, 3 chart
exit, 4 recurrence divergence abort.  ``LEDR_OUT_DIR`` supplies the
default output root.  All outputs are deterministic for a given config;
figures are rendered alongside unless ``--no-figures``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import sphere_plane_experiment
from .config import ExperimentConfig, load_config
from .discrete import (
    DiscreteLedrSeries,
    classify_stability,
    estimate_curvature,
    estimate_summary,
    jacobi_action_on_trajectory,
    run_recurrence,
)
from .errors import (
    ChartExitError,
    ConfigError,
    DivergenceError,
    InvalidParameterError,
    LedrError,
    NoOscillationError,
    SchemaError,
)
from .geodesic import integrate_geodesic, shadow_integrate
from .io import (
    fmt,
    read_ledr_csv,
    write_json,
    write_ledr_csv,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CHART = 3
EXIT_DIVERGENCE = 4


def _out_dir(arg) -> Path:
    root = arg or os.environ.get("LEDR_OUT_DIR") or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(config: ExperimentConfig, out_dir: Path, figures: bool = True) -> dict:
    true_traj = integrate_geodesic(
        config.world_true.connection, config.x0, config.v0, config.h, config.steps, config.scheme
    )
    model_traj = shadow_integrate(
        config.world_model.connection, config.x0, config.v0_model, config.h, config.steps,
        config.scheme,
    )
    measured = DiscreteLedrSeries(
        config.h, true_traj.points - model_traj.points, origin="trajectory_difference"
    )
    # theory side: rerun the recurrence from the first two measured samples
    action = jacobi_action_on_trajectory(config.world_true.connection, model_traj)
    if config.steps >= 2:
        predicted = run_recurrence(
            measured.xi[0], measured.xi[1], config.steps - 1, config.h, action
        )
    else:
        predicted = DiscreteLedrSeries(config.h, measured.xi[:2], origin="recurrence")

    files = {
        "trajectory_true.csv": lambda p: write_trajectory_csv(p, true_traj),
        "trajectory_model.csv": lambda p: write_trajectory_csv(p, model_traj),
        "ledr_difference.csv": lambda p: write_ledr_csv(p, measured),
        "ledr_recurrence.csv": lambda p: write_ledr_csv(p, predicted),
    }
    for name, writer in files.items():
        writer(out_dir / name)

    manifest = {
        "command": "simulate",
        "version": __version__,
        "config": config.raw,
        "world_true": config.world_true.name,
        "world_model": config.world_model.name,
        "h": config.h,
        "steps": config.steps,
        "scheme": config.scheme,
        "seed": config.seed,
        "rows": config.steps + 1,
        "outputs": sorted(files),
        "max_deviation_norm": float(measured.norms.max()),
        "max_recurrence_gap": float(np.abs(predicted.xi - measured.xi).max()),
    }
    write_json(out_dir / "manifest.json", manifest)
    if figures:
        from .figures import render_series

        render_series(
            out_dir / "ledr.png", measured.times, measured.xi,
            f"deviation: {config.world_true.name} vs {config.world_model.name}",
        )
    return manifest


def cmd_sphere_plane(
    r: float, h: float, horizon: float, out_dir: Path,
    epsilon: float = 1e-3, figures: bool = True,
) -> dict:
    result = sphere_plane_experiment(r, h, horizon, epsilon)
    write_ledr_csv(out_dir / "ledr_simulated.csv", result.series)
    closed = DiscreteLedrSeries(h, result.closed_form, origin="measured")
    write_ledr_csv(out_dir / "ledr_closed_form.csv", closed)
    report = {
        "command": "sphere-plane",
        "version": __version__,
        "r": result.r,
        "h": result.h,
        "epsilon": result.epsilon,
        "omega_fit": result.fit.omega,
        "omega_predicted": result.omega_predicted,
        "omega_d": result.omega_d,
        "abs_omega_error": abs(result.fit.omega - result.omega_predicted),
        "scaled_omega_error": abs(result.fit.omega * result.r - 1.0),
        "fit_residual": result.fit.residual,
        "max_abs_gap_vs_closed_form": result.max_abs_gap,
        "rows": len(result.series),
    }
    write_json(out_dir / "frequency_report.json", report)
    if figures:
        from .figures import render_sphere_plane

        render_sphere_plane(
            out_dir / "sphere_plane.png", result.series.times,
            result.series.xi[:, 1], result.closed_form[:, 1], r,
        )
    return report


def _grid(lo: float, hi: float, count: int, name: str) -> np.ndarray:
    if count < 1:
        raise ConfigError(f"{name} grid needs at least one value", field=name)
    if count == 1:
        return np.array([lo])
    if not hi > lo:
        raise ConfigError(f"{name} range must satisfy max > min", field=name)
    return np.linspace(lo, hi, count)


def cmd_stability(
    k_min: float, k_max: float, k_steps: int,
    h_min: float, h_max: float, h_steps: int,
    out_dir: Path, figures: bool = True,
) -> dict:
    if not h_min > 0:
        raise ConfigError(f"field 'h-min' must be positive, got {h_min}", field="h-min")
    k_values = _grid(k_min, k_max, k_steps, "k")
    h_values = _grid(h_min, h_max, h_steps, "h")
    rows = []
    regimes = {}
    for i, K in enumerate(k_values):
        for j, h in enumerate(h_values):
            report = classify_stability(float(K), float(h))
            regimes[(i, j)] = report.regime
            rows.append(
                [
                    fmt(K),
                    fmt(h),
                    fmt(report.lam),
                    report.regime,
                    fmt(report.omega_d) if report.omega_d is not None else "",
                    fmt(report.max_root_modulus),
                ]
            )
    import csv as _csv

    with open(out_dir / "stability.csv", "w", newline="") as handle:
        writer = _csv.writer(handle, lineterminator="\n")
        writer.writerow(["K", "h", "lambda", "regime", "omega_d", "max_root_modulus"])
        writer.writerows(rows)
    summary = {
        "command": "stability",
        "version": __version__,
        "k_values": [float(v) for v in k_values],
        "h_values": [float(v) for v in h_values],
        "cells": len(rows),
    }
    write_json(out_dir / "stability_summary.json", summary)
    if figures and len(k_values) > 1 and len(h_values) > 1:
        from .figures import render_stability_map

        render_stability_map(out_dir / "stability.png", k_values, h_values, regimes)
    return summary


def cmd_estimate_k(input_path, h, out_dir: Path, figures: bool = True) -> dict:
    series = read_ledr_csv(input_path, origin="measured")
    if h is not None:
        if not math.isclose(series.h, h, rel_tol=1e-9, abs_tol=0.0):
            raise ConfigError(
                f"file step {series.h} disagrees with --h {h}", field="h"
            )
    estimate = estimate_curvature(series)
    summary = estimate_summary(estimate)
    payload = {
        "command": "estimate-k",
        "version": __version__,
        "h": series.h,
        "rows": len(series),
        "k_values": [None if not v else float(k) for k, v in zip(estimate.k_values, estimate.valid)],
        "valid": [bool(v) for v in estimate.valid],
        "summary": summary,
    }
    write_json(out_dir / "estimate_k.json", payload)
    if figures:
        from .figures import render_curvature_estimate

        render_curvature_estimate(
            out_dir / "estimate_k.png", series.times, estimate.k_values, estimate.valid
        )
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ledr",
        description="Geodesic-flow model-error dynamics and resonance analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run true and model flows from a config file")
    sim.add_argument("--config", required=True, help="flat key=value config file")
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--no-figures", action="store_true")

    sp = sub.add_parser("sphere-plane", help="curved truth vs flat model demo")
    sp.add_argument("--r", type=float, default=1.0, help="sphere radius")
    sp.add_argument("--h", type=float, default=1e-3, help="step size")
    sp.add_argument("--horizon", type=float, default=None, help="total time (default 4*pi*r)")
    sp.add_argument("--steps", type=int, default=None, help="step count alternative to --horizon")
    sp.add_argument("--epsilon", type=float, default=1e-3, help="transverse velocity mismatch")
    sp.add_argument("--out", default=None)
    sp.add_argument("--no-figures", action="store_true")

    st = sub.add_parser("stability", help="sweep the (K, h) stability grid")
    st.add_argument("--k-min", type=float, required=True)
    st.add_argument("--k-max", type=float, default=None)
    st.add_argument("--k-steps", type=int, default=1)
    st.add_argument("--h-min", type=float, required=True)
    st.add_argument("--h-max", type=float, default=None)
    st.add_argument("--h-steps", type=int, default=1)
    st.add_argument("--out", default=None)
    st.add_argument("--no-figures", action="store_true")

    est = sub.add_parser("estimate-k", help="estimate curvature from a deviation CSV")
    est.add_argument("--input", required=True)
    est.add_argument("--h", type=float, default=None, help="expected step (validated against file)")
    est.add_argument("--out", default=None)
    est.add_argument("--no-figures", action="store_true")

    for p in (sim, sp, st, est):
        p.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = _out_dir(getattr(args, "out", None))
        figures = not getattr(args, "no_figures", False)
        if args.command == "simulate":
            cmd_simulate(load_config(args.config), out, figures=figures)
        elif args.command == "sphere-plane":
            if args.r <= 0:
                raise ConfigError(f"field 'r' must be positive, got {args.r}", field="r")
            if args.horizon is not None:
                horizon = args.horizon
            elif args.steps is not None:
                horizon = args.steps * args.h
            else:
                horizon = 4.0 * math.pi * args.r
            report = cmd_sphere_plane(
                args.r, args.h, horizon, out, epsilon=args.epsilon, figures=figures
            )
            print(
                f"omega_fit={report['omega_fit']:.6f} "
                f"predicted={report['omega_predicted']:.6f} "
                f"abs_error={report['abs_omega_error']:.2e}"
            )
        elif args.command == "stability":
            k_max = args.k_max if args.k_max is not None else args.k_min
            h_max = args.h_max if args.h_max is not None else args.h_min
            cmd_stability(args.k_min, k_max, args.k_steps, args.h_min, h_max, args.h_steps,
                          out, figures=figures)
        elif args.command == "estimate-k":
            payload = cmd_estimate_k(args.input, args.h, out, figures=figures)
            med = payload["summary"]["median"]
            print(f"median_k={med if med is None else f'{med:.9f}'} "
                  f"n_valid={payload['summary']['n_valid']}")
        return EXIT_OK
    except (ConfigError, SchemaError, InvalidParameterError, NoOscillationError) as exc:
        field = getattr(exc, "field", None)
        where = f" (field: {field})" if field else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_VALIDATION
    except ChartExitError as exc:
        print(f"chart exit: {exc} (step {exc.step})", file=sys.stderr)
        return EXIT_CHART
    except DivergenceError as exc:
        print(f"divergence abort: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except LedrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
