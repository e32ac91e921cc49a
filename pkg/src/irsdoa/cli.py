"""Command-line entry point.

Subcommands: `simulate` (synthesize one echo), `estimate` (single-shot DoA
estimate), `crb` (Fisher/CRB report), `sweep` (Monte-Carlo RMSE sweep).
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace

import numpy as np

from .anm import AnmConfig, estimate_anm
from .crb import closed_form_single_crb, crb_values, fisher_matrix
from .harness import (
    derive_seed,
    load_sweep_spec,
    run_sweep,
    write_detail_csv,
    write_summary_csv,
)
from .music import DegenerateSubspaceError, MusicConfig, estimate_music
from .numerics import NumericError
from .scene import ConfigError, load_scene, measurement_for_scene, synthesize_echo

log = logging.getLogger("irsdoa")


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (default 42)")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")


def _resolve_seed(args):
    return 42 if args.seed is None else args.seed


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _cmd_simulate(args):
    scene, meas_spec = load_scene(args.scene)
    seed = _resolve_seed(args)
    d = measurement_for_scene(scene, meas_spec, seed=derive_seed(seed, 0))
    echo = synthesize_echo(scene, d, noise_seed=derive_seed(seed, 1))
    log.info("synthesized %dx%d echo (%s schedule)", echo.n_ses, echo.n_slots,
             d.kind)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv_writer(fh)
        writer.writerow(["se_index", "slot", "re", "im"])
        for m in range(echo.n_ses):
            for ell in range(echo.n_slots):
                z = echo.samples[m, ell]
                writer.writerow([m, ell, repr(float(z.real)), repr(float(z.imag))])
    return 0


def _cmd_estimate(args):
    scene, meas_spec = load_scene(args.scene)
    seed = _resolve_seed(args)
    d = measurement_for_scene(scene, meas_spec, seed=derive_seed(seed, 0))
    echo = synthesize_echo(scene, d, noise_seed=derive_seed(seed, 1))
    grid_kwargs = {}
    if args.grid_step_deg is not None:
        grid_kwargs["grid_step"] = math.radians(args.grid_step_deg)
    if args.method == "anm":
        est = estimate_anm(echo, d, args.k, AnmConfig(**grid_kwargs),
                           theta_bi=scene.irs_arrival_angle)
        sol = est.diagnostics
        log.info("ANM solver: %d iterations, residuals %.2e/%.2e, converged=%s",
                 sol.iterations, sol.primal_residual, sol.dual_residual,
                 sol.converged)
    else:
        est = estimate_music(echo, args.k, MusicConfig(**grid_kwargs))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv_writer(fh)
        writer.writerow(["method", "index", "angle_deg", "peak_value", "degraded"])
        for i, (a, v) in enumerate(zip(est.angles_deg(), est.peak_values)):
            writer.writerow([est.method, i, repr(float(a)), repr(float(v)),
                             "true" if est.degraded else "false"])
    return 0


def _cmd_crb(args):
    scene, meas_spec = load_scene(args.scene)
    if meas_spec["kind"] == "dft":
        d = measurement_for_scene(scene, meas_spec)
        fisher = fisher_matrix(scene, d)
    else:
        log.info("random-phase schedule: reporting the expectation bound "
                 "(D D^H replaced by L*I)")
        fisher = fisher_matrix(scene, None, expected_covariance=True)
    closed = None
    if args.closed_form:
        if scene.n_targets != 1:
            raise ConfigError("--closed-form requires a single-target scene")
        closed = closed_form_single_crb(scene)
    report = crb_values(fisher, closed_form_single=closed)
    deg2 = math.degrees(1.0) ** 2
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = _csv_writer(fh)
        header = ["target", "angle_deg", "crb_rad2", "crb_deg2", "rcrb_deg"]
        if closed is not None:
            header.append("closed_form_crb_deg2")
        writer.writerow(header)
        for i, (tgt, value) in enumerate(zip(scene.targets, report.crb_per_target)):
            row = [i, repr(math.degrees(tgt.angle)), repr(float(value)),
                   repr(float(value) * deg2), repr(math.degrees(report.rcrb))]
            if closed is not None:
                row.append(repr(closed * deg2))
            writer.writerow(row)
    return 0


def _cmd_sweep(args):
    spec = load_sweep_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, master_seed=args.seed)
    log.info("sweep axis=%s points=%s trials=%d seed=%d jobs=%d",
             spec.axis, list(spec.points), spec.trials, spec.master_seed,
             args.jobs)
    if spec.measurement_kind == "random_phase":
        log.info("random-phase schedule: rcrb_deg column is the expectation "
                 "bound (D D^H replaced by L*I)")
    summary, records = run_sweep(spec, jobs=args.jobs)
    write_summary_csv(summary, args.out)
    if args.detail:
        write_detail_csv(records, args.detail)
    for row in summary:
        log.info("point %s %s: rmse=%s rcrb=%s failures=%d/%d",
                 row.axis_value, row.estimator, row.rmse_deg, row.rcrb_deg,
                 row.failures, row.trials)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irsdoa",
        description="Multi-target DoA estimation lab for a semi-passive IRS: "
                    "ANM and MUSIC estimators, CRBs, Monte-Carlo sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize one echo matrix to CSV")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="single-shot DoA estimate")
    p.add_argument("--scene", required=True)
    p.add_argument("--method", required=True, choices=("anm", "music"))
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--grid-step-deg", type=float, default=None)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("crb", help="Fisher/CRB report for a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--closed-form", action="store_true",
                   help="include the single-target closed form")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_crb)

    p = sub.add_parser("sweep", help="Monte-Carlo RMSE sweep to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--detail", default=None,
                   help="also write per-trial records to this CSV")
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr, format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, DegenerateSubspaceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"filesystem error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
