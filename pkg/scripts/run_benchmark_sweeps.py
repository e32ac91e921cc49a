#!/usr/bin/env python3
"""Run the four benchmark sweeps (RMSE vs transmit power / target count /
SE-RE split / slot count) and write summary + detail CSVs.

Desk scale (N=32, M=8, L=32) by default; --full-scale switches to the
N=64, L=64 geometry and will take considerably longer.
"""

import argparse
import copy
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from irsdoa.harness import run_sweep, sweep_spec_from_dict, write_detail_csv, write_summary_csv


def base_scene(full_scale):
    n = 64 if full_scale else 32
    return {
        "n_bs_antennas": 64,
        "n_res": n,
        "n_ses": 8,
        "n_slots": n,
        "carrier_freq_ghz": 28.0,
        "tx_power_dbm": 20.0,
        "noise_power_dbm": -120.0,
        "bs_irs_distance_m": 30.0,
        "bs_departure_angle_deg": -60.0,
        "irs_arrival_angle_deg": -60.0,
        "targets": [
            {"angle_deg": a, "distance_m": 5.0, "rcs_dbsm": 10.0}
            for a in (-10.0, 10.0, 30.0)
        ],
        "measurement": {"kind": "dft"},
    }


def sweep_specs(full_scale, trials, seed):
    scene = base_scene(full_scale)
    power_points = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]

    close_scene = copy.deepcopy(scene)
    close_scene["targets"][2]["angle_deg"] = 20.0
    close_scene["measurement"] = {"kind": "random_phase"}

    random_scene = copy.deepcopy(scene)
    random_scene["measurement"] = {"kind": "random_phase"}

    high_power_scene = copy.deepcopy(scene)
    high_power_scene["tx_power_dbm"] = 30.0

    budget = scene["n_res"] + scene["n_ses"]
    tradeoff_points = [m for m in (1, 2, 4, 8, 16, 32) if m < budget]

    slots_scene = copy.deepcopy(random_scene)
    slot_points = sorted({scene["n_res"] // 4, scene["n_res"] // 2,
                          3 * scene["n_res"] // 4, scene["n_res"],
                          3 * scene["n_res"] // 2, 2 * scene["n_res"]})

    common = {"trials": trials, "master_seed": seed,
              "estimators": ["ANM", "MUSIC"]}
    return {
        "power_dft": dict(common, axis="tx_power_dbm", points=power_points,
                          base_scene=scene),
        "power_random": dict(common, axis="tx_power_dbm", points=power_points,
                             base_scene=random_scene),
        "power_close_targets": dict(common, axis="tx_power_dbm",
                                    points=power_points, base_scene=close_scene),
        "n_targets": dict(common, axis="n_targets",
                          points=list(range(1, 10)), base_scene=high_power_scene),
        "ses_tradeoff": dict(common, axis="n_ses_tradeoff",
                             points=tradeoff_points, base_scene=scene),
        "n_slots": dict(common, axis="n_slots", points=slot_points,
                        base_scene=slots_scene),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--full-scale", action="store_true",
                        help="N=64, L=64 geometry (slow)")
    parser.add_argument("--only", default=None,
                        help="run a single sweep by name")
    args = parser.parse_args()

    if args.full_scale:
        print("warning: full-scale geometry (N=64, L=64); expect a long run",
              file=sys.stderr)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    specs = sweep_specs(args.full_scale, args.trials, args.seed)
    if args.only:
        specs = {args.only: specs[args.only]}

    for name, cfg in specs.items():
        spec = sweep_spec_from_dict(cfg)
        t0 = time.time()
        summary, records = run_sweep(spec, jobs=args.jobs)
        dt = time.time() - t0
        write_summary_csv(summary, outdir / f"{name}.csv")
        write_detail_csv(records, outdir / f"{name}_detail.csv")
        print(f"{name}: {len(spec.points)} points x {spec.trials} trials "
              f"in {dt:.1f}s -> {outdir / (name + '.csv')}")
        for row in summary:
            rmse = "-" if row.rmse_deg is None else f"{row.rmse_deg:.4f}"
            rcrb = "-" if row.rcrb_deg is None else f"{row.rcrb_deg:.4f}"
            print(f"  {row.axis_value:>6} {row.estimator:<5} rmse={rmse:>8} "
                  f"rcrb={rcrb:>8} failures={row.failures}/{row.trials}")


if __name__ == "__main__":
    main()
