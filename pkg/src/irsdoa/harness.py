"""Monte-Carlo experiment harness: sweeps, RMSE aggregation, CSV export.

A sweep varies one axis (transmit power, target count, SE/RE split under a
fixed element budget, or slot count) over a base scene, runs seeded
independent trials per point, and reports RMSE per estimator next to the
root-CRB.  Trials derive their streams from (master_seed, point, trial),
so results are independent of execution order and parallelism.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .anm import AnmConfig, estimate_anm
from .crb import crb_values, fisher_matrix
from .music import DegenerateSubspaceError, MusicConfig, estimate_music
from .numerics import NumericError
from .scene import (
    ConfigError,
    SceneConfig,
    Target,
    build_measurement,
    dbm_to_watts,
    scene_from_dict,
    synthesize_echo,
)

SWEEP_AXES = ("tx_power_dbm", "n_targets", "n_ses_tradeoff", "n_slots")

ESTIMATORS = ("ANM", "MUSIC")

#: Angle assignment for the n_targets axis: the first K entries are used.
TARGET_ANGLE_SEQUENCE_DEG = (-60.0, 60.0, -45.0, 45.0, -30.0, 30.0, -15.0, 15.0, 0.0)

SUMMARY_COLUMNS = ("axis", "axis_value", "estimator", "rmse_deg", "rcrb_deg",
                   "trials", "failures")
DETAIL_COLUMNS = ("axis_value", "trial", "estimator", "true_angles_deg",
                  "est_angles_deg", "sq_err_sum_deg2", "solver_iters",
                  "degraded", "failed")


class EmptyResultError(ValueError):
    """RMSE was requested over zero usable trial records."""


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    points: tuple
    trials: int
    master_seed: int
    estimators: tuple
    base_scene: SceneConfig
    measurement_kind: str
    anm_cfg: AnmConfig
    music_cfg: MusicConfig

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.points:
            raise ConfigError("points must be non-empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad or not self.estimators:
            raise ConfigError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if self.measurement_kind not in ("dft", "random_phase"):
            raise ConfigError('measurement kind must be "dft" or "random_phase"')


@dataclass(frozen=True)
class TrialRecord:
    axis_value: object
    trial_index: int
    estimator: str
    true_angles_deg: tuple
    est_angles_deg: tuple
    sq_err_sum_deg2: float | None
    solver_iters: int | None
    degraded: bool
    failed: bool


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: object
    estimator: str
    rmse_deg: float | None
    rcrb_deg: float | None
    trials: int
    failures: int


def derive_seed(master_seed, *path):
    """Deterministic child seed for a (master_seed, *indices) stream path."""
    entropy = [int(master_seed), *[int(p) for p in path]]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def sorted_pairing_error(true_deg, est_deg):
    """Sum of squared differences after ascending pairwise matching."""
    t = np.sort(np.asarray(true_deg, dtype=float))
    e = np.sort(np.asarray(est_deg, dtype=float))
    return float(np.sum((t - e) ** 2))


def rmse(records):
    """RMSE in degrees over the non-failed records of one (point, estimator).

    RMSE = sqrt(sum_i ||theta - theta_hat_i||^2 / (K * n_trials)); failed
    trials are excluded (their count is reported separately).
    """
    usable = [r for r in records if not r.failed]
    if not usable:
        raise EmptyResultError("no usable trial records")
    k = len(usable[0].true_angles_deg)
    total = sum(r.sq_err_sum_deg2 for r in usable)
    return math.sqrt(total / (k * len(usable)))


def run_trial(scene, measurement_kind, estimators, master_seed, trial_index,
              axis_value=None, anm_cfg=None, music_cfg=None):
    """One seeded trial: draw D and noise, run the estimators, record.

    Random-phase schedules are redrawn per trial; the DFT schedule is
    fixed.  Estimator failures are captured in the record, never raised.
    """
    anm_cfg = anm_cfg or AnmConfig()
    music_cfg = music_cfg or MusicConfig()
    k = scene.n_targets
    true_deg = tuple(sorted(math.degrees(t.angle) for t in scene.targets))

    if measurement_kind == "random_phase":
        d = build_measurement("random_phase", scene.n_res, scene.n_slots,
                              seed=derive_seed(master_seed, trial_index, 0))
    else:
        d = build_measurement("dft", scene.n_res, scene.n_slots)
    noise_seed = derive_seed(master_seed, trial_index, 1)
    echo = synthesize_echo(scene, d, noise_seed=noise_seed)

    records = []
    for name in ESTIMATORS:
        if name not in estimators:
            continue
        try:
            if name == "ANM":
                est = estimate_anm(echo, d, k, anm_cfg,
                                   theta_bi=scene.irs_arrival_angle)
                iters = est.diagnostics.iterations
            else:
                est = estimate_music(echo, k, music_cfg)
                iters = None
            est_deg = tuple(np.rad2deg(est.angles))
            records.append(TrialRecord(
                axis_value=axis_value, trial_index=trial_index, estimator=name,
                true_angles_deg=true_deg, est_angles_deg=est_deg,
                sq_err_sum_deg2=sorted_pairing_error(true_deg, est_deg),
                solver_iters=iters, degraded=est.degraded, failed=False,
            ))
        except (DegenerateSubspaceError, NumericError, ValueError):
            records.append(TrialRecord(
                axis_value=axis_value, trial_index=trial_index, estimator=name,
                true_angles_deg=true_deg, est_angles_deg=(),
                sq_err_sum_deg2=None, solver_iters=None,
                degraded=False, failed=True,
            ))
    return records


def scene_for_point(spec, value):
    """Base scene mutated along the sweep axis."""
    base = spec.base_scene
    if spec.axis == "tx_power_dbm":
        return replace(base, tx_power=dbm_to_watts(float(value)))
    if spec.axis == "n_targets":
        k = int(value)
        if not (1 <= k <= len(TARGET_ANGLE_SEQUENCE_DEG)):
            raise ConfigError(
                f"n_targets axis supports 1..{len(TARGET_ANGLE_SEQUENCE_DEG)} targets"
            )
        proto = base.targets[0]
        targets = tuple(
            Target(angle=math.radians(a), distance=proto.distance, rcs=proto.rcs)
            for a in TARGET_ANGLE_SEQUENCE_DEG[:k]
        )
        return replace(base, targets=targets)
    if spec.axis == "n_ses_tradeoff":
        budget = base.n_ses + base.n_res
        m = int(value)
        if not (1 <= m <= budget - 1):
            raise ConfigError(f"n_ses {m} leaves no REs under budget {budget}")
        return replace(base, n_ses=m, n_res=budget - m)
    if spec.axis == "n_slots":
        return replace(base, n_slots=int(value))
    raise ConfigError(f"unknown axis {spec.axis!r}")


def point_rcrb_deg(spec, scene):
    """Root-CRB for one sweep point, in degrees.

    Uses the fixed DFT covariance for DFT schedules; for random-phase
    schedules the i.i.d. expectation L*I stands in for D D^H (one bound is
    reported even though per-realization bounds vary).
    """
    try:
        if spec.measurement_kind == "dft":
            d = build_measurement("dft", scene.n_res, scene.n_slots)
            fisher = fisher_matrix(scene, d)
        else:
            fisher = fisher_matrix(scene, None, expected_covariance=True)
        return math.degrees(crb_values(fisher).rcrb)
    except NumericError:
        return None


def _trial_task(args):
    scene, kind, estimators, point_seed, trial, value, anm_cfg, music_cfg = args
    return run_trial(scene, kind, estimators, point_seed, trial,
                     axis_value=value, anm_cfg=anm_cfg, music_cfg=music_cfg)


def run_sweep(spec, jobs=1):
    """Run the full sweep; returns (summary rows, detail records).

    Output is a deterministic function of the spec (and its master seed)
    no matter the `jobs` level: trials are seeded by index and results are
    aggregated in (point, trial, estimator) order.
    """
    tasks = []
    for p_idx, value in enumerate(spec.points):
        scene = scene_for_point(spec, value)
        point_seed = derive_seed(spec.master_seed, p_idx)
        for trial in range(spec.trials):
            tasks.append((scene, spec.measurement_kind, spec.estimators,
                          point_seed, trial, value, spec.anm_cfg, spec.music_cfg))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_trial = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        per_trial = [_trial_task(t) for t in tasks]

    records = [rec for trial_records in per_trial for rec in trial_records]

    summary = []
    for p_idx, value in enumerate(spec.points):
        scene = scene_for_point(spec, value)
        rcrb = point_rcrb_deg(spec, scene)
        chunk = per_trial[p_idx * spec.trials:(p_idx + 1) * spec.trials]
        point_records = [r for trial_records in chunk for r in trial_records]
        for name in ESTIMATORS:
            if name not in spec.estimators:
                continue
            est_records = [r for r in point_records if r.estimator == name]
            failures = sum(1 for r in est_records if r.failed)
            try:
                value_rmse = rmse(est_records)
            except EmptyResultError:
                value_rmse = None
            summary.append(SweepRow(
                axis=spec.axis, axis_value=value, estimator=name,
                rmse_deg=value_rmse, rcrb_deg=rcrb,
                trials=len(est_records), failures=failures,
            ))
    return summary, records


# --- CSV layer --------------------------------------------------------------

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _angles_cell(angles):
    return ";".join(repr(float(a)) for a in angles)


def write_summary_csv(rows, path):
    """Write sweep summary rows (header always present)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for r in rows:
            writer.writerow([
                r.axis, _cell(r.axis_value), r.estimator, _cell(r.rmse_deg),
                _cell(r.rcrb_deg), r.trials, r.failures,
            ])


def write_detail_csv(records, path):
    """Write per-trial detail records (angle lists ';'-separated)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DETAIL_COLUMNS)
        for r in records:
            writer.writerow([
                _cell(r.axis_value), r.trial_index, r.estimator,
                _angles_cell(r.true_angles_deg), _angles_cell(r.est_angles_deg),
                _cell(r.sq_err_sum_deg2), _cell(r.solver_iters),
                _cell(r.degraded), _cell(r.failed),
            ])


def export_csv(rows, path, kind="summary"):
    """Write a summary table or detail records to `path` as UTF-8 CSV."""
    if kind == "summary":
        write_summary_csv(rows, path)
    elif kind == "detail":
        write_detail_csv(rows, path)
    else:
        raise ValueError(f"unknown export kind {kind!r}")


# --- sweep-spec file boundary ----------------------------------------------

def _anm_cfg_from_dict(cfg):
    kwargs = {}
    for key in ("beta", "rho", "admm_penalty", "tolerance"):
        if key in cfg:
            kwargs[key] = None if cfg[key] is None else float(cfg[key])
    if "max_iters" in cfg:
        kwargs["max_iters"] = int(cfg["max_iters"])
    if "grid_step_deg" in cfg:
        kwargs["grid_step"] = math.radians(float(cfg["grid_step_deg"]))
    if "refine" in cfg:
        kwargs["refine"] = bool(cfg["refine"])
    try:
        return AnmConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"bad anm_cfg: {exc}") from exc


def _music_cfg_from_dict(cfg):
    kwargs = {}
    if "grid_step_deg" in cfg:
        kwargs["grid_step"] = math.radians(float(cfg["grid_step_deg"]))
    if "refine" in cfg:
        kwargs["refine"] = bool(cfg["refine"])
    try:
        return MusicConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"bad music_cfg: {exc}") from exc


def sweep_spec_from_dict(cfg, default_seed=42):
    """Build a SweepSpec from a parsed sweep-spec mapping."""
    if not isinstance(cfg, dict):
        raise ConfigError("sweep spec must be an object")
    for key in ("axis", "points", "trials", "base_scene"):
        if key not in cfg:
            raise ConfigError(f"sweep spec missing key {key!r}")
    base_scene, meas_spec = scene_from_dict(cfg["base_scene"])
    estimators = tuple(cfg.get("estimators", ESTIMATORS))
    return SweepSpec(
        axis=cfg["axis"],
        points=tuple(cfg["points"]),
        trials=int(cfg["trials"]),
        master_seed=int(cfg.get("master_seed", default_seed)),
        estimators=estimators,
        base_scene=base_scene,
        measurement_kind=meas_spec["kind"],
        anm_cfg=_anm_cfg_from_dict(cfg.get("anm_cfg", {})),
        music_cfg=_music_cfg_from_dict(cfg.get("music_cfg", {})),
    )


def load_sweep_spec(path, default_seed=42):
    """Load a JSON sweep-spec file."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"sweep spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"sweep spec {path} is not valid JSON: {exc}") from exc
    return sweep_spec_from_dict(cfg, default_seed=default_seed)
