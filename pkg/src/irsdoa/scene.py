"""Physical scene construction and echo synthesis for the semi-passive IRS.

Geometry: an N_b-antenna BS illuminates an IRS with N passive reflecting
elements (REs) and M active sensing elements (SEs); K point targets reflect
the signal back onto the SEs.  All arrays are half-wavelength ULAs.

The stacked snapshot model over L slots is

    Y = B diag(gains) Q^H D + noise,    Y in C^{M x L},

where column k of B is the SE steering vector at the target angle, column k
of Q is the RE steering vector at the reflected-path spatial frequency
pi*(sin theta_k - sin theta_BI), gains_k = sqrt(N_b*P_t)*alpha_g*alpha_k,
and D is the N x L RE phase schedule.  The BS beamformer is matched to the
known departure angle and appears only through the sqrt(N_b) factor.

All quantities here are SI (watts, meters, radians).  dBm / dBsm / degrees
exist only at the configuration-file boundary.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0

HALF_PI = math.pi / 2


class ConfigError(ValueError):
    """A configuration file or dict is malformed or out of range."""


def dbm_to_watts(x_dbm):
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w):
    return 10.0 * math.log10(x_w) + 30.0


def dbsm_to_sqm(x_dbsm):
    return 10.0 ** (x_dbsm / 10.0)


def sqm_to_dbsm(x_sqm):
    return 10.0 * math.log10(x_sqm)


@dataclass(frozen=True)
class Target:
    """One point target: DoA (radians), range (m), RCS (m^2, linear)."""

    angle: float
    distance: float
    rcs: float

    def __post_init__(self):
        if not (-HALF_PI < self.angle <= HALF_PI):
            raise ConfigError(f"target angle {self.angle} outside (-pi/2, pi/2]")
        if self.distance <= 0:
            raise ConfigError("target distance must be positive")
        if self.rcs <= 0:
            raise ConfigError("target RCS must be positive")


@dataclass(frozen=True)
class SceneConfig:
    """All physical parameters of the BS / IRS / target geometry and link."""

    n_bs_antennas: int
    n_res: int
    n_ses: int
    n_slots: int
    carrier_freq: float          # Hz
    tx_power: float              # W
    noise_power: float           # W
    bs_irs_distance: float       # m
    bs_departure_angle: float    # rad
    irs_arrival_angle: float     # rad
    targets: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("n_bs_antennas", "n_res", "n_ses", "n_slots"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("carrier_freq", "tx_power", "noise_power", "bs_irs_distance"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("bs_departure_angle", "irs_arrival_angle"):
            if not (-HALF_PI < getattr(self, name) <= HALF_PI):
                raise ConfigError(f"{name} outside (-pi/2, pi/2]")
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(self.targets) < 1:
            raise ConfigError("at least one target is required")

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def n_targets(self):
        return len(self.targets)

    def target_angles(self):
        return np.array([t.angle for t in self.targets])


@dataclass(frozen=True)
class MeasurementMatrix:
    """The N x L RE reflection schedule (unit-modulus entries)."""

    kind: str                    # "dft" | "random_phase"
    matrix: np.ndarray
    seed: int | None = None

    @property
    def n_res(self):
        return self.matrix.shape[0]

    @property
    def n_slots(self):
        return self.matrix.shape[1]

    def covariance(self):
        """D D^H, the N x N slot-summed phase covariance."""
        return self.matrix @ self.matrix.conj().T


@dataclass(frozen=True)
class EchoData:
    """Received M x L SE sample matrix plus noise-realization metadata."""

    samples: np.ndarray
    noise_seed: int | None = None
    noiseless: bool = False

    @property
    def n_ses(self):
        return self.samples.shape[0]

    @property
    def n_slots(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class ModelMatrices:
    """Noise-free model factors Y = b_mat diag(gains) q_mat^H D.

    `b_dot` / `q_dot` hold the per-target angle derivatives of the columns
    of `b_mat` / `q_mat` (chain factor pi*cos(theta) included).
    """

    b_mat: np.ndarray     # M x K SE steering
    q_mat: np.ndarray     # N x K RE steering at the reflected-path frequency
    gains: np.ndarray     # K complex, sqrt(N_b P_t) * alpha_g * alpha_k
    b_dot: np.ndarray     # M x K
    q_dot: np.ndarray     # N x K


def ula_steering(n, omega):
    """ULA response for per-element phase increment `omega` (radians).

    Entry m is exp(-1j*m*omega).  For a physical angle theta pass
    omega = pi*sin(theta); for the reflected path pass
    omega = pi*(sin(theta) - sin(theta_BI)).  Any real omega is legal.
    """
    return np.exp(-1j * omega * np.arange(n))


def steering_derivative(n, theta, theta_ref=None):
    """d/dtheta of the ULA response at omega = pi*(sin theta - sin theta_ref).

    Entry m is (-1j*m*pi*cos(theta)) * exp(-1j*m*omega).  `theta_ref=None`
    means a plain broadside reference (omega = pi*sin theta).  At
    theta = +-pi/2 the cosine vanishes and the zero vector is returned.
    """
    ref = 0.0 if theta_ref is None else theta_ref
    omega = math.pi * (math.sin(theta) - math.sin(ref))
    m = np.arange(n)
    return (-1j * math.pi * math.cos(theta) * m) * np.exp(-1j * omega * m)


def path_gain_bs_irs(bs_irs_distance, wavelength):
    """One-way LoS gain of the BS -> IRS link."""
    mag = wavelength / (4.0 * math.pi * bs_irs_distance)
    return mag * np.exp(-2j * math.pi * bs_irs_distance / wavelength)


def path_gain_target(distance, rcs, wavelength):
    """Two-way gain of the IRS REs -> target -> IRS SEs bounce."""
    mag = math.sqrt(wavelength**2 * rcs / (64.0 * math.pi**3 * distance**4))
    return mag * np.exp(-4j * math.pi * distance / wavelength)


def build_measurement(kind, n_res, n_slots, seed=None):
    """Construct the RE phase schedule D.

    "dft": columns are the first `n_slots` columns of the n_res-point DFT
    matrix, repeating cyclically when n_slots > n_res (D D^H = L*I when
    n_slots = n_res).  "random_phase": i.i.d. uniform phases on [0, 2*pi)
    drawn from the seeded stream.
    """
    if n_res < 1 or n_slots < 1:
        raise ConfigError("n_res and n_slots must be >= 1")
    if kind == "dft":
        n = np.arange(n_res)[:, None]
        cols = np.arange(n_slots)[None, :] % n_res
        d = np.exp(-2j * math.pi * n * cols / n_res)
        return MeasurementMatrix(kind="dft", matrix=d, seed=None)
    if kind == "random_phase":
        rng = np.random.default_rng(seed)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=(n_res, n_slots))
        return MeasurementMatrix(kind="random_phase", matrix=np.exp(1j * phases), seed=seed)
    raise ConfigError(f"unknown measurement kind {kind!r}")


def model_matrices(scene):
    """Assemble B, Q, gains and their angle derivatives for `scene`."""
    m, n = scene.n_ses, scene.n_res
    k = scene.n_targets
    lam = scene.wavelength
    theta_bi = scene.irs_arrival_angle
    alpha_g = path_gain_bs_irs(scene.bs_irs_distance, lam)
    amp = math.sqrt(scene.n_bs_antennas * scene.tx_power)

    b_mat = np.empty((m, k), dtype=complex)
    q_mat = np.empty((n, k), dtype=complex)
    b_dot = np.empty((m, k), dtype=complex)
    q_dot = np.empty((n, k), dtype=complex)
    gains = np.empty(k, dtype=complex)
    for i, tgt in enumerate(scene.targets):
        b_mat[:, i] = ula_steering(m, math.pi * math.sin(tgt.angle))
        q_mat[:, i] = ula_steering(
            n, math.pi * (math.sin(tgt.angle) - math.sin(theta_bi))
        )
        b_dot[:, i] = steering_derivative(m, tgt.angle)
        q_dot[:, i] = steering_derivative(n, tgt.angle, theta_bi)
        gains[i] = amp * alpha_g * path_gain_target(tgt.distance, tgt.rcs, lam)
    return ModelMatrices(b_mat=b_mat, q_mat=q_mat, gains=gains, b_dot=b_dot, q_dot=q_dot)


def synthesize_echo(scene, measurement, noise_seed=None, noiseless=False):
    """Draw one noisy echo matrix Y for the given scene and RE schedule.

    Noise entries are i.i.d. circular complex Gaussian with total variance
    `scene.noise_power` (real and imaginary parts each carry half).  The
    same (scene, measurement, noise_seed) is bit-reproducible.
    """
    if measurement.n_res != scene.n_res or measurement.n_slots != scene.n_slots:
        raise ConfigError(
            f"measurement is {measurement.matrix.shape}, scene expects "
            f"({scene.n_res}, {scene.n_slots})"
        )
    mm = model_matrices(scene)
    y = (mm.b_mat * mm.gains) @ mm.q_mat.conj().T @ measurement.matrix
    if not noiseless:
        rng = np.random.default_rng(noise_seed)
        scale = math.sqrt(scene.noise_power / 2.0)
        shape = (scene.n_ses, scene.n_slots)
        y = y + scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return EchoData(samples=y, noise_seed=noise_seed, noiseless=noiseless)


# --- configuration-file boundary -------------------------------------------

_SCENE_KEYS = {
    "n_bs_antennas", "n_res", "n_ses", "n_slots", "carrier_freq_ghz",
    "tx_power_dbm", "noise_power_dbm", "bs_irs_distance_m",
    "bs_departure_angle_deg", "irs_arrival_angle_deg", "targets",
    "measurement",
}


def scene_from_dict(cfg):
    """Build (SceneConfig, measurement spec dict) from a config mapping.

    Angles arrive in degrees, powers in dBm, RCS in dBsm, frequency in GHz;
    everything is converted to SI here and nowhere else.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("scene configuration must be an object")
    missing = _SCENE_KEYS - {"measurement"} - set(cfg)
    if missing:
        raise ConfigError(f"scene configuration missing keys: {sorted(missing)}")
    unknown = set(cfg) - _SCENE_KEYS
    if unknown:
        raise ConfigError(f"unknown scene keys: {sorted(unknown)}")
    raw_targets = cfg["targets"]
    if not isinstance(raw_targets, list) or not raw_targets:
        raise ConfigError("targets must be a non-empty list")
    targets = []
    for i, t in enumerate(raw_targets):
        try:
            targets.append(Target(
                angle=math.radians(float(t["angle_deg"])),
                distance=float(t["distance_m"]),
                rcs=dbsm_to_sqm(float(t["rcs_dbsm"])),
            ))
        except KeyError as exc:
            raise ConfigError(f"target {i} missing field {exc}") from exc
    try:
        scene = SceneConfig(
            n_bs_antennas=int(cfg["n_bs_antennas"]),
            n_res=int(cfg["n_res"]),
            n_ses=int(cfg["n_ses"]),
            n_slots=int(cfg["n_slots"]),
            carrier_freq=float(cfg["carrier_freq_ghz"]) * 1e9,
            tx_power=dbm_to_watts(float(cfg["tx_power_dbm"])),
            noise_power=dbm_to_watts(float(cfg["noise_power_dbm"])),
            bs_irs_distance=float(cfg["bs_irs_distance_m"]),
            bs_departure_angle=math.radians(float(cfg["bs_departure_angle_deg"])),
            irs_arrival_angle=math.radians(float(cfg["irs_arrival_angle_deg"])),
            targets=tuple(targets),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad scene value: {exc}") from exc
    meas = cfg.get("measurement", {"kind": "dft"})
    if not isinstance(meas, dict) or meas.get("kind") not in ("dft", "random_phase"):
        raise ConfigError('measurement.kind must be "dft" or "random_phase"')
    return scene, {"kind": meas["kind"], "seed": meas.get("seed")}


def load_scene(path):
    """Load a JSON scene file; returns (SceneConfig, measurement spec)."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"scene file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scene file {path} is not valid JSON: {exc}") from exc
    return scene_from_dict(cfg)


def measurement_for_scene(scene, meas_spec, seed=None):
    """Build the MeasurementMatrix described by a scene file's `measurement`."""
    use_seed = meas_spec.get("seed")
    if use_seed is None:
        use_seed = seed
    return build_measurement(meas_spec["kind"], scene.n_res, scene.n_slots, seed=use_seed)
