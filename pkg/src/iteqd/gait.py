"""Hexapod gait signal generator and trajectory-based behavior descriptors.

The signal generator produces the periodic servo command: a 1 Hz square
wave with amplitude alpha and duty cycle tau, smoothed by a truncated
Gaussian kernel and delayed by the phase phi. Servos consume it every
30 ms (see command_schedule); the generator itself is a function of
continuous time so the phase-shift identity holds exactly.

Descriptors are pure formulas over recorded trajectories: no physics lives
here. A TrajectoryRecord can come from any simulator or from the CSV
interchange format (save_trajectory_csv / load_trajectory_csv).
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

N_LEGS = 6
PERIOD_S = 1.0
COMMAND_STEP_S = 0.03
TRAJ_STEP_S = 0.015
SMOOTH_SIGMA_S = 0.06  # two command steps; the filter width is a tuning choice
SIGNAL_TABLE_SIZE = 1000

MAX_LEG_ENERGY = 100.0  # N.m.rad available over one 5 s run
MAX_LEG_GRF = 10.0  # N per leg

_LEVELS = np.round(np.arange(0, 21) * 0.05, 2)


@functools.lru_cache(maxsize=256)
def _smoothed_square_table(tau: float, sigma_s: float, size: int) -> np.ndarray:
    """One period of the unit square wave after circular Gaussian smoothing."""
    frac = np.arange(size) / size
    square = np.where(frac < tau, 1.0, -1.0)
    dt = PERIOD_S / size
    half = int(round(3.0 * sigma_s / dt))
    offsets = np.arange(-half, half + 1) * dt
    kernel = np.exp(-(offsets**2) / (2.0 * sigma_s**2))
    kernel /= kernel.sum()
    return convolve1d(square, kernel, mode="wrap")


def gait_signal(
    t,
    alpha: float,
    phi: float,
    tau: float,
    sigma_s: float = SMOOTH_SIGMA_S,
) -> float | np.ndarray:
    """Commanded position at time(s) t, in [-alpha, alpha].

    Periodic with period 1 s; the phase delays the whole signal by
    phi * period (circularly), so gait_signal(t, ..., phi) equals
    gait_signal(t - phi, ..., 0) exactly.
    """
    for name, v in (("alpha", alpha), ("phi", phi), ("tau", tau)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    table = _smoothed_square_table(float(tau), float(sigma_s), SIGNAL_TABLE_SIZE)
    ts = np.asarray(t, dtype=float)
    idx = np.floor(((ts - phi * PERIOD_S) % PERIOD_S) / PERIOD_S * SIGNAL_TABLE_SIZE).astype(int)
    idx = np.clip(idx, 0, SIGNAL_TABLE_SIZE - 1)
    out = alpha * table[idx]
    if np.isscalar(t) or (isinstance(t, np.ndarray) and t.ndim == 0):
        return float(out)
    return out


@dataclass(frozen=True)
class GaitParams:
    """36 gait parameters: per leg, amplitude/phase/duty for two driven DOFs.

    All values live on the level set {0, 0.05, ..., 1}. The third servo of
    each leg mirrors the second (DOF3 = -DOF2), so 18 motors reduce to 12
    degrees of freedom.
    """

    amplitude1: tuple[float, ...]
    phase1: tuple[float, ...]
    duty1: tuple[float, ...]
    amplitude2: tuple[float, ...]
    phase2: tuple[float, ...]
    duty2: tuple[float, ...]

    def __post_init__(self):
        for name in ("amplitude1", "phase1", "duty1", "amplitude2", "phase2", "duty2"):
            vals = getattr(self, name)
            if len(vals) != N_LEGS:
                raise ValueError(f"{name} needs {N_LEGS} values")
            for v in vals:
                if not np.any(np.isclose(v, _LEVELS, atol=1e-9)):
                    raise ValueError(f"{name} value {v} not on the 0.05 level set")

    @classmethod
    def from_flat(cls, flat) -> "GaitParams":
        """Build from 36 values ordered (a1, a2, phi1, phi2, tau1, tau2) per leg."""
        arr = np.asarray(flat, dtype=float)
        if arr.shape != (6 * N_LEGS,):
            raise ValueError(f"expected {6 * N_LEGS} parameters, got {arr.shape}")
        per_leg = arr.reshape(N_LEGS, 6)
        return cls(
            amplitude1=tuple(per_leg[:, 0]),
            amplitude2=tuple(per_leg[:, 1]),
            phase1=tuple(per_leg[:, 2]),
            phase2=tuple(per_leg[:, 3]),
            duty1=tuple(per_leg[:, 4]),
            duty2=tuple(per_leg[:, 5]),
        )

    def to_flat(self) -> np.ndarray:
        per_leg = np.column_stack(
            [self.amplitude1, self.amplitude2, self.phase1, self.phase2, self.duty1, self.duty2]
        )
        return per_leg.reshape(-1)


# Built-in reference tripod: two leg groups in antiphase, full-amplitude
# horizontal sweep, low elevation amplitude, half duty everywhere.
REFERENCE_TRIPOD = GaitParams(
    amplitude1=(1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    phase1=(0.0, 0.0, 0.5, 0.5, 0.0, 0.0),
    duty1=(0.5, 0.5, 0.5, 0.5, 0.5, 0.5),
    amplitude2=(0.25, 0.25, 0.25, 0.25, 0.25, 0.25),
    phase2=(0.75, 0.25, 0.25, 0.75, 0.75, 0.25),
    duty2=(0.5, 0.5, 0.5, 0.5, 0.5, 0.5),
)


def joint_commands(params: GaitParams, t) -> np.ndarray:
    """18 servo commands at time t, ordered (dof1, dof2, dof3) per leg."""
    out = np.empty(3 * N_LEGS)
    for leg in range(N_LEGS):
        dof1 = gait_signal(t, params.amplitude1[leg], params.phase1[leg], params.duty1[leg])
        dof2 = gait_signal(t, params.amplitude2[leg], params.phase2[leg], params.duty2[leg])
        out[3 * leg] = dof1
        out[3 * leg + 1] = dof2
        out[3 * leg + 2] = -dof2
    return out


def command_schedule(params: GaitParams, duration_s: float) -> np.ndarray:
    """Commands sampled on the 30 ms servo grid: shape (steps, 18)."""
    times = np.arange(0.0, duration_s, COMMAND_STEP_S)
    return np.array([joint_commands(params, t) for t in times])


@dataclass
class TrajectoryRecord:
    """Fixed-step log of one simulated run.

    Per step: 6 contact booleans, torso pitch/roll/yaw (rad), torso x/y/z
    (m), per-leg cumulative energy (N.m.rad, non-decreasing), per-leg
    mean-so-far ground reaction force (N), and per-leg lower-leg
    pitch/roll/yaw at contact (rad). Rows are the state at the end of each
    interval; row k sits at time (k+1) * dt.
    """

    contacts: np.ndarray  # (K, 6) bool
    torso_angles: np.ndarray  # (K, 3) pitch, roll, yaw
    torso_pos: np.ndarray  # (K, 3) x, y, z
    leg_energy: np.ndarray  # (K, 6) cumulative
    leg_grf: np.ndarray  # (K, 6) running mean
    leg_angles: np.ndarray  # (K, 6, 3) pitch, roll, yaw at contact
    dt: float = TRAJ_STEP_S

    def __post_init__(self):
        self.contacts = np.asarray(self.contacts, dtype=bool)
        self.torso_angles = np.asarray(self.torso_angles, dtype=float)
        self.torso_pos = np.asarray(self.torso_pos, dtype=float)
        self.leg_energy = np.asarray(self.leg_energy, dtype=float)
        self.leg_grf = np.asarray(self.leg_grf, dtype=float)
        self.leg_angles = np.asarray(self.leg_angles, dtype=float)
        K = self.contacts.shape[0]
        if K < 1:
            raise ValueError("trajectory needs at least one step")
        shapes = {
            "contacts": (K, 6),
            "torso_angles": (K, 3),
            "torso_pos": (K, 3),
            "leg_energy": (K, 6),
            "leg_grf": (K, 6),
            "leg_angles": (K, 6, 3),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
        for name in ("torso_angles", "torso_pos", "leg_energy", "leg_grf", "leg_angles"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")
        if np.any(self.leg_energy < 0):
            raise ValueError("cumulative energies must be non-negative")
        if K > 1 and np.any(np.diff(self.leg_energy, axis=0) < -1e-12):
            raise ValueError("cumulative energies must be non-decreasing")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def steps(self) -> int:
        return self.contacts.shape[0]

    @property
    def duration_s(self) -> float:
        return self.steps * self.dt


TRAJ_MAGIC = "ITEQD-TRAJ v1"

_TRAJ_COLUMNS = (
    [f"contact{i+1}" for i in range(6)]
    + ["torso_pitch", "torso_roll", "torso_yaw", "pos_x", "pos_y", "pos_z"]
    + [f"energy{i+1}" for i in range(6)]
    + [f"grf{i+1}" for i in range(6)]
    + [f"leg_pitch{i+1}" for i in range(6)]
    + [f"leg_roll{i+1}" for i in range(6)]
    + [f"leg_yaw{i+1}" for i in range(6)]
)


def save_trajectory_csv(traj: TrajectoryRecord, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {TRAJ_MAGIC} dt={traj.dt:.17g}\n")
        w = csv.writer(fh)
        w.writerow(_TRAJ_COLUMNS)
        for k in range(traj.steps):
            row = (
                [int(v) for v in traj.contacts[k]]
                + [format(v, ".17g") for v in traj.torso_angles[k]]
                + [format(v, ".17g") for v in traj.torso_pos[k]]
                + [format(v, ".17g") for v in traj.leg_energy[k]]
                + [format(v, ".17g") for v in traj.leg_grf[k]]
                + [format(v, ".17g") for v in traj.leg_angles[k, :, 0]]
                + [format(v, ".17g") for v in traj.leg_angles[k, :, 1]]
                + [format(v, ".17g") for v in traj.leg_angles[k, :, 2]]
            )
            w.writerow(row)


def load_trajectory_csv(path) -> TrajectoryRecord:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        dt = TRAJ_STEP_S
        if first.startswith("#"):
            if TRAJ_MAGIC not in first:
                raise ValueError(f"unrecognized trajectory header: {first!r}")
            for tok in first.split():
                if tok.startswith("dt="):
                    dt = float(tok[3:])
            header = fh.readline().strip().split(",")
        else:
            header = first.split(",")
        if header != _TRAJ_COLUMNS:
            raise ValueError("trajectory CSV column order does not match the format")
        rows = [row for row in csv.reader(fh) if row]
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        raise ValueError("trajectory CSV has no data rows")
    return TrajectoryRecord(
        contacts=data[:, 0:6] > 0.5,
        torso_angles=data[:, 6:9],
        torso_pos=data[:, 9:12],
        leg_energy=data[:, 12:18],
        leg_grf=data[:, 18:24],
        leg_angles=np.stack([data[:, 24:30], data[:, 30:36], data[:, 36:42]], axis=-1),
        dt=dt,
    )


DESCRIPTOR_KINDS = (
    "duty_factor",
    "orientation",
    "displacement",
    "energy_total",
    "energy_relative",
    "deviation",
    "grf_total",
    "grf_relative",
    "leg_pitch",
    "leg_roll",
    "leg_yaw",
)

ORIENTATION_THRESHOLD = 0.005 * np.pi
DISPLACEMENT_THRESHOLD = 0.001  # 1 mm
DEVIATION_GAIN = 0.95
DEVIATION_SCALE = 0.2  # 20 cm


def descriptor_dim(kind: str) -> int:
    if kind == "deviation":
        return 3
    if kind in DESCRIPTOR_KINDS:
        return 6
    raise ValueError(f"unknown descriptor kind {kind!r}")


def _mean_contact_angle(traj: TrajectoryRecord, axis: int) -> np.ndarray:
    """Per-leg mean of a lower-leg angle over contact steps; 0 rad if never down."""
    out = np.zeros(N_LEGS)
    for leg in range(N_LEGS):
        mask = traj.contacts[:, leg]
        if mask.any():
            out[leg] = traj.leg_angles[mask, leg, axis].mean()
    return out


def descriptor(kind: str, traj: TrajectoryRecord) -> np.ndarray:
    """One of the eleven trajectory descriptors, clamped into [0, 1]^d."""
    K = traj.steps
    if kind == "duty_factor":
        x = traj.contacts.mean(axis=0)
    elif kind == "orientation":
        ang = traj.torso_angles
        x = np.empty(6)
        for a in range(3):
            x[2 * a] = np.mean(ang[:, a] > ORIENTATION_THRESHOLD)
            x[2 * a + 1] = np.mean(-ang[:, a] > ORIENTATION_THRESHOLD)
    elif kind == "displacement":
        if K < 2:
            x = np.zeros(6)
        else:
            deltas = np.diff(traj.torso_pos, axis=0)  # intervals between stored rows
            x = np.empty(6)
            for a in range(3):
                x[2 * a] = np.mean(deltas[:, a] > DISPLACEMENT_THRESHOLD)
                x[2 * a + 1] = np.mean(-deltas[:, a] > DISPLACEMENT_THRESHOLD)
    elif kind == "energy_total":
        x = traj.leg_energy[-1] / MAX_LEG_ENERGY
    elif kind == "energy_relative":
        total = traj.leg_energy[-1].sum()
        x = np.full(6, 1.0 / 6.0) if total == 0 else traj.leg_energy[-1] / total
    elif kind == "deviation":
        times = (np.arange(K) + 1) * traj.dt
        duration = K * traj.dt
        xs, ys, zs = traj.torso_pos[:, 0], traj.torso_pos[:, 1], traj.torso_pos[:, 2]
        resid = ys - (ys[-1] / duration) * times
        x = (
            DEVIATION_GAIN
            * np.array([np.ptp(xs), np.ptp(resid), np.ptp(zs)])
            / DEVIATION_SCALE
        )
    elif kind == "grf_total":
        x = traj.leg_grf[-1] / MAX_LEG_GRF
    elif kind == "grf_relative":
        total = traj.leg_grf[-1].sum()
        x = np.full(6, 1.0 / 6.0) if total == 0 else traj.leg_grf[-1] / total
    elif kind == "leg_pitch":
        x = _mean_contact_angle(traj, 0) / np.pi
    elif kind == "leg_roll":
        x = _mean_contact_angle(traj, 1) / np.pi
    elif kind == "leg_yaw":
        x = (_mean_contact_angle(traj, 2) + np.pi) / (2 * np.pi)
    else:
        raise ValueError(f"unknown descriptor kind {kind!r}")
    return np.clip(x, 0.0, 1.0)


def descriptor_pool() -> list[tuple[str, int]]:
    """All 63 scalar components: (kind, component) in a fixed order."""
    pool = []
    for kind in DESCRIPTOR_KINDS:
        pool += [(kind, c) for c in range(descriptor_dim(kind))]
    return pool


def random_descriptor_basis(seed: int) -> list[tuple[str, int]]:
    """Six distinct components drawn without replacement from the pool of 63."""
    pool = descriptor_pool()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=6, replace=False)
    return [pool[i] for i in picks]


def composed_descriptor(basis: list[tuple[str, int]], traj: TrajectoryRecord) -> np.ndarray:
    """Evaluate the selected components; each source formula runs once."""
    kinds = {kind for kind, _ in basis}
    values = {kind: descriptor(kind, traj) for kind in kinds}
    return np.array([values[kind][comp] for kind, comp in basis])
