"""Planar 8-joint arm testbed: kinematics, damage models, evaluators.

Geometry conventions (the physical setup is configurable; these are the
defaults): the base sits at workspace point (0, 0) and the undeflected
chain points along +y; positive joint angles rotate counter-clockwise;
the eight links share one length and sum to 0.62 m. The workspace is the
rectangle x in [-0.7, 0.7], y in [0, 0.7], discretized 200 x 100 into
7 mm square cells.

Two performance functions live here. Map creation scores a genome by the
negated variance of its joint angles (straighter chains score higher) and
uses the gripper position as the behavior descriptor. Adaptation scores a
trial by the negated Euclidean distance from the gripper to a target bin
center, with -1 m exactly when the gripper leaves the workspace. The same
archive therefore serves any target: only the per-cell prior changes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .archive import ArchiveGrid, GridSpec

N_JOINTS = 8
TOTAL_LENGTH = 0.62
JOINT_LIMIT = math.pi / 2

# Non-adjacent link pairs for the self-collision test (adjacent links share
# an endpoint by construction and never count).
_SEGMENT_PAIRS = [(i, j) for i in range(N_JOINTS) for j in range(i + 2, N_JOINTS)]


@dataclass(frozen=True)
class ArmConfig:
    link_lengths: tuple[float, ...] = (TOTAL_LENGTH / N_JOINTS,) * N_JOINTS
    joint_limit: float = JOINT_LIMIT
    base_xy: tuple[float, float] = (0.0, 0.0)
    base_heading: float = math.pi / 2  # +y

    def __post_init__(self):
        if len(self.link_lengths) != N_JOINTS:
            raise ValueError(f"expected {N_JOINTS} link lengths")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")


DEFAULT_ARM = ArmConfig()


@dataclass(frozen=True)
class JointCondition:
    joint: int
    kind: str  # "stuck" | "offset"
    angle: float


@dataclass(frozen=True)
class DamageSpec:
    """Per-joint faults; joints not listed are intact.

    stuck(a) replaces the commanded angle with a; offset(a) adds a and then
    clamps to the joint limits (a physical servo cannot exceed its range).
    """

    conditions: tuple[JointCondition, ...] = ()

    def __post_init__(self):
        seen = set()
        for c in self.conditions:
            if not 0 <= c.joint < N_JOINTS:
                raise ValueError(f"joint index {c.joint} out of range")
            if c.kind not in ("stuck", "offset"):
                raise ValueError(f"unknown damage kind {c.kind!r}")
            if abs(c.angle) > JOINT_LIMIT + 1e-12:
                raise ValueError(f"damage angle {c.angle} exceeds joint limits")
            if c.joint in seen:
                raise ValueError(f"duplicate damage on joint {c.joint}")
            seen.add(c.joint)


NO_DAMAGE = DamageSpec()


def load_damage_csv(path) -> DamageSpec:
    """Read rows ``joint,condition,angle_rad`` (0-based joint indices)."""
    conds = []
    with open(path, "r", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "joint":
                continue
            conds.append(JointCondition(int(row[0]), row[1].strip(), float(row[2])))
    return DamageSpec(tuple(conds))


def save_damage_csv(damage: DamageSpec, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["joint", "condition", "angle_rad"])
        for c in damage.conditions:
            w.writerow([c.joint, c.kind, format(c.angle, ".17g")])


def standard_damage_suite() -> list[tuple[str, DamageSpec]]:
    """Named stuck/offset combinations approximating a broad fault mix.

    Joint fields are 0-based indices (joint 0 is the first joint, at the
    base). The first three entries follow the classic single-stuck,
    single-offset, and broken-plus-offset patterns; the rest sweep joints
    and signs.
    """
    q = math.pi / 4

    def stuck(j, a):
        return JointCondition(j, "stuck", a)

    def offset(j, a):
        return JointCondition(j, "offset", a)

    suite = [
        ("c01_stuck_j0_p45", DamageSpec((stuck(0, q),))),
        ("c02_offset_j0_p45", DamageSpec((offset(0, q),))),
        ("c03_stuck_j1_0_offset_j3_p45", DamageSpec((stuck(1, 0.0), offset(3, q)))),
        ("c04_stuck_j3_m45", DamageSpec((stuck(3, -q),))),
        ("c05_offset_j5_m45", DamageSpec((offset(5, -q),))),
        ("c06_stuck_j0_p90", DamageSpec((stuck(0, 2 * q),))),
        ("c07_stuck_j2_p45_j6_m45", DamageSpec((stuck(2, q), stuck(6, -q)))),
        ("c08_offset_j2_p45_j6_m45", DamageSpec((offset(2, q), offset(6, -q)))),
        ("c09_stuck_j7_p90", DamageSpec((stuck(7, 2 * q),))),
        ("c10_stuck_j4_0_offset_j0_m45", DamageSpec((stuck(4, 0.0), offset(0, -q)))),
    ]
    return suite


def genome_to_angles(genome: np.ndarray) -> np.ndarray:
    """Affine map of [0,1] components onto joint angles in [-pi/2, pi/2]."""
    g = np.asarray(genome, dtype=float)
    if g.shape[-1] != N_JOINTS:
        raise ValueError(f"expected {N_JOINTS} genome components, got {g.shape[-1]}")
    if np.any(g < 0.0) or np.any(g > 1.0):
        raise ValueError("genome components must lie in [0, 1]")
    return (g - 0.5) * math.pi


def apply_damage(
    commanded: np.ndarray,
    damage: DamageSpec,
    joint_limit: float = JOINT_LIMIT,
) -> np.ndarray:
    """Effective joint angles after faults; idempotent for stuck joints."""
    eff = np.array(commanded, dtype=float, copy=True)
    for c in damage.conditions:
        if c.kind == "stuck":
            eff[..., c.joint] = c.angle
        else:
            eff[..., c.joint] = np.clip(
                eff[..., c.joint] + c.angle, -joint_limit, joint_limit
            )
    return eff


def forward_kinematics(
    angles: np.ndarray, config: ArmConfig = DEFAULT_ARM
) -> tuple[np.ndarray, np.ndarray]:
    """Joint positions and gripper position of the planar chain.

    Accepts (8,) or (B, 8) angle arrays; returns (points, gripper) shaped
    (..., 9, 2) and (..., 2). Headings accumulate along the chain starting
    from the base heading.
    """
    a = np.asarray(angles, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("joint angles must be finite")
    squeeze = a.ndim == 1
    a = np.atleast_2d(a)
    headings = config.base_heading + np.cumsum(a, axis=1)  # (B, 8)
    lengths = np.asarray(config.link_lengths)
    deltas = np.stack(
        [np.cos(headings) * lengths, np.sin(headings) * lengths], axis=-1
    )  # (B, 8, 2)
    pts = np.empty((a.shape[0], N_JOINTS + 1, 2))
    pts[:, 0] = config.base_xy
    np.cumsum(deltas, axis=1, out=pts[:, 1:])
    pts[:, 1:] += np.asarray(config.base_xy)
    gripper = pts[:, -1]
    if squeeze:
        return pts[0], gripper[0]
    return pts, gripper


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def self_collides(points: np.ndarray) -> np.ndarray | bool:
    """True when any two non-adjacent links intersect (touching counts).

    Accepts the (9, 2) joint-position chain or a (B, 9, 2) batch. Uses the
    orientation test with collinear on-segment handling, so overlapping
    collinear links and endpoint contacts are both collisions.
    """
    pts = np.asarray(points, dtype=float)
    squeeze = pts.ndim == 2
    pts = pts.reshape((-1,) + pts.shape[-2:])
    B = pts.shape[0]
    hit = np.zeros(B, dtype=bool)
    for i, j in _SEGMENT_PAIRS:
        a, b = pts[:, i], pts[:, i + 1]
        c, d = pts[:, j], pts[:, j + 1]
        d1 = _cross(d[:, 0] - c[:, 0], d[:, 1] - c[:, 1], a[:, 0] - c[:, 0], a[:, 1] - c[:, 1])
        d2 = _cross(d[:, 0] - c[:, 0], d[:, 1] - c[:, 1], b[:, 0] - c[:, 0], b[:, 1] - c[:, 1])
        d3 = _cross(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1], c[:, 0] - a[:, 0], c[:, 1] - a[:, 1])
        d4 = _cross(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1], d[:, 0] - a[:, 0], d[:, 1] - a[:, 1])
        proper = ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))
        proper &= (d1 != 0) & (d2 != 0) & (d3 != 0) & (d4 != 0)
        touch = (
            ((d1 == 0) & _on_segment(c, d, a))
            | ((d2 == 0) & _on_segment(c, d, b))
            | ((d3 == 0) & _on_segment(a, b, c))
            | ((d4 == 0) & _on_segment(a, b, d))
        )
        hit |= proper | touch
    if squeeze:
        return bool(hit[0])
    return hit


def _on_segment(u, v, p):
    """Componentwise box test; valid given p collinear with segment u-v."""
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return np.all((lo <= p) & (p <= hi), axis=-1)


@dataclass(frozen=True)
class Workspace:
    x_min: float = -0.7
    x_max: float = 0.7
    y_min: float = 0.0
    y_max: float = 0.7
    bins_x: int = 200
    bins_y: int = 100

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            lower=(self.x_min, self.y_min),
            upper=(self.x_max, self.y_max),
            bins=(self.bins_x, self.bins_y),
        )

    def contains(self, xy) -> bool:
        x, y = float(xy[0]), float(xy[1])
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def contains_batch(self, xy: np.ndarray) -> np.ndarray:
        return (
            (xy[:, 0] >= self.x_min)
            & (xy[:, 0] <= self.x_max)
            & (xy[:, 1] >= self.y_min)
            & (xy[:, 1] <= self.y_max)
        )


DEFAULT_WORKSPACE = Workspace()


@dataclass(frozen=True)
class Target:
    """Bin center and success radius (10 cm diameter bin by default)."""

    x: float = 0.0
    y: float = 0.5
    radius: float = 0.05
    workspace: Workspace = field(default=DEFAULT_WORKSPACE)

    def __post_init__(self):
        if not self.workspace.contains((self.x, self.y)):
            raise ValueError(f"target ({self.x}, {self.y}) outside the workspace")

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


def map_creation_eval(
    genome: np.ndarray,
    config: ArmConfig = DEFAULT_ARM,
    workspace: Workspace = DEFAULT_WORKSPACE,
) -> tuple[np.ndarray, float, bool]:
    """Undamaged evaluation for archive building.

    Descriptor is the gripper position; performance is the negated
    population variance of the joint angles (rad^2, 0 is the optimum);
    self-colliding chains and grippers outside the workspace are invalid.
    """
    angles = genome_to_angles(genome)
    pts, gripper = forward_kinematics(angles, config)
    perf = -float(np.var(angles))
    valid = (not self_collides(pts)) and workspace.contains(gripper)
    return gripper, perf, valid


class MapCreationEvaluator:
    """Vectorized Evaluator over the undamaged arm."""

    def __init__(self, config: ArmConfig = DEFAULT_ARM, workspace: Workspace = DEFAULT_WORKSPACE):
        self.config = config
        self.workspace = workspace
        self.genome_length = N_JOINTS

    def evaluate(self, genome: np.ndarray) -> tuple[np.ndarray, float, bool]:
        return map_creation_eval(genome, self.config, self.workspace)

    def evaluate_batch(self, genomes: np.ndarray):
        angles = genome_to_angles(genomes)
        pts, gripper = forward_kinematics(angles, self.config)
        perfs = -np.var(angles, axis=1)
        valids = ~self_collides(pts) & self.workspace.contains_batch(gripper)
        return gripper, perfs, valids


def adaptation_eval(
    genome: np.ndarray,
    damage: DamageSpec,
    target: Target,
    config: ArmConfig = DEFAULT_ARM,
    prescreen_collisions: bool = False,
) -> float:
    """Damaged trial: negated gripper distance to the bin center.

    Returns exactly -1.0 when the gripper leaves the workspace (the marker
    is lost to the tracker there). ``prescreen_collisions`` additionally
    fails self-colliding damaged configurations with -1.0 before "running"
    them, which mirrors the hardware-protecting control-condition setup; it
    stays off for normal adaptation.
    """
    commanded = genome_to_angles(genome)
    effective = apply_damage(commanded, damage, config.joint_limit)
    pts, gripper = forward_kinematics(effective, config)
    if prescreen_collisions and self_collides(pts):
        return -1.0
    if not target.workspace.contains(gripper):
        return -1.0
    return -float(np.linalg.norm(gripper - target.xy))


class AdaptationEvaluator:
    """Callable genome -> measured performance for a fixed damage and target."""

    def __init__(
        self,
        damage: DamageSpec,
        target: Target,
        config: ArmConfig = DEFAULT_ARM,
        prescreen_collisions: bool = False,
    ):
        self.damage = damage
        self.target = target
        self.config = config
        self.prescreen_collisions = prescreen_collisions

    def __call__(self, genome: np.ndarray) -> float:
        return adaptation_eval(
            genome, self.damage, self.target, self.config, self.prescreen_collisions
        )


def target_prior_fn(target: Target):
    """Adaptation-step prior over descriptors: -||x - b|| (closer is better)."""
    b = target.xy

    def prior(descriptor: np.ndarray) -> float:
        return -float(np.linalg.norm(np.asarray(descriptor, dtype=float) - b))

    return prior


def map_prior_for_target(grid: ArchiveGrid, target: Target) -> dict[int, float]:
    """Per-cell adaptation prior from each elite's stored actual descriptor.

    The map-creation performance (joint-angle variance) is ignored here;
    the archive is generic and gets re-scored against the requested bin.
    """
    b = target.xy
    return {
        flat: -float(np.linalg.norm(np.asarray(e.descriptor) - b))
        for flat, e in grid.cells.items()
    }
