"""
Problem instance, genotype layout and kinematics of the growing manipulator.

A configuration is a chain of ``n`` links hanging from the home base. Joint ``j``
sits at node ``j`` and rotates the chain about its local x then local y axis
before link ``j`` grows along the new local z axis. The first joint never
steers. Nodes, joints and links are 0-based in code; docstrings mention the
1-based numbering where it matters for reported values (``epsilon``, ``n_bar``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vinedesign.errors import ValidationError, ZeroDirection
from vinedesign.geometry import (
    DIRECTION_TOL,
    Cylinder,
    Frame,
    Segment3,
    frame_compose,
    point_segment_distance_batch,
    rot_y,
    rot_z,
    steer_rotation,
    vec3,
)

DEFAULT_SEGMENT_LENGTH = 150.0
REACH_TOL = 1e-9


def direction_from_angles(polar: float, azimuth: float) -> np.ndarray:
    """Unit vector with the given polar angle from +z and azimuth from +x."""
    sp = np.sin(polar)
    return np.array([sp * np.cos(azimuth), sp * np.sin(azimuth), np.cos(polar)])


@dataclass(frozen=True, eq=False)
class Target:
    """Target position plus the direction the robot should arrive from.

    The orientation segment starts at the target and runs ``segment_length``
    along the approach direction, away from the target.
    """

    position: np.ndarray
    approach_polar: float = 0.0
    approach_azimuth: float = 0.0
    segment_length: float = DEFAULT_SEGMENT_LENGTH

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        if not self.segment_length > 0:
            raise ValidationError(f"segment_length must be > 0, got {self.segment_length}")

    @property
    def approach_direction(self) -> np.ndarray:
        return direction_from_angles(self.approach_polar, self.approach_azimuth)

    @property
    def segment(self) -> Segment3:
        return Segment3(self.position, self.position + self.segment_length * self.approach_direction)


@dataclass(frozen=True, eq=False)
class HomeBase:
    position: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        # Frame does the orthonormality check.
        frame = Frame(self.position, self.rotation)
        object.__setattr__(self, "position", frame.origin)
        object.__setattr__(self, "rotation", frame.rotation)

    @classmethod
    def from_angles(cls, position, polar: float, azimuth: float) -> "HomeBase":
        """Base whose growth axis (local z) points along (polar, azimuth)."""
        return cls(position, rot_z(azimuth) @ rot_y(polar))

    @property
    def frame(self) -> Frame:
        return Frame(self.position, self.rotation)

    @property
    def growth_direction(self) -> np.ndarray:
        return self.rotation[:, 2].copy()


@dataclass(frozen=True, eq=False)
class Task:
    targets: tuple
    obstacles: tuple
    home: HomeBase
    n: int = 20
    theta_bounds: tuple = (-np.pi / 4, np.pi / 4)
    length_bounds: tuple = (25.0, 70.0)
    name: str = "task"

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "theta_bounds", tuple(float(v) for v in self.theta_bounds))
        object.__setattr__(self, "length_bounds", tuple(float(v) for v in self.length_bounds))
        self.validate()

    def validate(self):
        if len(self.targets) < 1:
            raise ValidationError("task needs at least one target")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"n must be an integer >= 2, got {self.n}")
        lo, hi = self.theta_bounds
        if not lo < hi:
            raise ValidationError(f"theta_bounds must satisfy lower < upper, got {self.theta_bounds}")
        if not lo <= 0.0 <= hi:
            raise ValidationError("theta_bounds must contain 0 (the first joint is fixed straight)")
        lo, hi = self.length_bounds
        if not 0 < lo < hi:
            raise ValidationError(f"length_bounds must satisfy 0 < lower < upper, got {self.length_bounds}")
        for i, target in enumerate(self.targets):
            for k, obstacle in enumerate(self.obstacles):
                if obstacle.contains(target.position):
                    raise ValidationError(f"target {i} lies inside obstacle {k}")

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def dimension(self) -> int:
        return 2 * self.n_targets * self.n + self.n

    @property
    def n_steering(self) -> int:
        return 2 * self.n_targets * self.n

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-gene lower/upper bounds of the flat decision vector.

        First-joint steering genes get the degenerate interval [0, 0].
        """
        t, n = self.n_targets, self.n
        lower = np.empty(self.dimension)
        upper = np.empty(self.dimension)
        steer_lo = np.full((t, n, 2), self.theta_bounds[0])
        steer_hi = np.full((t, n, 2), self.theta_bounds[1])
        steer_lo[:, 0, :] = 0.0
        steer_hi[:, 0, :] = 0.0
        lower[: self.n_steering] = steer_lo.ravel()
        upper[: self.n_steering] = steer_hi.ravel()
        lower[self.n_steering :] = self.length_bounds[0]
        upper[self.n_steering :] = self.length_bounds[1]
        return lower, upper

    def decode(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Split flat vectors ``(..., D)`` into steering ``(..., t, n, 2)`` and lengths ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        steering = x[..., : self.n_steering].reshape(lead + (self.n_targets, self.n, 2))
        lengths = x[..., self.n_steering :]
        return steering, lengths

    def segment_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        s1 = np.array([t.segment.a for t in self.targets])
        s2 = np.array([t.segment.b for t in self.targets])
        return s1, s2

    def obstacle_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.obstacles:
            return np.zeros((0, 3)), np.zeros(0), np.zeros(0)
        centers = np.array([o.base_center for o in self.obstacles])
        radii = np.array([o.radius for o in self.obstacles])
        heights = np.array([o.height for o in self.obstacles])
        return centers, radii, heights


@dataclass(eq=False)
class Genotype:
    """Raw decision variables: per-target steering angles and shared link lengths."""

    steering: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        self.steering = np.array(self.steering, dtype=float)
        self.lengths = np.array(self.lengths, dtype=float)
        if self.steering.ndim != 3 or self.steering.shape[2] != 2:
            raise ValueError(f"steering must have shape (t, n, 2), got {self.steering.shape}")
        if self.steering.shape[1] != self.lengths.shape[0]:
            raise ValueError("steering and lengths disagree on n")
        self.steering[:, 0, :] = 0.0

    @classmethod
    def from_vector(cls, x, task: Task) -> "Genotype":
        steering, lengths = task.decode(np.asarray(x, dtype=float))
        return cls(steering, lengths)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.steering.ravel(), self.lengths])

    def within_bounds(self, task: Task, tol: float = 0.0) -> bool:
        lower, upper = task.bounds()
        x = self.to_vector()
        return bool(np.all(x >= lower - tol) and np.all(x <= upper + tol))


def design_of(genotype: Genotype) -> np.ndarray:
    """The manufacturable design: the shared link-length row."""
    return genotype.lengths.copy()


@dataclass
class PhenotypeExtension:
    """Per-configuration values derived at evaluation time (1-based indices)."""

    epsilon: int
    theta_eps: tuple
    n_bar: int
    l_last: float
    shortfall: float


@dataclass
class Phenotype:
    nodes: list
    frames: list


def forward_kinematics(config, home: HomeBase) -> tuple[list, list]:
    """Nodes and frames of one chain given rows of (theta_x, theta_y, length).

    Reference implementation built from :func:`frame_compose`; the optimizers use
    :func:`chain_forward`.
    """
    config = np.asarray(config, dtype=float)
    frames = [home.frame]
    for j, (tx, ty, length) in enumerate(config):
        if j == 0:
            tx = ty = 0.0
        frames.append(frame_compose(frames[-1], tx, ty, length))
    return [f.origin for f in frames], frames


def chain_forward(steering, lengths, home_rotation, home_position):
    """Vectorized forward kinematics.

    ``steering`` is ``(..., n, 2)`` and ``lengths`` broadcasts against ``(..., n)``.
    Returns node positions ``(..., n+1, 3)`` and node rotations ``(..., n+1, 3, 3)``;
    rotation ``j`` has its z axis along link ``j-1``.
    """
    steering = np.asarray(steering, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    n = steering.shape[-2]
    lead = np.broadcast_shapes(steering.shape[:-2], lengths.shape[:-1])
    lengths = np.broadcast_to(lengths, lead + (n,))
    steer = steer_rotation(steering[..., 0], steering[..., 1])
    rots = np.empty(lead + (n + 1, 3, 3))
    pos = np.empty(lead + (n + 1, 3))
    rots[..., 0, :, :] = home_rotation
    pos[..., 0, :] = home_position
    rots[..., 1, :, :] = home_rotation
    pos[..., 1, :] = pos[..., 0, :] + rots[..., 1, :, 2] * lengths[..., 0, None]
    for j in range(1, n):
        rots[..., j + 1, :, :] = rots[..., j, :, :] @ steer[..., j, :, :]
        pos[..., j + 1, :] = pos[..., j, :] + rots[..., j + 1, :, 2] * lengths[..., j, None]
    return pos, rots


def solve_aim_angles(parent: Frame, start, end) -> tuple[float, float]:
    """Steering angles at ``parent`` that point the next link from ``start`` to ``end``."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    diff = end - start
    dist = float(np.linalg.norm(diff))
    if dist <= DIRECTION_TOL:
        raise ZeroDirection(f"start and end coincide (distance {dist:g})")
    local = parent.rotation.T @ (diff / dist)
    return aim_angles_from_local(local)


def aim_angles_from_local(local):
    """Invert the local growth direction ``(sin ty, -sin tx cos ty, cos tx cos ty)``."""
    local = np.asarray(local, dtype=float)
    # atan2 form of arcsin(local.x); stays well conditioned near theta_y = +-pi/2
    theta_y = np.arctan2(local[..., 0], np.hypot(local[..., 1], local[..., 2]))
    theta_x = np.arctan2(-local[..., 1], local[..., 2])
    if np.ndim(theta_x) == 0:
        return float(theta_x), float(theta_y)
    return theta_x, theta_y


@dataclass
class ExtensionBatch:
    """Vectorized extension of ``(N, t)`` configurations.

    ``epsilon`` and ``n_bar`` are 1-based; ``nodes`` hold the rebuilt chains with
    inactive tail nodes collapsed onto the tip.
    """

    epsilon: np.ndarray
    theta_eps: np.ndarray
    n_bar: np.ndarray
    l_last: np.ndarray
    shortfall: np.ndarray
    ik_distance: np.ndarray
    nodes: np.ndarray
    fk_nodes: np.ndarray
    fk_rotations: np.ndarray
    tail_rotation: np.ndarray
    lengths: np.ndarray

    @property
    def eps_node(self) -> np.ndarray:
        k = self.epsilon - 1
        return np.take_along_axis(self.fk_nodes, k[..., None, None], axis=-2)[..., 0, :]


def extend_batch(steering, lengths, task: Task) -> ExtensionBatch:
    """Locate the epsilon node of every configuration and regrow straight to the target.

    ``steering`` is ``(N, t, n, 2)``, ``lengths`` is ``(N, n)``.
    """
    steering = np.asarray(steering, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    n = task.n
    lengths_t = np.broadcast_to(lengths[:, None, :], steering.shape[:-1])
    nodes, rots = chain_forward(steering, lengths_t, task.home.rotation, task.home.position)

    s1, s2 = task.segment_endpoints()
    dist, _ = point_segment_distance_batch(nodes[..., 1:, :], s1[:, None, :], s2[:, None, :])
    j = np.argmin(dist, axis=-1)
    ik = np.take_along_axis(dist, j[..., None], axis=-1)[..., 0]
    k = j + 1

    node_eps = np.take_along_axis(nodes, k[..., None, None], axis=-2)[..., 0, :]
    rot_eps = np.take_along_axis(rots, k[..., None, None, None], axis=-3)[..., 0, :, :]
    diff = s1[None, :, :] - node_eps
    reach = np.linalg.norm(diff, axis=-1)
    at_target = reach <= REACH_TOL
    direction = diff / np.where(at_target, 1.0, reach)[..., None]
    local = np.einsum("...ji,...j->...i", rot_eps, direction)
    theta_x, theta_y = aim_angles_from_local(local)
    theta_x = np.where(at_target, 0.0, theta_x)
    theta_y = np.where(at_target, 0.0, theta_y)

    idx = np.arange(n)
    usable = idx >= k[..., None]
    cum = np.cumsum(np.where(usable, lengths_t, 0.0), axis=-1)
    budget = cum[..., -1]
    covers = usable & (cum >= (reach - REACH_TOL)[..., None])
    found = covers.any(axis=-1) & ~at_target
    m = np.argmax(covers, axis=-1)
    len_m = np.take_along_axis(lengths_t, m[..., None], axis=-1)[..., 0]
    cum_m = np.take_along_axis(cum, m[..., None], axis=-1)[..., 0]
    last_len = lengths_t[..., -1]
    prev_len = np.take_along_axis(lengths_t, np.maximum(k - 1, 0)[..., None], axis=-1)[..., 0]

    n_bar = np.where(found, m + 1, n)
    l_last = np.where(found, np.minimum(reach - (cum_m - len_m), len_m), last_len)
    shortfall = np.where(found, 0.0, np.maximum(reach - budget, 0.0))
    n_bar = np.where(at_target, k, n_bar)
    l_last = np.where(at_target, prev_len, l_last)
    shortfall = np.where(at_target, 0.0, shortfall)

    offset = np.concatenate([np.zeros(cum.shape[:-1] + (1,)), cum], axis=-1)
    offset = np.minimum(offset, reach[..., None])
    tail = node_eps[..., None, :] + offset[..., None] * direction[..., None, :]
    rebuilt = np.where((np.arange(n + 1) <= k[..., None])[..., None], nodes, tail)
    tail_rot = rot_eps @ steer_rotation(theta_x, theta_y)

    return ExtensionBatch(
        epsilon=k + 1,
        theta_eps=np.stack([theta_x, theta_y], axis=-1),
        n_bar=n_bar,
        l_last=l_last,
        shortfall=shortfall,
        ik_distance=ik,
        nodes=rebuilt,
        fk_nodes=nodes,
        fk_rotations=rots,
        tail_rotation=tail_rot,
        lengths=lengths_t,
    )


def extend_genotype(genotype: Genotype, task: Task) -> tuple[list, list]:
    """Per-configuration extension values and rebuilt phenotypes of one genotype."""
    batch = extend_batch(genotype.steering[None], genotype.lengths[None], task)
    extensions, phenotypes = [], []
    for i in range(task.n_targets):
        eps = int(batch.epsilon[0, i])
        n_bar = int(batch.n_bar[0, i])
        extensions.append(
            PhenotypeExtension(
                epsilon=eps,
                theta_eps=(float(batch.theta_eps[0, i, 0]), float(batch.theta_eps[0, i, 1])),
                n_bar=n_bar,
                l_last=float(batch.l_last[0, i]),
                shortfall=float(batch.shortfall[0, i]),
            )
        )
        nodes = [batch.nodes[0, i, q].copy() for q in range(n_bar + 1)]
        frames = []
        for q in range(n_bar + 1):
            rot = batch.fk_rotations[0, i, q] if q < eps else batch.tail_rotation[0, i]
            frames.append(Frame(nodes[q], rot))
        phenotypes.append(Phenotype(nodes=nodes, frames=frames))
    return extensions, phenotypes
