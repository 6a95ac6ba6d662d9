"""
3D primitives shared by kinematics, objectives and constraints.

Points are plain ``numpy`` arrays of shape ``(3,)``. Every scalar operation has
a ``*_batch`` counterpart that broadcasts over leading axes; the optimizers
only use the batched forms, the scalar forms are the readable reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from vinedesign.errors import ZeroVector

DIRECTION_TOL = 1e-9
ANGLE_NORM_TOL = 1e-12

Vec3 = np.ndarray


def vec3(x, y=None, z=None) -> Vec3:
    """Build a float vector from three numbers or any length-3 sequence."""
    if y is None and z is None:
        v = np.asarray(x, dtype=float).reshape(3)
    else:
        v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector component in {v}")
    return v


class Clamp(str, Enum):
    INTERIOR = "interior"
    AT_A = "at_a"
    AT_B = "at_b"


@dataclass(frozen=True, eq=False)
class Segment3:
    a: Vec3
    b: Vec3

    def __post_init__(self):
        object.__setattr__(self, "a", vec3(self.a))
        object.__setattr__(self, "b", vec3(self.b))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


@dataclass(frozen=True, eq=False)
class Cylinder:
    """Closed cylinder standing on ``base_center`` with its axis along +z."""

    base_center: Vec3
    radius: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "base_center", vec3(self.base_center))
        if not self.radius > 0:
            raise ValueError(f"cylinder radius must be > 0, got {self.radius}")
        if not self.height > 0:
            raise ValueError(f"cylinder height must be > 0, got {self.height}")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "height", float(self.height))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        c = self.base_center
        radial = (p[0] - c[0]) ** 2 + (p[1] - c[1]) ** 2
        return bool(radial <= self.radius**2 and c[2] <= p[2] <= c[2] + self.height)


@dataclass(frozen=True, eq=False)
class Frame:
    """Origin plus a rotation whose columns are the local axes in world coordinates."""

    origin: Vec3
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", vec3(self.origin))
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if np.abs(rot.T @ rot - np.eye(3)).max() > DIRECTION_TOL:
            raise ValueError("frame rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > DIRECTION_TOL:
            raise ValueError("frame rotation is not proper (det != +1)")
        object.__setattr__(self, "rotation", rot)

    @classmethod
    def identity(cls) -> "Frame":
        return cls(np.zeros(3), np.eye(3))

    @property
    def z_axis(self) -> Vec3:
        return self.rotation[:, 2].copy()


def rot_x(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def steer_rotation(theta_x, theta_y) -> np.ndarray:
    """Closed form of ``rot_x(theta_x) @ rot_y(theta_y)``, broadcast over inputs."""
    theta_x = np.asarray(theta_x, dtype=float)
    theta_y = np.asarray(theta_y, dtype=float)
    ca, sa = np.cos(theta_x), np.sin(theta_x)
    cb, sb = np.cos(theta_y), np.sin(theta_y)
    shape = np.broadcast(theta_x, theta_y).shape
    out = np.empty(shape + (3, 3))
    out[..., 0, 0] = cb
    out[..., 0, 1] = 0.0
    out[..., 0, 2] = sb
    out[..., 1, 0] = sa * sb
    out[..., 1, 1] = ca
    out[..., 1, 2] = -sa * cb
    out[..., 2, 0] = -ca * sb
    out[..., 2, 1] = sa
    out[..., 2, 2] = ca * cb
    return out


def frame_compose(parent: Frame, theta_x: float, theta_y: float, length: float) -> Frame:
    """Child frame after steering by (theta_x, theta_y) and growing ``length``.

    The child rotation is ``parent.rotation @ Rx(theta_x) @ Ry(theta_y)``; the child
    origin sits ``length`` along the child's local z axis.
    """
    if length < 0:
        raise ValueError(f"link length must be >= 0, got {length}")
    rotation = parent.rotation @ steer_rotation(theta_x, theta_y)
    origin = parent.origin + rotation[:, 2] * length
    return Frame(origin, rotation)


def point_segment_distance(p, s: Segment3) -> tuple[float, Vec3, Clamp]:
    """Distance from ``p`` to segment ``s``, the closest point, and where it landed.

    A degenerate segment (a == b) reports the distance to ``a``.
    """
    p = np.asarray(p, dtype=float)
    d = s.b - s.a
    len2 = float(d @ d)
    if len2 <= DIRECTION_TOL**2:
        return float(np.linalg.norm(p - s.a)), s.a.copy(), Clamp.AT_A
    t = float((p - s.a) @ d) / len2
    if t <= 0.0:
        closest, flag = s.a.copy(), Clamp.AT_A
    elif t >= 1.0:
        closest, flag = s.b.copy(), Clamp.AT_B
    else:
        closest, flag = s.a + t * d, Clamp.INTERIOR
    return float(np.linalg.norm(p - closest)), closest, flag


def point_segment_distance_batch(p, a, b):
    """Broadcast form of :func:`point_segment_distance`.

    Returns ``(distance, t)`` where ``t`` in [0, 1] locates the closest point.
    """
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    len2 = np.sum(d * d, axis=-1)
    safe = np.where(len2 > DIRECTION_TOL**2, len2, 1.0)
    t = np.sum((p - a) * d, axis=-1) / safe
    t = np.where(len2 > DIRECTION_TOL**2, np.clip(t, 0.0, 1.0), 0.0)
    closest = a + t[..., None] * d
    return np.linalg.norm(p - closest, axis=-1), t


def segment_cylinder_intersects(s: Segment3, c: Cylinder) -> bool:
    """True iff any point of ``s`` lies in the closed volume of ``c``."""
    hit = segment_cylinder_intersects_batch(
        s.a, s.b, c.base_center, c.radius, c.height
    )
    return bool(hit)


def segment_cylinder_intersects_batch(a, b, center, radius, height):
    """Broadcast segment / vertical-cylinder overlap test.

    The segment is first clipped to the cylinder's z slab (cap planes), then the
    squared radial distance, a quadratic in the segment parameter, is minimized
    over the clipped range and compared with ``radius**2``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    center = np.asarray(center, dtype=float)
    radius = np.asarray(radius, dtype=float)
    height = np.asarray(height, dtype=float)

    d = b - a
    dz = d[..., 2]
    z_lo = center[..., 2]
    z_hi = z_lo + height
    flat = dz == 0.0
    safe_dz = np.where(flat, 1.0, dz)
    with np.errstate(over="ignore"):
        ta = (z_lo - a[..., 2]) / safe_dz
        tb = (z_hi - a[..., 2]) / safe_dz
    t0 = np.where(flat, 0.0, np.maximum(0.0, np.minimum(ta, tb)))
    t1 = np.where(flat, 1.0, np.minimum(1.0, np.maximum(ta, tb)))
    in_slab = np.where(flat, (a[..., 2] >= z_lo) & (a[..., 2] <= z_hi), t0 <= t1)

    ex = a[..., 0] - center[..., 0]
    ey = a[..., 1] - center[..., 1]
    dx, dy = d[..., 0], d[..., 1]
    quad = dx * dx + dy * dy
    lin = ex * dx + ey * dy
    t_star = np.where(quad > 1e-18, -lin / np.where(quad > 1e-18, quad, 1.0), 0.0)
    t_star = np.clip(t_star, t0, np.maximum(t0, t1))
    px = ex + t_star * dx
    py = ey + t_star * dy
    return in_slab & (px * px + py * py <= radius * radius)


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two non-zero vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu <= ANGLE_NORM_TOL or nv <= ANGLE_NORM_TOL:
        raise ZeroVector(f"angle undefined for zero-length vector ({nu:g}, {nv:g})")
    cos = float(u @ v) / (nu * nv)
    return float(np.arccos(min(1.0, max(-1.0, cos))))
