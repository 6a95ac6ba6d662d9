"""
Objectives, constraints and static-penalty fitness.

Objective columns always follow ``OBJECTIVE_KEYS``: reach error, links to the
orientation segment, undulation, links on the segment, robot length.

Two code paths compute the same numbers. The per-genotype functions loop over
configurations with the scalar geometry helpers; :func:`evaluate_batch` is the
vectorized version the optimizers call. Tests hold them equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vinedesign.errors import ZeroVector
from vinedesign.geometry import (
    ANGLE_NORM_TOL,
    Segment3,
    angle_between,
    point_segment_distance,
    segment_cylinder_intersects,
    segment_cylinder_intersects_batch,
)
from vinedesign.robot import (
    REACH_TOL,
    ExtensionBatch,
    Genotype,
    Task,
    extend_batch,
    extend_genotype,
)

OBJECTIVE_KEYS = ("f_ik", "f_links_to_seg", "f_undulation", "f_links_on_seg", "f_length")
CONSTRAINT_KEYS = (
    "theta_x_lower",
    "theta_x_upper",
    "theta_y_lower",
    "theta_y_upper",
    "last_link",
    "overshoot",
    "collision",
    "steer_collision",
    "reach",
)
STEER_TOL = 1e-9


@dataclass(frozen=True)
class PenaltyConfig:
    R: float = 100.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"penalty factor R must be > 0, got {self.R}")


@dataclass(frozen=True)
class FitnessVector:
    f_ik: float
    f_links_to_seg: float
    f_undulation: float
    f_links_on_seg: float
    f_length: float
    violations: int = 0

    @property
    def feasible(self) -> bool:
        return self.violations == 0

    def as_array(self, keys=OBJECTIVE_KEYS) -> np.ndarray:
        return np.array([getattr(self, k) for k in keys], dtype=float)

    @classmethod
    def from_array(cls, values, violations=0) -> "FitnessVector":
        values = np.asarray(values, dtype=float)
        return cls(*(float(v) for v in values), violations=int(violations))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in OBJECTIVE_KEYS}
        d["violations"] = self.violations
        d["feasible"] = self.feasible
        return d


@dataclass
class ConstraintReport:
    """Violations per constraint, each a list with one 0/1 entry per configuration."""

    breakdown: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return int(sum(sum(v) for v in self.breakdown.values()))

    def per_configuration(self) -> list:
        counts = np.sum([np.asarray(v) for v in self.breakdown.values()], axis=0)
        return [int(c) for c in counts]


def objective_ik(phenotypes, extensions, task: Task) -> float:
    total = 0.0
    for ph, ext, target in zip(phenotypes, extensions, task.targets):
        d, _, _ = point_segment_distance(ph.nodes[ext.epsilon - 1], target.segment)
        total += d + ext.shortfall
    return total


def objective_links_to_segment(extensions) -> int:
    return sum(e.epsilon - 1 for e in extensions)


def objective_links_on_segment(extensions) -> int:
    return sum(e.n_bar - (e.epsilon - 1) for e in extensions)


def objective_length(extensions, design) -> float:
    design = np.asarray(design, dtype=float)
    return max(float(design[: e.n_bar - 1].sum()) + e.l_last for e in extensions)


def count_sign_alternations(values, tol: float = STEER_TOL) -> int:
    """Consecutive pairs with strictly opposite signs; near-zero entries never count."""
    signs = [0 if abs(v) <= tol else (1 if v > 0 else -1) for v in values]
    return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


def undulation_score(theta_x, theta_y, epsilon: int) -> float:
    """Alternation ratio of one configuration over joints ``1..epsilon`` (fraction, not %)."""
    count = count_sign_alternations(theta_x[:epsilon]) + count_sign_alternations(theta_y[:epsilon])
    return count / (2.0 * epsilon)


def effective_steering(genotype: Genotype, extensions, i: int) -> np.ndarray:
    """Joint angles of configuration ``i`` up to the epsilon joint, which takes the aim angles."""
    ext = extensions[i]
    k = ext.epsilon - 1
    angles = np.vstack([genotype.steering[i], np.zeros((1, 2))])[: k + 1].copy()
    angles[k] = ext.theta_eps
    return angles


def objective_undulation(genotype: Genotype, extensions) -> float:
    scores = []
    for i, ext in enumerate(extensions):
        angles = effective_steering(genotype, extensions, i)
        scores.append(undulation_score(angles[:, 0], angles[:, 1], ext.epsilon))
    return float(np.mean(scores) * 100.0)


def check_constraints(genotype: Genotype, extensions, phenotypes, task: Task) -> ConstraintReport:
    lo, hi = task.theta_bounds
    len_lo = task.length_bounds[0]
    report = ConstraintReport({key: [] for key in CONSTRAINT_KEYS})
    b = report.breakdown
    for i, (ext, ph, target) in enumerate(zip(extensions, phenotypes, task.targets)):
        tx, ty = ext.theta_eps
        b["theta_x_lower"].append(int(tx < lo))
        b["theta_x_upper"].append(int(tx > hi))
        b["theta_y_lower"].append(int(ty < lo))
        b["theta_y_upper"].append(int(ty > hi))

        on_segment = ext.n_bar - (ext.epsilon - 1)
        b["last_link"].append(int(on_segment == 1 and ext.l_last < len_lo))

        seg = target.segment
        try:
            angle = angle_between(ph.nodes[ext.epsilon - 1] - seg.a, seg.b - seg.a)
            b["overshoot"].append(int(angle >= np.pi / 2))
        except ZeroVector:
            b["overshoot"].append(0)

        hit = False
        for q in range(ext.n_bar):
            link = Segment3(ph.nodes[q], ph.nodes[q + 1])
            if any(segment_cylinder_intersects(link, o) for o in task.obstacles):
                hit = True
                break
        b["collision"].append(int(hit))

        angles = effective_steering(genotype, extensions, i)
        blocked = False
        for q in range(1, min(ext.epsilon, ext.n_bar)):
            if np.all(np.abs(angles[q]) <= STEER_TOL):
                continue
            start = ph.nodes[q]
            probe = Segment3(start, start + len_lo * ph.frames[q].z_axis)
            if any(segment_cylinder_intersects(probe, o) for o in task.obstacles):
                blocked = True
                break
        b["steer_collision"].append(int(blocked))

        b["reach"].append(int(ext.shortfall > REACH_TOL))
    return report


def raw_objectives(genotype: Genotype, task: Task, extensions=None, phenotypes=None) -> np.ndarray:
    if extensions is None:
        extensions, phenotypes = extend_genotype(genotype, task)
    return np.array(
        [
            objective_ik(phenotypes, extensions, task),
            objective_links_to_segment(extensions),
            objective_undulation(genotype, extensions),
            objective_links_on_segment(extensions),
            objective_length(extensions, genotype.lengths),
        ],
        dtype=float,
    )


def penalize(objectives, violations, penalty: PenaltyConfig = PenaltyConfig()):
    """Static penalty: every objective grows by ``R`` per violation."""
    objectives = np.asarray(objectives, dtype=float)
    violations = np.asarray(violations, dtype=float)
    return objectives + penalty.R * violations[..., None]


def evaluate(genotype: Genotype, task: Task, penalty: PenaltyConfig = PenaltyConfig()) -> FitnessVector:
    """Penalized fitness of one genotype (reference path)."""
    extensions, phenotypes = extend_genotype(genotype, task)
    raw = raw_objectives(genotype, task, extensions, phenotypes)
    violations = check_constraints(genotype, extensions, phenotypes, task).total
    return FitnessVector.from_array(penalize(raw, violations, penalty), violations)


@dataclass
class BatchEvaluation:
    objectives: np.ndarray
    raw: np.ndarray
    violations: np.ndarray
    breakdown: dict
    extension: ExtensionBatch

    def fitness(self, i: int) -> FitnessVector:
        return FitnessVector.from_array(self.objectives[i], self.violations[i])


class BatchEvaluator:
    """Vectorized evaluation of flat decision vectors against one task."""

    def __init__(self, task: Task, penalty: PenaltyConfig = PenaltyConfig()):
        self.task = task
        self.penalty = penalty
        self.s1, self.s2 = task.segment_endpoints()
        self.centers, self.radii, self.heights = task.obstacle_arrays()

    def __call__(self, x) -> BatchEvaluation:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        steering, lengths = self.task.decode(x)
        steering = steering.copy()
        steering[:, :, 0, :] = 0.0
        ext = extend_batch(steering, lengths, self.task)
        raw = self._objectives(steering, ext)
        breakdown = self._constraints(steering, ext)
        violations = np.sum([v.sum(axis=-1) for v in breakdown.values()], axis=0).astype(int)
        return BatchEvaluation(
            objectives=penalize(raw, violations, self.penalty),
            raw=raw,
            violations=violations,
            breakdown=breakdown,
            extension=ext,
        )

    def _effective_angles(self, steering, ext):
        n_pop, n_t, n, _ = steering.shape
        angles = np.concatenate([steering, np.zeros((n_pop, n_t, 1, 2))], axis=2)
        k = (ext.epsilon - 1)[..., None, None]
        np.put_along_axis(angles, np.broadcast_to(k, (n_pop, n_t, 1, 2)), ext.theta_eps[:, :, None, :], axis=2)
        return angles

    def _objectives(self, steering, ext):
        eps = ext.epsilon
        n_bar = ext.n_bar
        f_ik = (ext.ik_distance + ext.shortfall).sum(axis=1)
        f_lts = (eps - 1).sum(axis=1)
        f_los = (n_bar - (eps - 1)).sum(axis=1)

        n = self.task.n
        before_last = np.arange(n) < (n_bar - 1)[..., None]
        body = np.where(before_last, ext.lengths, 0.0).sum(axis=-1)
        f_len = (body + ext.l_last).max(axis=1)

        angles = self._effective_angles(steering, ext)
        signs = np.where(np.abs(angles) <= STEER_TOL, 0.0, np.sign(angles))
        alternate = signs[:, :, :-1, :] * signs[:, :, 1:, :] < 0
        counted = np.arange(n)[None, None, :] < (eps - 1)[..., None]
        count = (alternate & counted[..., None]).sum(axis=(2, 3))
        f_und = (count / (2.0 * eps)).mean(axis=1) * 100.0

        return np.stack([f_ik, f_lts, f_und, f_los, f_len], axis=1).astype(float)

    def _constraints(self, steering, ext):
        task = self.task
        lo, hi = task.theta_bounds
        len_lo = task.length_bounds[0]
        tx, ty = ext.theta_eps[..., 0], ext.theta_eps[..., 1]
        out = {
            "theta_x_lower": tx < lo,
            "theta_x_upper": tx > hi,
            "theta_y_lower": ty < lo,
            "theta_y_upper": ty > hi,
        }
        on_segment = ext.n_bar - (ext.epsilon - 1)
        out["last_link"] = (on_segment == 1) & (ext.l_last < len_lo)

        v = ext.eps_node - self.s1[None]
        w = (self.s2 - self.s1)[None]
        nv = np.linalg.norm(v, axis=-1)
        nw = np.linalg.norm(w, axis=-1)
        cos = np.sum(v * w, axis=-1) / np.where(nv > ANGLE_NORM_TOL, nv * nw, 1.0)
        angle = np.arccos(np.clip(cos, -1.0, 1.0))
        out["overshoot"] = (nv > ANGLE_NORM_TOL) & (angle >= np.pi / 2)

        n_pop, n_t = ext.epsilon.shape
        n = task.n
        if len(self.radii):
            nodes = ext.nodes
            hits = segment_cylinder_intersects_batch(
                nodes[:, :, :-1, None, :],
                nodes[:, :, 1:, None, :],
                self.centers,
                self.radii,
                self.heights,
            )
            active = np.arange(n)[None, None, :] < ext.n_bar[..., None]
            out["collision"] = (hits.any(axis=-1) & active).any(axis=-1)

            angles = self._effective_angles(steering, ext)[:, :, :n, :]
            q = np.arange(n)[None, None, :]
            steers = np.any(np.abs(angles) > STEER_TOL, axis=-1)
            check = steers & (q >= 1) & (q < ext.epsilon[..., None]) & (q < ext.n_bar[..., None])
            start = ext.fk_nodes[:, :, :n, :]
            end = start + len_lo * ext.fk_rotations[:, :, :n, :, 2]
            blocked = segment_cylinder_intersects_batch(
                start[..., None, :], end[..., None, :], self.centers, self.radii, self.heights
            )
            out["steer_collision"] = (blocked.any(axis=-1) & check).any(axis=-1)
        else:
            out["collision"] = np.zeros((n_pop, n_t), dtype=bool)
            out["steer_collision"] = np.zeros((n_pop, n_t), dtype=bool)
        out["reach"] = ext.shortfall > REACH_TOL
        return {key: out[key].astype(int) for key in CONSTRAINT_KEYS}


def evaluate_batch(x, task: Task, penalty: PenaltyConfig = PenaltyConfig()) -> BatchEvaluation:
    return BatchEvaluator(task, penalty)(x)
