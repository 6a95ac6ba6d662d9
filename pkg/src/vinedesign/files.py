"""
JSON task/solution files and CSV scene export.

Task files carry explicit units::

    {"schema_version": 1, "units": {"length": "cm", "angle": "deg"},
     "n": 20, "theta_bounds": [-45, 45], "length_bounds": [25, 70],
     "home": {"position": [0, 0, 150], "orientation": [180, 0]},
     "targets": [{"position": [...], "approach": [polar, azimuth],
                  "segment_length": 150}],
     "obstacles": [{"base_center": [...], "radius": 12, "height": 70}]}

Orientation and approach pairs are (polar from +z, azimuth from +x). The
home orientation gives the direction the first link grows in; a target's
approach gives the direction its orientation segment runs away from it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from vinedesign.engines.config import EngineConfig
from vinedesign.errors import InvalidConfig, ParseError, ValidationError
from vinedesign.evaluation import FitnessVector
from vinedesign.geometry import Cylinder
from vinedesign.robot import (
    DEFAULT_SEGMENT_LENGTH,
    Genotype,
    HomeBase,
    PhenotypeExtension,
    Target,
    Task,
    extend_genotype,
)

SCHEMA_VERSION = 1
LENGTH_UNITS = {"cm": 1.0, "mm": 0.1, "m": 100.0}
ANGLE_UNITS = {"rad": 1.0, "deg": math.pi / 180.0}


def bundled_tasks() -> list[str]:
    root = resources.files("vinedesign") / "data" / "tasks"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_task_path(name: str) -> Path:
    path = resources.files("vinedesign") / "data" / "tasks" / f"{name}.json"
    return Path(str(path))


def resolve_task_path(spec: str) -> Path:
    """A file path, or the name of a bundled task."""
    path = Path(spec)
    if path.exists() or spec not in bundled_tasks():
        return path
    return bundled_task_path(spec)


def _field(data: dict, key: str, path, context: str = ""):
    if not isinstance(data, dict) or key not in data:
        name = f"{context}.{key}" if context else key
        raise ParseError("missing required field", path=path, field=name)
    return data[key]


def _vector(value, path, name, size=3) -> list:
    try:
        out = [float(v) for v in value]
    except (TypeError, ValueError):
        raise ParseError(f"expected a list of {size} numbers", path=path, field=name) from None
    if len(out) != size or not all(math.isfinite(v) for v in out):
        raise ParseError(f"expected {size} finite numbers, got {value!r}", path=path, field=name)
    return out


def _number(value, path, name) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"expected a number, got {value!r}", path=path, field=name) from None
    if not math.isfinite(out):
        raise ParseError("expected a finite number", path=path, field=name)
    return out


def task_from_dict(data: dict, path=None, name: str | None = None) -> Task:
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", path=path)
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}", path=path, field="schema_version")
    units = data.get("units", {})
    length_unit = units.get("length", "cm")
    angle_unit = units.get("angle", "rad")
    if length_unit not in LENGTH_UNITS:
        raise ParseError(f"unknown length unit {length_unit!r}", path=path, field="units.length")
    if angle_unit not in ANGLE_UNITS:
        raise ParseError(f"unknown angle unit {angle_unit!r}", path=path, field="units.angle")
    ls = LENGTH_UNITS[length_unit]
    ang = ANGLE_UNITS[angle_unit]

    def length(v, f):
        return _number(v, path, f) * ls

    def angle(v, f):
        return _number(v, path, f) * ang

    home_data = _field(data, "home", path)
    home_pos = [v * ls for v in _vector(_field(home_data, "position", path, "home"), path, "home.position")]
    orient = _vector(home_data.get("orientation", [0, 0]), path, "home.orientation", size=2)

    targets = []
    for i, t in enumerate(_field(data, "targets", path)):
        ctx = f"targets[{i}]"
        pos = [v * ls for v in _vector(_field(t, "position", path, ctx), path, f"{ctx}.position")]
        polar, azimuth = _vector(t.get("approach", [0, 0]), path, f"{ctx}.approach", size=2)
        seg = t.get("segment_length")
        seg = DEFAULT_SEGMENT_LENGTH if seg is None else length(seg, f"{ctx}.segment_length")
        targets.append(Target(np.array(pos), polar * ang, azimuth * ang, seg))

    obstacles = []
    for i, o in enumerate(data.get("obstacles", [])):
        ctx = f"obstacles[{i}]"
        center = [v * ls for v in _vector(_field(o, "base_center", path, ctx), path, f"{ctx}.base_center")]
        radius = length(_field(o, "radius", path, ctx), f"{ctx}.radius")
        height = length(_field(o, "height", path, ctx), f"{ctx}.height")
        if radius <= 0 or height <= 0:
            raise ValidationError(f"{ctx}: radius and height must be > 0")
        obstacles.append(Cylinder(np.array(center), radius, height))

    n = _field(data, "n", path)
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError(f"expected an integer, got {n!r}", path=path, field="n")
    tb = _vector(_field(data, "theta_bounds", path), path, "theta_bounds", size=2)
    lb = _vector(_field(data, "length_bounds", path), path, "length_bounds", size=2)
    return Task(
        targets=targets,
        obstacles=obstacles,
        home=HomeBase.from_angles(np.array(home_pos), orient[0] * ang, orient[1] * ang),
        n=n,
        theta_bounds=(tb[0] * ang, tb[1] * ang),
        length_bounds=(lb[0] * ls, lb[1] * ls),
        name=name or data.get("name") or (Path(path).stem if path else "task"),
    )


def load_task(path) -> Task:
    path = resolve_task_path(str(path))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read task file: {exc.strerror}", path=path) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno) from exc
    return task_from_dict(data, path=path)


def task_to_dict(task: Task) -> dict:
    """Serialize in radians/cm; ``task_from_dict`` of the result rebuilds the task."""
    z = task.home.growth_direction
    home_polar = math.acos(max(-1.0, min(1.0, z[2])))
    home_az = math.atan2(z[1], z[0])
    return {
        "schema_version": SCHEMA_VERSION,
        "name": task.name,
        "units": {"length": "cm", "angle": "rad"},
        "n": task.n,
        "theta_bounds": list(task.theta_bounds),
        "length_bounds": list(task.length_bounds),
        "home": {"position": task.home.position.tolist(), "orientation": [home_polar, home_az]},
        "targets": [
            {
                "position": t.position.tolist(),
                "approach": [t.approach_polar, t.approach_azimuth],
                "segment_length": t.segment_length,
            }
            for t in task.targets
        ],
        "obstacles": [
            {"base_center": o.base_center.tolist(), "radius": o.radius, "height": o.height}
            for o in task.obstacles
        ],
    }


@dataclass
class RunRecord:
    """Everything needed to inspect or reproduce one optimization run."""

    task_id: str
    combo_id: str
    seed: int
    config: EngineConfig
    fitness: FitnessVector | None
    design: list
    steering: list
    extensions: list
    history: list = field(default_factory=list)
    seconds: float | None = field(default=None, compare=False)
    error: str | None = None

    @property
    def feasible(self) -> bool:
        return self.fitness is not None and self.fitness.feasible

    @property
    def genotype(self) -> Genotype:
        return Genotype(np.array(self.steering, dtype=float), np.array(self.design, dtype=float))


def record_from_result(result, task: Task, task_id: str, combo_id: str, seconds=None) -> RunRecord:
    genotype = result.best.genotype
    extensions, _ = extend_genotype(genotype, task)
    return RunRecord(
        task_id=task_id,
        combo_id=combo_id,
        seed=int(result.config.seed),
        config=result.config,
        fitness=result.best.fitness,
        design=genotype.lengths.tolist(),
        steering=genotype.steering.tolist(),
        extensions=extensions,
        history=list(result.history),
        seconds=seconds,
    )


def failed_record(task_id, combo_id, config: EngineConfig, error: str) -> RunRecord:
    return RunRecord(task_id, combo_id, int(config.seed), config, None, [], [], [], error=error)


def _fitness_dict(f: FitnessVector | None):
    return None if f is None else f.to_dict()


def _fitness_from(d):
    if d is None:
        return None
    d = dict(d)
    d.pop("feasible", None)
    return FitnessVector(**d)


def record_to_dict(record: RunRecord) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "task_id": record.task_id,
        "combo_id": record.combo_id,
        "seed": record.seed,
        "engine": record.config.to_dict(),
        "fitness": _fitness_dict(record.fitness),
        "design": list(record.design),
        "configurations": [
            {
                "steering": steer,
                "epsilon": ext.epsilon,
                "theta_eps": list(ext.theta_eps),
                "n_bar": ext.n_bar,
                "l_last": ext.l_last,
                "shortfall": ext.shortfall,
            }
            for steer, ext in zip(record.steering, record.extensions)
        ],
        "history": [[*h.as_array().tolist(), h.violations] for h in record.history],
        "error": record.error,
    }


def record_from_dict(data: dict, path=None) -> RunRecord:
    try:
        configs = data["configurations"]
        config = EngineConfig.from_dict(data["engine"])
        return RunRecord(
            task_id=data["task_id"],
            combo_id=data["combo_id"],
            seed=int(data["seed"]),
            config=config,
            fitness=_fitness_from(data["fitness"]),
            design=list(data["design"]),
            steering=[c["steering"] for c in configs],
            extensions=[
                PhenotypeExtension(
                    epsilon=c["epsilon"],
                    theta_eps=tuple(c["theta_eps"]),
                    n_bar=c["n_bar"],
                    l_last=c["l_last"],
                    shortfall=c["shortfall"],
                )
                for c in configs
            ],
            history=[FitnessVector.from_array(h[:5], h[5]) for h in data.get("history", [])],
            error=data.get("error"),
        )
    except KeyError as exc:
        raise ParseError("missing required field", path=path, field=exc.args[0]) from None
    except InvalidConfig as exc:
        raise ParseError(str(exc), path=path, field="engine") from None


def save_solution(record: RunRecord, path) -> Path:
    path = Path(path)
    text = json.dumps(record_to_dict(record), indent=1) + "\n"
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write solution to {path}: {exc.strerror}") from exc
    return path


def load_solution(path) -> RunRecord:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read solution file: {exc.strerror}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno) from exc
    return record_from_dict(data, path=path)


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def export_scene(record: RunRecord, task: Task, path) -> Path:
    """Write robot polylines, obstacle cylinders and target segments as CSV blocks."""
    _, phenotypes = extend_genotype(record.genotype, task)
    lines = [
        "# config rows: x,y,z | cylinder rows: base_x,base_y,base_z,radius,height | target_segment rows: x,y,z",
    ]
    for i, ph in enumerate(phenotypes, 1):
        lines.append(f"#config {i}")
        lines.extend(_row(p) for p in ph.nodes)
    for i, c in enumerate(task.obstacles, 1):
        lines.append(f"#cylinder {i}")
        lines.append(_row([*c.base_center, c.radius, c.height]))
    for i, t in enumerate(task.targets, 1):
        seg = t.segment
        lines.append(f"#target_segment {i}")
        lines.append(_row(seg.a))
        lines.append(_row(seg.b))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_scene(path) -> dict:
    """Parse a scene file into ``{"config": [...], "cylinder": [...], "target_segment": [...]}``."""
    blocks = {"config": [], "cylinder": [], "target_segment": []}
    current = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("# "):
            continue
        if line.startswith("#"):
            kind = line[1:].split()[0]
            if kind not in blocks:
                raise ParseError(f"unknown scene block {kind!r}", path=path)
            current = []
            blocks[kind].append(current)
            continue
        if current is None:
            raise ParseError("data row before any block header", path=path)
        current.append([float(v) for v in line.split(",")])
    return {k: [np.array(b) for b in v] for k, v in blocks.items()}
