from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, replace

from vinedesign.errors import InvalidConfig

ALGORITHMS = ("ga", "pso", "de", "bbbc")
DE_VARIANTS = ("rand/1", "best/1", "rand/2", "best/2", "current-to-best/1", "current-to-rand/1")

# distinct partner vectors each DE variant draws besides the target vector
DE_PARTNERS = {
    "rand/1": 3,
    "best/1": 2,
    "rand/2": 5,
    "best/2": 4,
    "current-to-best/1": 2,
    "current-to-rand/1": 3,
}

ALGORITHM_PARAMS = {
    "ga": ("alpha", "p_c", "p_m"),
    "pso": ("omega", "c1", "c2"),
    "de": ("variant", "F", "CR"),
    "bbbc": (),
}
SHARED_PARAMS = ("N", "G", "seed", "elitist")


@dataclass(frozen=True)
class EngineConfig:
    algorithm: str = "ga"
    N: int = 500
    G: int = 500
    seed: int = 0
    elitist: bool | None = None
    # GA
    alpha: float = 0.5
    p_c: float = 1.0
    p_m: float | str = 0.2
    # PSO
    omega: float = 0.8
    c1: float = 2.5
    c2: float = 0.5
    # DE
    variant: str = "rand/1"
    F: float = 0.5
    CR: float = 0.9

    def __post_init__(self):
        algo = str(self.algorithm).lower()
        object.__setattr__(self, "algorithm", algo)
        if algo not in ALGORITHMS:
            raise InvalidConfig(f"unknown algorithm '{self.algorithm}', expected one of {ALGORITHMS}")
        if self.elitist is None:
            object.__setattr__(self, "elitist", algo == "ga")
        if int(self.N) != self.N or self.N < 2:
            raise InvalidConfig(f"population size N must be an integer >= 2, got {self.N}")
        if int(self.G) != self.G or self.G < 0:
            raise InvalidConfig(f"generations G must be an integer >= 0, got {self.G}")
        if self.alpha < 0:
            raise InvalidConfig(f"alpha must be >= 0, got {self.alpha}")
        if not 0 <= self.p_c <= 1:
            raise InvalidConfig(f"p_c must be in [0, 1], got {self.p_c}")
        if self.p_m != "dynamic" and not (isinstance(self.p_m, (int, float)) and 0 <= self.p_m <= 1):
            raise InvalidConfig(f"p_m must be in [0, 1] or 'dynamic', got {self.p_m!r}")
        for name in ("omega", "c1", "c2"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0")
        if self.variant not in DE_VARIANTS:
            raise InvalidConfig(f"unknown DE variant '{self.variant}', expected one of {DE_VARIANTS}")
        if self.F < 0:
            raise InvalidConfig(f"F must be >= 0, got {self.F}")
        if not 0 <= self.CR <= 1:
            raise InvalidConfig(f"CR must be in [0, 1], got {self.CR}")
        if algo == "de" and self.N < DE_PARTNERS[self.variant] + 1:
            raise InvalidConfig(
                f"DE {self.variant} needs N >= {DE_PARTNERS[self.variant] + 1}, got {self.N}"
            )

    def mutation_rate(self, generation: int) -> float:
        if self.p_m == "dynamic":
            return 1.0 - generation / self.G if self.G else 1.0
        return float(self.p_m)

    def to_dict(self) -> dict:
        """Shared settings plus only the parameters the algorithm uses."""
        full = asdict(self)
        keep = ("algorithm",) + SHARED_PARAMS + ALGORITHM_PARAMS[self.algorithm]
        return {k: full[k] for k in keep}

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown engine parameters: {sorted(unknown)}")
        return cls(**data)

    def with_params(self, **params) -> "EngineConfig":
        return replace(self, **params)


def parse_param(key: str, raw: str):
    """Convert one ``key=value`` CLI override to the field's type."""
    if key not in EngineConfig.__dataclass_fields__ or key == "algorithm":
        raise InvalidConfig(f"unknown parameter '{key}'")
    if key in ("N", "G", "seed"):
        try:
            return int(raw)
        except ValueError as exc:
            raise InvalidConfig(f"{key} must be an integer, got {raw!r}") from exc
    if key == "elitist":
        low = raw.lower()
        if low in ("1", "true", "yes"):
            return True
        if low in ("0", "false", "no"):
            return False
        raise InvalidConfig(f"elitist must be a boolean, got {raw!r}")
    if key == "variant":
        return raw
    if key == "p_m" and raw.lower() == "dynamic":
        return "dynamic"
    try:
        return float(raw)
    except ValueError as exc:
        raise InvalidConfig(f"{key} must be a number, got {raw!r}") from exc


def parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise InvalidConfig(f"expected key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        key = key.strip()
        out[key] = parse_param(key, raw.strip())
    return out


def default_grid(**shared) -> list[tuple[str, EngineConfig]]:
    """The 58 parameter combinations: 12 GA, 27 PSO, 18 DE, 1 BBBC."""
    grid = []
    for i, (alpha, p_m) in enumerate(itertools.product((0.5, 0.419, 0.381), (0.2, 0.4, 0.6, "dynamic")), 1):
        grid.append((f"GA-{i:02d}", EngineConfig("ga", alpha=alpha, p_m=p_m, **shared)))
    values = (0.5, 2.5, 5.0)
    for i, (omega, c1, c2) in enumerate(itertools.product((0.6, 0.8, 1.0), values, values), 1):
        grid.append((f"PSO-{i:02d}", EngineConfig("pso", omega=omega, c1=c1, c2=c2, **shared)))
    for i, (variant, f) in enumerate(itertools.product(DE_VARIANTS, (0.5, 0.75, 1.0)), 1):
        grid.append((f"DE-{i:02d}", EngineConfig("de", variant=variant, F=f, **shared)))
    grid.append(("BBBC-01", EngineConfig("bbbc", **shared)))
    return grid
