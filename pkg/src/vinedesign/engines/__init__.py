from vinedesign.engines import bbbc, de, ga, pso
from vinedesign.engines.config import (
    ALGORITHMS,
    DE_VARIANTS,
    EngineConfig,
    default_grid,
    parse_params,
)
from vinedesign.engines.core import Individual, RunResult, run_engine

STEPS = {
    "ga": (ga.init, ga.step),
    "pso": (pso.init, pso.step),
    "de": (de.init, de.step),
    "bbbc": (bbbc.init, bbbc.step),
}

__all__ = [
    "ALGORITHMS",
    "DE_VARIANTS",
    "EngineConfig",
    "Individual",
    "RunResult",
    "STEPS",
    "default_grid",
    "parse_params",
    "run_engine",
]
