from .config import FaultSpec, SimConfig
from .harness import compare_models, run_pull_rollout, run_push_rollout
from .reporting import ComparisonTable, SimReport
from .scenarios import SCENARIO_NAMES, ScenarioResult, run_e2e_scenario

__all__ = [
    "ComparisonTable",
    "FaultSpec",
    "SCENARIO_NAMES",
    "ScenarioResult",
    "SimConfig",
    "SimReport",
    "compare_models",
    "run_e2e_scenario",
    "run_pull_rollout",
    "run_push_rollout",
]
