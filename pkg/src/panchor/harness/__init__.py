from .datagen import GenDataParams, gen_training_data
from .metrics import EvaluationError, Metrics, ObjectMetrics, evaluate
from .run import (
    DecisionRecord,
    RunConfig,
    RunTrace,
    StepTrace,
    default_theory,
    load_trace_records,
    run_scenario,
    save_trace,
    trace_to_lines,
)
from .scenario import (
    Frame,
    Percept,
    Scenario,
    SimObject,
    gen_scenario,
    load_scenario,
    save_scenario,
    scenario_to_lines,
)

__all__ = [
    "GenDataParams", "gen_training_data",
    "EvaluationError", "Metrics", "ObjectMetrics", "evaluate",
    "DecisionRecord", "RunConfig", "RunTrace", "StepTrace", "default_theory",
    "load_trace_records", "run_scenario", "save_trace", "trace_to_lines",
    "Frame", "Percept", "Scenario", "SimObject", "gen_scenario",
    "load_scenario", "save_scenario", "scenario_to_lines",
]
