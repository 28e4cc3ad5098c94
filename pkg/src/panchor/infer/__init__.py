from .engine import (
    CompiledProgram,
    Engine,
    EvalError,
    InferenceError,
    SampleError,
    compile_program,
)
from .particle import (
    Belief,
    DegenerateBeliefError,
    Observation,
    Particle,
    belief_records,
    filter_step,
    init_belief,
    resample,
    value_to_json,
)
from .query import (
    ProbabilityEstimate,
    enumerate_prob,
    prove,
    query_prob,
    sample_world,
)
from .world import UNDEFINED, FactLayer, World

__all__ = [
    "CompiledProgram", "Engine", "EvalError", "InferenceError", "SampleError",
    "compile_program",
    "Belief", "DegenerateBeliefError", "Observation", "Particle",
    "belief_records", "filter_step", "init_belief", "resample", "value_to_json",
    "ProbabilityEstimate", "enumerate_prob", "prove", "query_prob", "sample_world",
    "UNDEFINED", "FactLayer", "World",
]
