"""Command-line interface.

Subcommands: run, query, learn, gen-scenario, gen-data, eval. All
randomness flows from the --seed argument (or the run config's seed), so
repeated invocations with identical arguments produce identical files.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .harness.datagen import GenDataParams, gen_training_data
from .harness.metrics import evaluate
from .harness.run import RunConfig, default_theory, run_scenario, save_trace
from .harness.scenario import gen_scenario, load_scenario, save_scenario
from .lang.ast import Program
from .lang.parser import parse_program
from .lang.printer import print_program
from .learn import (
    LearnConfig,
    LearnerInput,
    learn_tree,
    load_bias,
    parse_target_spec,
    target_key,
    tree_text,
    tree_to_clauses,
)
from .infer.query import query_prob


def _read_program(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_program(handle.read())


def _cmd_run(args) -> int:
    config = RunConfig()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            config = RunConfig.from_dict(json.load(handle))
    overrides = {}
    if args.too:
        overrides["too_paths"] = tuple(args.too.split(","))
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = RunConfig.from_dict({**config.to_dict(), **overrides})
    if not config.too_paths:
        config = RunConfig.from_dict(
            {**config.to_dict(), "too_paths": list(default_theory())}
        )
    scenario = load_scenario(args.scenario)
    trace = run_scenario(scenario, config)
    save_trace(trace, args.trace)
    print(f"wrote {args.trace} ({len(trace.steps)} steps)")
    return 0


def _cmd_query(args) -> int:
    program = _read_program(args.program)
    rng = np.random.default_rng(args.seed)
    estimate = query_prob(program, args.query, args.samples, rng)
    print(f"{estimate.estimate:.6f} {estimate.std_error:.6f}")
    return 0


def _cmd_learn(args) -> int:
    observations = _read_program(args.data)
    background = _read_program(args.background) if args.background else Program()
    bias = load_bias(_read_program(args.bias))
    pred, arity, time = parse_target_spec(args.target)
    target = target_key(pred, arity, time)
    config = LearnConfig(seed=args.seed)
    result = learn_tree(
        LearnerInput(background, observations, bias, (target,)), config
    )
    tree, tbias, _ = result[target]
    program = tree_to_clauses(tree, tbias, config)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(print_program(program))
    dump = tree_text(tree, tbias)
    if args.tree_out:
        with open(args.tree_out, "w", encoding="utf-8") as handle:
            handle.write(dump + "\n")
    print(dump)
    print(f"wrote {args.out} ({len(program.clauses)} clauses)")
    return 0


def _cmd_gen_scenario(args) -> int:
    params = None
    if args.params:
        with open(args.params, "r", encoding="utf-8") as handle:
            params = json.load(handle)
    scenario = gen_scenario(args.kind, params, args.seed)
    save_scenario(scenario, args.out)
    print(f"wrote {args.out} ({len(scenario.frames)} frames)")
    return 0


def _cmd_gen_data(args) -> int:
    params = GenDataParams()
    if args.params:
        with open(args.params, "r", encoding="utf-8") as handle:
            params = GenDataParams.from_dict(json.load(handle))
    text = gen_training_data(params, args.seed)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(text)
    print(f"wrote {args.out}")
    return 0


def _cmd_eval(args) -> int:
    from .harness.run import load_trace_records
    from .harness.trace_eval import trace_metrics_from_file

    scenario = load_scenario(args.scenario)
    metrics = trace_metrics_from_file(args.trace, scenario)
    print(json.dumps(metrics.to_dict(), sort_keys=True, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panchor",
        description="Probabilistic object anchoring with occlusion reasoning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario through the anchoring loop")
    p.add_argument("--scenario", required=True)
    p.add_argument("--too", help="comma-separated theory-of-occlusion files")
    p.add_argument("--config", help="run config JSON file")
    p.add_argument("--trace", required=True, help="output trace file")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("query", help="estimate a query probability")
    p.add_argument("--program", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("learn", help="induce occlusion rules from data")
    p.add_argument("--data", required=True)
    p.add_argument("--background")
    p.add_argument("--bias", required=True)
    p.add_argument("--target", required=True, help='e.g. "occluder/2:t+1"')
    p.add_argument("--out", required=True)
    p.add_argument("--tree-out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("gen-scenario", help="generate a synthetic scenario")
    p.add_argument("--kind", required=True,
                   choices=["shell_game", "uni_modal", "transitive"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--params", help="scenario parameter JSON file")
    p.set_defaults(func=_cmd_gen_scenario)

    p = sub.add_parser("gen-data", help="generate learner training data")
    p.add_argument("--params", help="generator parameter JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("eval", help="score a trace against scenario truth")
    p.add_argument("--trace", required=True)
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=_cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface clean one-line errors
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
