"""Induction of distributional logic trees from ground observations.

Groundings of a target predicate are enumerated by a declarative-bias
domain goal, labelled by the presence of a label fact, and split greedily
on bias literals to maximize the expected log-likelihood. Leaves hold a
finite distribution and, when a continuous feature helps on held-out data,
a logistic model of it. Paths of the finished tree become clauses whose
bodies are mutually exclusive by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..infer.engine import Engine, InferenceError, compile_program
from ..infer.world import World
from ..lang.ast import (
    Atom,
    AtomGoal,
    Body,
    BuiltinGoal,
    Clause,
    Compound,
    Constant,
    Finite,
    Lit,
    Num,
    Program,
    Term,
    ValueGoal,
    Var,
    goal_vars,
    make_list,
)
from ..lang.printer import goal_text
from ..lang.timemap import map_term, map_time_predicates, unmap_time_predicates
from .logistic import PROB_CAP, fit_logistic, log_likelihood, predict_prob


class BiasError(ValueError):
    pass


class LearnError(ValueError):
    pass


# ---------------------------------------------------------------------------
# declarative bias

@dataclass(frozen=True)
class TargetBias:
    key: str                      # e.g. "occluder/2:t+1"
    target: Atom                  # mapped template, e.g. occluder_t1(A, B)
    label: "Goal"                 # goal marking positive groundings
    domain: Body                  # goal enumerating groundings
    candidates: tuple = ()        # positive literal templates


@dataclass(frozen=True)
class DeclarativeBias:
    targets: dict[str, TargetBias]

    def for_target(self, key: str) -> TargetBias:
        if key not in self.targets:
            raise BiasError(f"no bias declared for target {key}")
        return self.targets[key]


def parse_target_spec(spec: str) -> tuple[str, int, object]:
    """Parse "pred/arity", "pred/arity:t" or "pred/arity:t+1"."""
    time = None
    name = spec
    if name.endswith(":t+1"):
        time, name = "t1", name[:-4]
    elif name.endswith(":t"):
        time, name = "t", name[:-2]
    if "/" not in name:
        raise BiasError(f"malformed target spec {spec!r}; expected pred/arity")
    pred, _, arity = name.partition("/")
    return pred, int(arity), time


def target_key(pred: str, arity: int, time) -> str:
    suffix = {"t1": ":t+1", "t": ":t", None: ""}[time]
    return f"{pred}/{arity}{suffix}"


def _term_to_goal(term: Term):
    """Interpret a bias template term (already time-mapped) as a goal."""
    if isinstance(term, Compound) and term.functor == "~=" and len(term.args) == 2:
        atom = _term_to_atom(term.args[0])
        return ValueGoal(atom, term.args[1])
    return AtomGoal(_term_to_atom(term))


def _term_to_atom(term: Term) -> Atom:
    if isinstance(term, Constant):
        return Atom(term.name, ())
    if isinstance(term, Compound):
        return Atom(term.functor, term.args)
    raise BiasError(f"cannot interpret {term!r} as an atom template")


def load_bias(program: Program) -> DeclarativeBias:
    """Read target/2, domain/2 and candidate/2 facts into a bias.

    Templates are written with time indices; they are mapped to the plain
    predicates the learner works on.
    """
    raw: dict[str, dict] = {}
    order: list[str] = []
    for clause in program.clauses:
        head = clause.head
        if head.pred not in ("target", "domain", "candidate") or clause.body:
            continue
        if head.pred == "target" and head.arity == 2:
            tmpl, label = head.args
        elif head.arity == 2:
            tmpl, label = head.args
        else:
            raise BiasError(f"malformed bias fact {head.pred}/{head.arity}")
        target_atom = _term_to_atom(map_term(tmpl))
        key = _key_from_template(tmpl)
        entry = raw.setdefault(key, {"candidates": []})
        if key not in order:
            order.append(key)
        entry.setdefault("target", target_atom)
        mapped = map_term(label)
        if head.pred == "target":
            entry["label"] = _term_to_goal(mapped)
        elif head.pred == "domain":
            entry["domain"] = (Lit(_term_to_goal(mapped)),)
        else:
            entry["candidates"].append(_term_to_goal(mapped))
    targets = {}
    for key in order:
        entry = raw[key]
        if "domain" not in entry:
            raise BiasError(f"target {key} has no domain/2 declaration")
        label = entry.get("label", AtomGoal(entry["target"]))
        targets[key] = TargetBias(
            key, entry["target"], label, entry["domain"], tuple(entry["candidates"])
        )
    return DeclarativeBias(targets)


def _key_from_template(tmpl: Term) -> str:
    time = None
    inner = tmpl
    if (
        isinstance(tmpl, Compound)
        and tmpl.functor == "+"
        and len(tmpl.args) == 2
        and isinstance(tmpl.args[0], Compound)
        and tmpl.args[0].functor == ":"
    ):
        time, inner = "t1", tmpl.args[0].args[0]
    elif isinstance(tmpl, Compound) and tmpl.functor == ":":
        time, inner = "t", tmpl.args[0]
    atom = _term_to_atom(inner)
    return target_key(atom.pred, atom.arity, time)


# ---------------------------------------------------------------------------
# learner input and configuration

@dataclass(frozen=True)
class LearnerInput:
    background: Program
    observations: Program
    bias: DeclarativeBias
    targets: tuple[str, ...]


@dataclass(frozen=True)
class LearnConfig:
    min_examples: float = 20.0
    min_gain: float = 1e-3
    max_depth: int = 6
    laplace: float = 1.0
    round_threshold: float = 0.995
    holdout_every: int = 5      # every k-th grounding goes to the holdout
    m_worlds: int = 25          # world samples for probabilistic background
    seed: int = 0


# ---------------------------------------------------------------------------
# tree nodes

@dataclass
class Leaf:
    p_true: float
    weight: float
    model: tuple | None = None  # (candidate index, weights, bias)


@dataclass
class Internal:
    test: int  # index into the bias candidate list
    true_branch: "TreeNode"
    false_branch: "TreeNode"


TreeNode = Leaf | Internal


# ---------------------------------------------------------------------------
# substitution helpers

def _subst_term(term: Term, env: dict[str, Term]) -> Term:
    if isinstance(term, Var):
        return env.get(term.name, term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_subst_term(a, env) for a in term.args))
    return term


def _subst_goal(goal, env: dict[str, Term]):
    if isinstance(goal, AtomGoal):
        atom = goal.atom
        return AtomGoal(Atom(atom.pred, tuple(_subst_term(a, env) for a in atom.args),
                             atom.time))
    if isinstance(goal, ValueGoal):
        atom = goal.atom
        return ValueGoal(
            Atom(atom.pred, tuple(_subst_term(a, env) for a in atom.args), atom.time),
            _subst_term(goal.value, env),
        )
    raise BiasError(f"unsupported bias goal {goal!r}")


def _ordered_vars(atom: Atom) -> list[str]:
    seen: list[str] = []
    for arg in atom.args:
        for name in sorted(goal_vars(AtomGoal(Atom("x", (arg,))))):
            if name not in seen:
                seen.append(name)
    return seen


# ---------------------------------------------------------------------------
# scoring

def _leaf_loglik(w_true: float, w_false: float, laplace: float) -> float:
    total = w_true + w_false
    if total <= 0.0:
        return 0.0
    p = (w_true + laplace) / (total + 2.0 * laplace)
    ll = 0.0
    if w_true > 0.0:
        ll += w_true * math.log(p)
    if w_false > 0.0:
        ll += w_false * math.log(1.0 - p)
    return ll


def score_split(labels, weights, q, laplace: float = 1.0,
                min_examples: float = 0.0) -> float:
    """Expected log-likelihood gain of splitting on a test.

    `q` holds, per example, the probability that the test succeeds (0/1 for
    a deterministic background, fractions average over sampled worlds);
    examples route to both children with the corresponding weight shares.
    An (effectively) empty child makes the split inadmissible.
    """
    labels = np.asarray(labels, dtype=float)
    weights = np.asarray(weights, dtype=float)
    q = np.asarray(q, dtype=float)
    wt = weights * q
    wf = weights - wt
    if wt.sum() < max(min_examples, 1e-9) or wf.sum() < max(min_examples, 1e-9):
        return -math.inf
    parent = _leaf_loglik(float(weights[labels == 1.0].sum()),
                          float(weights[labels == 0.0].sum()), laplace)
    child_true = _leaf_loglik(float(wt[labels == 1.0].sum()),
                              float(wt[labels == 0.0].sum()), laplace)
    child_false = _leaf_loglik(float(wf[labels == 1.0].sum()),
                               float(wf[labels == 0.0].sum()), laplace)
    return child_true + child_false - parent


# ---------------------------------------------------------------------------
# induction

class _TargetData:
    """Groundings with labels, candidate test outcomes and feature values."""

    def __init__(self, groundings, labels, tests, features):
        self.groundings = groundings        # list of env dicts
        self.labels = np.asarray(labels, dtype=float)
        self.tests = tests                  # candidate index -> q array
        self.features = features            # candidate index -> value array (nan = missing)
        self.n = len(groundings)


def _is_stochastic(program: Program) -> bool:
    for clause in program.clauses:
        dist = clause.dist
        if dist is None:
            continue
        if isinstance(dist, Finite) and len(dist.pairs) == 1:
            prob = dist.pairs[0][0]
            if isinstance(prob, Num) and abs(prob.value - 1.0) <= 1e-12:
                continue
        return True
    return False


def _bias_preds(bias: TargetBias) -> set[str]:
    preds = {bias.target.pred}
    for goal in (bias.label, *bias.candidates):
        if isinstance(goal, (AtomGoal, ValueGoal)):
            preds.add(goal.atom.pred)
    for lit in bias.domain:
        if isinstance(lit.goal, (AtomGoal, ValueGoal)):
            preds.add(lit.goal.atom.pred)
    return preds


def _collect_data(compiled, bias: TargetBias, config: LearnConfig) -> _TargetData:
    # bias-declared predicates may be absent from a particular data set;
    # they are still known goals, not typos
    compiled.known_preds.update(_bias_preds(bias))
    stochastic = _is_stochastic(compiled.program)
    n_worlds = config.m_worlds if stochastic else 1
    engines = []
    for m in range(n_worlds):
        rng = np.random.default_rng([config.seed, m]) if stochastic else None
        engines.append(Engine(compiled, World(), rng))
    base = engines[0]

    target_vars = _ordered_vars(bias.target)
    groundings: list[dict[str, Term]] = []
    seen = set()
    gen = base.solve_body(bias.domain, 0)
    try:
        for _ in gen:
            env = {}
            for name in target_vars:
                ground = base.reify(Var(name), 0)
                if ground is None:
                    raise LearnError(
                        f"domain goal leaves target variable {name} unbound"
                    )
                env[name] = ground
            key = tuple(env[name] for name in target_vars)
            if key not in seen:
                seen.add(key)
                groundings.append(env)
    finally:
        gen.close()
    if not groundings:
        raise LearnError(f"no groundings of target {bias.key}")

    labels = [1.0 if _holds(base, _subst_goal(bias.label, env)) else 0.0
              for env in groundings]

    tests = {}
    features = {}
    for ci, cand in enumerate(bias.candidates):
        if _is_feature(cand, target_vars):
            values = np.full(len(groundings), np.nan)
            for gi, env in enumerate(groundings):
                value = _feature_value(base, cand, env)
                if value is not None:
                    values[gi] = value
            features[ci] = values
        else:
            q = np.zeros(len(groundings))
            for gi, env in enumerate(groundings):
                goal = _subst_goal(cand, env)
                hits = sum(1 for eng in engines if _holds(eng, goal))
                q[gi] = hits / n_worlds
            tests[ci] = q
    return _TargetData(groundings, labels, tests, features)


def _holds(engine: Engine, goal) -> bool:
    mark = len(engine.trail)
    gen = engine.solve_goal(goal, engine.new_frame(), 0)
    try:
        return next(gen, None) is not None
    finally:
        gen.close()
        engine.undo(mark)


def _is_feature(goal, target_vars) -> bool:
    if not isinstance(goal, ValueGoal):
        return False
    value = goal.value
    return isinstance(value, Var) and value.name not in target_vars


def _feature_value(engine: Engine, goal: ValueGoal, env) -> float | None:
    ground = _subst_goal(goal, env)
    frame = engine.new_frame()
    mark = len(engine.trail)
    gen = engine.solve_goal(ground, frame, 0)
    try:
        if next(gen, None) is None:
            return None
        value = engine.reify(ground.value, frame)
        if isinstance(value, Num):
            return float(value.value)
        return None
    finally:
        gen.close()
        engine.undo(mark)


def _fit_leaf(data: _TargetData, idx, weights, config: LearnConfig) -> Leaf:
    labels = data.labels[idx]
    w_true = float(weights[labels == 1.0].sum())
    w_false = float(weights[labels == 0.0].sum())
    total = w_true + w_false
    p = (w_true + config.laplace) / (total + 2.0 * config.laplace)
    leaf = Leaf(p_true=p, weight=total)
    if w_true <= 0.0 or w_false <= 0.0:
        return leaf  # single-class leaf, a statistical model adds nothing

    # try a logistic model on each fully-available continuous feature,
    # keeping it only if it beats the plain distribution on held-out data
    best = None
    for ci, values in sorted(data.features.items()):
        feats = values[idx]
        live = weights > 1e-12
        if np.isnan(feats[live]).any() or live.sum() < 4:
            continue
        points = [([feats[i]], labels[i] == 1.0, float(weights[i]))
                  for i in range(len(idx)) if live[i]]
        holdout = points[config.holdout_every - 1::config.holdout_every]
        train = [pt for i, pt in enumerate(points)
                 if (i + 1) % config.holdout_every != 0]
        if not holdout or not train:
            continue
        tw = sum(pt[2] for pt in train if pt[1])
        tt = sum(pt[2] for pt in train)
        p_train = (tw + config.laplace) / (tt + 2.0 * config.laplace)
        ll_const = sum(
            w * math.log(p_train if lab else 1.0 - p_train) for _, lab, w in holdout
        )
        w_fit, b_fit = fit_logistic(train)
        ll_model = log_likelihood(holdout, w_fit, b_fit)
        if ll_model > ll_const and (best is None or ll_model > best[0]):
            w_all, b_all = fit_logistic(points)
            best = (ll_model, ci, w_all, b_all)
    if best is not None:
        _, ci, w_all, b_all = best
        leaf.model = (ci, w_all, b_all)
    return leaf


def _build(data: _TargetData, idx, weights, used: frozenset, depth: int,
           config: LearnConfig) -> TreeNode:
    leaf = _fit_leaf(data, idx, weights, config)
    if depth >= config.max_depth:
        return leaf
    labels = data.labels[idx]
    best = None
    for ci in sorted(data.tests):
        if ci in used:
            continue
        q = data.tests[ci][idx]
        gain = score_split(labels, weights, q, config.laplace, config.min_examples)
        if gain > config.min_gain and (best is None or gain > best[0]):
            best = (gain, ci)
    if best is None:
        return leaf
    _, ci = best
    q = data.tests[ci][idx]
    wt = weights * q
    wf = weights - wt
    keep_t = wt > 1e-12
    keep_f = wf > 1e-12
    true_branch = _build(
        data, idx[keep_t], wt[keep_t], used | {ci}, depth + 1, config
    )
    false_branch = _build(
        data, idx[keep_f], wf[keep_f], used | {ci}, depth + 1, config
    )
    return Internal(ci, true_branch, false_branch)


def learn_tree(learner_input: LearnerInput, config: LearnConfig | None = None):
    """Induce one distributional logic tree per target predicate.

    Programs are joined and time-mapped internally; returns a dict mapping
    each target spec to (tree, bias, data) where the tree's internal tests
    index into the bias candidate list.
    """
    config = config or LearnConfig()
    merged = Program(
        map_time_predicates(learner_input.background).clauses
        + map_time_predicates(learner_input.observations).clauses
    )
    compiled = compile_program(merged)
    out = {}
    for target in learner_input.targets:
        bias = learner_input.bias.for_target(target)
        data = _collect_data(compiled, bias, config)
        idx = np.arange(data.n)
        weights = np.ones(data.n)
        tree = _build(data, idx, weights, frozenset(), 0, config)
        out[target] = (tree, bias, data)
    return out


# ---------------------------------------------------------------------------
# clause extraction

_P_TRUE = Var("P1")
_P_FALSE = Var("P2")


def tree_to_clauses(tree: TreeNode, bias: TargetBias,
                    config: LearnConfig | None = None) -> Program:
    """One clause per leaf, mapped back to time-indexed predicates.

    True branches contribute the test literal, false branches its negation,
    so bodies of sibling leaves are mutually exclusive. A leaf with a
    logistic model emits the feature literal plus a logistic/3 call whose
    output feeds the head distribution.
    """
    config = config or LearnConfig()
    clauses: list[Clause] = []

    def walk(node: TreeNode, path: tuple[Lit, ...]):
        if isinstance(node, Internal):
            test = bias.candidates[node.test]
            walk(node.true_branch, path + (Lit(test),))
            walk(node.false_branch, path + (Lit(test, negated=True),))
            return
        clauses.append(_leaf_clause(node, path, bias, config))

    walk(tree, ())
    return unmap_time_predicates(Program(tuple(clauses)))


def _leaf_clause(leaf: Leaf, path: tuple[Lit, ...], bias: TargetBias,
                 config: LearnConfig) -> Clause:
    head = bias.target
    if leaf.model is None:
        p = leaf.p_true
        if p >= config.round_threshold:
            dist = Finite(((Num(1.0), Constant("true")),))
        elif p <= 1.0 - config.round_threshold:
            dist = Finite(((Num(1.0), Constant("false")),))
        else:
            p = round(p, 6)
            dist = Finite(
                ((Num(p), Constant("true")), (Num(round(1.0 - p, 6)), Constant("false")))
            )
        return Clause(head, dist, tuple(path))
    ci, w_fit, b_fit = leaf.model
    feature = bias.candidates[ci]
    params = [round(v, 6) for v in (*w_fit, b_fit)]
    body = tuple(path) + (
        Lit(feature),
        Lit(BuiltinGoal("logistic", (
            make_list([feature.value]),
            make_list([Num(v) for v in params]),
            _P_TRUE,
        ))),
        Lit(BuiltinGoal("is", (_P_FALSE, Compound("-", (Num(1), _P_TRUE))))),
    )
    dist = Finite(((_P_TRUE, Constant("true")), (_P_FALSE, Constant("false"))))
    return Clause(head, dist, body)


# ---------------------------------------------------------------------------
# rendering

def tree_text(tree: TreeNode, bias: TargetBias) -> str:
    """Human-readable dump of the induced tree."""
    lines = [goal_text(_unmap_goal(AtomGoal(bias.target)))]

    def walk(node: TreeNode, prefix: str):
        if isinstance(node, Leaf):
            if node.model is None:
                lines.append(f"{prefix}-> finite({node.p_true:.4f}:true)"
                             f"  [n={node.weight:.1f}]")
            else:
                ci, w_fit, b_fit = node.model
                feature = goal_text(_unmap_goal(bias.candidates[ci]))
                coef = ", ".join(f"{v:.4f}" for v in (*w_fit, b_fit))
                lines.append(f"{prefix}-> logistic([{coef}]) on {feature}"
                             f"  [n={node.weight:.1f}]")
            return
        test = goal_text(_unmap_goal(bias.candidates[node.test]))
        lines.append(f"{prefix}{test}?")
        walk(node.true_branch, prefix + "  yes ")
        walk(node.false_branch, prefix + "  no  ")

    walk(tree, "")
    return "\n".join(lines)


def _unmap_goal(goal):
    from ..lang.timemap import unmap_atom

    if isinstance(goal, AtomGoal):
        return AtomGoal(unmap_atom(goal.atom))
    if isinstance(goal, ValueGoal):
        return ValueGoal(unmap_atom(goal.atom), goal.value)
    return goal
