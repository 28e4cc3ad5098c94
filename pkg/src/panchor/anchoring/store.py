"""The anchor store: per-object symbolic records and the matching loop.

Each anchor keeps time-indexed attribute histories. Attributes arriving from
percepts are deterministic; positions fed back from the tracker are
probabilistic (weighted samples). A candidate percept either re-acquires the
best-scoring anchor or acquires a fresh one named after its category.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .attributes import (
    AttributeState,
    Deterministic,
    Probabilistic,
    as_category,
    as_histogram,
    as_position,
    as_size,
    color_similarity,
    position_point_similarity,
    scalar_point_similarity,
    size_similarity,
    top_category,
)

RETIRE_AFTER_STEPS = 50


class UnknownAnchorError(KeyError):
    pass


@dataclass(frozen=True)
class AnchorId:
    category: str
    ordinal: int

    def __str__(self) -> str:
        return f"{self.category}-{self.ordinal}"


@dataclass(frozen=True)
class PerceptCandidate:
    time: int
    position: np.ndarray
    color: np.ndarray
    size: np.ndarray
    category: tuple[tuple[str, float], ...]

    @staticmethod
    def make(time, position, color, size, category) -> "PerceptCandidate":
        return PerceptCandidate(
            time,
            as_position(position),
            as_histogram(color),
            as_size(size),
            as_category(category),
        )


@dataclass(frozen=True)
class SimilarityVector:
    d_pos: float
    d_color: float
    d_size: float


@dataclass
class Anchor:
    id: AnchorId
    created_step: int
    histories: dict[str, list[tuple[int, AttributeState]]] = field(default_factory=dict)
    category: tuple[tuple[str, float], ...] = ()
    status: str = "observed"  # or "occluded"
    last_observed: int = 0
    last_update: int = 0

    def latest(self, kind: str) -> AttributeState:
        history = self.histories.get(kind)
        if not history:
            raise UnknownAnchorError(f"anchor {self.id} has no {kind} attribute")
        return history[-1][1]

    def _put(self, kind: str, time: int, state: AttributeState) -> None:
        history = self.histories.setdefault(kind, [])
        if history and history[-1][0] == time:
            history[-1] = (time, state)
        else:
            history.append((time, state))

    @property
    def top_category(self) -> str:
        return top_category(self.category)[0]


@dataclass(frozen=True)
class Decision:
    kind: str  # "acquire" | "re_acquire"
    anchor_id: AnchorId | None = None
    score: float = 0.0

    @property
    def is_acquire(self) -> bool:
        return self.kind == "acquire"


@dataclass(frozen=True)
class MatcherConfig:
    weight_pos: float = 0.5
    weight_color: float = 0.3
    weight_size: float = 0.2
    threshold: float = 0.75
    category_gate_mass: float = 0.5
    point_estimate: str = "max"  # or "mean"


def attribute_compare(anchor: Anchor, candidate: PerceptCandidate,
                      point_estimate: str = "max") -> SimilarityVector:
    """Similarity of the anchor's latest attributes against a percept.

    Deterministic attributes compare pairwise; probabilistic ones through a
    point estimate, which for positions takes the best-matching sample so a
    candidate sitting on any mode of the belief scores 1.
    """
    d_pos = position_point_similarity(
        anchor.latest("position"), candidate.position, point_estimate
    )
    d_color = scalar_point_similarity(
        anchor.latest("color"), candidate.color, color_similarity, point_estimate
    )
    d_size = scalar_point_similarity(
        anchor.latest("size"), candidate.size, size_similarity, point_estimate
    )
    return SimilarityVector(d_pos, d_color, d_size)


def combined_score(sim: SimilarityVector, config: MatcherConfig) -> float:
    return (
        config.weight_pos * sim.d_pos
        + config.weight_color * sim.d_color
        + config.weight_size * sim.d_size
    )


def category_compatible(anchor: Anchor, candidate: PerceptCandidate,
                        gate_mass: float) -> bool:
    """Gate passes unless both sides are confidently different categories."""
    a_label, a_mass = top_category(anchor.category)
    c_label, c_mass = top_category(candidate.category)
    if a_label == c_label:
        return True
    return a_mass < gate_mass or c_mass < gate_mass


class AnchorStore:
    def __init__(self, config: MatcherConfig | None = None):
        self.config = config or MatcherConfig()
        self.anchors: dict[str, Anchor] = {}
        self.archive: dict[str, Anchor] = {}
        self._counters: dict[str, int] = {}

    # -- matching --------------------------------------------------------

    def match(self, candidate: PerceptCandidate) -> Decision:
        """Decide between re-acquiring an existing anchor and acquiring."""
        config = self.config
        best: tuple[float, int, str] | None = None
        best_anchor: Anchor | None = None
        for anchor in self.anchors.values():
            if not category_compatible(anchor, candidate, config.category_gate_mass):
                continue
            sim = attribute_compare(anchor, candidate, config.point_estimate)
            score = combined_score(sim, config)
            order = (-score, anchor.created_step, str(anchor.id))
            if best is None or order < best:
                best = order
                best_anchor = anchor
        if best_anchor is not None and -best[0] >= config.threshold:
            return Decision("re_acquire", best_anchor.id, -best[0])
        return Decision("acquire", None, 0.0 if best is None else -best[0])

    # -- functionalities ----------------------------------------------------

    def acquire(self, candidate: PerceptCandidate) -> Anchor:
        category = top_category(candidate.category)[0]
        ordinal = self._counters.get(category, 0) + 1
        self._counters[category] = ordinal
        anchor = Anchor(
            id=AnchorId(category, ordinal),
            created_step=candidate.time,
            category=candidate.category,
            status="observed",
            last_observed=candidate.time,
            last_update=candidate.time,
        )
        self._install_percept(anchor, candidate)
        self.anchors[str(anchor.id)] = anchor
        return anchor

    def re_acquire(self, anchor_id, candidate: PerceptCandidate) -> Anchor:
        anchor = self.get(anchor_id)
        self._install_percept(anchor, candidate)
        anchor.category = candidate.category
        anchor.status = "observed"
        anchor.last_observed = candidate.time
        anchor.last_update = candidate.time
        return anchor

    def track(self, anchor_id, positions, weights, time: int) -> Anchor:
        """Extend an anchor from inferred particle positions instead of a percept."""
        anchor = self.get(anchor_id)
        state = Probabilistic(np.asarray(positions, float), np.asarray(weights, float))
        anchor._put("position", time, state)
        anchor.status = "occluded"
        anchor.last_update = time
        return anchor

    def _install_percept(self, anchor: Anchor, candidate: PerceptCandidate) -> None:
        anchor._put("position", candidate.time, Deterministic(candidate.position))
        anchor._put("color", candidate.time, Deterministic(candidate.color))
        anchor._put("size", candidate.time, Deterministic(candidate.size))

    def get(self, anchor_id) -> Anchor:
        anchor = self.anchors.get(str(anchor_id))
        if anchor is None:
            raise UnknownAnchorError(f"no anchor {anchor_id}")
        return anchor

    def sweep(self, time: int, retire_after: int = RETIRE_AFTER_STEPS) -> list[str]:
        """Retire occluded anchors that have gone without feedback too long."""
        stale = [
            key
            for key, anchor in self.anchors.items()
            if anchor.status == "occluded" and time - anchor.last_update > retire_after
        ]
        for key in stale:
            self.archive[key] = self.anchors.pop(key)
        return stale

    # -- export ----------------------------------------------------------

    def snapshot(self, step: int) -> dict:
        anchors = []
        for key in sorted(self.anchors):
            anchor = self.anchors[key]
            state = anchor.latest("position")
            if isinstance(state, Deterministic):
                position = [float(x) for x in state.value]
            else:
                position = {
                    "samples": [[float(x) for x in row] for row in state.samples],
                    "weights": [float(w) for w in state.weights],
                }
            anchors.append(
                {
                    "id": key,
                    "status": anchor.status,
                    "position": position,
                    "top_category": anchor.top_category,
                }
            )
        return {"step": step, "anchors": anchors}
