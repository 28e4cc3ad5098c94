"""Object attribute values and their similarity measures.

Positions compare through an exponentially mapped Euclidean distance, color
histograms through their correlation, bounding-box extents through the
generalized Jaccard similarity. All three are symmetric, live in [0, 1] and
equal 1 exactly on identical inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_HISTOGRAM_BINS = 64


class AttributeError_(ValueError):
    pass


def as_position(value) -> np.ndarray:
    pos = np.asarray(value, dtype=float)
    if pos.shape != (3,) or not np.all(np.isfinite(pos)):
        raise AttributeError_(f"position must be a finite 3-vector, got {value!r}")
    return pos


def as_histogram(value) -> np.ndarray:
    hist = np.asarray(value, dtype=float)
    if hist.ndim != 1 or hist.size < 2:
        raise AttributeError_("histogram must be a 1-d array with at least 2 bins")
    if np.any(hist < 0) or not np.isfinite(hist).all():
        raise AttributeError_("histogram bins must be finite and nonnegative")
    total = hist.sum()
    if abs(total - 1.0) > 1e-6:
        raise AttributeError_(f"histogram mass {total} is not normalized")
    return hist


def as_size(value) -> np.ndarray:
    size = np.asarray(value, dtype=float)
    if size.shape != (3,) or not np.all(np.isfinite(size)) or np.any(size <= 0):
        raise AttributeError_(f"size extents must be positive, got {value!r}")
    return size


def as_category(value) -> tuple[tuple[str, float], ...]:
    pairs = tuple((str(label), float(prob)) for label, prob in value)
    for label, prob in pairs:
        if not 0.0 <= prob <= 1.0:
            raise AttributeError_(f"category probability {prob} outside [0, 1]")
    return pairs


def top_category(category: tuple[tuple[str, float], ...]) -> tuple[str, float]:
    """Most probable label; ties break to the lexicographically smallest."""
    return min(category, key=lambda pair: (-pair[1], pair[0]))


# ---------------------------------------------------------------------------
# similarities

def position_similarity(a, b) -> float:
    a = as_position(a)
    b = as_position(b)
    return float(np.exp(-np.linalg.norm(a - b)))


def color_similarity(a, b) -> float:
    a = as_histogram(a)
    b = as_histogram(b)
    if a.size != b.size:
        raise AttributeError_(f"histogram bin counts differ: {a.size} vs {b.size}")
    if np.array_equal(a, b):
        return 1.0
    da = a - a.mean()
    db = b - b.mean()
    na = np.linalg.norm(da)
    nb = np.linalg.norm(db)
    if na == 0.0 or nb == 0.0:
        return 1.0 if np.allclose(a, b) else 0.0
    r = float(np.dot(da, db) / (na * nb))
    return max(0.0, min(1.0, r))


def size_similarity(a, b) -> float:
    a = as_size(a)
    b = as_size(b)
    return float(np.minimum(a, b).sum() / np.maximum(a, b).sum())


# ---------------------------------------------------------------------------
# volatile attribute states

@dataclass(frozen=True)
class Deterministic:
    value: np.ndarray

    @property
    def probabilistic(self) -> bool:
        return False


@dataclass(frozen=True)
class Probabilistic:
    """A sampled distribution over attribute values (one row per sample)."""

    samples: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if samples.shape[0] != weights.shape[0] or samples.shape[0] == 0:
            raise AttributeError_("need one weight per sample and at least one sample")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise AttributeError_("sample weights must be nonnegative with mass")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "weights", weights / weights.sum())

    @property
    def probabilistic(self) -> bool:
        return True

    def mean(self) -> np.ndarray:
        return self.weights @ self.samples


AttributeState = Deterministic | Probabilistic


def position_point_similarity(state: AttributeState, candidate,
                              point_estimate: str = "max") -> float:
    """Similarity of a possibly-probabilistic position against a percept.

    The "max" point estimate scores the best-matching sample, which picks the
    mode closest to the candidate out of a multi-modal sample set; "mean"
    collapses the distribution to its weighted mean first.
    """
    candidate = as_position(candidate)
    if isinstance(state, Deterministic):
        return position_similarity(state.value, candidate)
    if point_estimate == "mean":
        return position_similarity(state.mean(), candidate)
    if point_estimate != "max":
        raise ValueError(f"unknown point estimate {point_estimate!r}")
    dists = np.linalg.norm(state.samples - candidate, axis=1)
    return float(np.exp(-dists.min()))


def scalar_point_similarity(state: AttributeState, candidate, sim,
                            point_estimate: str = "max") -> float:
    """Generic point-estimate similarity for color and size attributes."""
    if isinstance(state, Deterministic):
        return sim(state.value, candidate)
    if point_estimate == "mean":
        return sim(state.mean(), candidate)
    return max(sim(sample, candidate) for sample in state.samples)
