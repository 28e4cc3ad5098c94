import numpy as np
import pytest

from panchor.anchoring import (
    AnchorStore,
    MatcherConfig,
    PerceptCandidate,
    UnknownAnchorError,
    attribute_compare,
    combined_score,
)
from panchor.anchoring.attributes import Deterministic, Probabilistic


def make_candidate(time=0, position=(0.1, 0.2, 0.03), hue_bin=3, size=(0.04, 0.04, 0.04),
                   category=(("ball", 0.9), ("apple", 0.1)), bins=16):
    hist = np.full(bins, 1e-6)
    hist[hue_bin] = 1.0
    hist = hist / hist.sum()
    return PerceptCandidate.make(time, position, hist, size, category)


def test_empty_store_acquires():
    store = AnchorStore()
    assert store.match(make_candidate()).is_acquire


def test_identical_candidate_reacquires_for_any_threshold_at_most_one():
    store = AnchorStore(MatcherConfig(threshold=1.0))
    candidate = make_candidate()
    store.acquire(candidate)
    decision = store.match(make_candidate(time=1))
    assert decision.kind == "re_acquire"
    assert str(decision.anchor_id) == "ball-1"


def test_identifiers_count_per_category():
    store = AnchorStore()
    first = store.acquire(make_candidate(position=(0.1, 0.1, 0.03)))
    assert str(first.id) == "ball-1"
    for i in range(2):
        store.acquire(make_candidate(position=(0.5 + 0.2 * i, 0.8, 0.03)))
    fourth = store.acquire(make_candidate(position=(0.9, 0.1, 0.03)))
    assert str(fourth.id) == "ball-4"
    mug = store.acquire(make_candidate(category=(("mug", 0.8), ("cup", 0.2))))
    assert str(mug.id) == "mug-1"


def test_uniform_category_uses_lexicographic_tie_break():
    store = AnchorStore()
    anchor = store.acquire(
        make_candidate(category=(("mug", 0.5), ("cup", 0.5)))
    )
    assert anchor.id.category == "cup"


def test_higher_score_wins_then_age():
    config = MatcherConfig(threshold=0.5)
    store = AnchorStore(config)
    a = store.acquire(make_candidate(time=0, position=(0.0, 0.0, 0.03)))
    b = store.acquire(make_candidate(time=1, position=(0.4, 0.0, 0.03)))
    decision = store.match(make_candidate(time=2, position=(0.05, 0.0, 0.03)))
    assert decision.anchor_id == a.id
    # an exactly symmetric candidate goes to the older anchor
    decision = store.match(make_candidate(time=2, position=(0.2, 0.0, 0.03)))
    assert decision.anchor_id == a.id


def test_category_gate_blocks_confident_mismatch():
    store = AnchorStore(MatcherConfig(threshold=0.5))
    store.acquire(make_candidate(category=(("ball", 0.9), ("apple", 0.1))))
    same_place_mug = make_candidate(
        time=1, category=(("mug", 0.9), ("cup", 0.1))
    )
    assert store.match(same_place_mug).is_acquire


def test_category_gate_passes_uncertain_labels():
    store = AnchorStore(MatcherConfig(threshold=0.5))
    store.acquire(make_candidate(category=(("ball", 0.9), ("apple", 0.1))))
    unsure = make_candidate(time=1, category=(("mug", 0.4), ("ball", 0.35), ("cup", 0.25)))
    assert store.match(unsure).kind == "re_acquire"


def test_match_scale_invariance():
    candidate = make_candidate(time=1, position=(0.15, 0.2, 0.03))
    base = MatcherConfig(0.5, 0.3, 0.2, threshold=0.75)
    scaled = MatcherConfig(1.0, 0.6, 0.4, threshold=1.5)
    store_a = AnchorStore(base)
    store_b = AnchorStore(scaled)
    for store in (store_a, store_b):
        store.acquire(make_candidate())
        store.acquire(make_candidate(position=(0.8, 0.8, 0.03)))
    assert store_a.match(candidate).kind == store_b.match(candidate).kind
    assert store_a.match(candidate).anchor_id == store_b.match(candidate).anchor_id


def test_reacquire_clears_occlusion_and_replaces_position():
    store = AnchorStore()
    anchor = store.acquire(make_candidate(time=0))
    store.track(anchor.id, [[0.5, 0.5, 0.05]], [1.0], time=1)
    assert anchor.status == "occluded"
    assert isinstance(anchor.latest("position"), Probabilistic)
    store.re_acquire(anchor.id, make_candidate(time=2, position=(0.5, 0.5, 0.03)))
    assert anchor.status == "observed"
    assert isinstance(anchor.latest("position"), Deterministic)
    assert anchor.last_observed == 2


def test_reacquire_same_step_is_idempotent():
    store = AnchorStore()
    anchor = store.acquire(make_candidate(time=0))
    store.re_acquire(anchor.id, make_candidate(time=1, position=(0.2, 0.2, 0.03)))
    store.re_acquire(anchor.id, make_candidate(time=1, position=(0.3, 0.2, 0.03)))
    history = anchor.histories["position"]
    assert [t for t, _ in history] == [0, 1]
    assert history[-1][1].value[0] == pytest.approx(0.3, abs=1e-6)


def test_reacquire_unknown_id_errors():
    store = AnchorStore()
    with pytest.raises(UnknownAnchorError):
        store.re_acquire("ball-9", make_candidate())


def test_track_single_particle():
    store = AnchorStore()
    anchor = store.acquire(make_candidate(time=0))
    store.track(anchor.id, [[0.4, 0.4, 0.05]], [1.0], time=1)
    state = anchor.latest("position")
    assert state.samples.shape == (1, 3)
    assert anchor.last_observed == 0


def test_track_bimodal_then_compare_hits_either_mode():
    store = AnchorStore()
    anchor = store.acquire(make_candidate(time=0))
    positions = [[0.2, 0.2, 0.05]] * 3 + [[0.8, 0.8, 0.05]] * 3
    store.track(anchor.id, positions, [1 / 6.0] * 6, time=1)
    for mode in ((0.2, 0.2, 0.05), (0.8, 0.8, 0.05)):
        sim = attribute_compare(anchor, make_candidate(time=2, position=mode))
        assert sim.d_pos == pytest.approx(1.0)


def test_track_requires_particles():
    store = AnchorStore()
    anchor = store.acquire(make_candidate(time=0))
    with pytest.raises(Exception):
        store.track(anchor.id, [], [], time=1)
    with pytest.raises(UnknownAnchorError):
        store.track("mug-7", [[0, 0, 0]], [1.0], time=1)


def test_attribute_compare_requires_history():
    from panchor.anchoring.store import Anchor, AnchorId

    empty = Anchor(AnchorId("ball", 1), 0)
    with pytest.raises(UnknownAnchorError):
        attribute_compare(empty, make_candidate())


def test_sweep_retires_stale_occluded_anchors():
    store = AnchorStore()
    anchor = store.acquire(make_candidate(time=0))
    store.track(anchor.id, [[0.4, 0.4, 0.05]], [1.0], time=1)
    assert store.sweep(time=10, retire_after=50) == []
    assert store.sweep(time=60, retire_after=50) == ["ball-1"]
    assert "ball-1" not in store.anchors
    assert "ball-1" in store.archive
    # retired anchors no longer take part in matching
    assert store.match(make_candidate(time=61, position=(0.4, 0.4, 0.03))).is_acquire


def test_histories_stay_time_ordered_and_ids_unique(rng):
    store = AnchorStore(MatcherConfig(threshold=0.9))
    for t in range(20):
        candidate = make_candidate(
            time=t,
            position=tuple(rng.uniform(0, 1, 3)),
            category=(("ball", 0.9), ("apple", 0.1)),
        )
        decision = store.match(candidate)
        if decision.is_acquire:
            store.acquire(candidate)
        else:
            store.re_acquire(decision.anchor_id, candidate)
        if t % 3 == 0 and store.anchors:
            key = sorted(store.anchors)[0]
            store.track(key, [rng.uniform(0, 1, 3)], [1.0], time=t)
    ids = [str(a.id) for a in store.anchors.values()]
    assert len(ids) == len(set(ids))
    for anchor in store.anchors.values():
        for history in anchor.histories.values():
            times = [t for t, _ in history]
            assert times == sorted(times)
