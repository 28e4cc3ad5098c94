"""Possible-world state for the sampling engine.

A world maps ground random-variable atoms to sampled values and holds the
logical facts known at each time slice. Lookups go through a small stack of
layers so per-step frame facts and per-particle state can be shared without
copying: the local layer is owned by one proof/particle, read-only layers
behind it are shared.

Keys are ``(pred, time, args)`` tuples where ``time`` is one of ``None``,
``0``, ``"t"``, ``"t1"`` and ``args`` is a tuple of ground terms.
"""
from __future__ import annotations

from typing import Iterable, Iterator

from ..lang.ast import Constant, Term

Key = tuple  # (pred, time, args)

# implicit value carrying the residual mass of a finite distribution;
# unification and comparisons against it always fail
UNDEFINED = Constant("$undefined")


class FactLayer:
    """Read-only bundle of logical facts and valued facts.

    Facts are kept in insertion-ordered dicts: enumeration order feeds
    sampling decisions, so it must not depend on hash seeding.
    """

    __slots__ = ("values", "facts", "_value_idx", "_fact_idx")

    def __init__(self, values: dict | None = None, facts: Iterable[Key] = ()):
        self.values: dict[Key, Term] = values or {}
        self.facts: dict[Key, bool] = dict.fromkeys(facts, True)
        self._value_idx: dict[tuple, list[Key]] = {}
        self._fact_idx: dict[tuple, list[Key]] = {}
        for key in self.values:
            self._value_idx.setdefault((key[0], key[1]), []).append(key)
        for key in self.facts:
            self._fact_idx.setdefault((key[0], key[1]), []).append(key)

    def value_keys(self, pred: str, time) -> list[Key]:
        return self._value_idx.get((pred, time), [])

    def fact_keys(self, pred: str, time) -> list[Key]:
        return self._fact_idx.get((pred, time), [])


_EMPTY_LAYER = FactLayer()


class World:
    """Mutable local assignments over optional shared read-only layers."""

    __slots__ = (
        "values", "facts", "layers", "_value_idx", "_fact_idx",
        "sampling", "failed", "log_weight",
    )

    def __init__(self, layers: tuple[FactLayer, ...] = ()):
        self.values: dict[Key, Term] = {}
        self.facts: dict[Key, bool] = {}
        self.layers = layers
        self._value_idx: dict[tuple, list[Key]] = {}
        self._fact_idx: dict[tuple, list[Key]] = {}
        self.sampling: set[Key] = set()
        self.failed: set[Key] = set()
        self.log_weight = 0.0

    def reset(self) -> None:
        self.values.clear()
        self.facts.clear()
        self._value_idx.clear()
        self._fact_idx.clear()
        self.sampling.clear()
        self.failed.clear()
        self.log_weight = 0.0

    # -- values ---------------------------------------------------------

    def get_value(self, key: Key):
        v = self.values.get(key)
        if v is not None:
            return v
        for layer in self.layers:
            v = layer.values.get(key)
            if v is not None:
                return v
        return None

    def set_value(self, key: Key, value: Term) -> None:
        self.values[key] = value
        self._value_idx.setdefault((key[0], key[1]), []).append(key)

    def iter_value_keys(self, pred: str, time) -> Iterator[Key]:
        seen = None
        local = self._value_idx.get((pred, time))
        if local:
            seen = set(local)
            yield from local
        for layer in self.layers:
            for key in layer.value_keys(pred, time):
                if seen is None or key not in seen:
                    yield key

    # -- logical facts ----------------------------------------------------

    def has_fact(self, key: Key) -> bool:
        if key in self.facts:
            return True
        return any(key in layer.facts for layer in self.layers)

    def add_fact(self, key: Key) -> None:
        if not self.has_fact(key):
            self.facts[key] = True
            self._fact_idx.setdefault((key[0], key[1]), []).append(key)

    def iter_fact_keys(self, pred: str, time) -> Iterator[Key]:
        local = self._fact_idx.get((pred, time), [])
        yield from local
        seen = set(local) if local else None
        for layer in self.layers:
            for key in layer.fact_keys(pred, time):
                if seen is None or key not in seen:
                    yield key

    # -- step bookkeeping --------------------------------------------------

    def next_state(self) -> tuple[dict, dict]:
        """Relabel the sampled t+1 slice as the new current-time state."""
        values = {(k[0], "t", k[2]): v for k, v in self.values.items() if k[1] == "t1"}
        facts = {(k[0], "t", k[2]): True for k in self.facts if k[1] == "t1"}
        return values, facts

    def static_values(self) -> dict:
        return {k: v for k, v in self.values.items() if k[1] is None}
