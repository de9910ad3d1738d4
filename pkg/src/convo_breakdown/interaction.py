"""Directed intent-transition graph and path validity checks.

Composite labels (``A_COUNT_RESULTS+A_ELICIT``) are not graph nodes unless the
config lists them under ``composite_nodes``. Otherwise a composite is expanded:
its constituents must be chained by edges, the transition into it uses its first
constituent and the transition out of it uses its last one.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

from .dialogue import IntentLabel, dumps_canonical

MODEL_ENV_VAR = "CONVO_BREAKDOWN_MODEL"
DEFAULT_MODEL_RESOURCE = "default_model.json"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PathVerdict:
    valid: bool
    violation_index: int | None = None

    def __post_init__(self):
        if self.valid != (self.violation_index is None):
            raise ValueError("violation_index must be set exactly when the path is invalid")

    def __str__(self) -> str:
        return "valid" if self.valid else f"invalid at index {self.violation_index}"


@dataclass(frozen=True)
class InteractionModel:
    name: str
    version: str
    nodes: frozenset[IntentLabel]
    edges: frozenset[tuple[IntentLabel, IntentLabel]]
    start_nodes: frozenset[IntentLabel]
    composite_nodes: frozenset[IntentLabel] = frozenset()
    _succ: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for attr in ("nodes", "edges", "start_nodes", "composite_nodes"):
            object.__setattr__(self, attr, frozenset(getattr(self, attr)))
        if not self.start_nodes:
            raise ModelError("start node set is empty")
        for c in self.composite_nodes:
            if c not in self.nodes:
                raise ModelError(f"composite node {c} is not declared in nodes")
        for n in self.start_nodes:
            if n not in self.nodes:
                raise ModelError(f"start node {n} is not declared in nodes")
        succ: dict[IntentLabel, set[IntentLabel]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            for end in (a, b):
                if end not in self.nodes:
                    raise ModelError(f"edge {a} -> {b} references undeclared node {end}")
            succ[a].add(b)
        object.__setattr__(self, "_succ", {k: frozenset(v) for k, v in succ.items()})

    def successors(self, label: IntentLabel) -> frozenset[IntentLabel]:
        """Nodes reachable in one step from the exit point of ``label``."""
        exit_node = self._exit(label)
        return self._succ.get(exit_node, frozenset()) if exit_node is not None else frozenset()

    def has_edge(self, a: IntentLabel, b: IntentLabel) -> bool:
        return b in self._succ.get(a, ())

    # A composite's internal chain must be connected; returns the node used for
    # incoming (entry) or outgoing (exit) transitions, or None if unusable.
    def _resolve(self, label: IntentLabel) -> tuple[IntentLabel, IntentLabel] | None:
        if label in self.nodes:
            return label, label
        if not label.is_composite:
            return None
        atoms = [IntentLabel.of(c) for c in label.constituents]
        if any(a not in self.nodes for a in atoms):
            return None
        for a, b in zip(atoms, atoms[1:]):
            if not self.has_edge(a, b):
                return None
        return atoms[0], atoms[-1]

    def _entry(self, label: IntentLabel) -> IntentLabel | None:
        r = self._resolve(label)
        return r[0] if r else None

    def _exit(self, label: IntentLabel) -> IntentLabel | None:
        r = self._resolve(label)
        return r[1] if r else None

    def is_transition_allowed(self, src: IntentLabel, dst: IntentLabel) -> bool:
        a = self._exit(src)
        b = self._entry(dst)
        return a is not None and b is not None and self.has_edge(a, b)

    def is_start(self, label: IntentLabel) -> bool:
        entry = self._entry(label)
        return entry is not None and entry in self.start_nodes

    def is_valid_path(self, path: Sequence[IntentLabel]) -> PathVerdict:
        if not path:
            return PathVerdict(True)
        if not self.is_start(path[0]):
            return PathVerdict(False, 0)
        for k in range(1, len(path)):
            if not self.is_transition_allowed(path[k - 1], path[k]):
                return PathVerdict(False, k)
        return PathVerdict(True)

    def is_valid_extension(self, path: Sequence[IntentLabel]) -> bool:
        """Check only the last step of ``path``, assuming its prefix is valid."""
        if not path:
            return True
        if len(path) == 1:
            return self.is_start(path[0])
        return self.is_transition_allowed(path[-2], path[-1])


def is_transition_allowed(m: InteractionModel, src: IntentLabel, dst: IntentLabel) -> bool:
    return m.is_transition_allowed(src, dst)


def is_valid_path(m: InteractionModel, path: Sequence[IntentLabel]) -> PathVerdict:
    return m.is_valid_path(path)


# --- config documents ----------------------------------------------------

def _labels(obj: Any, key: str) -> list[IntentLabel]:
    if not isinstance(obj, list):
        raise ModelError(f"'{key}' must be a list")
    try:
        return [IntentLabel.parse(x) for x in obj]
    except ValueError as exc:
        raise ModelError(f"'{key}': {exc}") from None


def model_from_dict(obj: Any) -> InteractionModel:
    if not isinstance(obj, dict):
        raise ModelError("model config must be an object")
    for key in ("name", "version", "nodes", "edges", "start_nodes"):
        if key not in obj:
            raise ModelError(f"missing field '{key}'")
    if not isinstance(obj["name"], str) or not isinstance(obj["version"], str):
        raise ModelError("'name' and 'version' must be strings")
    nodes = _labels(obj["nodes"], "nodes")
    composites = _labels(obj.get("composite_nodes", []), "composite_nodes")
    edges = []
    if not isinstance(obj["edges"], list):
        raise ModelError("'edges' must be a list")
    for i, e in enumerate(obj["edges"]):
        if not (isinstance(e, list) and len(e) == 2):
            raise ModelError(f"edges[{i}] must be a two-element list")
        a, b = _labels(e, f"edges[{i}]")
        edges.append((a, b))
    return InteractionModel(
        name=obj["name"],
        version=obj["version"],
        nodes=frozenset(nodes) | frozenset(composites),
        edges=frozenset(edges),
        start_nodes=frozenset(_labels(obj["start_nodes"], "start_nodes")),
        composite_nodes=frozenset(composites),
    )


def load_model(text: str) -> InteractionModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return model_from_dict(obj)


def model_to_dict(m: InteractionModel) -> dict[str, Any]:
    plain = sorted(str(n) for n in m.nodes - m.composite_nodes)
    return {
        "name": m.name,
        "version": m.version,
        "start_nodes": sorted(str(n) for n in m.start_nodes),
        "nodes": plain,
        "composite_nodes": sorted(str(n) for n in m.composite_nodes),
        "edges": sorted([str(a), str(b)] for a, b in m.edges),
    }


def serialize_model(m: InteractionModel) -> str:
    return dumps_canonical(model_to_dict(m))


def load_model_file(path: str | Path) -> InteractionModel:
    return load_model(Path(path).read_text(encoding="utf-8"))


def default_model_text() -> str:
    return resources.files("convo_breakdown").joinpath("data").joinpath(DEFAULT_MODEL_RESOURCE).read_text(encoding="utf-8")


def default_model() -> InteractionModel:
    return load_model(default_model_text())


def resolve_model(path: str | Path | None = None) -> InteractionModel:
    """Explicit path, then the environment override, then the bundled default."""
    path = path or os.environ.get(MODEL_ENV_VAR)
    return load_model_file(path) if path else default_model()


def user_successors(m: InteractionModel, agent_label: IntentLabel) -> list[IntentLabel]:
    return sorted(n for n in m.successors(agent_label) if n.participant.value == "user")


def reachable_in_two(m: InteractionModel, a: IntentLabel, b: IntentLabel, via: Iterable[IntentLabel] | None = None) -> bool:
    """True if some intermediate node x has edges a -> x and x -> b."""
    mids = m.successors(a) if via is None else via
    return any(m.is_transition_allowed(a, x) and m.is_transition_allowed(x, b) for x in mids)
