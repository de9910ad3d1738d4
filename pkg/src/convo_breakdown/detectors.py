"""Breakdown detectors: system failure (B1), dialogue of the deaf (B2), flow discontinuation (B3).

Each detector is a pure function from a dialogue to a :class:`BreakdownFinding`.
An unflagged finding has an empty path and an empty detail.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

from .dialogue import Dialogue, IntentLabel, ParseError, agent_utterances, dumps_canonical, intent_sequence
from .interaction import InteractionModel


class Detector(str, enum.Enum):
    SYSTEM_FAILURE = "B1"
    DIALOGUE_OF_DEAF = "B2"
    FLOW_DISCONTINUATION = "B3"

    @property
    def title(self) -> str:
        return _TITLES[self]


_TITLES = {
    Detector.SYSTEM_FAILURE: "System failure",
    Detector.DIALOGUE_OF_DEAF: "Dialogue of the deaf",
    Detector.FLOW_DISCONTINUATION: "Flow discontinuation",
}


@dataclass(frozen=True)
class DetectorConfig:
    dod_window: int = 3
    text_similarity_threshold: float = 0.9
    recursion_error_kind: str = "RecursionError"

    def __post_init__(self):
        if isinstance(self.dod_window, bool) or not isinstance(self.dod_window, int) or self.dod_window < 2:
            raise ValueError(f"dod_window must be an integer >= 2, got {self.dod_window!r}")
        if not 0.0 <= self.text_similarity_threshold <= 1.0:
            raise ValueError(f"similarity threshold must lie in [0, 1], got {self.text_similarity_threshold}")
        if not self.recursion_error_kind or any(c.isspace() for c in self.recursion_error_kind):
            raise ValueError("recursion_error_kind must be a single token")


@dataclass(frozen=True)
class BreakdownFinding:
    detector: Detector
    dialogue_id: str
    path: tuple[IntentLabel, ...] = ()
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))

    @property
    def flagged(self) -> bool:
        # An empty dialogue can still fail (crash before the first turn); detail carries the evidence.
        return bool(self.path) or bool(self.detail)


def _clean(detector: Detector, d: Dialogue) -> BreakdownFinding:
    return BreakdownFinding(detector, d.id)


# --- B1 ---

def detect_system_failure(d: Dialogue, cfg: DetectorConfig = DetectorConfig()) -> BreakdownFinding:
    for rec in d.error_log:
        if rec.kind != cfg.recursion_error_kind:
            return BreakdownFinding(Detector.SYSTEM_FAILURE, d.id, tuple(intent_sequence(d)), rec.kind)
    return _clean(Detector.SYSTEM_FAILURE, d)


# --- B2 ---

def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def text_similarity(a: str, b: str) -> float:
    """1 - edit distance / longer length, on lowercased whitespace-collapsed text."""
    a, b = _normalize(a), _normalize(b)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def detect_dialogue_of_deaf(d: Dialogue, cfg: DetectorConfig = DetectorConfig()) -> BreakdownFinding:
    if any(rec.kind == cfg.recursion_error_kind for rec in d.error_log):
        return BreakdownFinding(
            Detector.DIALOGUE_OF_DEAF, d.id, tuple(intent_sequence(d)), cfg.recursion_error_kind
        )
    agent = agent_utterances(d)
    span = cfg.dod_window - 1
    for i in range(len(agent) - span):
        anchor = agent[i]
        nxt = agent[i + 1 : i + 1 + span]
        if all(u.intent == anchor.intent for u in nxt) and all(
            text_similarity(anchor.text, u.text) >= cfg.text_similarity_threshold for u in nxt
        ):
            path = tuple(u.intent for u in d.utterances[: anchor.index + 1])
            return BreakdownFinding(Detector.DIALOGUE_OF_DEAF, d.id, path, str(anchor.intent))
    return _clean(Detector.DIALOGUE_OF_DEAF, d)


# --- B3 ---

def detect_flow_discontinuation(d: Dialogue, m: InteractionModel) -> BreakdownFinding:
    path: list[IntentLabel] = []
    for u in d.utterances:
        path.append(u.intent)
        if not m.is_valid_extension(path):
            return BreakdownFinding(Detector.FLOW_DISCONTINUATION, d.id, tuple(path), str(len(path) - 1))
    return _clean(Detector.FLOW_DISCONTINUATION, d)


def detect_all(d: Dialogue, m: InteractionModel, cfg: DetectorConfig = DetectorConfig()) -> list[BreakdownFinding]:
    return [detect_system_failure(d, cfg), detect_dialogue_of_deaf(d, cfg), detect_flow_discontinuation(d, m)]


def run_detectors(
    corpus: Sequence[Dialogue],
    m: InteractionModel,
    cfg: DetectorConfig = DetectorConfig(),
    workers: int = 1,
) -> list[BreakdownFinding]:
    """Three findings per dialogue, in corpus order then B1, B2, B3."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_dialogue = list(pool.map(lambda d: detect_all(d, m, cfg), corpus))
    else:
        per_dialogue = [detect_all(d, m, cfg) for d in corpus]
    return [f for group in per_dialogue for f in group]


def flagged_counts(findings: Sequence[BreakdownFinding]) -> dict[Detector, int]:
    counts = {det: 0 for det in Detector}
    for f in findings:
        if f.flagged:
            counts[f.detector] += 1
    return counts


# --- findings document ---

def finding_to_dict(f: BreakdownFinding) -> dict[str, Any]:
    return {
        "dialogue_id": f.dialogue_id,
        "detector": f.detector.value,
        "path": [str(x) for x in f.path],
        "detail": f.detail,
    }


def serialize_findings(findings: Sequence[BreakdownFinding]) -> str:
    return dumps_canonical({"findings": [finding_to_dict(f) for f in findings]})


def parse_findings(text: str) -> list[BreakdownFinding]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("findings"), list):
        raise ParseError("expected an object with a 'findings' list", "$")
    out = []
    for i, rec in enumerate(obj["findings"]):
        loc = f"$.findings[{i}]"
        try:
            out.append(
                BreakdownFinding(
                    Detector(rec["detector"]),
                    str(rec["dialogue_id"]),
                    tuple(IntentLabel.parse(x) for x in rec["path"]),
                    str(rec.get("detail", "")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad finding record: {exc}", loc) from None
    return out
