"""Annotated dialogue data model and the JSON transcript format.

A transcript is one JSON document per dialogue::

    {
      "id": "...",
      "metadata": {"iteration": "...", "seed": 0, "config_digest": "...", "agent_profile": "..."},
      "utterances": [
        {"index": 0, "participant": "agent", "text": "...",
         "act": {"intent": "A_WELCOME", "annotations": [{"slot": "genre", "value": "comedy"}]}}
      ],
      "error_log": [{"kind": "ConcludeError", "at_turn": 5, "message": "..."}]
    }

Serialization is canonical (sorted keys, two-space indent, trailing newline),
so equal dialogues always produce identical bytes.
"""

from __future__ import annotations

import enum
import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

_ATOM_RE = re.compile(r"[A-Z][A-Z0-9_]*\Z")
_PREFIXES = ("A_", "U_")


class TranscriptError(ValueError):
    """Base class for transcript problems."""


class ParseError(TranscriptError):
    """The document is not well formed; ``locus`` names the line or field."""

    def __init__(self, message: str, locus: str = ""):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


class ValidationError(TranscriptError):
    """The document parsed but violates a dialogue invariant."""


class UnknownFieldWarning(UserWarning):
    pass


class Participant(str, enum.Enum):
    AGENT = "agent"
    USER = "user"

    @property
    def prefix(self) -> str:
        return "A_" if self is Participant.AGENT else "U_"


@dataclass(frozen=True, order=True)
class IntentLabel:
    """One intent, or several intents uttered in a single turn (joined by ``+``)."""

    constituents: tuple[str, ...]

    def __post_init__(self):
        cons = tuple(self.constituents)
        object.__setattr__(self, "constituents", cons)
        if not cons:
            raise ValueError("intent label needs at least one constituent")
        for c in cons:
            if not isinstance(c, str) or not _ATOM_RE.match(c):
                raise ValueError(f"invalid intent constituent {c!r}")
            if not c.startswith(_PREFIXES) or len(c) == len(_PREFIXES[0]):
                raise ValueError(f"intent {c!r} lacks an A_/U_ participant prefix")
        if len({c[:2] for c in cons}) != 1:
            raise ValueError(f"mixed participant prefixes in {'+'.join(cons)!r}")

    @classmethod
    def parse(cls, text: str) -> "IntentLabel":
        """Parse ``A_COUNT_RESULTS+A_ELICIT``; the abbreviated ``A_COUNT_RESULTS+ELICIT`` is accepted too."""
        if not isinstance(text, str) or not text:
            raise ValueError(f"invalid intent label {text!r}")
        parts = text.split("+")
        head = parts[0]
        prefix = head[:2]
        cons = [head]
        for p in parts[1:]:
            if not p:
                raise ValueError(f"empty constituent in intent label {text!r}")
            cons.append(p if p.startswith(_PREFIXES) else prefix + p)
        return cls(tuple(cons))

    @classmethod
    def of(cls, *names: str) -> "IntentLabel":
        return cls(tuple(names))

    @property
    def participant(self) -> Participant:
        return Participant.AGENT if self.constituents[0].startswith("A_") else Participant.USER

    @property
    def is_composite(self) -> bool:
        return len(self.constituents) > 1

    @property
    def first(self) -> str:
        return self.constituents[0]

    @property
    def last(self) -> str:
        return self.constituents[-1]

    def __contains__(self, name: str) -> bool:
        return name in self.constituents

    def abbreviated(self) -> str:
        """Compact report rendering: later constituents drop the shared prefix."""
        return "+".join([self.constituents[0]] + [c[2:] for c in self.constituents[1:]])

    def __str__(self) -> str:
        return "+".join(self.constituents)


@dataclass(frozen=True)
class Annotation:
    slot: str
    value: str

    def __post_init__(self):
        if not isinstance(self.slot, str) or not self.slot:
            raise ValueError("annotation slot must be a non-empty string")
        if not isinstance(self.value, str):
            raise ValueError(f"annotation value for {self.slot!r} must be a string")


@dataclass(frozen=True)
class DialogueAct:
    intent: IntentLabel
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(self.annotations))

    def values(self, slot: str) -> list[str]:
        return [a.value for a in self.annotations if a.slot == slot]

    def get(self, slot: str, default: str | None = None) -> str | None:
        vals = self.values(slot)
        return vals[0] if vals else default


def act(intent: str | IntentLabel, **slots: str) -> DialogueAct:
    """Shorthand constructor: ``act("U_REVEAL", genre="comedy")``."""
    label = intent if isinstance(intent, IntentLabel) else IntentLabel.parse(intent)
    return DialogueAct(label, tuple(Annotation(k, v) for k, v in slots.items()))


@dataclass(frozen=True)
class Utterance:
    index: int
    participant: Participant
    text: str
    act: DialogueAct

    @property
    def intent(self) -> IntentLabel:
        return self.act.intent


@dataclass(frozen=True)
class ErrorRecord:
    kind: str
    at_turn: int | None = None
    message: str = ""

    def __post_init__(self):
        if not isinstance(self.kind, str) or not self.kind or any(ch.isspace() for ch in self.kind):
            raise ValueError(f"error kind must be a single token, got {self.kind!r}")


@dataclass(frozen=True)
class Metadata:
    iteration: str = ""
    seed: int = 0
    config_digest: str = ""
    agent_profile: str = ""


@dataclass(frozen=True)
class Dialogue:
    id: str
    utterances: tuple[Utterance, ...] = ()
    error_log: tuple[ErrorRecord, ...] = ()
    metadata: Metadata = field(default_factory=Metadata)

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        object.__setattr__(self, "error_log", tuple(self.error_log))
        validate(self)

    def __len__(self) -> int:
        return len(self.utterances)


def validate(d: Dialogue) -> None:
    """Raise ValidationError if ``d`` breaks an invariant."""
    if not isinstance(d.id, str) or not d.id:
        raise ValidationError("dialogue id must be a non-empty string")
    for pos, u in enumerate(d.utterances):
        if u.index != pos:
            raise ValidationError(f"dialogue {d.id}: gap at index {pos} (found index {u.index})")
        if u.act.intent.participant is not u.participant:
            raise ValidationError(
                f"dialogue {d.id}: turn {pos} is a {u.participant.value} turn "
                f"but has intent {u.act.intent}"
            )
    if not d.utterances and not d.error_log:
        raise ValidationError(f"dialogue {d.id}: no utterances and no error log")
    n = len(d.utterances)
    for rec in d.error_log:
        if rec.at_turn is not None and not 0 <= rec.at_turn <= n:
            raise ValidationError(f"dialogue {d.id}: error at_turn {rec.at_turn} out of range")


def intent_sequence(d: Dialogue) -> list[IntentLabel]:
    return [u.act.intent for u in d.utterances]


def agent_utterances(d: Dialogue) -> list[Utterance]:
    return [u for u in d.utterances if u.participant is Participant.AGENT]


# --- (de)serialization ---------------------------------------------------

_TOP_KEYS = {"id", "metadata", "utterances", "error_log"}


def dialogue_to_dict(d: Dialogue) -> dict[str, Any]:
    return {
        "id": d.id,
        "metadata": {
            "iteration": d.metadata.iteration,
            "seed": d.metadata.seed,
            "config_digest": d.metadata.config_digest,
            "agent_profile": d.metadata.agent_profile,
        },
        "utterances": [
            {
                "index": u.index,
                "participant": u.participant.value,
                "text": u.text,
                "act": {
                    "intent": str(u.act.intent),
                    "annotations": [{"slot": a.slot, "value": a.value} for a in u.act.annotations],
                },
            }
            for u in d.utterances
        ],
        "error_log": [
            {"kind": e.kind, "at_turn": e.at_turn, "message": e.message} for e in d.error_log
        ],
    }


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize_dialogue(d: Dialogue) -> str:
    return dumps_canonical(dialogue_to_dict(d))


def _require(obj: dict, key: str, kind: type | tuple, locus: str):
    if key not in obj:
        raise ParseError(f"missing field '{key}'", locus)
    val = obj[key]
    # bool is an int subclass; never accept it for numeric fields
    if isinstance(val, bool) and kind is int:
        raise ParseError(f"field '{key}' must be {kind.__name__}", locus)
    if not isinstance(val, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ParseError(f"field '{key}' must be {name}", locus)
    return val


def dialogue_from_dict(obj: Any, locus: str = "$") -> Dialogue:
    if not isinstance(obj, dict):
        raise ParseError("dialogue must be an object", locus)
    for key in sorted(set(obj) - _TOP_KEYS):
        warnings.warn(f"{locus}: ignoring unknown field '{key}'", UnknownFieldWarning, stacklevel=3)
    did = _require(obj, "id", str, locus)
    meta_obj = obj.get("metadata", {})
    if not isinstance(meta_obj, dict):
        raise ParseError("field 'metadata' must be object", locus)
    mloc = f"{locus}.metadata"
    seed = meta_obj.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ParseError("field 'seed' must be int", mloc)
    for key in ("iteration", "config_digest", "agent_profile"):
        if not isinstance(meta_obj.get(key, ""), str):
            raise ParseError(f"field '{key}' must be str", mloc)
    metadata = Metadata(
        iteration=meta_obj.get("iteration", ""),
        seed=seed,
        config_digest=meta_obj.get("config_digest", ""),
        agent_profile=meta_obj.get("agent_profile", ""),
    )

    utterances = []
    for i, u in enumerate(_require(obj, "utterances", list, locus)):
        uloc = f"{locus}.utterances[{i}]"
        if not isinstance(u, dict):
            raise ParseError("utterance must be an object", uloc)
        index = _require(u, "index", int, uloc)
        part_raw = _require(u, "participant", str, uloc)
        try:
            participant = Participant(part_raw)
        except ValueError:
            raise ParseError(f"unknown participant {part_raw!r}", uloc) from None
        text = _require(u, "text", str, uloc)
        act_obj = _require(u, "act", dict, uloc)
        aloc = f"{uloc}.act"
        try:
            intent = IntentLabel.parse(_require(act_obj, "intent", str, aloc))
        except ValueError as exc:
            raise ParseError(str(exc), aloc) from None
        anns = []
        for j, a in enumerate(act_obj.get("annotations", [])):
            nloc = f"{aloc}.annotations[{j}]"
            if not isinstance(a, dict):
                raise ParseError("annotation must be an object", nloc)
            try:
                anns.append(Annotation(_require(a, "slot", str, nloc), _require(a, "value", str, nloc)))
            except ValueError as exc:
                raise ParseError(str(exc), nloc) from None
        utterances.append(Utterance(index, participant, text, DialogueAct(intent, tuple(anns))))

    errors = []
    for i, e in enumerate(obj.get("error_log", [])):
        eloc = f"{locus}.error_log[{i}]"
        if not isinstance(e, dict):
            raise ParseError("error record must be an object", eloc)
        at_turn = e.get("at_turn")
        if at_turn is not None and (isinstance(at_turn, bool) or not isinstance(at_turn, int)):
            raise ParseError("field 'at_turn' must be int or null", eloc)
        message = e.get("message", "")
        if not isinstance(message, str):
            raise ParseError("field 'message' must be str", eloc)
        try:
            errors.append(ErrorRecord(_require(e, "kind", str, eloc), at_turn, message))
        except ValueError as exc:
            raise ParseError(str(exc), eloc) from None

    return Dialogue(did, tuple(utterances), tuple(errors), metadata)


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def parse_dialogue(text: str) -> Dialogue:
    return dialogue_from_dict(_loads(text))


def parse_corpus_document(text: str) -> list[Dialogue]:
    """A corpus document is either one dialogue object or a list of them."""
    obj = _loads(text)
    if isinstance(obj, list):
        return [dialogue_from_dict(o, f"$[{i}]") for i, o in enumerate(obj)]
    return [dialogue_from_dict(obj)]


def serialize_corpus_document(dialogues: Sequence[Dialogue]) -> str:
    return dumps_canonical([dialogue_to_dict(d) for d in dialogues])


class CorpusReadError(TranscriptError):
    def __init__(self, path: Path, cause: Exception):
        self.path = path
        self.cause = cause
        super().__init__(f"{path}: {cause}")


def load_corpus(path: str | Path) -> list[Dialogue]:
    """Load a directory of ``*.json`` transcripts (sorted by name) or a single document."""
    path = Path(path)
    files = sorted(p for p in path.glob("*.json") if p.name != "manifest.json") if path.is_dir() else [path]
    out: list[Dialogue] = []
    for f in files:
        try:
            out.extend(parse_corpus_document(f.read_text(encoding="utf-8")))
        except (OSError, UnicodeDecodeError, TranscriptError) as exc:
            raise CorpusReadError(f, exc) from exc
    return out


def write_corpus(directory: str | Path, dialogues: Iterable[Dialogue]) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for d in dialogues:
        p = directory / f"{d.id}.json"
        p.write_text(serialize_dialogue(d), encoding="utf-8")
        written.append(p)
    return written
