from __future__ import annotations

import configparser
import dataclasses
import enum
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

PRESET_NAMES = tuple(f"iteration-{i}" for i in range(1, 7))


class ConfigError(ValueError):
    pass


class AgendaMode(str, enum.Enum):
    PULL_OR_SAMPLE = "PullOrSample"
    ALWAYS_SAMPLE = "AlwaysSample"


@dataclass(frozen=True)
class DefectProfile:
    """Bugs injected into the toy recommender, plus its output style.

    Each flag mirrors one fix of the case-study loop; all False is the hardened agent.
    """

    cant_help_loop: bool = False
    crash_on_conclude: bool = False
    crash_on_remove_preference: bool = False
    limited_accept_patterns: bool = False
    max_turns: int = 60
    split_composites: bool = False

    def __post_init__(self):
        if self.max_turns < 4:
            raise ConfigError(f"max_turns must be >= 4, got {self.max_turns}")

    @property
    def hardened(self) -> bool:
        return not (
            self.cant_help_loop
            or self.crash_on_conclude
            or self.crash_on_remove_preference
            or self.limited_accept_patterns
        )

    @property
    def tag(self) -> str:
        return "hardened" if self.hardened else "defective"


@dataclass(frozen=True)
class Persona:
    patience: int = 20
    acceptance_bias: float = 0.5

    def __post_init__(self):
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if not 0.0 <= self.acceptance_bias <= 1.0:
            raise ConfigError(f"acceptance_bias must lie in [0, 1], got {self.acceptance_bias}")


@dataclass(frozen=True)
class SimulatorConfig:
    agenda_mode: AgendaMode = AgendaMode.PULL_OR_SAMPLE
    persona: Persona = field(default_factory=Persona)
    preference_count: int = 2
    # Replacement utterance templates per user intent (tests use this to force NLU misses).
    templates: Mapping[str, tuple[str, ...]] | None = None

    def __post_init__(self):
        if self.preference_count < 1:
            raise ConfigError(f"preference_count must be >= 1, got {self.preference_count}")
        object.__setattr__(self, "agenda_mode", AgendaMode(self.agenda_mode))
        if self.templates is not None:
            frozen = tuple(sorted((k, tuple(v)) for k, v in self.templates.items()))
            object.__setattr__(self, "templates", dict(frozen))

    def __hash__(self):
        return hash((self.agenda_mode, self.persona, self.preference_count,
                     tuple(sorted((self.templates or {}).items()))))


@dataclass(frozen=True)
class RunProfile:
    """A parsed preset: iteration tag plus agent and simulator settings."""

    iteration: str
    defects: DefectProfile
    simulator: SimulatorConfig


def _bool(section: configparser.SectionProxy, key: str, default: bool) -> bool:
    try:
        return section.getboolean(key, fallback=default)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _int(section: configparser.SectionProxy, key: str, default: int) -> int:
    try:
        return section.getint(key, fallback=default)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def parse_profile(text: str, name: str = "") -> RunProfile:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for sec in parser.sections():
        if sec not in ("run", "agent", "simulator"):
            raise ConfigError(f"unknown section [{sec}]")
    run = parser["run"] if parser.has_section("run") else parser[parser.default_section]
    agent = parser["agent"] if parser.has_section("agent") else parser[parser.default_section]
    sim = parser["simulator"] if parser.has_section("simulator") else parser[parser.default_section]
    base = DefectProfile()
    defects = DefectProfile(
        cant_help_loop=_bool(agent, "cant_help_loop", base.cant_help_loop),
        crash_on_conclude=_bool(agent, "crash_on_conclude", base.crash_on_conclude),
        crash_on_remove_preference=_bool(agent, "crash_on_remove_preference", base.crash_on_remove_preference),
        limited_accept_patterns=_bool(agent, "limited_accept_patterns", base.limited_accept_patterns),
        max_turns=_int(agent, "max_turns", base.max_turns),
        split_composites=_bool(agent, "split_composites", base.split_composites),
    )
    mode = sim.get("agenda_mode", AgendaMode.PULL_OR_SAMPLE.value)
    try:
        mode = AgendaMode(mode)
    except ValueError:
        raise ConfigError(f"[simulator] agenda_mode: unknown mode {mode!r}") from None
    try:
        bias = sim.getfloat("acceptance_bias", fallback=Persona.acceptance_bias)
    except ValueError as exc:
        raise ConfigError(f"[simulator] acceptance_bias: {exc}") from None
    simulator = SimulatorConfig(
        agenda_mode=mode,
        persona=Persona(_int(sim, "patience", Persona.patience), bias),
        preference_count=_int(sim, "preference_count", 2),
    )
    return RunProfile(run.get("iteration", name), defects, simulator)


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")
    return resources.files("convo_breakdown").joinpath("data").joinpath("presets").joinpath(f"{name}.cfg").read_text(encoding="utf-8")


def load_preset(name: str) -> RunProfile:
    return parse_profile(preset_text(name), name)


def profile_source(source: str) -> tuple[str, str]:
    """Resolve ``--profile``: a preset name or a file path. Returns (text, source label)."""
    if source in PRESET_NAMES:
        return preset_text(source), f"builtin:{source}.cfg"
    path = Path(source)
    try:
        return path.read_text(encoding="utf-8"), source
    except OSError as exc:
        raise ConfigError(f"cannot read profile {source!r}: {exc.strerror}") from None


def load_profile(source: str) -> RunProfile:
    text, _ = profile_source(source)
    return parse_profile(text, Path(source).stem)


def to_jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def digest(*parts: Any) -> str:
    blob = json.dumps([to_jsonable(p) for p in parts], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
