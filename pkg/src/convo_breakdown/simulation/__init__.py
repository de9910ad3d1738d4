"""Toy recommender agent, agenda-based user simulator and corpus generation."""

from .agent import AgentState, agent_respond, new_agent, split_composite
from .catalog import Catalog, Movie, default_catalog, make_catalog
from .config import (
    PRESET_NAMES,
    AgendaMode,
    ConfigError,
    DefectProfile,
    Persona,
    RunProfile,
    SimulatorConfig,
    load_preset,
    load_profile,
    parse_profile,
)
from .nlu import nlu_match_intent
from .runner import generate_conversation, generate_corpus
from .user import UserState, new_simulator, simulator_respond

__all__ = [
    "PRESET_NAMES",
    "AgendaMode",
    "AgentState",
    "Catalog",
    "ConfigError",
    "DefectProfile",
    "Movie",
    "Persona",
    "RunProfile",
    "SimulatorConfig",
    "UserState",
    "agent_respond",
    "default_catalog",
    "generate_conversation",
    "generate_corpus",
    "load_preset",
    "load_profile",
    "make_catalog",
    "new_agent",
    "new_simulator",
    "nlu_match_intent",
    "parse_profile",
    "simulator_respond",
    "split_composite",
]
