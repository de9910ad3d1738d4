"""Agenda-based user simulator.

The agenda is planned once per conversation: reveal each preference, optionally
give feedback on a recommendation, accept, and say goodbye. In ``PullOrSample``
mode the head of the agenda is pulled whenever the agent's reply is an allowed
follow-up to the user's previous act, whether or not the head itself fits the
reply; otherwise the next act is sampled. ``AlwaysSample`` ignores the agenda and
samples among the model's allowed successors every turn.

Two behaviours apply in every mode: a direct question (an elicit) is answered
from the preference model, and in ``PullOrSample`` an act the agent failed to
understand is pushed back and repeated verbatim.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field, replace
from typing import Mapping

from ..dialogue import Annotation, DialogueAct, IntentLabel, Participant, Utterance
from ..interaction import InteractionModel, reachable_in_two, user_successors
from .catalog import ANY, Catalog
from .config import AgendaMode, SimulatorConfig

DEFAULT_TEMPLATES: dict[str, tuple[str, ...]] = {
    "U_REVEAL:genre": ("Show me some {value} movies.", "I am in the mood for {value}."),
    "U_REVEAL:year": ("Something from the {value}.", "Preferably a movie from the {value}."),
    "U_REVEAL:rating": ("It should be rated {value}.",),
    "U_REVEAL:any": ("Any {slot} is fine.", "I don't mind the {slot}."),
    "U_INQUIRE:genre": ("What kind of movie is it?",),
    "U_INQUIRE:year": ("When was it released?",),
    "U_INQUIRE:rating": ("What is it rated?",),
    "U_ACCEPT": (
        "I like this recommendation.",
        "Sounds good I like it.",
        "Sounds good.",
        "Ok I like this recommendation.",
        "I love it!",
    ),
    "U_REJECT": ("I don't like this one.", "Not for me.", "I have already seen it."),
    # the last two phrasings are outside the agent's patterns
    "U_CONTINUE_RECOMMENDATION": (
        "Can you give me another recommendation?",
        "I would like something else.",
        "What else do you have?",
        "Anything similar?",
    ),
    "U_REMOVE_PREFERENCE": ("Forget about the {slot}.", "I don't care about the {slot} anymore."),
    "U_RESTART": ("Let's start over.", "Can we start from scratch?"),
    "U_DENY": ("That's not what I said.",),
    "U_BYE": ("Bye.", "Goodbye!"),
}

FEEDBACK_INTENTS = ("U_INQUIRE", "U_REJECT")
MAX_FEEDBACK = 2

_ACCEPT = IntentLabel.of("U_ACCEPT")
_BYE = IntentLabel.of("U_BYE")
_DENY = IntentLabel.of("U_DENY")
_REVEAL = IntentLabel.of("U_REVEAL")
_REMOVE = IntentLabel.of("U_REMOVE_PREFERENCE")
_RESTART = IntentLabel.of("U_RESTART")


@dataclass(frozen=True)
class UserState:
    cfg: SimulatorConfig
    model: InteractionModel
    catalog: Catalog
    preferences: tuple[tuple[str, str], ...]
    agenda: tuple[DialogueAct, ...]
    revealed: tuple[str, ...] = ()
    last_act: DialogueAct | None = None
    last_text: str = ""
    context: DialogueAct | None = None
    turns: int = 0
    templates: Mapping[str, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))

    def __post_init__(self):
        for a in self.agenda:
            if a.intent.participant is not Participant.USER:
                raise ValueError(f"agenda holds non-user intent {a.intent}")

    @property
    def prefs(self) -> dict[str, str]:
        return dict(self.preferences)


def _plan(prefs: tuple[tuple[str, str], ...], model: InteractionModel, rng: random.Random) -> tuple[DialogueAct, ...]:
    agenda = [DialogueAct(_REVEAL, (Annotation(s, v),)) for s, v in prefs]
    prev = _REVEAL
    for _ in range(rng.randint(0, MAX_FEEDBACK)):
        options = [i for i in FEEDBACK_INTENTS if reachable_in_two(model, prev, IntentLabel.of(i))]
        if not options:
            break
        choice = IntentLabel.of(rng.choice(options))
        agenda.append(DialogueAct(choice))
        prev = choice
    for closing in (_ACCEPT, _BYE):
        if reachable_in_two(model, prev, closing):
            agenda.append(DialogueAct(closing))
            prev = closing
    return tuple(agenda)


def new_simulator(cfg: SimulatorConfig, model: InteractionModel, catalog: Catalog, seed: int) -> UserState:
    """Sample preferences from one catalog item and plan the agenda."""
    rng = random.Random(seed)
    target = rng.choice(catalog.items)
    slots = [s for s, _ in target.attributes]
    chosen = sorted(rng.sample(slots, min(cfg.preference_count, len(slots))), key=slots.index)
    prefs = tuple((s, target.get(s)) for s in chosen)
    templates = dict(DEFAULT_TEMPLATES)
    templates.update(cfg.templates or {})
    return UserState(cfg, model, catalog, prefs, _plan(prefs, model, rng), templates=templates)


# --- NLG ---

class _Blank(dict):
    def __missing__(self, key):
        return ""


def _render(state: UserState, a: DialogueAct, rng: random.Random) -> str:
    key = str(a.intent)
    if a.annotations and a.intent in (_REVEAL, IntentLabel.of("U_INQUIRE")):
        slot, value = a.annotations[0].slot, a.annotations[0].value
        key = f"{key}:any" if value == ANY else f"{key}:{slot}"
    options = state.templates.get(key) or state.templates.get(str(a.intent)) or (key,)
    values = _Blank({x.slot: x.value for x in a.annotations})
    if a.annotations:
        values.update(slot=a.annotations[0].slot, value=a.annotations[0].value)
    return string.Formatter().vformat(rng.choice(options), (), values)


# --- act construction ---

def _reveal(state: UserState, rng: random.Random, slot: str | None = None) -> DialogueAct:
    prefs = state.prefs
    if slot is None:
        pending = [s for s, _ in state.preferences if s not in state.revealed]
        slot = pending[0] if pending else rng.choice(sorted(prefs))
    return DialogueAct(_REVEAL, (Annotation(slot, prefs.get(slot, ANY)),))


def _complete(state: UserState, intent: IntentLabel, rng: random.Random) -> DialogueAct:
    if intent == _REVEAL:
        return _reveal(state, rng)
    if intent == _REMOVE and state.revealed:
        return DialogueAct(intent, (Annotation(rng.choice(sorted(state.revealed)), ""),))
    if intent == IntentLabel.of("U_INQUIRE"):
        return DialogueAct(intent, (Annotation(rng.choice(state.catalog.slots), ""),))
    return DialogueAct(intent)


def _sample(state: UserState, agent_intent: IntentLabel, rng: random.Random, cfg: SimulatorConfig) -> DialogueAct:
    options = user_successors(state.model, agent_intent)
    if not state.revealed:
        options = [o for o in options if o != _REMOVE]
    if not options:
        return DialogueAct(_DENY)
    if _ACCEPT in options and agent_intent.last in ("A_RECOMMEND", "A_INFORM"):
        if rng.random() < cfg.persona.acceptance_bias:
            return DialogueAct(_ACCEPT)
    return _complete(state, rng.choice(options), rng)


def _elicited_slot(agent_act: DialogueAct) -> str | None:
    if agent_act.intent.last != "A_ELICIT":
        return None
    for x in agent_act.annotations:
        if x.slot != "count":
            return x.slot
    return None


def _choose(state: UserState, agent_act: DialogueAct, cfg: SimulatorConfig, rng: random.Random):
    """Pick the next act; returns (act, remaining agenda, repeat_text)."""
    agenda = state.agenda
    agent_intent = agent_act.intent
    sample_only = cfg.agenda_mode is AgendaMode.ALWAYS_SAMPLE

    if state.turns >= cfg.persona.patience:
        if not sample_only or state.model.is_transition_allowed(agent_intent, _BYE):
            return DialogueAct(_BYE), agenda, None

    if not sample_only and "A_CANT_HELP" in agent_intent and state.last_act is not None:
        return state.last_act, agenda, state.last_text

    slot = _elicited_slot(agent_act)
    if slot is not None:
        agenda = tuple(a for a in agenda if not (a.intent == _REVEAL and a.annotations[0].slot == slot))
        return _reveal(state, rng, slot), agenda, None

    if not sample_only and agenda:
        expected = state.last_act is None or state.model.is_transition_allowed(state.last_act.intent, agent_intent)
        if expected:
            head, rest = agenda[0], agenda[1:]
            if head.intent == _REVEAL:
                head = _reveal(state, rng, head.annotations[0].slot)
            elif not head.annotations:
                head = _complete(state, head.intent, rng)
            return head, rest, None

    return _sample(state, agent_intent, rng, cfg), agenda, None


def simulator_respond(
    state: UserState,
    agent_act: DialogueAct,
    cfg: SimulatorConfig | None = None,
    rng: random.Random | None = None,
    index: int = 0,
) -> tuple[UserState, Utterance]:
    cfg = cfg or state.cfg
    rng = rng or random.Random(0)
    act, agenda, repeat = _choose(state, agent_act, cfg, rng)
    text = repeat if repeat is not None else _render(state, act, rng)

    revealed = list(state.revealed)
    if act.intent == _RESTART:
        revealed = []
    elif act.intent == _REVEAL:
        revealed += [x.slot for x in act.annotations if x.slot not in revealed]
    elif act.intent == _REMOVE:
        revealed = [s for s in revealed if s != act.annotations[0].slot]

    state = replace(
        state,
        agenda=agenda,
        revealed=tuple(revealed),
        last_act=act,
        last_text=text,
        context=agent_act,
        turns=state.turns + 1,
    )
    return state, Utterance(index, Participant.USER, text, act)
