"""Rule-based toy movie recommender with injectable defects.

The policy elicits genre, year and rating until few candidates remain, then
recommends. Defects reproduce the failure mechanisms of the case study:

* ``cant_help_loop``: no recovery from repeated misunderstanding. When off,
  the third misunderstanding in a row triggers a proactive restart.
* ``crash_on_conclude``: concluding after a proactive restart reads the wiped
  recommendation history and fails.
* ``crash_on_remove_preference``: removing a preference the dialogue state does
  not hold (it was lost in a proactive restart the user never noticed) fails.
* ``limited_accept_patterns``: only the exact predefined acceptance message is
  understood.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..dialogue import Annotation, DialogueAct, ErrorRecord, IntentLabel, Participant, Utterance
from ..interaction import InteractionModel
from .catalog import Catalog, Movie
from .config import DefectProfile

RECOMMEND_THRESHOLD = 3
MISUNDERSTANDINGS_BEFORE_RESTART = 2

AGENT_ERROR_KINDS = ("ConcludeError", "RemovePreferenceError")

_ELICIT_TEXT = {
    "genre": "Which genre do you prefer?",
    "year": "From which decade would you like the movie to be?",
    "rating": "Which age rating should the movie have?",
}


@dataclass(frozen=True)
class AgentState:
    catalog: Catalog
    defects: DefectProfile
    model: InteractionModel | None = None
    preferences: tuple[tuple[str, str], ...] = ()
    asked_slot: str | None = None
    recommended: tuple[str, ...] = ()
    last_recommendation: str | None = None
    last_intent: IntentLabel | None = None
    last_count: int | None = None
    consecutive_cant_help: int = 0
    proactive_restarts: int = 0
    concluded: bool = False
    turn: int = 0

    @property
    def prefs(self) -> dict[str, str]:
        return dict(self.preferences)

    @property
    def profile_tag(self) -> str:
        return self.defects.tag

    def candidates(self) -> list[Movie]:
        return self.catalog.matching(self.prefs)


def new_agent(catalog: Catalog, defects: DefectProfile, model: InteractionModel | None = None) -> AgentState:
    if not catalog.items:
        raise ValueError("catalog is empty")
    return AgentState(catalog=catalog, defects=defects, model=model)


# --- NLG ---

def agent_text(intent: str, a: DialogueAct) -> str:
    if intent == "A_WELCOME":
        return "Hello, I am a movie recommender. What kind of movie would you like to watch?"
    if intent == "A_ELICIT":
        slot = next((x.slot for x in a.annotations if x.slot in _ELICIT_TEXT), "genre")
        return _ELICIT_TEXT[slot]
    if intent == "A_COUNT_RESULTS":
        return f"There are {a.get('count')} movies matching your preferences."
    if intent == "A_RECOMMEND":
        return f'How about "{a.get("title")}"? It is {a.get("genre")}, from the {a.get("year")}.'
    if intent == "A_INFORM":
        title = a.get("title")
        for x in a.annotations:
            if x.slot == "genre":
                return f'"{title}" belongs to the {x.value} genre.'
            if x.slot == "year":
                return f'"{title}" was released in the {x.value}.'
            if x.slot == "rating":
                return f'"{title}" is rated {x.value}.'
        return f'"{title}" is one of my recommendations.'
    if intent == "A_NO_RESULTS":
        return "Sorry, I could not find any movie matching your preferences."
    if intent == "A_CANT_HELP":
        return "Sorry, I can't help you with that."
    if intent == "A_CONTINUE_RECOMMENDATION":
        return "Great choice! Would you like another recommendation?"
    if intent == "A_RESTART":
        return "Let's start over."
    if intent == "A_BYE":
        return "Thank you for chatting with me. Goodbye!"
    raise ValueError(f"no template for {intent}")


# annotations each constituent keeps when a composite turn is split
_OWNED_SLOTS = {"A_COUNT_RESULTS": {"count"}, "A_ELICIT": set(_ELICIT_TEXT)}


def _utterance(index: int, a: DialogueAct) -> Utterance:
    text = " ".join(agent_text(c, a) for c in a.intent.constituents)
    return Utterance(index, Participant.AGENT, text, a)


def split_composite(u: Utterance) -> list[Utterance]:
    """Render a composite agent turn as consecutive single-intent utterances."""
    if not u.act.intent.is_composite:
        return [u]
    out = []
    for k, c in enumerate(u.act.intent.constituents):
        owned = _OWNED_SLOTS.get(c, set())
        part = DialogueAct(IntentLabel.of(c), tuple(x for x in u.act.annotations if x.slot in owned))
        out.append(Utterance(u.index + k, Participant.AGENT, agent_text(c, part), part))
    return out


# --- policy ---

def _acted(state: AgentState, a: DialogueAct, **changes) -> tuple[AgentState, DialogueAct]:
    return replace(state, last_intent=a.intent, turn=state.turn + 1, **changes), a


def _recommend_next(state: AgentState) -> tuple[AgentState, DialogueAct]:
    for movie in state.candidates():
        if movie.title not in state.recommended:
            a = DialogueAct(
                IntentLabel.of("A_RECOMMEND"),
                (Annotation("title", movie.title),) + tuple(Annotation(s, v) for s, v in movie.attributes),
            )
            return _acted(
                state, a,
                recommended=state.recommended + (movie.title,),
                last_recommendation=movie.title,
            )
    return _acted(state, DialogueAct(IntentLabel.of("A_NO_RESULTS")), last_recommendation=None)


def _missing_slot(state: AgentState) -> str | None:
    prefs = state.prefs
    return next((s for s in state.catalog.slots if s not in prefs), None)


def _elicit(state: AgentState, slot: str, prefix: tuple[str, ...] = (), extra: tuple[Annotation, ...] = ()):
    a = DialogueAct(IntentLabel(prefix + ("A_ELICIT",)), extra + (Annotation(slot, ""),))
    return _acted(state, a, asked_slot=slot)


def _after_update(state: AgentState) -> tuple[AgentState, DialogueAct]:
    cands = [m for m in state.candidates() if m.title not in state.recommended]
    if not cands:
        return _acted(state, DialogueAct(IntentLabel.of("A_NO_RESULTS")), last_recommendation=None)
    slot = _missing_slot(state)
    if slot is not None and len(cands) > RECOMMEND_THRESHOLD:
        n = len(cands)
        if n != state.last_count:
            state = replace(state, last_count=n)
            return _elicit(state, slot, ("A_COUNT_RESULTS",), (Annotation("count", str(n)),))
        return _elicit(state, slot)
    return _recommend_next(state)


def _wipe(state: AgentState, **changes) -> AgentState:
    return replace(
        state, preferences=(), asked_slot=None, recommended=(), last_recommendation=None,
        last_count=None, **changes,
    )


def _restart(state: AgentState, proactive: bool) -> tuple[AgentState, DialogueAct]:
    restarts = state.proactive_restarts + (1 if proactive else 0)
    state = _wipe(state, proactive_restarts=restarts, consecutive_cant_help=0)
    return _elicit(state, state.catalog.slots[0], ("A_RESTART",))


def _misunderstood(state: AgentState) -> tuple[AgentState, DialogueAct]:
    count = state.consecutive_cant_help + 1
    if not state.defects.cant_help_loop and count > MISUNDERSTANDINGS_BEFORE_RESTART:
        return _restart(state, proactive=True)
    return _acted(state, DialogueAct(IntentLabel.of("A_CANT_HELP")), consecutive_cant_help=count)


def _conclude(state: AgentState, index: int):
    if state.defects.crash_on_conclude and state.proactive_restarts > 0:
        return state, ErrorRecord(
            "ConcludeError", index, "cannot summarize the conversation: recommendation history was reset"
        )
    return _acted(state, DialogueAct(IntentLabel.of("A_BYE")), concluded=True)


def _apply_reveal(state: AgentState, annotations) -> AgentState:
    prefs = state.prefs
    for x in annotations:
        if x.slot in state.catalog.slots:
            prefs[x.slot] = x.value
    ordered = tuple((s, prefs[s]) for s in state.catalog.slots if s in prefs)
    return replace(state, preferences=ordered)


def _policy(state: AgentState, user_act: DialogueAct | None, index: int):
    if user_act is None:
        return _acted(state, DialogueAct(IntentLabel.of("A_WELCOME")))
    intent = user_act.intent
    if intent == IntentLabel.of("U_NONE"):
        return _misunderstood(state)
    streak = state.consecutive_cant_help
    state = replace(state, consecutive_cant_help=0)

    if "U_BYE" in intent:
        return _conclude(state, index)
    if "U_RESTART" in intent:
        if "U_REVEAL" in intent:
            state = _apply_reveal(_wipe(state), user_act.annotations)
            return _after_update(state)
        return _restart(state, proactive=False)
    if "U_REMOVE_PREFERENCE" in intent:
        slot = user_act.annotations[0].slot if user_act.annotations else ""
        prefs = state.prefs
        if slot not in prefs:
            if state.defects.crash_on_remove_preference:
                return state, ErrorRecord(
                    "RemovePreferenceError", index, f"preference '{slot}' is not in the dialogue state"
                )
        else:
            del prefs[slot]
            state = replace(state, preferences=tuple(prefs.items()), recommended=())
        return _after_update(state)
    if "U_ACCEPT" in intent:
        if state.last_recommendation is None:
            return _after_update(state)
        return _acted(state, DialogueAct(IntentLabel.of("A_CONTINUE_RECOMMENDATION")))
    if "U_REJECT" in intent:
        if state.last_intent == IntentLabel.of("A_CONTINUE_RECOMMENDATION"):
            return _conclude(state, index)
        return _recommend_next(state)
    if "U_CONTINUE_RECOMMENDATION" in intent:
        return _recommend_next(state)
    if "U_INQUIRE" in intent:
        if state.last_recommendation is None:
            return _misunderstood(replace(state, consecutive_cant_help=streak))
        movie = state.catalog.by_title(state.last_recommendation)
        slot = user_act.annotations[0].slot if user_act.annotations else "genre"
        a = DialogueAct(
            IntentLabel.of("A_INFORM"),
            (Annotation("title", movie.title), Annotation(slot, movie.get(slot) or "")),
        )
        return _acted(state, a)
    if "U_DENY" in intent:
        slot = state.asked_slot or _missing_slot(state)
        if slot is None:
            return _recommend_next(state)
        return _elicit(state, slot)
    if "U_REVEAL" in intent:
        return _after_update(_apply_reveal(state, user_act.annotations))
    return _misunderstood(state)


def agent_respond(
    state: AgentState, user_act: DialogueAct | None, user_text: str = "", index: int = 0
) -> tuple[AgentState, Utterance | ErrorRecord]:
    """Reply to the understood user act (None opens the conversation).

    ``user_act`` is what the agent's own NLU extracted from ``user_text``.
    Failures come back as an ErrorRecord instead of an utterance.
    """
    state, out = _policy(state, user_act, index)
    if isinstance(out, ErrorRecord):
        return state, out
    return state, _utterance(index, out)
