"""Pattern-based understanding of user utterances for the toy recommender."""

from __future__ import annotations

import re

from ..dialogue import Annotation, DialogueAct, IntentLabel
from .catalog import ANY, Catalog, default_catalog
from .config import DefectProfile

NONE_INTENT = IntentLabel.of("U_NONE")

# The one acceptance message the unpatched agent knows.
PREDEFINED_ACCEPT = "i like this recommendation"
EXTRA_ACCEPT_PATTERNS = ("like it", "love it", "i like this", "sounds good")

_SLOT_WORDS = r"(genre|year|rating)"
_BYE = re.compile(r"\b(bye|goodbye)\b")
_RESTART = re.compile(r"\b(start over|from scratch|restart)\b")
_REMOVE = re.compile(rf"\b(?:forget about|don't care about) the {_SLOT_WORDS}\b")
_REVEAL_ANY = re.compile(rf"\b(?:any {_SLOT_WORDS} is fine|don't mind the {_SLOT_WORDS})\b")
_REJECT = re.compile(r"\b(don't like|not for me|already seen)\b")
_CONTINUE = re.compile(r"\b(something else|another recommendation)\b")
_INQUIRE = {
    "genre": re.compile(r"\b(what kind of movie|what genre)\b"),
    "year": re.compile(r"\b(when was it released|how old is it)\b"),
    "rating": re.compile(r"\b(what is it rated|suitable for kids)\b"),
}
_DENY = re.compile(r"\b(not what i said|not right)\b")
_DECADE = re.compile(r"\b((?:19|20)\d0s)\b")
_PUNCT = re.compile(r"[^\w\s'-]")


def _words(text: str) -> str:
    return " ".join(_PUNCT.sub(" ", text.lower()).split())


def _phrase(p: str) -> re.Pattern:
    return re.compile(rf"(?<![\w-]){re.escape(p)}(?![\w-])")


_ACCEPT_EXTRA = [_phrase(p) for p in (PREDEFINED_ACCEPT,) + EXTRA_ACCEPT_PATTERNS]


def _is_accept(words: str, defects: DefectProfile) -> bool:
    if defects.limited_accept_patterns:
        return words == PREDEFINED_ACCEPT
    return any(p.search(words) for p in _ACCEPT_EXTRA)


def _reveal_values(text: str, catalog: Catalog) -> list[Annotation]:
    low = text.lower()
    found = []
    for slot in catalog.slots:
        for value in catalog.values(slot):
            if slot == "year":
                continue
            needle = f"rated {value.lower()}" if slot == "rating" else value.lower()
            if _phrase(needle).search(low):
                found.append(Annotation(slot, value))
                break
    if "year" in catalog.slots:
        m = _DECADE.search(low)
        if m and m.group(1) in catalog.values("year"):
            found.append(Annotation("year", m.group(1)))
    return found


def nlu_match_intent(text: str, defects: DefectProfile, catalog: Catalog | None = None) -> DialogueAct:
    catalog = catalog or default_catalog()
    words = _words(text)
    if not words:
        return DialogueAct(NONE_INTENT)
    if _BYE.search(words):
        return DialogueAct(IntentLabel.of("U_BYE"))
    if _RESTART.search(words):
        reveal = _reveal_values(text, catalog)
        if reveal:
            return DialogueAct(IntentLabel.of("U_RESTART", "U_REVEAL"), tuple(reveal))
        return DialogueAct(IntentLabel.of("U_RESTART"))
    m = _REMOVE.search(words)
    if m:
        return DialogueAct(IntentLabel.of("U_REMOVE_PREFERENCE"), (Annotation(m.group(1), ""),))
    m = _REVEAL_ANY.search(words)
    if m:
        return DialogueAct(IntentLabel.of("U_REVEAL"), (Annotation(m.group(1) or m.group(2), ANY),))
    if _REJECT.search(words):
        return DialogueAct(IntentLabel.of("U_REJECT"))
    if _is_accept(words, defects):
        return DialogueAct(IntentLabel.of("U_ACCEPT"))
    if _CONTINUE.search(words):
        return DialogueAct(IntentLabel.of("U_CONTINUE_RECOMMENDATION"))
    for slot, pat in _INQUIRE.items():
        if pat.search(words):
            return DialogueAct(IntentLabel.of("U_INQUIRE"), (Annotation(slot, ""),))
    if _DENY.search(words):
        return DialogueAct(IntentLabel.of("U_DENY"))
    reveal = _reveal_values(text, catalog)
    if reveal:
        return DialogueAct(IntentLabel.of("U_REVEAL"), tuple(reveal))
    return DialogueAct(NONE_INTENT)
