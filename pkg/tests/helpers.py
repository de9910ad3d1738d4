"""Shared builders, brute-force oracles and hypothesis strategies for the test suite.

The oracles deliberately avoid the package's own algorithms: they work from raw
edge lists and plain recursion so that agreement is meaningful.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

from hypothesis import strategies as st

from convo_breakdown.dialogue import (
    Annotation,
    Dialogue,
    DialogueAct,
    ErrorRecord,
    IntentLabel,
    Metadata,
    Participant,
    Utterance,
)
from convo_breakdown.interaction import InteractionModel

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

AGENT_ATOMS = (
    "A_WELCOME", "A_ELICIT", "A_COUNT_RESULTS", "A_RECOMMEND", "A_INFORM",
    "A_NO_RESULTS", "A_CANT_HELP", "A_CONTINUE_RECOMMENDATION", "A_RESTART", "A_BYE",
)
USER_ATOMS = (
    "U_REVEAL", "U_ACCEPT", "U_REJECT", "U_INQUIRE", "U_CONTINUE_RECOMMENDATION",
    "U_REMOVE_PREFERENCE", "U_RESTART", "U_DENY", "U_BYE",
)


def label(text: str) -> IntentLabel:
    return IntentLabel.parse(text)


def labels(*texts: str) -> list[IntentLabel]:
    return [IntentLabel.parse(t) for t in texts]


def make_dialogue(turns, did="d", errors=(), meta=Metadata()) -> Dialogue:
    """``turns`` is a list of intent strings or (intent, text) pairs."""
    utts = []
    for i, t in enumerate(turns):
        intent, text = (t, f"text {i}") if isinstance(t, str) else t
        lab = IntentLabel.parse(intent)
        utts.append(Utterance(i, lab.participant, text, DialogueAct(lab)))
    errs = tuple(e if isinstance(e, ErrorRecord) else ErrorRecord(e) for e in errors)
    return Dialogue(did, tuple(utts), errs, meta)


def load_reference_paths():
    return json.loads((FIXTURES / "reference_paths.json").read_text(encoding="utf-8"))


# --- oracles ---

def oracle_levenshtein(a: str, b: str) -> int:
    @functools.lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def oracle_similarity(a: str, b: str) -> float:
    a = " ".join(a.lower().split())
    b = " ".join(b.lower().split())
    if not a and not b:
        return 1.0
    return 1.0 - oracle_levenshtein(a, b) / max(len(a), len(b))


class EdgeOracle:
    """Path validity straight from edge lists, with composites expanded by hand."""

    def __init__(self, edges, starts, composites=()):
        self.edges = {(str(a), str(b)) for a, b in edges}
        self.starts = {str(s) for s in starts}
        self.composites = {str(c) for c in composites}

    def _ends(self, lab: IntentLabel):
        s = str(lab)
        if s in self.composites or not lab.is_composite:
            return s, s
        cons = list(lab.constituents)
        for x, y in zip(cons, cons[1:]):
            if (x, y) not in self.edges:
                return None
        return cons[0], cons[-1]

    def step_ok(self, a: IntentLabel, b: IntentLabel) -> bool:
        ea, eb = self._ends(a), self._ends(b)
        return ea is not None and eb is not None and (ea[1], eb[0]) in self.edges

    def start_ok(self, a: IntentLabel) -> bool:
        e = self._ends(a)
        return e is not None and e[0] in self.starts

    def first_violation(self, path) -> int | None:
        """Index of the first bad element, checking every prefix from scratch."""
        for k in range(1, len(path) + 1):
            prefix = path[:k]
            ok = self.start_ok(prefix[0]) and all(self.step_ok(x, y) for x, y in zip(prefix, prefix[1:]))
            if not ok:
                return k - 1
        return None

    @classmethod
    def of(cls, m: InteractionModel) -> "EdgeOracle":
        return cls(m.edges, m.start_nodes, m.composite_nodes)


def oracle_flow(d: Dialogue, oracle: EdgeOracle) -> tuple[IntentLabel, ...]:
    seq = [u.act.intent for u in d.utterances]
    k = oracle.first_violation(seq)
    return () if k is None else tuple(seq[: k + 1])


def oracle_deaf(d: Dialogue, window=3, threshold=0.9, recursion_kind="RecursionError") -> tuple[IntentLabel, ...]:
    if any(e.kind == recursion_kind for e in d.error_log):
        return tuple(u.act.intent for u in d.utterances)
    agent_positions = [i for i, u in enumerate(d.utterances) if u.participant is Participant.AGENT]
    for n, pos in enumerate(agent_positions):
        group = agent_positions[n : n + window]
        if len(group) < window:
            break
        anchor = d.utterances[pos]
        others = [d.utterances[p] for p in group[1:]]
        if all(o.act.intent == anchor.act.intent for o in others) and all(
            oracle_similarity(anchor.text, o.text) >= threshold for o in others
        ):
            return tuple(u.act.intent for u in d.utterances[: pos + 1])
    return ()


# --- strategies ---

atom_names = st.from_regex(r"[A-Z][A-Z0-9_]{0,8}", fullmatch=True)


@st.composite
def intent_labels(draw, participant=None):
    prefix = draw(st.sampled_from(["A_", "U_"])) if participant is None else participant.prefix
    n = draw(st.integers(1, 3))
    return IntentLabel(tuple(prefix + draw(atom_names) for _ in range(n)))


safe_text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=40)
slot_names = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=10)


@st.composite
def dialogues(draw, max_turns=8):
    n = draw(st.integers(0, max_turns))
    utts = []
    for i in range(n):
        part = draw(st.sampled_from([Participant.AGENT, Participant.USER]))
        anns = tuple(
            Annotation(draw(slot_names), draw(safe_text)) for _ in range(draw(st.integers(0, 2)))
        )
        utts.append(Utterance(i, part, draw(safe_text), DialogueAct(draw(intent_labels(part)), anns)))
    n_err = draw(st.integers(1 if n == 0 else 0, 2))
    errors = tuple(
        ErrorRecord(
            draw(st.from_regex(r"[A-Za-z][A-Za-z0-9_.]{0,12}", fullmatch=True)),
            draw(st.none() | st.integers(0, n)),
            draw(safe_text),
        )
        for _ in range(n_err)
    )
    meta = Metadata(draw(safe_text), draw(st.integers(-(2**40), 2**40)), draw(safe_text), draw(safe_text))
    return Dialogue(draw(slot_names), tuple(utts), errors, meta)


@st.composite
def models(draw):
    atoms = draw(st.lists(intent_labels(), min_size=1, max_size=8, unique=True))
    atoms = [IntentLabel((a.constituents[0],)) for a in atoms]
    atoms = list(dict.fromkeys(atoms))
    edges = draw(st.lists(st.tuples(st.sampled_from(atoms), st.sampled_from(atoms)), max_size=20))
    starts = draw(st.lists(st.sampled_from(atoms), min_size=1, max_size=3))
    composites = []
    if len(atoms) >= 2 and draw(st.booleans()):
        same = [a for a in atoms if a.participant is atoms[0].participant]
        if len(same) >= 2:
            composites.append(IntentLabel(tuple(x.constituents[0] for x in same[:2])))
    return InteractionModel(
        draw(safe_text), draw(safe_text), frozenset(atoms) | frozenset(composites),
        frozenset(edges), frozenset(starts), frozenset(composites),
    )


def random_model_and_path(rng, max_len=14, n_atoms=6, p_edge=0.45):
    """A random small model plus a random path over its labels (for oracle checks)."""
    agents = [f"A_X{i}" for i in range(n_atoms // 2)]
    users = [f"U_Y{i}" for i in range(n_atoms - n_atoms // 2)]
    atoms = [IntentLabel.of(a) for a in agents + users]
    edges = {(a, b) for a in atoms for b in atoms if rng.random() < p_edge}
    starts = {rng.choice(atoms)}
    model = InteractionModel("rand", "0", frozenset(atoms), frozenset(edges), frozenset(starts))
    pool = atoms + [IntentLabel.of(agents[0], agents[-1]), IntentLabel.of(users[0], users[-1])]
    path = [rng.choice(pool) for _ in range(rng.randint(0, max_len))]
    # bias some paths towards validity by walking the graph
    if rng.random() < 0.5 and path:
        walk = [next(iter(starts))]
        while len(walk) < len(path):
            nxt = sorted(model.successors(walk[-1]))
            if not nxt:
                break
            walk.append(rng.choice(nxt))
        path = walk + path[len(walk):]
    return model, path
