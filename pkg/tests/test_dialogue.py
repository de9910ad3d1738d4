import json
import warnings

import jsonschema
import pytest
from hypothesis import given, settings

from convo_breakdown.dialogue import (
    CorpusReadError,
    Dialogue,
    DialogueAct,
    ErrorRecord,
    IntentLabel,
    ParseError,
    Participant,
    UnknownFieldWarning,
    Utterance,
    ValidationError,
    act,
    agent_utterances,
    dialogue_to_dict,
    intent_sequence,
    load_corpus,
    parse_corpus_document,
    parse_dialogue,
    serialize_corpus_document,
    serialize_dialogue,
    write_corpus,
)
from helpers import GOLDEN, HERE, dialogues, intent_labels, make_dialogue

SCHEMA = json.loads((HERE.parent / "docs" / "transcript.schema.json").read_text(encoding="utf-8"))


def doc(utterances, **extra):
    return json.dumps({"id": "x", "utterances": utterances, **extra})


def utt(i, part, intent, text="hi", annotations=()):
    return {
        "index": i, "participant": part, "text": text,
        "act": {"intent": intent, "annotations": [{"slot": s, "value": v} for s, v in annotations]},
    }


# --- IntentLabel ---

def test_composite_abbreviation_expands():
    lab = IntentLabel.parse("A_COUNT_RESULTS+ELICIT")
    assert lab.constituents == ("A_COUNT_RESULTS", "A_ELICIT")
    assert str(lab) == "A_COUNT_RESULTS+A_ELICIT"
    assert lab.abbreviated() == "A_COUNT_RESULTS+ELICIT"
    assert lab.is_composite and lab.first == "A_COUNT_RESULTS" and lab.last == "A_ELICIT"


@pytest.mark.parametrize("bad", ["", "A_X+", "a_welcome", "A_X+U_Y", "WELCOME", "A_X++A_Y", "A_X Y"])
def test_bad_labels_rejected(bad):
    with pytest.raises(ValueError):
        IntentLabel.parse(bad)


def test_label_participant():
    assert IntentLabel.parse("U_RESTART+REVEAL").participant is Participant.USER
    assert "U_REVEAL" in IntentLabel.parse("U_RESTART+REVEAL")


@given(intent_labels())
@settings(max_examples=200)
def test_label_round_trip(lab):
    assert IntentLabel.parse(str(lab)) == lab
    assert IntentLabel.parse(lab.abbreviated()) == lab


# --- parsing ---

def test_two_turn_document():
    d = parse_dialogue(doc([utt(0, "agent", "A_WELCOME"), utt(1, "user", "U_REVEAL", annotations=[("genre", "drama")])]))
    assert len(d.utterances) == 2
    assert d.error_log == ()
    assert d.utterances[1].act.get("genre") == "drama"


def test_abbreviated_composite_in_document():
    d = parse_dialogue(doc([utt(0, "agent", "A_WELCOME"), utt(1, "agent", "A_COUNT_RESULTS+ELICIT")]))
    assert d.utterances[1].intent.constituents == ("A_COUNT_RESULTS", "A_ELICIT")


def test_gap_in_indices():
    with pytest.raises(ValidationError, match="gap at index 1"):
        parse_dialogue(doc([utt(0, "agent", "A_WELCOME"), utt(2, "user", "U_REVEAL")]))


def test_prefix_mismatch_names_turn():
    with pytest.raises(ValidationError, match="1"):
        parse_dialogue(doc([utt(0, "agent", "A_WELCOME"), utt(1, "agent", "U_REVEAL")]))


@pytest.mark.parametrize(
    "text, locus",
    [
        ("{not json", "line 1"),
        (json.dumps({"utterances": []}), "$"),
        (json.dumps({"id": "x", "utterances": [{"index": 0}]}), "utterances[0]"),
        (json.dumps({"id": "x", "utterances": [utt(0, "robot", "A_WELCOME")]}), "utterances[0]"),
        (json.dumps({"id": "x", "utterances": [utt(0, "agent", "bad")]}), "act"),
        (json.dumps({"id": "x", "utterances": [utt(0, "agent", "A_W")], "error_log": [{"kind": "a b"}]}), "error_log[0]"),
        (json.dumps({"id": "x", "utterances": [utt(True, "agent", "A_W")]}), "utterances[0]"),
    ],
)
def test_parse_errors_carry_locus(text, locus):
    with pytest.raises(ParseError) as info:
        parse_dialogue(text)
    assert locus in str(info.value)


def test_unknown_top_level_key_warns():
    with pytest.warns(UnknownFieldWarning, match="extra"):
        d = parse_dialogue(doc([utt(0, "agent", "A_WELCOME")], extra=1))
    assert d.id == "x"


def test_empty_dialogue_needs_error_log():
    with pytest.raises(ValidationError):
        Dialogue("x", (), ())
    d = Dialogue("x", (), (ErrorRecord("ConcludeError", 0),))
    assert intent_sequence(d) == []


def test_error_at_turn_range():
    make_dialogue(["A_WELCOME"], errors=[ErrorRecord("E", 1)])
    with pytest.raises(ValidationError):
        make_dialogue(["A_WELCOME"], errors=[ErrorRecord("E", 2)])


def test_error_kind_single_token():
    with pytest.raises(ValueError):
        ErrorRecord("Two words")


def test_empty_slot_rejected():
    with pytest.raises(ValueError):
        act("U_REVEAL", **{"": "x"})


# --- views ---

def test_intent_sequence_and_agent_utterances():
    d = make_dialogue(["A_WELCOME", "U_REVEAL", "A_ELICIT", "U_REVEAL"])
    assert [str(x) for x in intent_sequence(d)] == ["A_WELCOME", "U_REVEAL", "A_ELICIT", "U_REVEAL"]
    assert [u.index for u in agent_utterances(d)] == [0, 2]
    assert agent_utterances(make_dialogue(["U_REVEAL", "U_BYE"])) == []


def test_repeated_elicit_sequence_alternates():
    d = make_dialogue(["U_REVEAL", "A_ELICIT"] * 3)
    seq = intent_sequence(d)
    assert len(seq) == 6
    assert [x.participant for x in seq] == [Participant.USER, Participant.AGENT] * 3


def test_five_agent_four_user_excerpt():
    d = make_dialogue(["A_RECOMMEND"] + ["U_CONTINUE_RECOMMENDATION", "A_CANT_HELP"] * 4)
    assert len(agent_utterances(d)) == 5


# --- serialization ---

def test_round_trip_example():
    d = make_dialogue(["A_WELCOME", "U_REVEAL"])
    assert parse_dialogue(serialize_dialogue(d)) == d


def test_composite_golden():
    u0 = Utterance(0, Participant.AGENT, "Hello!", DialogueAct(IntentLabel.parse("A_WELCOME")))
    u1 = Utterance(1, Participant.USER, "Show me some drama movies.", act("U_REVEAL", genre="drama"))
    u2 = Utterance(
        2, Participant.AGENT, "There are 6 movies. From which decade?",
        DialogueAct(IntentLabel.parse("A_COUNT_RESULTS+ELICIT"), act("A_ELICIT", count="6", year="").annotations),
    )
    d = Dialogue("golden-1", (u0, u1, u2), (ErrorRecord("RecursionError", 3, "budget"),))
    text = serialize_dialogue(d)
    assert "A_COUNT_RESULTS+A_ELICIT" in text
    assert text == (GOLDEN / "transcript_composite.json").read_text(encoding="utf-8")


@given(dialogues())
@settings(max_examples=500, deadline=None)
def test_round_trip_property(d):
    text = serialize_dialogue(d)
    assert parse_dialogue(text) == d
    assert serialize_dialogue(parse_dialogue(text)) == text


@given(dialogues(), dialogues())
@settings(max_examples=100, deadline=None)
def test_canonical_bytes(d1, d2):
    assert (serialize_dialogue(d1) == serialize_dialogue(d2)) == (d1 == d2)


@given(dialogues())
@settings(max_examples=100, deadline=None)
def test_serialized_matches_schema(d):
    jsonschema.validate(json.loads(serialize_dialogue(d)), SCHEMA)


@given(dialogues(max_turns=4))
@settings(max_examples=100, deadline=None)
def test_corrupted_prefix_rejected(d):
    obj = dialogue_to_dict(d)
    if not obj["utterances"]:
        return
    u = obj["utterances"][0]
    u["participant"] = "user" if u["participant"] == "agent" else "agent"
    with pytest.raises(ValidationError):
        parse_dialogue(json.dumps(obj))


# --- corpora ---

def test_corpus_directory_and_list(tmp_path):
    ds = [make_dialogue(["A_WELCOME"], did=f"d{i}") for i in range(3)]
    write_corpus(tmp_path / "c", ds)
    (tmp_path / "c" / "manifest.json").write_text("{}")
    assert load_corpus(tmp_path / "c") == ds
    single = tmp_path / "all.json"
    single.write_text(serialize_corpus_document(ds))
    assert load_corpus(single) == ds
    assert parse_corpus_document(serialize_dialogue(ds[0])) == [ds[0]]


def test_corpus_read_error_names_file(tmp_path):
    (tmp_path / "a.json").write_text("{oops")
    with pytest.raises(CorpusReadError, match="a.json"):
        load_corpus(tmp_path)


def test_values_immutable():
    d = make_dialogue(["A_WELCOME"])
    with pytest.raises(Exception):
        d.id = "y"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert parse_dialogue(serialize_dialogue(d)) == d
