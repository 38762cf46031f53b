"""Lexicon-based entity extraction from raw operator utterances."""

import pytest

from nile.extract import (
    EmptyExtraction,
    Entity,
    EntityKind,
    Lexicon,
    default_lexicon,
    extract_entities,
)


def kinds_and_values(es):
    return [(e.kind, e.value) for e in es.entities]


def test_simple_add_firewall_for_backend():
    es = extract_entities("Please add a firewall for the backend.")
    assert kinds_and_values(es) == [
        (EntityKind.MIDDLEBOX, "firewall"),
        (EntityKind.TARGET, "backend"),
    ]


def test_iperf_utterance():
    es = extract_entities(
        "Add a firewall and an intrusion detection system "
        "from the iperf client to the iperf server."
    )
    assert kinds_and_values(es) == [
        (EntityKind.MIDDLEBOX, "firewall"),
        (EntityKind.MIDDLEBOX, "ids"),
        (EntityKind.ORIGIN, "iperf client"),
        (EntityKind.DESTINATION, "iperf server"),
    ]


def test_empty_extraction_raises():
    with pytest.raises(EmptyExtraction):
        extract_entities("hello there")


def test_blank_utterance_raises():
    with pytest.raises(EmptyExtraction):
        extract_entities("   ")


def test_full_fifteen_entity_utterance():
    es = extract_entities(
        "Add firewall and intrusion detection from gateway to backend for "
        "client B, with latency less than 10ms and 100mbps of bandwidth, "
        "and allow HTTPS only, everyday from 09:00 to 18:00"
    )
    assert kinds_and_values(es) == [
        (EntityKind.MIDDLEBOX, "firewall"),
        (EntityKind.MIDDLEBOX, "ids"),
        (EntityKind.ORIGIN, "gateway"),
        (EntityKind.DESTINATION, "backend"),
        (EntityKind.CLIENT, "B"),
        (EntityKind.METRIC, "latency"),
        (EntityKind.CONSTRAINT, "less"),
        (EntityKind.VALUE, "10ms"),
        (EntityKind.VALUE, "100mbps"),
        (EntityKind.CONSTRAINT, "more or equal"),
        (EntityKind.METRIC, "throughput"),
        (EntityKind.RULE_ACTION, "allow"),
        (EntityKind.TRAFFIC, "https"),
        (EntityKind.START_TIME, "09:00"),
        (EntityKind.END_TIME, "18:00"),
    ]


def test_positions_point_into_utterance():
    text = "Add a firewall from the gateway to the backend."
    es = extract_entities(text)
    for e in es.entities:
        assert 0 <= e.position < len(text)
    # positions are sorted because entities are reported in surface order
    positions = [e.position for e in es.entities]
    assert positions == sorted(positions)


def test_longest_phrase_wins():
    # "intrusion detection system" must map to ids as one unit, not leave
    # stray words that match shorter lexicon phrases
    es = extract_entities("Add an intrusion detection system for the database.")
    assert kinds_and_values(es) == [
        (EntityKind.MIDDLEBOX, "ids"),
        (EntityKind.TARGET, "database"),
    ]


def test_synonyms_canonicalize():
    a = extract_entities("Add snort for the backend.")
    b = extract_entities("Add an intrusion detection system for the backend.")
    assert kinds_and_values(a) == kinds_and_values(b)
    assert kinds_and_values(a)[0] == (EntityKind.MIDDLEBOX, "ids")


def test_case_insensitive():
    es = extract_entities("ADD A FIREWALL FOR THE BACKEND.")
    assert (EntityKind.MIDDLEBOX, "firewall") in kinds_and_values(es)


def test_duplicate_surface_value_reported_once():
    es = extract_entities("Add a firewall, yes a firewall, for the backend.")
    mbs = [e for e in es.entities if e.kind is EntityKind.MIDDLEBOX]
    assert [e.value for e in mbs] == ["firewall"]


def test_from_to_directionality():
    es = extract_entities("Block traffic from the gateway to the database.")
    pairs = kinds_and_values(es)
    assert (EntityKind.ORIGIN, "gateway") in pairs
    assert (EntityKind.DESTINATION, "database") in pairs


def test_times_resolved_to_start_and_end():
    es = extract_entities("Add a firewall for the backend from 09:00 to 18:00.")
    pairs = kinds_and_values(es)
    assert (EntityKind.START_TIME, "09:00") in pairs
    assert (EntityKind.END_TIME, "18:00") in pairs


def test_bandwidth_value_implies_floor_constraint():
    # "100mbps of bandwidth" with no comparator reads as a guarantee
    es = extract_entities("Give the backend 100mbps of bandwidth.")
    pairs = kinds_and_values(es)
    assert (EntityKind.VALUE, "100mbps") in pairs
    assert (EntityKind.CONSTRAINT, "more or equal") in pairs
    assert (EntityKind.METRIC, "throughput") in pairs


def test_explicit_comparator_not_overridden():
    es = extract_entities("Keep bandwidth less than 10mbps for the backend.")
    constraints = [e.value for e in es.entities if e.kind is EntityKind.CONSTRAINT]
    assert constraints == ["less"]


def test_custom_lexicon_extends_matching():
    lex = default_lexicon()
    lex.entries[("packet", "scrubber")] = (EntityKind.MIDDLEBOX, "scrubber")
    es = extract_entities("Add a packet scrubber for the backend.", lex)
    assert (EntityKind.MIDDLEBOX, "scrubber") in kinds_and_values(es)


def test_lexicon_rejects_malformed_lines():
    from nile.extract import LexiconError

    with pytest.raises(LexiconError):
        Lexicon.from_lines(["just two\tfields"])
    with pytest.raises(LexiconError):
        Lexicon.from_lines(["phrase\tnot_a_kind\tcanon"])


def test_entity_is_value_object():
    e = Entity(kind=EntityKind.MIDDLEBOX, value="firewall", position=4)
    assert e == Entity(kind=EntityKind.MIDDLEBOX, value="firewall", position=4)
