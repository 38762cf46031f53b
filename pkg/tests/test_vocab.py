"""Vocabulary layout and token/index mapping."""

import pytest

from nile.entities import EntityKind
from nile.lang import parse_nile, render_tokens
from nile.translate.vocab import (
    EOS,
    PAD,
    SOS,
    UNK,
    Vocabulary,
    build_vocabulary,
    entity_token,
    entity_tokens,
    index_tokens,
    tokens_from_indices,
)

GOLDEN_NILE = (
    "define intent testIntent:\n"
    "  from endpoint('iperf client')\n"
    "  to endpoint('iperf server')\n"
    "  add middlebox('firewall'),\n"
    "      middlebox('ids')"
)


def test_specials_occupy_first_indices():
    v = build_vocabulary()
    assert v.words[PAD] == "<pad>"
    assert v.words[SOS] == "<sos>"
    assert v.words[EOS] == "<eos>"
    assert v.words[UNK] == "<unk>"


def test_vocabulary_size_is_92():
    assert len(build_vocabulary()) == 92


def test_every_entity_kind_has_four_tokens():
    toks = entity_tokens()
    assert len(toks) == 4 * len(EntityKind)
    for kind in EntityKind:
        assert f"@{kind.value}" in toks
        assert f"@{kind.value}#4" in toks


def test_entity_token_occurrence_bounds():
    with pytest.raises(ValueError):
        entity_token(EntityKind.MIDDLEBOX, 0)
    with pytest.raises(ValueError):
        entity_token(EntityKind.MIDDLEBOX, 5)


def test_index_round_trip():
    v = build_vocabulary()
    tokens = ["define", "intent", "@middlebox", "(", "'", ")"]
    idx = index_tokens(tokens, v)
    assert tokens_from_indices(idx, v) == tokens


def test_unknown_word_maps_to_unk():
    v = build_vocabulary()
    assert index_tokens(["zorblax"], v) == [UNK]


def test_duplicate_words_rejected():
    with pytest.raises(ValueError):
        Vocabulary(("<pad>", "<sos>", "<eos>", "<unk>", "a", "a"))


def test_missing_specials_rejected():
    with pytest.raises(ValueError):
        Vocabulary(("a", "b", "c", "d"))


def test_rendered_program_tokens_all_in_vocabulary():
    # anonymized token sequences must index without falling back to UNK
    from nile.anonymize import AnonymizationMap, reanonymize_tokens

    amap = AnonymizationMap(
        pairs=(
            ("@origin", "iperf client"),
            ("@destination", "iperf server"),
            ("@middlebox", "firewall"),
            ("@middlebox#2", "ids"),
            ("@intent_name", "testIntent"),
        )
    )
    tokens = reanonymize_tokens(render_tokens(parse_nile(GOLDEN_NILE)), amap)
    v = build_vocabulary()
    assert UNK not in index_tokens(tokens, v)


def test_build_vocabulary_is_deterministic():
    assert build_vocabulary().words == build_vocabulary().words
