import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import char_class_normalize
from sent2matrix.text import (
    CHAR_VOCAB,
    UNK_TOKEN,
    VocabularyError,
    build_word_vocab,
    dump_word_vocab,
    normalize,
    tokenize,
)


class TestNormalize:
    def test_lowercases(self):
        assert normalize("GOOD") == "good"

    def test_empty(self):
        assert normalize("") == ""

    def test_punctuation_and_digits_become_spaces(self):
        assert normalize("It's 5-star!!") == "it s star"

    def test_accents_dropped_not_transliterated(self):
        assert normalize("café") == "caf"
        assert normalize("Ärger") == "rger"

    def test_whitespace_collapse_and_strip(self):
        assert normalize("  a \t b\n\nc  ") == "a b c"

    @settings(max_examples=300, derandomize=True)
    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize(text)
        assert normalize(once) == once

    @settings(max_examples=300, derandomize=True)
    @given(st.text(max_size=80))
    def test_matches_character_class_oracle(self, text):
        assert normalize(text) == char_class_normalize(text)

    @settings(max_examples=200, derandomize=True)
    @given(st.text(max_size=80))
    def test_tokens_stay_inside_char_vocab(self, text):
        for word in tokenize(normalize(text)).words:
            assert word
            assert all(ch in CHAR_VOCAB for ch in word)


class TestTokenize:
    def test_plain_split(self):
        assert tokenize("the cat sat").words == ("the", "cat", "sat")

    def test_single(self):
        assert tokenize("a").words == ("a",)

    def test_composes_with_normalize(self):
        assert tokenize(normalize("It's 5-star!!")).words == ("it", "s", "star")

    def test_empty_gives_zero_words(self):
        assert tokenize("").words == ()

    def test_source_id_carried(self):
        assert tokenize("a b", source_id="row:3").source_id == "row:3"


def _corpus(*texts):
    return [tokenize(normalize(t)) for t in texts]


class TestWordVocab:
    def test_frequency_then_lexicographic_ties(self):
        vocab = build_word_vocab(_corpus("a b", "a c"), 3)
        # "a" twice; "b" and "c" tie at one, "b" wins lexicographically
        assert vocab.words == ["a", "b", UNK_TOKEN]
        assert vocab.unk_index == 2

    def test_single_word(self):
        vocab = build_word_vocab(_corpus("x"), 2)
        assert vocab.words == ["x", UNK_TOKEN]

    def test_empty_corpus_rejected(self):
        with pytest.raises(VocabularyError):
            build_word_vocab([], 2)
        with pytest.raises(VocabularyError):
            build_word_vocab(_corpus("", "  !!"), 2)

    def test_cap_too_small(self):
        with pytest.raises(VocabularyError):
            build_word_vocab(_corpus("a"), 1)

    def test_index_bijection_and_unk_fallback(self):
        vocab = build_word_vocab(_corpus("a b c a b a"), 3)
        assert [vocab.index(w) for w in vocab.words] == list(range(len(vocab)))
        assert vocab.index("zzz") == vocab.unk_index

    def test_permutation_invariant(self):
        texts = ["a b c", "d a", "b b e", "c a d"]
        v1 = build_word_vocab(_corpus(*texts), 4)
        v2 = build_word_vocab(_corpus(*reversed(texts)), 4)
        assert v1.words == v2.words
        assert v1.counts == v2.counts

    def test_dump_format(self):
        vocab = build_word_vocab(_corpus("a b", "a c"), 3)
        lines = dump_word_vocab(vocab).splitlines()
        assert lines[0] == "0\ta\t2"
        assert lines[1] == "1\tb\t1"
        # the unk line carries the mass of everything that fell off the cap
        assert lines[2] == f"2\t{UNK_TOKEN}\t1"


class TestCharVocab:
    def test_inventory(self):
        assert len(CHAR_VOCAB) == 26
        assert CHAR_VOCAB.chars[0] == "a"
        assert CHAR_VOCAB.chars[-1] == "z"
        assert " " not in CHAR_VOCAB

    def test_bijection(self):
        assert sorted(CHAR_VOCAB.index_of.values()) == list(range(26))

    def test_unknown_symbol(self):
        with pytest.raises(VocabularyError):
            CHAR_VOCAB.index("3")
