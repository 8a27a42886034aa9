"""Text normalization, tokenization, and vocabularies.

The whole stack works over a 26-letter alphabet: normalization lower-cases
ASCII letters and turns every other symbol (digits, punctuation, accented
and non-Latin characters) into a space, so downstream encoders never see
anything outside 'a'..'z'.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

UNK_TOKEN = "<unk>"

# A-Z -> a-z; everything not in a-z afterwards becomes a single space.
_LOWER_TABLE = {c: c + 32 for c in range(ord("A"), ord("Z") + 1)}
_NON_ALPHA_RE = re.compile(r"[^a-z]+")


class VocabularyError(ValueError):
    """Raised when a vocabulary cannot be built or is used inconsistently."""


def normalize(text: str) -> str:
    """Reduce arbitrary text to lower-case a-z words separated by single spaces.

    Upper-case ASCII letters are lower-cased in place; any other symbol is
    replaced by a space (no transliteration of accented letters), runs of
    spaces collapse, and the ends are stripped. Total function: the empty
    string is a valid result.
    """
    return _NON_ALPHA_RE.sub(" ", text.translate(_LOWER_TABLE)).strip()


@dataclass(frozen=True)
class TokenizedSentence:
    """Ordered words of one normalized sentence plus a provenance tag."""

    words: tuple[str, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.words)


def tokenize(normalized: str, source_id: str = "") -> TokenizedSentence:
    """Split a normalized string into its maximal space-free runs."""
    return TokenizedSentence(tuple(normalized.split()), source_id)


class CharVocab:
    """The fixed character inventory: exactly 'a'..'z', in order.

    The word separator is deliberately not part of the inventory; word
    boundaries are carried by the tensor structure instead.
    """

    def __init__(self) -> None:
        self.chars: tuple[str, ...] = tuple(chr(c) for c in range(ord("a"), ord("z") + 1))
        self.index_of: dict[str, int] = {ch: i for i, ch in enumerate(self.chars)}

    def __len__(self) -> int:
        return len(self.chars)

    def __contains__(self, ch: str) -> bool:
        return ch in self.index_of

    def index(self, ch: str) -> int:
        try:
            return self.index_of[ch]
        except KeyError:
            raise VocabularyError(f"character {ch!r} is not in the a-z vocabulary") from None


#: Shared immutable instance; the inventory never varies.
CHAR_VOCAB = CharVocab()


@dataclass
class WordVocab:
    """Corpus-built word inventory with a reserved unknown-word slot.

    Words are ordered by descending corpus frequency, ties broken
    lexicographically, so rebuilding from the same corpus (in any order)
    yields the same vocabulary. The unknown-word token sits at the last
    index.
    """

    words: list[str]
    index_of: dict[str, int]
    size_cap: int
    unk_index: int
    counts: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.words)

    def index(self, word: str) -> int:
        return self.index_of.get(word, self.unk_index)


def build_word_vocab(corpus: Iterable[TokenizedSentence], size_cap: int) -> WordVocab:
    """Build a WordVocab from the top size_cap-1 words of a corpus plus unk.

    Raises VocabularyError when the corpus contains no words at all or the
    cap leaves no room for both a word and the unk entry.
    """
    if size_cap < 2:
        raise VocabularyError(f"size_cap must be >= 2, got {size_cap}")
    freq: Counter[str] = Counter()
    for sent in corpus:
        freq.update(sent.words)
    if not freq:
        raise VocabularyError("cannot build a word vocabulary from an empty corpus")
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = ranked[: size_cap - 1]
    dropped = ranked[size_cap - 1 :]
    words = [w for w, _ in kept] + [UNK_TOKEN]
    counts = dict(kept)
    counts[UNK_TOKEN] = sum(c for _, c in dropped)
    return WordVocab(
        words=words,
        index_of={w: i for i, w in enumerate(words)},
        size_cap=size_cap,
        unk_index=len(words) - 1,
        counts=counts,
    )


def dump_word_vocab(vocab: WordVocab) -> str:
    """Render a vocabulary as 'index<TAB>word<TAB>count' lines."""
    lines = [f"{i}\t{w}\t{vocab.counts.get(w, 0)}" for i, w in enumerate(vocab.words)]
    return "\n".join(lines) + "\n"
