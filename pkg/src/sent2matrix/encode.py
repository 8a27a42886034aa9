"""Encoders producing the three sentence representations.

* word-level: one-hot word vectors projected through a learned matrix,
  stacked into a d x n matrix;
* character-level baseline: the sentence as one flat character sequence
  (with an explicit separator symbol) one-hot encoded into a 27 x m_s matrix;
* word-matrix tensors: each word becomes a 26 x m one-hot character matrix
  and a sentence becomes the (slices, m, channels) stack of those matrices,
  padded by one of the zero/cyclic/serpentine layouts, optionally with
  one-hot column-position channels appended.

All encoders are pure and total over tokenizer output: they never raise on
any normalized sentence, including the empty one (which encodes to an
all-zero tensor).
"""
from __future__ import annotations

from typing import BinaryIO, Iterable

import numpy as np

from .padding import (
    PaddingError,
    pad_cyclic,
    pad_sentence_slices,
    pad_zero,
    serpentine_sequence,
)
from .text import CHAR_VOCAB, TokenizedSentence, VocabularyError, WordVocab

#: Channel count of the word-matrix representation (the a-z inventory).
CHAR_DIM = len(CHAR_VOCAB)
#: The character-level baseline additionally encodes the word separator.
SEPARATOR_INDEX = CHAR_DIM
BASELINE_CHAR_DIM = CHAR_DIM + 1

_DUMP_MAGIC = "s2m1"


class EncodingError(ValueError):
    """Raised on encoder precondition violations (unknown symbol, bad dims)."""


def word_one_hot(word: str, vocab: WordVocab) -> np.ndarray:
    """One-hot vector over the word vocabulary; unknown words hit the unk slot."""
    vec = np.zeros(len(vocab))
    vec[vocab.index(word)] = 1.0
    return vec


def word_embed(u: np.ndarray, embedding: np.ndarray) -> np.ndarray:
    """Project a one-hot word vector through the embedding matrix (M @ u)."""
    embedding = np.asarray(embedding, dtype=np.float64)
    if u.shape[0] != embedding.shape[1]:
        raise EncodingError(
            f"one-hot length {u.shape[0]} does not match embedding columns {embedding.shape[1]}"
        )
    return embedding @ u


def sentence_word_matrix(
    sent: TokenizedSentence, vocab: WordVocab, embedding: np.ndarray, n: int
) -> np.ndarray:
    """Embedded words as columns of a d x n matrix, zero-padded or trimmed to n."""
    if n < 1:
        raise EncodingError(f"sentence word capacity must be >= 1, got {n}")
    embedding = np.asarray(embedding, dtype=np.float64)
    out = np.zeros((embedding.shape[0], n))
    for j, word in enumerate(sent.words[:n]):
        out[:, j] = embedding[:, vocab.index(word)]
    return out


def char_one_hot(ch: str, vocab=CHAR_VOCAB) -> np.ndarray:
    """One-hot vector of a single character over the a-z inventory."""
    vec = np.zeros(len(vocab))
    try:
        vec[vocab.index(ch)] = 1.0
    except VocabularyError as exc:
        raise EncodingError(str(exc)) from None
    return vec


def sentence_char_matrix(sent: TokenizedSentence, m_s: int) -> np.ndarray:
    """Character-level baseline matrix, 27 x m_s (a-z plus separator).

    Columns hold the characters of the words joined by single separator
    symbols, zero-padded or trimmed to m_s columns.
    """
    if m_s < 1:
        raise EncodingError(f"sentence character capacity must be >= 1, got {m_s}")
    out = np.zeros((BASELINE_CHAR_DIM, m_s))
    col = 0
    for w, word in enumerate(sent.words):
        if w > 0:
            if col >= m_s:
                break
            out[SEPARATOR_INDEX, col] = 1.0
            col += 1
        for ch in word:
            if col >= m_s:
                break
            out[CHAR_VOCAB.index(ch), col] = 1.0
            col += 1
    return out


def word_matrix(word: str, m: int, strategy: str) -> np.ndarray:
    """26 x m one-hot character matrix for one word under zero or cyclic padding.

    Words longer than m keep their first m characters. Serpentine is a
    sentence-level order; its per-word padding is always cyclic.
    """
    if strategy == "zero":
        layout = pad_zero(word[:m], m)
    elif strategy == "cyclic":
        layout = pad_cyclic(word[:m], m)
    else:
        raise PaddingError(f"word-level padding is 'zero' or 'cyclic', got {strategy!r}")
    out = np.zeros((CHAR_DIM, m))
    for j, ch in enumerate(layout.columns):
        if ch is not None:
            out[CHAR_VOCAB.index(ch), j] = 1.0
    return out


def slice_count(n: int, strategy: str) -> int:
    """Number of word slices a batch tensor holds for word capacity n.

    Serpentine expands to 2(n-1) slices; the degenerate n=1 still gets one
    slice. Zero and cyclic strategies keep one slice per word.
    """
    if strategy == "serpentine":
        return max(1, 2 * (n - 1))
    return n


def _streams(sent: TokenizedSentence, n: int, m: int, strategy: str) -> list[str]:
    """Per-slice character streams after trimming, ordering, and reversal."""
    words = [w[:m] for w in sent.words[:n]]
    if not words:
        return []
    if strategy == "serpentine":
        return list(serpentine_sequence(words).streams())
    return words


def sentence_tensor(
    sent: TokenizedSentence,
    n: int,
    m: int,
    strategy: str,
    use_position: bool = False,
) -> np.ndarray:
    """Encode one sentence as a (slices, m, channels) tensor.

    Slice s, column j holds the one-hot vector of the character at padded
    column j of word slice s; sentence-level zero slices center the words
    (serpentine keeps normal-order words at even indices). With
    use_position, column-position one-hots are appended as extra channels.
    """
    if n < 1 or m < 1:
        raise EncodingError(f"capacities must be >= 1, got n={n}, m={m}")
    word_pad = "cyclic" if strategy == "serpentine" else strategy
    slices = [word_matrix(s, m, word_pad) for s in _streams(sent, n, m, strategy)]
    padded = pad_sentence_slices(slices, slice_count(n, strategy), strategy)
    zero = np.zeros((CHAR_DIM, m))
    tensor = np.stack([(zero if s is None else s).T for s in padded])
    if use_position:
        tensor = position_channels(tensor, m)
    return tensor


def position_channels(tensor: np.ndarray, m: int) -> np.ndarray:
    """Append one-hot column-position channels to a plain (slices, m, 26) tensor.

    Position channel j lights up at column j wherever the column actually
    holds a character; pure zero-padding columns stay all-zero.
    """
    if tensor.ndim != 3 or tensor.shape[2] != CHAR_DIM:
        raise EncodingError(
            f"expected a (slices, m, {CHAR_DIM}) tensor, got shape {tensor.shape}"
        )
    if tensor.shape[1] != m:
        raise EncodingError(f"tensor has {tensor.shape[1]} columns, expected m={m}")
    occupied = tensor.sum(axis=2) > 0.0
    pos = np.zeros(tensor.shape[:2] + (m,))
    idx = np.nonzero(occupied)
    pos[idx[0], idx[1], idx[1]] = 1.0
    return np.concatenate([tensor, pos], axis=2)


def encode_batch(
    sents: Iterable[TokenizedSentence],
    n: int,
    m: int,
    strategy: str,
    use_position: bool = False,
) -> np.ndarray:
    """Stack sentence tensors into one (batch, slices, m, channels) array."""
    arrs = [sentence_tensor(s, n, m, strategy, use_position) for s in sents]
    if not arrs:
        channels = CHAR_DIM + m if use_position else CHAR_DIM
        return np.zeros((0, slice_count(n, strategy), m, channels))
    return np.stack(arrs)


def encode_baseline_batch(sents: Iterable[TokenizedSentence], m_s: int) -> np.ndarray:
    """Stack character-level baseline matrices into a (batch, 27, m_s) array."""
    arrs = [sentence_char_matrix(s, m_s) for s in sents]
    if not arrs:
        return np.zeros((0, BASELINE_CHAR_DIM, m_s))
    return np.stack(arrs)


def write_tensor_dump(f: BinaryIO, batch: np.ndarray) -> None:
    """Write an encoded batch as the versioned binary dump.

    Header line 's2m1 <slices> <m> <channels> <count>' followed by
    little-endian float64 values, slice-major, column-major within each
    slice, channel index innermost.
    """
    if batch.ndim != 4:
        raise EncodingError(f"expected a (batch, slices, m, channels) array, got {batch.shape}")
    count, n_slices, m, channels = batch.shape
    f.write(f"{_DUMP_MAGIC} {n_slices} {m} {channels} {count}\n".encode("ascii"))
    f.write(np.ascontiguousarray(batch, dtype="<f8").tobytes())


def read_tensor_dump(f: BinaryIO) -> np.ndarray:
    """Read a batch written by write_tensor_dump."""
    header = f.readline().decode("ascii").split()
    if len(header) != 5 or header[0] != _DUMP_MAGIC:
        raise EncodingError(f"not a {_DUMP_MAGIC} tensor dump")
    n_slices, m, channels, count = (int(x) for x in header[1:])
    data = np.frombuffer(f.read(count * n_slices * m * channels * 8), dtype="<f8")
    if data.size != count * n_slices * m * channels:
        raise EncodingError("tensor dump is truncated")
    return data.reshape(count, n_slices, m, channels).astype(np.float64)
