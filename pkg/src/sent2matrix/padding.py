"""Word- and sentence-level padding layouts, including the serpentine order.

Three layouts are supported:

* zero    - characters centered in the m columns, zero columns at both ends
            (extra padding goes right when the split is uneven);
* cyclic  - characters repeated until all m columns are filled;
* serpentine - a sentence-level word order in which every interior word
            appears twice, its reversed copy immediately before its normal
            copy, so a stride-2 scan along the word axis always pairs a word
            with its reversed successor. Words inside a serpentine sequence
            are always cyclic-padded.
"""
from __future__ import annotations

from dataclasses import dataclass

#: Marker for a padding column (no character) in a word layout.
PAD = None

STRATEGIES = ("zero", "cyclic", "serpentine")


class PaddingError(ValueError):
    """Raised on layout preconditions: bad lengths, overfull slice lists."""


@dataclass(frozen=True)
class PaddedWordLayout:
    """Length-m column plan for one word: each entry a character or PAD."""

    columns: tuple[str | None, ...]
    strategy: str


@dataclass(frozen=True)
class SerpentineSequence:
    """Ordered word slices: (word, reversed flag), normal words at even indices."""

    slices: tuple[tuple[str, bool], ...]

    def streams(self) -> tuple[str, ...]:
        """Character stream of each slice (reversal applied)."""
        return tuple(w[::-1] if rev else w for w, rev in self.slices)


def _check_word(word: str, m: int) -> None:
    if not 1 <= len(word) <= m:
        raise PaddingError(f"word length must be in 1..{m}, got {len(word)} ({word!r})")


def pad_zero(word: str, m: int) -> PaddedWordLayout:
    """Center the word; left pad count is floor((m - len) / 2)."""
    _check_word(word, m)
    left = (m - len(word)) // 2
    right = m - len(word) - left
    return PaddedWordLayout((PAD,) * left + tuple(word) + (PAD,) * right, "zero")


def pad_cyclic(word: str, m: int) -> PaddedWordLayout:
    """Repeat the word's characters until all m columns are filled."""
    _check_word(word, m)
    return PaddedWordLayout(tuple(word[j % len(word)] for j in range(m)), "cyclic")


def serpentine_sequence(words: list[str] | tuple[str, ...]) -> SerpentineSequence:
    """Expand a word sequence into serpentine order.

    For words x1..xk (k >= 2) the result is
    x1, rev(x2), x2, rev(x3), x3, ..., rev(x[k-1]), x[k-1], rev(xk)
    with length 2(k-1). A single word is emitted unreversed (the general
    formula would yield an empty sequence, and a one-word sentence must
    still produce a nonempty tensor).
    """
    if not words:
        raise PaddingError("serpentine order needs at least one word")
    if len(words) == 1:
        return SerpentineSequence(((words[0], False),))
    slices: list[tuple[str, bool]] = [(words[0], False)]
    last = len(words) - 1
    for i in range(1, len(words)):
        slices.append((words[i], True))
        if i != last:
            slices.append((words[i], False))
    return SerpentineSequence(tuple(slices))


def sentence_pad_counts(count: int, target: int, strategy: str) -> tuple[int, int]:
    """Zero-slice counts (left, right) needed to center `count` slices.

    Left gets floor((target - count) / 2); under the serpentine strategy the
    left count is then rounded down to the nearest even number so every
    normal-order word stays at an even slice index (the stride-2 windows of
    the first convolution must keep covering (normal, reversed-successor)
    pairs).
    """
    if count > target:
        raise PaddingError(f"{count} slices exceed the target of {target}")
    left = (target - count) // 2
    if strategy == "serpentine":
        left -= left % 2
    return left, target - count - left


def pad_sentence_slices(slices: list, target: int, strategy: str) -> list:
    """Center a slice list among PAD entries (None) up to `target` entries."""
    left, right = sentence_pad_counts(len(slices), target, strategy)
    return [PAD] * left + list(slices) + [PAD] * right


def fold_render(words: list[str] | tuple[str, ...], m: int) -> str:
    """Render the serpentine fold of a sentence as an ASCII grid.

    One row per serpentine slice, each showing exactly the m characters the
    slice encodes (cyclic-padded, reversed slices already reversed). Reading
    the rows alternately left-to-right and right-to-left walks the original
    character stream with a 180-degree turn at every word boundary.
    """
    trimmed = [w[:m] for w in words if w]
    if not trimmed:
        return ""
    streams = serpentine_sequence(trimmed).streams()
    return "\n".join("".join(pad_cyclic(s, m).columns) for s in streams)
