"""Sequence-similarity score reported during evaluation.

The score is a coefficient of determination over token-index vectors:
both sequences are index-encoded, the shorter is right-padded with PAD
to the longer length, residuals are element-wise index differences, and
the total sum of squares is the variance of the expected vector around
its own mean.  Equal sequences score exactly 1.0; the score has no
lower bound.  This is a similarity heuristic, not a regression fit: the
absolute value depends on the vocabulary's index layout, but 1.0 is
reached iff the sequences match exactly, which is what evaluation
tracks.
"""

from __future__ import annotations

from .vocab import PAD, Vocabulary, index_tokens


class DegenerateExpected(Exception):
    """Expected sequence has zero index variance; R² is undefined for it."""

    def __init__(self, exact_match: bool):
        self.exact_match = exact_match
        super().__init__(
            "expected sequence has zero variance; "
            f"falling back to exact match = {exact_match}"
        )


def r_squared(
    predicted: list[str] | tuple[str, ...],
    expected: list[str] | tuple[str, ...],
    vocab: Vocabulary,
) -> float:
    if not expected:
        raise ValueError("expected sequence must be non-empty")
    p = index_tokens(list(predicted), vocab)
    e = index_tokens(list(expected), vocab)
    width = max(len(p), len(e))
    p = p + [PAD] * (width - len(p))
    e = e + [PAD] * (width - len(e))

    mean = sum(e) / width
    ss_tot = sum((x - mean) ** 2 for x in e)
    if ss_tot == 0.0:
        raise DegenerateExpected(exact_match=(p == e))
    ss_res = sum((a - b) ** 2 for a, b in zip(p, e))
    return 1.0 - ss_res / ss_tot
