"""Fuzzy name correspondence between design element names and code names.

Names on both sides are concatenations of words (camel case in code,
underscores in diagrams). We split into lower-case words, compare words
with a length-scaled Levenshtein tolerance, and declare two names
corresponding when enough words pair up.
"""

from __future__ import annotations

import re

_SPLIT_RE = re.compile(
    r"[_\-.\s]+"            # explicit delimiters
    r"|(?<=[a-z])(?=[A-Z])"  # lower -> upper camel boundary
    r"|(?<=[0-9])(?=[A-Za-z])"
    r"|(?<=[A-Za-z])(?=[0-9])"
)


def split_name(name: str) -> list[str]:
    """'getPassword' -> ['get', 'password']; 'Get_Passwords' -> ['get', 'passwords']."""
    return [w.lower() for w in _SPLIT_RE.split(name) if w]


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _tolerance(length: int) -> int:
    # Short words must match exactly; allow one edit for medium words and
    # two for long ones ("password" vs "passwords" is one addition).
    if length <= 4:
        return 0
    if length <= 8:
        return 1
    return 2


def words_equivalent(w1: str, w2: str) -> bool:
    return levenshtein(w1, w2) <= _tolerance(max(len(w1), len(w2)))


def _pair_words(words1: list[str], words2: list[str]) -> list[tuple[str, str]]:
    """Greedy maximum pairing under words_equivalent, ties broken by word order."""
    pairs: list[tuple[str, str]] = []
    used: set[int] = set()
    for w1 in words1:
        for j, w2 in enumerate(words2):
            if j not in used and words_equivalent(w1, w2):
                pairs.append((w1, w2))
                used.add(j)
                break
    return pairs


def names_correspond(n1: str, n2: str) -> float | None:
    """Match quality in (0, 1] if the names correspond, else None.

    The paired words must cover at least half of the longer word list;
    this keeps one shared generic word ("get") from gluing a long process
    name to every accessor in the code base.
    """
    words1, words2 = split_name(n1), split_name(n2)
    if not words1 or not words2:
        return None
    pairs = _pair_words(words1, words2)
    m = len(pairs)
    if m < max(len(words1), len(words2)) / 2:
        return None
    total = len(words1) + len(words2)
    norm_distances = [
        levenshtein(a, b) / max(len(a), len(b)) for a, b in pairs
    ]
    avg_distance = sum(norm_distances) / m
    return (2 * m / total) * (1 - avg_distance)
