"""Shared fixtures: toy backends, the demo task, and fuzz helpers."""

from __future__ import annotations

import random

import pytest
from hypothesis import settings

from lexsimp import SimplificationTask, ToyBackend, demo_lexicon
from lexsimp.backends.toy import ToyLexicon

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

DEMO_TEXT = "he attempted to evade the issue"
DEMO_WORDS = DEMO_TEXT.split()

# Distinct 6-character prefixes, so the subword split rule stays unambiguous.
FUZZ_WORD_POOL = (
    "amber breeze copper dawn eagle fathom grove hollow indigo jasper "
    "kestrel lumen meadow nectar onyx pine quartz raven slate tundra "
    "umber velvet willow xenon yonder zephyr"
).split()


@pytest.fixture
def word_backend() -> ToyBackend:
    return ToyBackend(demo_lexicon())


@pytest.fixture
def subword_backend() -> ToyBackend:
    return ToyBackend(demo_lexicon(), subword=True)


@pytest.fixture
def demo_task() -> SimplificationTask:
    start = DEMO_TEXT.index("evade")
    return SimplificationTask(DEMO_TEXT, (start, start + len("evade")), "toy")


def span_of(text: str, word: str) -> tuple[int, int]:
    start = text.index(word)
    return start, start + len(word)


def random_lexicon(rng: random.Random, n_source: int = 4) -> tuple[ToyLexicon, list[str]]:
    """Seeded random lexicon plus a sentence of its source words.

    Every row contains the source word itself (so original suffixes always
    have positive probability) and 1-3 alternatives with weights drawn
    from a small grid; a few bigram exceptions reweight random pairs.
    """
    words = rng.sample(FUZZ_WORD_POOL, min(len(FUZZ_WORD_POOL), n_source + 6))
    source_words = words[:n_source]
    alternatives = words[n_source:]
    rows: dict[str, dict[str, float]] = {}
    for src in source_words:
        row = {src: rng.choice([0.1, 0.2, 0.3, 0.5, 1.0])}
        for alt in rng.sample(alternatives, rng.randint(1, 3)):
            row[alt] = rng.choice([0.05, 0.1, 0.25, 0.4, 0.6])
        rows[src] = row
    vocabulary = sorted({w for row in rows.values() for w in row} | set(rows))
    bigram: dict[tuple[str, str], float] = {}
    for _ in range(rng.randint(0, 4)):
        pair = (rng.choice(vocabulary), rng.choice(vocabulary))
        bigram[pair] = rng.choice([0.05, 0.2, 0.5, 2.0, 5.0])
    return ToyLexicon(rows=rows, bigram=bigram), source_words
