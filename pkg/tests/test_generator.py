"""Generator behavior against the independent exhaustive enumerator."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from lexsimp import (
    GeneratorConfig,
    SimplificationTask,
    ToyBackend,
    build_decoder_prefix,
    complete_word,
    demo_lexicon,
    errors,
    first_token_candidates,
    generate_candidates,
)
from lexsimp.backends.base import TokenDistribution
from lexsimp.generator import filter_word_initial, match_casing

from conftest import DEMO_TEXT, random_lexicon, span_of
from oracles import enumerate_candidates, eq1_ordering


class TestBuildDecoderPrefix:
    def test_demo_sentence_prefix_and_suffix(self, word_backend):
        task = SimplificationTask("He attempted to evade the issue", span_of(DEMO_TEXT, "evade"), "toy")
        prefix, suffix = build_decoder_prefix(task, word_backend)
        start = word_backend.model_info().decoder_start_ids("toy")
        assert prefix.ids[: len(start)] == start
        assert word_backend.detokenize(prefix.ids[len(start):]) == "he attempted to"
        assert prefix.prefix_word_count == 3
        assert suffix == ["the", "issue"]

    def test_sentence_initial_complex_word(self, word_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "he"), "toy")
        prefix, suffix = build_decoder_prefix(task, word_backend)
        assert prefix.ids == word_backend.model_info().decoder_start_ids("toy")
        assert prefix.prefix_word_count == 0
        assert suffix == DEMO_TEXT.split()[1:]

    def test_sentence_final_complex_word(self, word_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "issue"), "toy")
        _, suffix = build_decoder_prefix(task, word_backend)
        assert suffix == []

    def test_mid_token_span_raises(self, subword_backend):
        # span starts at "ted", the word-internal piece of "attempted"
        start = DEMO_TEXT.index("attempted") + 7
        task = SimplificationTask.__new__(SimplificationTask)
        object.__setattr__(task, "text", DEMO_TEXT)
        object.__setattr__(task, "complex_span", (start, start + 2))
        object.__setattr__(task, "lang", "toy")
        with pytest.raises(errors.MisalignedSpan):
            build_decoder_prefix(task, subword_backend)

    def test_task_validation(self):
        with pytest.raises(ValueError):
            SimplificationTask(DEMO_TEXT, (0, 0), "toy")
        with pytest.raises(ValueError):
            SimplificationTask(DEMO_TEXT, (0, 5), "toy")  # crosses a space
        with pytest.raises(ValueError):
            SimplificationTask(DEMO_TEXT, (17, 21), "toy")  # starts mid-word


class TestFirstTokenCandidates:
    def test_demo_row_read_out(self, word_backend, demo_task):
        prefix, _ = build_decoder_prefix(demo_task, word_backend)
        enc = word_backend.encode_source(DEMO_TEXT, "toy", "toy")
        dist = first_token_candidates(enc, prefix, 10, word_backend)
        got = [(word_backend.token_text(t), lp) for t, lp in dist.entries]
        assert [w for w, _ in got] == ["evade", "avoid", "get", "dodge"]
        for (_, lp), p in zip(got, [0.4, 0.3, 0.2, 0.1]):
            assert lp == pytest.approx(math.log(p), abs=1e-12)

    def test_pool_nesting(self, word_backend, demo_task):
        prefix, _ = build_decoder_prefix(demo_task, word_backend)
        enc = word_backend.encode_source(DEMO_TEXT, "toy", "toy")
        small = first_token_candidates(enc, prefix, 2, word_backend)
        large = first_token_candidates(enc, prefix, 4, word_backend)
        assert large.entries[: len(small.entries)] == small.entries

    def test_word_internal_pieces_filtered(self, subword_backend):
        # hand-built distribution over the split-rule vocabulary
        marked = subword_backend.word_ids("attempted")[0]
        internal = subword_backend.word_ids("attempted")[1]
        eos = subword_backend.model_info().special_tokens.eos
        dist = TokenDistribution(
            entries=((marked, math.log(0.5)), (internal, math.log(0.3)), (eos, math.log(0.2))),
            truncated=True,
        )
        kept = filter_word_initial(dist, subword_backend)
        assert [tid for tid, _ in kept.entries] == [marked]


class TestCompleteWord:
    def test_single_token_word(self, word_backend, demo_task):
        prefix, _ = build_decoder_prefix(demo_task, word_backend)
        enc = word_backend.encode_source(DEMO_TEXT, "toy", "toy")
        avoid = word_backend.word_ids("avoid")[0]
        path, surface, own = complete_word(enc, prefix, avoid, word_backend)
        assert path == (avoid,)
        assert surface == "avoid"
        assert own == 0.0

    def test_split_word_completion(self, subword_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "attempted"), "toy")
        prefix, _ = build_decoder_prefix(task, subword_backend)
        enc = subword_backend.encode_source(DEMO_TEXT, "toy", "toy")
        first = subword_backend.word_ids("attempted")[0]
        path, surface, own = complete_word(enc, prefix, first, subword_backend)
        assert [subword_backend.piece(t) for t in path] == ["▁attemp", "ted"]
        assert surface == "attempted"
        assert own == 0.0  # continuation piece has probability 1

    def test_each_appended_token_is_argmax(self, subword_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "attempted"), "toy")
        prefix, _ = build_decoder_prefix(task, subword_backend)
        enc = subword_backend.encode_source(DEMO_TEXT, "toy", "toy")
        first = subword_backend.word_ids("attempted")[0]
        path, _, _ = complete_word(enc, prefix, first, subword_backend)
        for i in range(1, len(path)):
            step = subword_backend.next_token_logprobs(enc, tuple(prefix.ids) + path[:i], 1)
            assert step.entries[0][0] == path[i]

    def test_budget_exhaustion_raises(self, subword_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "attempted"), "toy")
        prefix, _ = build_decoder_prefix(task, subword_backend)
        enc = subword_backend.encode_source(DEMO_TEXT, "toy", "toy")
        first = subword_backend.word_ids("attempted")[0]
        with pytest.raises(errors.WordTooLong):
            complete_word(enc, prefix, first, subword_backend, max_word_subtokens=1)


class TestGenerateCandidates:
    def test_eq1_only_ordering(self, word_backend, demo_task):
        cands = generate_candidates(demo_task, word_backend, GeneratorConfig(k=3, lookahead_words=0))
        assert [c.surface for c in cands] == ["avoid", "get", "dodge"]
        for c, p in zip(cands, [0.3, 0.2, 0.1]):
            assert c.total_score == pytest.approx(math.log(p), abs=1e-12)
            assert c.lookahead_logprob == 0.0

    def test_lookahead_demotes_suffix_incompatible_candidate(self, word_backend, demo_task):
        cands = generate_candidates(demo_task, word_backend, GeneratorConfig(k=3, lookahead_words=2))
        assert [c.surface for c in cands] == ["avoid", "dodge", "get"]
        get = cands[2]
        assert get.lookahead_logprob == pytest.approx(
            math.log(0.045 / 0.145) + math.log(0.6), abs=1e-12
        )
        for c in cands:
            assert c.total_score == pytest.approx(
                c.first_token_logprob + c.own_continuation_logprob + c.lookahead_logprob,
                abs=1e-9,
            )

    def test_original_word_never_returned(self, word_backend, demo_task):
        for L in range(0, 4):
            cands = generate_candidates(demo_task, word_backend, GeneratorConfig(k=10, lookahead_words=L))
            assert all(c.surface.casefold() != "evade" for c in cands)

    def test_casing_matches_complex_word(self, word_backend):
        text = "He attempted to Evade the issue"
        task = SimplificationTask(text, span_of(text, "Evade"), "toy")
        cands = generate_candidates(task, word_backend, GeneratorConfig(k=3, lookahead_words=0))
        assert [c.surface for c in cands] == ["Avoid", "Get", "Dodge"]

    def test_empty_suffix_forces_zero_lookahead(self, word_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "issue"), "toy")
        cands = generate_candidates(task, word_backend, GeneratorConfig(k=5, lookahead_words=3))
        assert cands and all(c.lookahead_logprob == 0.0 for c in cands)

    def test_all_filtered_raises_no_candidates(self, word_backend):
        task = SimplificationTask(DEMO_TEXT, span_of(DEMO_TEXT, "he"), "toy")
        with pytest.raises(errors.NoCandidates):
            generate_candidates(task, word_backend, GeneratorConfig(k=5))

    def test_matches_exhaustive_oracle_on_demo(self, word_backend, demo_task):
        for L in (0, 1, 2, 3):
            got = generate_candidates(demo_task, word_backend, GeneratorConfig(k=3, lookahead_words=L))
            want = enumerate_candidates(demo_lexicon(), DEMO_TEXT.split(), 3, L, 3)
            assert [c.surface for c in got] == [w for w, _, _, _ in want]
            for c, (_, eq1, look, total) in zip(got, want):
                assert c.first_token_logprob + c.own_continuation_logprob == pytest.approx(eq1, abs=1e-9)
                assert c.lookahead_logprob == pytest.approx(look, abs=1e-9)
                assert c.total_score == pytest.approx(total, abs=1e-9)

    @given(st.integers(0, 10**9))
    @settings(max_examples=60)
    def test_matches_exhaustive_oracle_fuzzed(self, seed):
        rng = random.Random(seed)
        lexicon, source_words = random_lexicon(rng)
        backend = ToyBackend(lexicon, subword=rng.random() < 0.5)
        text = " ".join(source_words)
        idx = rng.randrange(len(source_words))
        L = rng.randint(0, 3)
        k = rng.randint(1, 5)
        task = SimplificationTask(text, span_of(text, source_words[idx]), "toy")
        want = enumerate_candidates(lexicon, source_words, idx, L, k)
        try:
            got = generate_candidates(task, backend, GeneratorConfig(k=k, lookahead_words=L))
        except errors.NoCandidates:
            got = []
        assert [c.surface for c in got] == [w for w, _, _, _ in want]
        for c, (_, _, _, total) in zip(got, want):
            assert c.total_score == pytest.approx(total, abs=1e-9)

    @given(st.integers(0, 10**9))
    @settings(max_examples=60)
    def test_zero_lookahead_reduces_to_eq1_ordering(self, seed):
        rng = random.Random(seed)
        lexicon, source_words = random_lexicon(rng)
        backend = ToyBackend(lexicon)
        text = " ".join(source_words)
        idx = rng.randrange(len(source_words))
        task = SimplificationTask(text, span_of(text, source_words[idx]), "toy")
        try:
            got = generate_candidates(task, backend, GeneratorConfig(k=10, lookahead_words=0))
        except errors.NoCandidates:
            got = []
        assert [c.surface for c in got] == eq1_ordering(lexicon, source_words, idx, 10)

    @given(st.integers(0, 10**9))
    @settings(max_examples=40)
    def test_top_k_nesting(self, seed):
        rng = random.Random(seed)
        lexicon, source_words = random_lexicon(rng)
        backend = ToyBackend(lexicon)
        text = " ".join(source_words)
        idx = rng.randrange(len(source_words))
        task = SimplificationTask(text, span_of(text, source_words[idx]), "toy")
        try:
            small = generate_candidates(task, backend, GeneratorConfig(k=2, lookahead_words=2))
            large = generate_candidates(task, backend, GeneratorConfig(k=4, lookahead_words=2))
        except errors.NoCandidates:
            return
        assert [c.surface for c in large[: len(small)]] == [c.surface for c in small]

    def test_deterministic_across_calls(self, word_backend, demo_task):
        cfg = GeneratorConfig(k=3, lookahead_words=2)
        first = generate_candidates(demo_task, word_backend, cfg)
        second = generate_candidates(demo_task, word_backend, cfg)
        assert first == second

    def test_dedup_keeps_max_score_path(self):
        # "Avoid" and "avoid" are distinct vocabulary words whose surfaces
        # collapse after casing normalization; the higher-probability path wins
        from lexsimp import ToyLexicon

        lexicon = ToyLexicon(
            rows={
                "he": {"he": 1.0},
                "evade": {"evade": 0.4, "Avoid": 0.3, "avoid": 0.2, "dodge": 0.1},
            }
        )
        backend = ToyBackend(lexicon)
        text = "he evade"
        task = SimplificationTask(text, span_of(text, "evade"), "toy")
        cands = generate_candidates(task, backend, GeneratorConfig(k=5, lookahead_words=0))
        surfaces = [c.surface for c in cands]
        assert surfaces == ["avoid", "dodge"]
        assert cands[0].first_token_logprob == pytest.approx(math.log(0.3), abs=1e-12)


class TestMatchCasing:
    def test_capitalized_complex_word(self):
        assert match_casing("avoid", "Evade") == "Avoid"

    def test_lowercase_complex_word(self):
        assert match_casing("Avoid", "evade") == "avoid"
