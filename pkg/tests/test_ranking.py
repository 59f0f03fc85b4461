"""Three-factor scoring and candidate ranking."""

import math
import random

import pytest

from cmsg.backends import NliResponse, PplResponse, bundled_corpus
from cmsg.errors import InvalidInputError, ProtocolError
from cmsg.generation import CandidateText, Provenance
from cmsg.ranking import (
    FactorMask,
    RankerConfig,
    ScoreBreakdown,
    composite_score,
    grammaticality_score,
    rank_candidates,
    relation_score,
    sarcasticness_score,
)


def unit_pair(cosine):
    """Two exact unit vectors in the plane with the given cosine."""
    return [1.0, 0.0], [cosine, math.sqrt(1.0 - cosine * cosine)]


def make_candidates(n):
    return [CandidateText(i, "first", f"rest {i}", f"first rest {i}",
                          Provenance("m", ("rest",), False)) for i in range(n)]


class TestRelationScore:
    def test_positive_cosine_scaled(self):
        a, b = unit_pair(0.4)
        assert relation_score(a, b, 2.5) == pytest.approx(1.0, abs=1e-12)

    def test_negative_cosine_clamped(self):
        a, b = unit_pair(-0.2)
        assert relation_score(a, b, 2.5) == 0.0

    def test_identical_vectors(self):
        v = [0.6, 0.8]
        assert relation_score(v, v, 2.5) == pytest.approx(2.5, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            relation_score([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_non_unit_norm(self):
        with pytest.raises(InvalidInputError):
            relation_score([2.0, 0.0], [1.0, 0.0])

    def test_dimension_one_rejected(self):
        with pytest.raises(InvalidInputError):
            relation_score([1.0], [1.0])


class TestSarcasticnessScore:
    def test_antonym_overlap_scores_high(self, client):
        score = sarcasticness_score("a good rainy day",
                                    "what a bad day to be outside", client)
        # one antonym pair (good/bad), no negation delta -> exactly 0.6
        assert score == pytest.approx(0.6)
        assert score > 0.5

    def test_identical_texts_score_zero(self, client):
        assert sarcasticness_score("a nice day", "a nice day", client) == 0.0

    def test_bad_probability_sum_is_protocol_error(self):
        class BadNli:
            def call(self, service, request):
                return NliResponse.model_construct(entail=0.5, neutral=0.5,
                                                   contradict=0.5)

        with pytest.raises(ProtocolError):
            sarcasticness_score("a", "b", BadNli())

    def test_empty_text_rejected(self, client):
        with pytest.raises(InvalidInputError):
            sarcasticness_score("", "b", client)


class TestGrammaticalityScore:
    def test_zero_nll_is_one(self):
        class Perfect:
            def call(self, service, request):
                return PplResponse(mean_nll=0.0, token_count=3)

        assert grammaticality_score("x y z", Perfect()) == 1.0

    def test_ppl_ten_maps_to_point_one(self):
        class PplTen:
            def call(self, service, request):
                return PplResponse(mean_nll=math.log(10.0), token_count=3)

        assert grammaticality_score("x y z", PplTen()) == pytest.approx(0.1)

    def test_in_corpus_beats_shuffled(self, client):
        sentence = bundled_corpus()[5]
        tokens = sentence.split()
        rng = random.Random(7)
        shuffled = tokens[:]
        while shuffled == tokens:
            rng.shuffle(shuffled)
        in_corpus = grammaticality_score(sentence, client)
        scrambled = grammaticality_score(" ".join(shuffled), client)
        assert in_corpus > scrambled


class TestCompositeScore:
    def test_plain_product(self):
        breakdown = composite_score(1.0, 0.8, 0.5, RankerConfig())
        assert breakdown.composite == pytest.approx(0.4, rel=1e-12)
        assert breakdown.factor_mask == FactorMask(True, True, True)

    def test_sarcasticness_masked(self):
        config = RankerConfig(rank_sarcasticness=False)
        breakdown = composite_score(1.0, 0.8, 0.5, config)
        assert breakdown.composite == pytest.approx(0.5, rel=1e-12)
        assert breakdown.sarcasticness == 1.0
        assert breakdown.factor_mask.sarcasticness is False

    def test_grammar_and_relation_masked(self):
        config = RankerConfig(rank_grammar_and_relation=False)
        breakdown = composite_score(2.0, 0.8, 0.5, config)
        assert breakdown.composite == pytest.approx(0.8, rel=1e-12)
        assert breakdown.relation == 1.0
        assert breakdown.grammaticality == 1.0

    def test_identity_factors(self):
        breakdown = composite_score(2.5, 1.0, 1.0, RankerConfig())
        assert breakdown.composite == pytest.approx(2.5, rel=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidInputError):
            composite_score(3.0, 0.5, 0.5, RankerConfig())  # above clip weight
        with pytest.raises(InvalidInputError):
            composite_score(1.0, 1.5, 0.5, RankerConfig())
        with pytest.raises(InvalidInputError):
            composite_score(1.0, 0.5, 0.0, RankerConfig())  # grammaticality > 0

    def test_missing_active_value_rejected(self):
        with pytest.raises(InvalidInputError):
            composite_score(None, 0.5, 0.5, RankerConfig())

    def test_masked_value_optional(self):
        config = RankerConfig(rank_sarcasticness=False)
        breakdown = composite_score(1.0, None, 0.5, config)
        assert breakdown.sarcasticness == 1.0


class TestRankCandidates:
    def test_descending_by_composite(self):
        candidates = make_candidates(3)
        scores = [ScoreBreakdown(1, 1, 1, c) for c in (0.2, 0.9, 0.4)]
        order, selected = rank_candidates(candidates, scores)
        assert order == [1, 2, 0]
        assert selected == 1

    def test_tie_breaks_on_sarcasticness_then_id(self):
        candidates = make_candidates(2)
        scores = [ScoreBreakdown(1, 0.6, 1, 0.5), ScoreBreakdown(1, 0.7, 1, 0.5)]
        order, selected = rank_candidates(candidates, scores)
        assert order == [1, 0]
        assert selected == 1

        equal = [ScoreBreakdown(1, 0.5, 1, 0.5), ScoreBreakdown(1, 0.5, 1, 0.5)]
        order, selected = rank_candidates(candidates, equal)
        assert order == [0, 1]

    def test_singleton(self):
        order, selected = rank_candidates(make_candidates(1),
                                          [ScoreBreakdown(1, 1, 1, 1)])
        assert order == [0]
        assert selected == 0

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            rank_candidates([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            rank_candidates(make_candidates(2), [ScoreBreakdown(1, 1, 1, 1)])

    def test_all_masks_off_degenerates_to_id_order(self):
        config = RankerConfig(rank_sarcasticness=False,
                              rank_grammar_and_relation=False)
        candidates = make_candidates(4)
        scores = [composite_score(None, None, None, config) for _ in candidates]
        assert all(s.composite == 1.0 for s in scores)
        order, selected = rank_candidates(candidates, scores)
        assert order == [0, 1, 2, 3]
        assert selected == 0
