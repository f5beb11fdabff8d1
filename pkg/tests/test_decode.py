"""Span decoding: argmax extraction, null rule, predictors, wire format."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spanalign.corpus import CharSpan, parse_corpus
from spanalign.decode import (
    DecodeConfig,
    Lexicon,
    PositionDistributions,
    PredictionError,
    SpanCandidate,
    apply_null_rule,
    best_span,
    decode,
    distributions_to_wire,
    focus_token,
    lexical_predict,
    nbest_spans,
    oracle_predict,
    prediction_to_wire,
    read_predictions,
    train_lexicon,
)
from spanalign.squad import ContextMode, Direction, build_queries

EPS = 1e-12


def dist(query_id, p_start, p_end):
    d = PositionDistributions(query_id, np.array(p_start), np.array(p_end))
    d.validate()
    return d


def normalized(values):
    arr = np.array(values, dtype=float)
    return arr / arr.sum()


def brute_force_best(d, cfg):
    """Independent O(M^2) enumeration; first-best wins (smaller k, then l)."""
    best = None
    m = d.context_length
    for k in range(m):
        for l in range(k, min(m, k + cfg.max_answer_length)):
            score = float(d.p_start[k + 1] * d.p_end[l + 1])
            if best is None or score > best.score:
                best = SpanCandidate(CharSpan(k, l + 1), score)
    return best


class TestBestSpan:
    def test_worked_example(self):
        # Mass concentrated at char 0 (start) and char 2 (end): the
        # three-character span wins with 0.7 * 0.8.
        d = dist("q", [EPS, 0.7, 0.2, 0.1 - EPS], [EPS, 0.1, 0.1, 0.8 - EPS])
        got = best_span(d)
        assert got.span == CharSpan(0, 3)
        assert got.score == pytest.approx(0.56, abs=1e-9)

    def test_point_mass_single_char(self):
        d = dist("q", [0, 0, 0, 1], [0, 0, 0, 1])
        got = best_span(d)
        assert got.span == CharSpan(2, 3)
        assert got.score == 1.0

    def test_uniform_tie_breaks_to_first_single_char(self):
        d = dist("q", [0, 1 / 3, 1 / 3, 1 / 3], [0, 1 / 3, 1 / 3, 1 / 3])
        assert best_span(d).span == CharSpan(0, 1)

    def test_length_cap_limits_span(self):
        d = dist("q", [0, 1, 0, 0, 0], [0, 0, 0, 0, 1])
        cfg = DecodeConfig(max_answer_length=2)
        got = best_span(d, cfg)
        assert len(got.span) <= 2
        # The unconstrained optimum [0, 4) is out of reach; score drops to 0.
        assert got.score == 0.0

    def test_empty_context_rejected(self):
        d = PositionDistributions("q", np.array([1.0]), np.array([1.0]))
        with pytest.raises(PredictionError, match="empty context"):
            best_span(d)

    def test_scale_consistency(self):
        # Scaling both vectors by the same constant (comparing unnormalized)
        # must not move the argmax.
        rng = np.random.default_rng(7)
        raw_s, raw_e = rng.random(11), rng.random(11)
        a = PositionDistributions("q", raw_s / raw_s.sum(), raw_e / raw_e.sum())
        b = PositionDistributions("q", raw_s / raw_s.sum() * 1.0, raw_e / raw_e.sum())
        assert best_span(a).span == best_span(b).span

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_equals_brute_force(self, data):
        m = data.draw(st.integers(1, 50))
        cap = data.draw(st.integers(1, 60))
        weights = st.lists(
            st.floats(0, 1, allow_nan=False, width=32), min_size=m + 1, max_size=m + 1
        ).filter(lambda xs: sum(xs) > 0)
        d = PositionDistributions(
            "q", normalized(data.draw(weights)), normalized(data.draw(weights))
        )
        cfg = DecodeConfig(max_answer_length=cap)
        fast, slow = best_span(d, cfg), brute_force_best(d, cfg)
        assert fast.span == slow.span
        assert fast.score == slow.score


class TestNBest:
    def test_head_is_best_span(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            s, e = rng.random(13), rng.random(13)
            d = PositionDistributions("q", s / s.sum(), e / e.sum())
            assert nbest_spans(d)[0] == best_span(d)

    def test_sorted_descending_and_bounded(self):
        d = dist("q", [0, 0.5, 0.3, 0.2], [0, 0.2, 0.3, 0.5])
        ranked = nbest_spans(d, DecodeConfig(nbest_size=4))
        assert len(ranked) == 4
        scores = [c.score for c in ranked]
        assert scores == sorted(scores, reverse=True)

    def test_deterministic_order_under_ties(self):
        # Scores all tie at 0.25; order falls back to (start, length).
        d = dist("q", [0, 0.5, 0.5], [0, 0.5, 0.5])
        ranked = nbest_spans(d, DecodeConfig(nbest_size=4))
        assert [(c.span.start, c.span.end) for c in ranked] == [(0, 1), (0, 2), (1, 2)]


class TestNullRule:
    def test_strictly_better_is_non_null(self):
        assert not apply_null_rule(SpanCandidate(CharSpan(0, 1), 0.6), 0.3, 0.0).is_null

    def test_equal_is_null(self):
        assert apply_null_rule(SpanCandidate(CharSpan(0, 1), 0.3), 0.3, 0.0).is_null

    def test_tau_raises_the_bar(self):
        assert apply_null_rule(SpanCandidate(CharSpan(0, 1), 0.6), 0.3, 0.5).is_null

    def test_infinite_tau_extremes(self):
        best = SpanCandidate(CharSpan(0, 1), 1.0)
        assert apply_null_rule(best, 0.0, math.inf).is_null
        assert not apply_null_rule(SpanCandidate(CharSpan(0, 1), 0.0), 1.0, -math.inf).is_null

    @given(
        st.floats(0, 1, allow_nan=False),
        st.floats(0, 1, allow_nan=False),
        st.floats(-1, 1, allow_nan=False),
    )
    def test_rule_is_exactly_the_margin_comparison(self, score, null, tau):
        pred = apply_null_rule(SpanCandidate(CharSpan(0, 1), score), null, tau)
        assert pred.is_null == (score <= null + tau)


class TestOraclePredictor:
    def test_point_mass_on_first_answer(self, kftt):
        queries = build_queries(kftt, Direction.L2_TO_L1, ContextMode.none())
        was = queries[2]
        d = oracle_predict(was)
        pred = decode(d)
        assert not pred.is_null
        span = pred.best.span
        assert was.context[span.start : span.end] == "である"

    def test_impossible_query_is_null(self, kftt):
        queries = build_queries(kftt, Direction.L2_TO_L1, ContextMode.none())
        conj = queries[11]  # "and" carries no gold link here
        assert conj.is_impossible
        pred = decode(oracle_predict(conj))
        assert pred.is_null
        assert pred.null_score == 1.0

    def test_distributions_are_valid(self, handcrafted_records):
        for record in handcrafted_records:
            for direction in (Direction.L1_TO_L2, Direction.L2_TO_L1):
                for query in build_queries(record, direction, ContextMode.none()):
                    oracle_predict(query).validate()


class TestLexicalPredictor:
    CORPUS = parse_corpus(
        "le chat\nthe cat\n0-0 1-1\nle chat\nthe cat\n\n"
        "le chien\nthe dog\n0-0 1-1\nle chien\nthe dog\n",
        "blocks", "lex",
    )

    def test_train_lexicon_relative_frequencies(self):
        lex = train_lexicon(self.CORPUS)
        assert lex.forward["le"]["the"] == 1.0
        assert lex.backward["the"]["le"] == 1.0
        assert lex.forward["chat"] == {"cat": 1.0}

    def test_repeating_records_preserves_ratios(self):
        lex = train_lexicon(list(self.CORPUS) * 3)
        assert lex.forward["le"]["the"] == 1.0

    def test_empty_corpus_empty_table(self):
        lex = train_lexicon([])
        assert lex.forward == {} and lex.backward == {}

    def test_known_token_finds_its_translation(self):
        lex = train_lexicon(self.CORPUS)
        record = self.CORPUS[0]
        query = build_queries(record, Direction.L1_TO_L2, ContextMode.none())[1]
        pred = decode(lexical_predict(query, lex))
        assert not pred.is_null
        assert query.context[pred.best.span.start : pred.best.span.end] == "cat"

    def test_unknown_token_predicts_null(self):
        record = self.CORPUS[0]
        query = build_queries(record, Direction.L1_TO_L2, ContextMode.none())[0]
        pred = decode(lexical_predict(query, Lexicon()))
        assert pred.is_null

    def test_focus_token_extraction(self):
        assert focus_token("chat") == "chat"
        assert focus_token("le ¶ chat ¶ dort") == "chat"
        assert focus_token("¶ le ¶ chat") == "le"
        assert focus_token("足利 ¶ 義満 ¶ （あしかが") == "義満"

    def test_distributions_always_valid(self):
        lex = train_lexicon(self.CORPUS)
        for record in self.CORPUS:
            for query in build_queries(record, Direction.L2_TO_L1, ContextMode.full()):
                lexical_predict(query, lex).validate()


class TestWireFormat:
    def test_nbest_shape_round_trip(self):
        line = json.dumps({
            "id": "c_0_f_0_0",
            "nbest": [{"start": 4, "end": 7, "p_start": 0.8, "p_end": 0.9}],
            "null_score": 0.05,
        })
        preds = read_predictions([line])
        pred = preds["c_0_f_0_0"]
        assert pred.best.span == CharSpan(4, 7)
        assert pred.best.score == pytest.approx(0.72)
        assert not pred.is_null

    def test_distribution_shape_is_decoded(self):
        line = json.dumps({"id": "c_0_f_0_0", "p_start": [0, 1, 0], "p_end": [0, 0, 1]})
        pred = read_predictions([line])["c_0_f_0_0"]
        assert pred.best.span == CharSpan(0, 2)
        assert not pred.is_null

    def test_offsets_validated_against_context_lengths(self):
        line = json.dumps({
            "id": "c_0_f_0_0",
            "nbest": [{"start": 0, "end": 9, "p_start": 1, "p_end": 1}],
            "null_score": 0,
        })
        with pytest.raises(PredictionError, match="exceeds context length"):
            read_predictions([line], context_lengths={"c_0_f_0_0": 5})

    @pytest.mark.parametrize("start,end", [(-1, 2), (3, 2)])
    def test_bad_offsets_rejected(self, start, end):
        line = json.dumps({
            "id": "q_0_f_0_0",
            "nbest": [{"start": start, "end": end, "p_start": 1, "p_end": 1}],
        })
        with pytest.raises(PredictionError, match="offsets"):
            read_predictions([line])

    def test_duplicate_ids_rejected(self):
        line = json.dumps({"id": "q_0_f_0_0", "p_start": [0, 1], "p_end": [0, 1]})
        with pytest.raises(PredictionError, match="duplicate"):
            read_predictions([line, line])

    def test_invalid_json_rejected(self):
        with pytest.raises(PredictionError, match="invalid JSON"):
            read_predictions(["{nope"])

    def test_tau_applies_at_read_time(self):
        line = json.dumps({
            "id": "q_0_f_0_0",
            "nbest": [{"start": 0, "end": 1, "p_start": 0.7, "p_end": 0.7}],
            "null_score": 0.2,
        })
        assert not read_predictions([line])["q_0_f_0_0"].is_null
        assert read_predictions([line], DecodeConfig(tau=0.5))["q_0_f_0_0"].is_null

    def test_emitted_lines_read_back(self):
        d = dist("q_0_f_0_0", [0.1, 0.6, 0.3], [0.2, 0.3, 0.5])
        pred = decode(d)
        again_nbest = read_predictions([prediction_to_wire(pred, d)])["q_0_f_0_0"]
        again_dist = read_predictions([distributions_to_wire(d)])["q_0_f_0_0"]
        assert again_nbest.best.span == pred.best.span
        assert again_dist.best.span == pred.best.span
        assert again_dist.best.score == pytest.approx(pred.best.score)

    def test_blank_lines_skipped(self):
        line = json.dumps({"id": "q_0_f_0_0", "p_start": [0, 1], "p_end": [0, 1]})
        assert len(read_predictions(["", line, "  "])) == 1


class TestValidation:
    def test_negative_probability_rejected(self):
        d = PositionDistributions("q", np.array([1.5, -0.5]), np.array([1.0, 0.0]))
        with pytest.raises(PredictionError, match="negative"):
            d.validate()

    def test_sum_must_be_one(self):
        d = PositionDistributions("q", np.array([0.5, 0.2]), np.array([0.5, 0.5]))
        with pytest.raises(PredictionError, match="sums to"):
            d.validate()

    def test_mismatched_lengths_rejected(self):
        d = PositionDistributions("q", np.array([0.5, 0.5]), np.array([0.2, 0.4, 0.4]))
        with pytest.raises(PredictionError, match="differ in length"):
            d.validate()

    def test_config_bounds(self):
        with pytest.raises(ValueError):
            DecodeConfig(nbest_size=0)
        with pytest.raises(ValueError):
            DecodeConfig(max_answer_length=0)
