"""Sufficient statistics, the closed-form node likelihood, and embedding I/O.

Expected likelihood values were computed ahead of time with an independent
pure-Python implementation (tests/oracles.py) and frozen here.
"""

from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prosotag import (
    DimensionMismatchError,
    EmptyNodeError,
    ParseError,
    ProsodySample,
    StatsConsistencyError,
    SufficientStats,
    ValidationError,
    accumulate,
    load_samples,
    node_log_likelihood,
    save_samples,
    split_gain,
    stats_from_matrix,
)
from oracles import closed_form_ll, per_sample_ll


def stats_of(values) -> SufficientStats:
    return stats_from_matrix(np.asarray(values, dtype=np.float64))


class TestProsodySample:
    def test_valid(self):
        s = ProsodySample("t1", "cat", np.array([1.0, 2.0]))
        assert s.dim == 2

    def test_embedding_read_only(self):
        s = ProsodySample("t1", "cat", np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            s.embedding[0] = 5.0

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            ProsodySample("t1", "cat", np.array([]))

    def test_rejects_matrix(self):
        with pytest.raises(ValidationError):
            ProsodySample("t1", "cat", np.zeros((2, 2)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            ProsodySample("t1", "cat", np.array([1.0, np.nan]))


class TestSufficientStats:
    def test_accumulate_matches_matrix_form(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(10, 4))
        samples = [ProsodySample(f"t{i}", "w", row) for i, row in enumerate(x)]
        a = accumulate(samples)
        b = stats_from_matrix(x)
        assert a.n == b.n == 10
        np.testing.assert_allclose(a.sum, b.sum, rtol=1e-12)
        np.testing.assert_allclose(a.sumsq, b.sumsq, rtol=1e-12)

    def test_empty_accumulate(self):
        stats = accumulate([], dim=3)
        assert stats.n == 0 and stats.dim == 3

    def test_dimension_mismatch(self):
        samples = [
            ProsodySample("a", "w", np.array([1.0])),
            ProsodySample("b", "w", np.array([1.0, 2.0])),
        ]
        with pytest.raises(DimensionMismatchError):
            accumulate(samples)

    def test_mean_and_variance(self):
        stats = stats_of([[0.0], [2.0]])
        assert stats.mean()[0] == 1.0
        assert stats.ml_variances(1e-6)[0] == 1.0

    def test_variance_floor_applies(self):
        stats = stats_of([[5.0], [5.0]])
        assert stats.ml_variances(1e-6)[0] == 1e-6

    def test_empty_node_errors(self):
        empty = SufficientStats(n=0, sum=np.zeros(2), sumsq=np.zeros(2))
        with pytest.raises(EmptyNodeError):
            empty.mean()
        with pytest.raises(EmptyNodeError):
            node_log_likelihood(empty, 1e-6)

    def test_add_requires_matching_dims(self):
        a = SufficientStats(n=1, sum=np.zeros(2), sumsq=np.zeros(2))
        b = SufficientStats(n=1, sum=np.zeros(3), sumsq=np.zeros(3))
        with pytest.raises(DimensionMismatchError):
            a + b

    @given(seed=st.integers(0, 5000))
    def test_additivity(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(rng.integers(1, 20), rng.integers(1, 6)))
        y = rng.normal(size=(rng.integers(1, 20), x.shape[1]))
        combined = stats_from_matrix(np.vstack([x, y]))
        summed = stats_from_matrix(x) + stats_from_matrix(y)
        assert summed.n == combined.n
        np.testing.assert_allclose(summed.sum, combined.sum, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(summed.sumsq, combined.sumsq, rtol=1e-9, atol=1e-12)


class TestNodeLogLikelihood:
    def test_frozen_value_unit_variance(self):
        # d=1, samples {0, 2}: ML variance 1, LL = -(ln(2*pi) + 1)
        assert node_log_likelihood(stats_of([[0.0], [2.0]]), 1e-6) == pytest.approx(
            -2.8378770664093453, rel=1e-12
        )

    def test_frozen_value_floored_variance(self):
        # identical samples: variance floors at 1e-6 and the LL goes positive
        assert node_log_likelihood(stats_of([[5.0], [5.0]]), 1e-6) == pytest.approx(
            10.97763349155493, rel=1e-12
        )

    def test_frozen_value_single_sample(self):
        # n=1: zero ML variance in every dimension, all floored
        assert node_log_likelihood(stats_of([[7.0, -3.0, 0.5]]), 1e-6) == pytest.approx(
            16.466450237332396, rel=1e-12
        )

    def test_invalid_floor(self):
        with pytest.raises(ValidationError):
            node_log_likelihood(stats_of([[1.0]]), 0.0)

    def test_matches_independent_closed_form(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = rng.normal(scale=3.0, size=(rng.integers(2, 40), rng.integers(1, 6)))
            expected = closed_form_ll(x.tolist())
            got = node_log_likelihood(stats_from_matrix(x), 1e-6)
            assert got == pytest.approx(expected, rel=1e-9)

    def test_equals_per_sample_density_sum_when_floor_inactive(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.normal(scale=2.0, size=(rng.integers(5, 30), rng.integers(1, 5)))
            assert stats_from_matrix(x).ml_variances(1e-6).min() > 1e-6
            expected = per_sample_ll(x.tolist())
            got = node_log_likelihood(stats_from_matrix(x), 1e-6)
            assert got == pytest.approx(expected, rel=1e-9)


class TestSplitGain:
    def test_hand_case(self):
        x = np.array([[0.0], [0.2], [10.0], [10.2]])
        parent = stats_from_matrix(x)
        left = stats_from_matrix(x[:2])
        right = stats_from_matrix(x[2:])
        gain = split_gain(parent, left, right, 1e-6)
        expected = (
            closed_form_ll(x[:2].tolist())
            + closed_form_ll(x[2:].tolist())
            - closed_form_ll(x.tolist())
        )
        assert gain == pytest.approx(expected, rel=1e-9)
        assert gain > 0

    @given(seed=st.integers(0, 5000))
    @settings(max_examples=60)
    def test_gain_never_negative(self, seed):
        # per-child floored-ML parameters are each child's constrained optimum,
        # so splitting can never lose likelihood
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(rng.integers(2, 30), rng.integers(1, 5)))
        cut = int(rng.integers(1, x.shape[0]))
        gain = split_gain(
            stats_from_matrix(x),
            stats_from_matrix(x[:cut]),
            stats_from_matrix(x[cut:]),
            1e-6,
        )
        assert gain >= -1e-9

    def test_count_mismatch(self):
        x = np.zeros((4, 2))
        with pytest.raises(StatsConsistencyError):
            split_gain(
                stats_from_matrix(x),
                stats_from_matrix(x[:1]),
                stats_from_matrix(x[:1]),
                1e-6,
            )

    def test_moment_mismatch(self):
        x = np.arange(8.0).reshape(4, 2)
        bad_left = stats_from_matrix(x[:2] + 50.0)
        with pytest.raises(StatsConsistencyError):
            split_gain(stats_from_matrix(x), bad_left, stats_from_matrix(x[2:]), 1e-6)

    def test_dimension_mismatch(self):
        parent = stats_from_matrix(np.zeros((2, 2)))
        left = stats_from_matrix(np.zeros((1, 3)))
        right = stats_from_matrix(np.zeros((1, 3)))
        with pytest.raises((DimensionMismatchError, StatsConsistencyError)):
            split_gain(parent, left, right, 1e-6)


class TestEmbeddingIO:
    def make_samples(self, n=5, d=3, seed=0):
        rng = np.random.default_rng(seed)
        return [
            ProsodySample(f"tok{i}", f"word{i % 3}", rng.normal(size=d))
            for i in range(n)
        ]

    def test_jsonl_round_trip_exact(self):
        samples = self.make_samples()
        buf = io.BytesIO()
        save_samples(samples, buf)
        loaded = load_samples(io.BytesIO(buf.getvalue()))
        assert [s.token_id for s in loaded] == [s.token_id for s in samples]
        for a, b in zip(samples, loaded):
            np.testing.assert_array_equal(a.embedding, b.embedding)

    def test_binary_round_trip_float32(self):
        samples = self.make_samples()
        buf = io.BytesIO()
        save_samples(samples, buf, binary=True)
        loaded = load_samples(io.BytesIO(buf.getvalue()))
        for a, b in zip(samples, loaded):
            assert a.word == b.word
            np.testing.assert_array_equal(
                a.embedding.astype(np.float32).astype(np.float64), b.embedding
            )

    def test_binary_magic_sniffed(self):
        samples = self.make_samples(n=2)
        buf = io.BytesIO()
        save_samples(samples, buf, binary=True)
        assert buf.getvalue()[:4] == b"PTE1"

    def test_binary_truncated_payload(self):
        buf = io.BytesIO()
        save_samples(self.make_samples(n=2), buf, binary=True)
        with pytest.raises(ParseError):
            load_samples(io.BytesIO(buf.getvalue()[:-5]))

    def test_binary_truncated_header(self):
        with pytest.raises(ParseError):
            load_samples(io.BytesIO(b"PTE1\x03"))

    def test_binary_empty_rejected(self):
        with pytest.raises(ValidationError):
            save_samples([], io.BytesIO(), binary=True)

    def test_duplicate_token_ids_rejected(self):
        line = b'{"token_id":"t","word":"w","embedding":[1.0]}\n'
        with pytest.raises(ParseError):
            load_samples(io.BytesIO(line * 2))

    def test_mixed_dimension_rejected(self):
        data = (
            b'{"token_id":"a","word":"w","embedding":[1.0]}\n'
            b'{"token_id":"b","word":"w","embedding":[1.0,2.0]}\n'
        )
        with pytest.raises(DimensionMismatchError):
            load_samples(io.BytesIO(data))

    def test_unicode_words_binary(self):
        samples = [ProsodySample("t0", "naïve", np.array([1.5, -2.5]))]
        buf = io.BytesIO()
        save_samples(samples, buf, binary=True)
        assert load_samples(io.BytesIO(buf.getvalue()))[0].word == "naïve"
