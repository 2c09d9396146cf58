import io

import numpy as np
import pytest

import graphsketch as gs
from graphsketch.sketch import load_sketch, merge, save_sketch


def stream_into(sketch, matrix, start_index=0):
    for i, row in enumerate(matrix):
        sketch.insert(row, index=start_index + i)
    return sketch


def sketch_covariance(state, sv_exponent=1.0):
    e = state.embedding(state.d, sv_exponent=sv_exponent).values
    return e.T @ e


class TestFrequentDirections:
    def test_total_shrink_d1(self):
        # Hand SVD: stacking e1, e2 gives singular values (1, 1); the
        # shrink pivot is 1, so all retained energy cancels.
        s = gs.FrequentDirectionsSketch(1, 2)
        s.insert([1.0, 0.0])
        s.insert([0.0, 1.0])
        np.testing.assert_array_equal(sketch_covariance(s), np.zeros((2, 2)))
        assert gs.covariance_error(np.eye(2), s.embedding(1, sv_exponent=1.0)) == pytest.approx(0.5)

    def test_hand_worked_shrink_d2(self):
        # Stack of (2,0),(0,1),(2,0),(0,1): singular values (sqrt8, sqrt2),
        # pivot sqrt2, retained direction (1,0) with weight sqrt6.
        s = gs.FrequentDirectionsSketch(2, 2)
        stream_into(s, np.array([[2.0, 0], [0, 1], [2, 0], [0, 1]]))
        assert s.weights[0] == pytest.approx(np.sqrt(6))
        np.testing.assert_allclose(s.buffer[0], [1.0, 0.0], atol=1e-12)
        cov = sketch_covariance(s)
        np.testing.assert_allclose(cov, np.diag([6.0, 0.0]), atol=1e-12)
        m = np.array([[2.0, 0], [0, 1], [2, 0], [0, 1]])
        gap = np.linalg.norm(m.T @ m - cov, 2)
        assert gap == pytest.approx(2.0, abs=1e-12)
        assert gap <= (m * m).sum() / 2

    def test_embedding_after_shrink_k1(self):
        s = gs.FrequentDirectionsSketch(2, 2)
        stream_into(s, np.array([[2.0, 0], [0, 1], [2, 0], [0, 1]]))
        e = s.embedding(1)
        np.testing.assert_allclose(e.values, [[6**0.25, 0.0]], atol=1e-12)

    def test_single_row_stored_verbatim(self):
        s = gs.FrequentDirectionsSketch(2, 3)
        row = np.array([3.0, 4.0, 0.0])
        s.insert(row)
        np.testing.assert_array_equal(s.buffer[0], row)
        assert s.fill == 1 and s.rows_seen == 1

    def test_single_row_embedding_rank_one(self):
        s = gs.FrequentDirectionsSketch(2, 3)
        row = np.array([3.0, 4.0, 0.0])
        s.insert(row)
        e = s.embedding(1).values[0]
        expected = np.sqrt(np.linalg.norm(row)) * row / np.linalg.norm(row)
        assert np.allclose(e, expected) or np.allclose(e, -expected)

    def test_zero_sketch_embedding_is_zero(self):
        s = gs.FrequentDirectionsSketch(1, 2)
        s.insert([1.0, 0.0])
        s.insert([0.0, 1.0])
        np.testing.assert_array_equal(s.embedding(1).values, np.zeros((1, 2)))

    def test_empty_sketch_rejected(self):
        s = gs.FrequentDirectionsSketch(2, 4)
        with pytest.raises(ValueError):
            s.embedding(1)

    def test_k_out_of_range(self):
        s = gs.FrequentDirectionsSketch(2, 4)
        s.insert(np.ones(4))
        with pytest.raises(ValueError):
            s.embedding(0)
        with pytest.raises(ValueError):
            s.embedding(3)

    def test_dimension_mismatch(self):
        s = gs.FrequentDirectionsSketch(2, 4)
        with pytest.raises(ValueError):
            s.insert(np.ones(5))

    def test_anytime_bound_every_prefix(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((200, 50))
        for d in (4, 10):
            s = gs.FrequentDirectionsSketch(d, 50)
            for i, row in enumerate(m):
                s.insert(row)
                if (i + 1) % 25 == 0:
                    prefix = m[: i + 1]
                    ce = gs.covariance_error(prefix, s.embedding(d, sv_exponent=1.0))
                    assert ce <= 1.0 / d

    def test_bound_holds_under_permutation(self):
        rng = np.random.default_rng(1)
        m = rng.standard_normal((80, 20))
        d = 5
        for perm_seed in range(5):
            order = np.random.default_rng(perm_seed).permutation(80)
            s = gs.FrequentDirectionsSketch(d, 20)
            stream_into(s, m[order])
            assert gs.covariance_error(m, s.embedding(d, sv_exponent=1.0)) <= 1.0 / d

    def test_shrink_never_inflates_energy(self):
        rng = np.random.default_rng(2)
        d, n = 3, 8
        s = gs.FrequentDirectionsSketch(d, n)
        for i in range(2 * d - 1):
            s.insert(rng.standard_normal(n))
        trigger = rng.standard_normal(n)
        weighted = s.weights[:, None] * s.buffer
        pre = weighted.T @ weighted + np.outer(trigger, trigger)
        s.insert(trigger)  # buffer now full: shrink runs
        assert s.fill == 0
        weighted = s.weights[:, None] * s.buffer
        post = weighted.T @ weighted
        assert np.linalg.eigvalsh(pre - post).min() >= -1e-9

    def test_prefix_extraction_consistency(self):
        rng = np.random.default_rng(3)
        s = gs.FrequentDirectionsSketch(6, 12)
        stream_into(s, rng.standard_normal((40, 12)))
        e2 = s.embedding(2).values
        e5 = s.embedding(5).values
        np.testing.assert_array_equal(e2, e5[:2])


class TestBaselines:
    def test_hashing_cancellation(self):
        s = gs.HashingSketch(2, 3, seed=0)
        s.bucket_coeffs = np.array([0, 0])
        s.sign_coeffs = np.array([0, 0, 1, 0])
        assert s.bucket(0) == s.bucket(1) == 0
        assert s.sign(0) == 1.0 and s.sign(1) == -1.0
        e1 = np.array([1.0, 0.0, 0.0])
        s.insert(e1, 0)
        s.insert(e1, 1)
        np.testing.assert_array_equal(s.matrix[0], np.zeros(3))

    def test_random_projection_unbiased(self):
        rng = np.random.default_rng(4)
        m = rng.standard_normal((10, 5))
        acc = np.zeros((5, 5))
        for seed in range(200):
            s = stream_into(gs.RandomProjectionSketch(4, 5, seed=seed), m)
            acc += s.matrix.T @ s.matrix
        acc /= 200
        assert np.linalg.norm(m.T @ m - acc, 2) <= 0.15 * (m * m).sum()

    def test_hashing_unbiased(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((10, 5))
        acc = np.zeros((5, 5))
        for seed in range(200):
            s = stream_into(gs.HashingSketch(3, 5, seed=seed), m)
            acc += s.matrix.T @ s.matrix
        acc /= 200
        assert np.linalg.norm(m.T @ m - acc, 2) <= 0.15 * (m * m).sum()

    def test_sampling_single_nonzero_row(self):
        s = gs.SamplingSketch(3, 4, seed=6)
        row = np.array([0.0, 2.0, 0.0, 1.0])
        s.insert(np.zeros(4), 0)
        s.insert(row, 1)
        s.insert(np.zeros(4), 2)
        scaled = s._extraction_matrix()
        norms = (scaled * scaled).sum(axis=1)
        np.testing.assert_allclose(norms, s.total_sq_norm / 3)
        assert (s.slot_indices == 1).all()

    def test_sampling_proportional_to_norms(self):
        # One heavy row and nine light rows: the heavy row should win
        # most slots on most seeds.
        heavy = np.zeros(6)
        heavy[0] = 10.0
        light = np.eye(6)[1] * 0.1
        wins = 0
        trials = 200
        for seed in range(trials):
            s = gs.SamplingSketch(1, 6, seed=seed)
            s.insert(heavy, 0)
            for i in range(9):
                s.insert(light, i + 1)
            wins += int(s.slot_indices[0] == 0)
        expected = 100.0 / (100.0 + 9 * 0.01)
        assert wins / trials == pytest.approx(expected, abs=0.05)

    def test_baseline_rejects_empty_extraction(self):
        for kind in ("hashing", "random_projection", "sampling"):
            s = gs.make_sketch(kind, 2, 4, seed=0)
            with pytest.raises(ValueError):
                s.embedding(1)

    def test_baseline_embedding_matches_matrix_svd(self):
        rng = np.random.default_rng(7)
        m = rng.standard_normal((15, 6))
        s = stream_into(gs.RandomProjectionSketch(4, 6, seed=1), m)
        e = s.embedding(4, sv_exponent=1.0).values
        np.testing.assert_allclose(e.T @ e, s.matrix.T @ s.matrix, atol=1e-8)


class TestMerge:
    def test_merge_identity(self):
        rng = np.random.default_rng(8)
        m = rng.standard_normal((30, 10))
        a = stream_into(gs.FrequentDirectionsSketch(4, 10), m)
        empty = gs.FrequentDirectionsSketch(4, 10)
        merged = merge(a, empty)
        np.testing.assert_allclose(
            sketch_covariance(merged), sketch_covariance(a), atol=1e-10
        )
        assert merged.rows_seen == 30

    def test_merge_preserves_bound_on_split(self):
        rng = np.random.default_rng(9)
        for trial in range(5):
            m = rng.standard_normal((200, 50))
            d = 10
            a = stream_into(gs.FrequentDirectionsSketch(d, 50), m[:100])
            b = stream_into(gs.FrequentDirectionsSketch(d, 50), m[100:])
            merged = merge(a, b)
            assert merged.rows_seen == 200
            assert gs.covariance_error(m, merged.embedding(d, sv_exponent=1.0)) <= 1.0 / d

    def test_merge_covariance_commutative(self):
        rng = np.random.default_rng(10)
        m = rng.standard_normal((60, 15))
        a = stream_into(gs.FrequentDirectionsSketch(5, 15), m[:30])
        b = stream_into(gs.FrequentDirectionsSketch(5, 15), m[30:])
        ab = sketch_covariance(merge(a, b))
        ba = sketch_covariance(merge(b, a))
        assert np.abs(ab - ba).max() <= 1e-8

    def test_merge_kind_and_shape_mismatch(self):
        a = gs.FrequentDirectionsSketch(2, 4)
        b = gs.HashingSketch(2, 4)
        with pytest.raises(ValueError):
            merge(a, b)
        c = gs.FrequentDirectionsSketch(3, 4)
        with pytest.raises(ValueError):
            merge(a, c)

    def test_additive_merge_requires_equal_seeds(self):
        rng = np.random.default_rng(11)
        m = rng.standard_normal((10, 6))
        for kind in ("hashing", "random_projection"):
            a = stream_into(gs.make_sketch(kind, 3, 6, seed=1), m[:5])
            bad = stream_into(gs.make_sketch(kind, 3, 6, seed=2), m[5:], start_index=5)
            with pytest.raises(ValueError):
                merge(a, bad)
            b = stream_into(gs.make_sketch(kind, 3, 6, seed=1), m[5:], start_index=5)
            merged = merge(a, b)
            whole = stream_into(gs.make_sketch(kind, 3, 6, seed=1), m)
            np.testing.assert_allclose(merged.matrix, whole.matrix, atol=1e-12)

    def test_sampling_merge_equals_single_stream(self):
        rng = np.random.default_rng(12)
        m = rng.standard_normal((40, 8))
        a = stream_into(gs.SamplingSketch(4, 8, seed=3), m[:20])
        b = stream_into(gs.SamplingSketch(4, 8, seed=3), m[20:], start_index=20)
        merged = merge(a, b)
        whole = stream_into(gs.SamplingSketch(4, 8, seed=3), m)
        np.testing.assert_array_equal(merged.slot_indices, whole.slot_indices)
        np.testing.assert_allclose(merged.total_sq_norm, whole.total_sq_norm)


class TestSerialization:
    @pytest.mark.parametrize("kind", ["fd", "hashing", "random_projection", "sampling"])
    def test_roundtrip_preserves_behavior(self, kind):
        rng = np.random.default_rng(13)
        m = rng.standard_normal((17, 7))
        s = stream_into(gs.make_sketch(kind, 3, 7, seed=21), m)
        buf = io.BytesIO()
        save_sketch(s, buf)
        buf.seek(0)
        t = load_sketch(buf)
        assert t.kind == kind and t.d == 3 and t.n == 7 and t.rows_seen == 17
        np.testing.assert_array_equal(
            s.embedding(3).values, t.embedding(3).values
        )
        # inserting the same extra row keeps them in lockstep
        extra = rng.standard_normal(7)
        s.insert(extra, 17)
        t.insert(extra, 17)
        np.testing.assert_array_equal(
            s.embedding(3).values, t.embedding(3).values
        )

    def test_header_fields(self):
        s = gs.FrequentDirectionsSketch(2, 5)
        s.insert(np.ones(5))
        buf = io.BytesIO()
        save_sketch(s, buf)
        raw = buf.getvalue()
        assert raw[:4] == b"FDSK"
        assert len(raw) == 4 + 4 + 1 + 4 + 8 + 8 + 4 + (2 * 2) * 8 + (2 * 2 * 5) * 8

    def test_bad_magic_rejected(self):
        with pytest.raises(ValueError):
            load_sketch(io.BytesIO(b"NOPE" + b"\0" * 64))

    def test_truncated_rejected(self):
        s = gs.FrequentDirectionsSketch(2, 5)
        s.insert(np.ones(5))
        buf = io.BytesIO()
        save_sketch(s, buf)
        with pytest.raises(ValueError):
            load_sketch(io.BytesIO(buf.getvalue()[:-8]))


def test_embedding_text_roundtrip():
    rng = np.random.default_rng(14)
    emb = gs.Embedding(k=3, n=4, values=rng.standard_normal((3, 4)))
    ids = np.array([9, 2, 5, 7])
    buf = io.StringIO()
    gs.write_embedding_text(emb, ids, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "4 3"
    back_ids, vectors = gs.read_embedding_text(io.StringIO(text))
    np.testing.assert_array_equal(back_ids, ids)
    np.testing.assert_allclose(vectors, emb.values.T, rtol=1e-11)
