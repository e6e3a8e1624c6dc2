import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from texsom.errors import InvalidParameterError, InvalidPartitionError
from texsom.features import (
    ClusterModel, MinMaxScaler, PipelineConfig, Rect, Transaction, bloc_features,
    build_transaction, cluster_representatives, extract_features, grid_shape, kmeans,
    normalize_dataset, partition,
)
from texsom.glcm import GlcmConfig, quantize, texture_vector


class TestPartition:
    def test_reference_layout_120(self):
        grid = partition((120, 120), 6, 6)
        # 2 rows x 3 cols of sub-images, each 60 high x 40 wide
        assert grid.sub_images == [
            Rect(0, 0, 60, 40), Rect(0, 40, 60, 40), Rect(0, 80, 60, 40),
            Rect(60, 0, 60, 40), Rect(60, 40, 60, 40), Rect(60, 80, 60, 40),
        ]
        # each sub-image: 2 rows x 3 cols of blocs, widths 13/13/14, height 30
        assert grid.blocs[0] == [
            Rect(0, 0, 30, 13), Rect(0, 13, 30, 13), Rect(0, 26, 30, 14),
            Rect(30, 0, 30, 13), Rect(30, 13, 30, 13), Rect(30, 26, 30, 14),
        ]

    def test_single_bloc(self):
        grid = partition((7, 9), 1, 1)
        assert grid.sub_images == [Rect(0, 0, 7, 9)]
        assert grid.blocs == [[Rect(0, 0, 7, 9)]]

    def test_too_small(self):
        with pytest.raises(InvalidPartitionError):
            partition((4, 4), 6, 8)

    @pytest.mark.parametrize("n, shape", [(1, (1, 1)), (2, (1, 2)), (5, (2, 3)), (6, (2, 3)), (8, (2, 4)), (9, (3, 3))])
    def test_grid_shape(self, n, shape):
        assert grid_shape(n) == shape

    @settings(max_examples=80, deadline=None)
    @given(h=st.integers(2, 80), w=st.integers(2, 80), sn=st.integers(1, 9), m=st.integers(1, 9))
    def test_tiling_is_exact(self, h, w, sn, m):
        try:
            grid = partition((h, w), sn, m)
        except InvalidPartitionError:
            return
        cover = np.zeros((h, w), dtype=int)
        assert grid.sn == sn
        for sub, group in zip(grid.sub_images, grid.blocs):
            assert len(group) == m
            sub_cover = np.zeros((h, w), dtype=int)
            for b in group:
                assert b.height >= 2 and b.width >= 2
                cover[b.top:b.top + b.height, b.left:b.left + b.width] += 1
                sub_cover[b.top:b.top + b.height, b.left:b.left + b.width] += 1
            expected = np.zeros((h, w), dtype=int)
            expected[sub.top:sub.top + sub.height, sub.left:sub.left + sub.width] = 1
            np.testing.assert_array_equal(sub_cover, expected)
        np.testing.assert_array_equal(cover, 1)


class TestBlocFeatures:
    def test_constant_image(self):
        q = quantize(np.full((40, 40), 77), 32)
        feats = bloc_features(partition(q.pixels.shape, 4, 4), q)
        for group in feats:
            np.testing.assert_array_equal(group, np.tile([0, 1, 0, 0], (4, 1)))

    def test_reference_shape(self, rng):
        q = quantize(rng.integers(0, 256, size=(64, 64)), 32)
        feats = bloc_features(partition(q.pixels.shape, 6, 8), q)
        assert [f.shape for f in feats] == [(8, 4)] * 6

    def test_matches_cropped_texture_vector(self, rng):
        img = rng.integers(0, 256, size=(30, 45))
        q = quantize(img, 16)
        cfg = GlcmConfig(levels=16)
        grid = partition(img.shape, 3, 4)
        feats = bloc_features(grid, q, cfg)
        for group, vecs in zip(grid.blocs, feats):
            for b, v in zip(group, vecs):
                crop = img[b.top:b.top + b.height, b.left:b.left + b.width]
                np.testing.assert_array_equal(v, texture_vector(quantize(crop, 16), cfg))


class TestKmeans:
    def test_k_equals_n(self, rng):
        X = rng.random((6, 4))
        model = kmeans(X, 6, seed=1)
        assert model.inertia == 0.0

    def test_separated_groups(self, rng):
        a = rng.normal(0, 0.1, size=(20, 3))
        b = rng.normal(10, 0.1, size=(15, 3))
        X = np.vstack([a, b])
        labels = kmeans(X, 2, seed=3).labels
        assert len(set(labels[:20])) == 1 and len(set(labels[20:])) == 1
        assert labels[0] != labels[20]

    def test_deterministic(self, rng):
        X = rng.random((40, 4))
        m1, m2 = kmeans(X, 3, seed=9), kmeans(X, 3, seed=9)
        np.testing.assert_array_equal(m1.labels, m2.labels)
        np.testing.assert_array_equal(m1.centroids, m2.centroids)

    def test_k_too_large(self):
        with pytest.raises(InvalidParameterError):
            kmeans(np.zeros((2, 4)), 3)

    def test_identical_points(self):
        model = kmeans(np.ones((8, 4)), 3, seed=0)
        np.testing.assert_array_equal(model.centroids, np.ones((3, 4)))
        assert model.inertia == 0.0

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(2, 30), k=st.integers(1, 5), seed=st.integers(0, 1000))
    def test_inertia_monotone_and_nearest_assignment(self, n, k, seed):
        k = min(k, n)
        X = np.random.default_rng(seed).random((n, 3)).round(2)  # rounding creates ties/duplicates
        model = kmeans(X, k, seed=seed)
        hist = np.array(model.inertia_history)
        assert np.all(np.diff(hist) <= 1e-12)
        d = ((X[:, None, :] - model.centroids[None]) ** 2).sum(axis=2)
        np.testing.assert_array_equal(model.labels, np.argmin(d, axis=1))
        assert np.all(model.labels < k)


class TestRepresentatives:
    def test_single_cluster_is_mean(self, rng):
        X = rng.random((10, 4))
        reps = cluster_representatives(kmeans(X, 1))
        np.testing.assert_allclose(reps, [X.mean(axis=0)], rtol=1e-14)

    def test_sort_rule(self):
        C = np.array([[0.5, 0, 0, 0], [0.1, 9, 9, 9], [0.1, 1, 0, 0]])
        model = ClusterModel(C, np.array([0, 1, 2]), [0.0], 0)
        np.testing.assert_array_equal(
            cluster_representatives(model), [[0.1, 1, 0, 0], [0.1, 9, 9, 9], [0.5, 0, 0, 0]]
        )

    def test_reference_size(self, rng):
        reps = cluster_representatives(kmeans(rng.random((8, 4)), 3))
        assert reps.shape == (3, 4)


class TestTransaction:
    def test_reference_dim(self, rng):
        t = build_transaction(rng.integers(0, 256, (64, 64)), 1, PipelineConfig(), "img")
        assert t.dim == 72
        assert t.label == 1 and t.source_id == "img"

    def test_constant_image(self):
        t = build_transaction(np.full((48, 48), 200), 0)
        np.testing.assert_array_equal(t.values, np.tile([0, 1, 0, 0], 18))

    def test_deterministic(self, rng):
        img = rng.integers(0, 256, (50, 70))
        a, b = extract_features(img), extract_features(img)
        assert a.tobytes() == b.tobytes()

    def test_independent_of_dataset_order(self, rng):
        imgs = [rng.integers(0, 256, (40, 40)) for _ in range(3)]
        forward = [extract_features(i) for i in imgs]
        backward = [extract_features(i) for i in reversed(imgs)][::-1]
        for f, b in zip(forward, backward):
            assert f.tobytes() == b.tobytes()

    def test_center_crop(self, rng):
        img = np.zeros((100, 100), dtype=int)
        img[25:75, 25:75] = rng.integers(0, 256, (50, 50))
        cropped = extract_features(img[25:75, 25:75])
        np.testing.assert_array_equal(extract_features(img, PipelineConfig(center_crop=0.5)), cropped)

    def test_partition_error_propagates(self):
        with pytest.raises(InvalidPartitionError):
            build_transaction(np.zeros((4, 4)), 0)

    def test_config_validation(self):
        with pytest.raises(InvalidParameterError):
            PipelineConfig(m_blocs=2, l_clusters=3)


class TestNormalize:
    def test_min_max(self):
        ts = [Transaction(np.array([v, 5.0]), 0) for v in (2.0, 4.0, 6.0)]
        scaled, scaler = normalize_dataset(ts)
        np.testing.assert_array_equal([t.values[0] for t in scaled], [0, 0.5, 1])
        np.testing.assert_array_equal([t.values[1] for t in scaled], [0, 0, 0])

    def test_held_out_not_clamped(self):
        scaler = MinMaxScaler().fit(np.array([[2.0], [6.0]]))
        assert scaler.transform(np.array([[8.0]]))[0, 0] == 1.5

    def test_needs_two(self):
        with pytest.raises(InvalidParameterError):
            normalize_dataset([Transaction(np.zeros(3), 0)])
