import numpy as np
import pytest
from hypothesis import given, strategies as st

from a3s import (Dataset, IsotonicModel, build_neighbor_graph, build_store,
                 build_training_pairs, calibrate, fit_isotonic, fuse_views,
                 generate_pseudo_labels, predict_pair_probability)
from a3s.pairwise import default_pseudo_k

from oracles import brute_ari, brute_monotone_fit


class TestPseudoLabels:
    def test_two_blobs_recovered(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0, 1, (50, 2)), rng.normal(50, 1, (50, 2))])
        ds = Dataset(X)
        pseudo = generate_pseudo_labels(ds, 2, seed=0)
        truth = [0] * 50 + [1] * 50
        assert brute_ari(list(pseudo), truth) == pytest.approx(1.0)

    def test_k_one_degenerate(self):
        ds = Dataset(np.ones((5, 2)))
        assert generate_pseudo_labels(ds, 1, seed=0).tolist() == [0] * 5

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        ds = Dataset(rng.normal(size=(40, 3)))
        a = generate_pseudo_labels(ds, 5, seed=9)
        b = generate_pseudo_labels(ds, 5, seed=9)
        assert np.array_equal(a, b)

    def test_rejects_bad_k(self):
        ds = Dataset(np.zeros((4, 1)))
        with pytest.raises(ValueError):
            generate_pseudo_labels(ds, 0, seed=0)
        with pytest.raises(ValueError):
            generate_pseudo_labels(ds, 5, seed=0)

    def test_default_k(self):
        assert default_pseudo_k(100) == 10
        assert default_pseudo_k(2) == 2


class TestTrainingPairs:
    def graph_one_pair(self):
        ds = Dataset(np.array([[0.0], [2.0]]))
        return build_neighbor_graph(ds, 1)

    def test_equal_pseudo_gives_target_one(self):
        d, y = build_training_pairs(self.graph_one_pair(), np.array([3, 3]))
        assert d.tolist() == [2.0] and y.tolist() == [1.0]

    def test_unequal_pseudo_gives_target_zero(self):
        d, y = build_training_pairs(self.graph_one_pair(), np.array([0, 1]))
        assert y.tolist() == [0.0]

    def test_symmetric_edges_dedup(self):
        ds = Dataset(np.array([[0.0], [1.0], [9.0]]))
        graph = build_neighbor_graph(ds, 2)
        d, y = build_training_pairs(graph, np.zeros(3, dtype=int))
        assert len(d) == 3  # pairs (0,1), (0,2), (1,2) each once

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            build_training_pairs(self.graph_one_pair(), np.zeros(5))


class TestIsotonic:
    def test_already_monotone(self):
        model = fit_isotonic(np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0, 0.0]),
                             epsilon=0.01)
        assert model.values.tolist() == pytest.approx([0.99, 0.99, 0.01])

    def test_violating_pair_pooled(self):
        model = fit_isotonic(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
        assert model.values.tolist() == pytest.approx([0.5, 0.5])

    def test_constant_ones(self):
        model = fit_isotonic(np.array([1.0, 2.0, 5.0]), np.ones(3), epsilon=1e-4)
        assert np.allclose(model.values, 1 - 1e-4)

    def test_duplicate_distances_preaveraged(self):
        model = fit_isotonic(np.array([1.0, 1.0, 2.0]), np.array([1.0, 0.0, 0.0]))
        assert model.knots.tolist() == [1.0, 2.0]
        assert model.values.tolist() == pytest.approx([0.5, 1e-4])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            fit_isotonic(np.array([]), np.array([]))

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            fit_isotonic(np.array([1.0]), np.array([1.0]), epsilon=0.7)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8))
    def test_pav_matches_brute_force_level_sets(self, targets):
        d = np.arange(1.0, len(targets) + 1.0)
        model = fit_isotonic(d, np.array(targets), epsilon=1e-9)
        expect = np.clip(brute_monotone_fit(targets), 1e-9, 1 - 1e-9)
        assert np.allclose(model.values, expect, atol=1e-9)

    @given(st.lists(st.tuples(st.floats(0.0, 10.0), st.integers(0, 1)),
                    min_size=1, max_size=40))
    def test_prediction_monotone_non_increasing(self, pairs):
        d = np.array([p[0] for p in pairs])
        y = np.array([float(p[1]) for p in pairs])
        model = fit_isotonic(d, y)
        grid = np.linspace(-0.0, 11.0, 50)
        preds = model.predict(grid)
        assert np.all(np.diff(preds) <= 1e-12)
        assert np.all((preds >= 1e-4 - 1e-15) & (preds <= 1 - 1e-4 + 1e-15))


class TestPrediction:
    def model(self):
        return IsotonicModel(np.array([1.0, 3.0]), np.array([0.8, 0.4]))

    def test_clamp_below(self):
        assert predict_pair_probability(self.model(), 0.0) == pytest.approx(0.8)

    def test_clamp_above(self):
        assert predict_pair_probability(self.model(), 9.0) == pytest.approx(0.4)

    def test_linear_interpolation(self):
        assert predict_pair_probability(self.model(), 2.0) == pytest.approx(0.6)

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            predict_pair_probability(self.model(), -1.0)

    def test_table_round_trip(self):
        model = self.model()
        again = IsotonicModel.from_table(model.to_table())
        assert np.array_equal(again.knots, model.knots)
        assert np.array_equal(again.values, model.values)


class TestFuseViews:
    def test_single_view_identity(self):
        assert fuse_views([0.7]) == pytest.approx(0.7)

    def test_symmetric_neutrality(self):
        assert fuse_views([0.5, 0.5]) == pytest.approx(0.5)

    def test_two_view_value(self):
        assert fuse_views([0.8, 0.9]) == pytest.approx(0.72 / 0.74, abs=1e-12)

    def test_rejects_boundary(self):
        with pytest.raises(ValueError):
            fuse_views([0.0, 0.5])
        with pytest.raises(ValueError):
            fuse_views([1.0])

    @given(st.lists(st.floats(0.01, 0.99), min_size=2, max_size=5),
           st.randoms(use_true_random=False))
    def test_permutation_symmetric(self, probs, rnd):
        shuffled = list(probs)
        rnd.shuffle(shuffled)
        assert fuse_views(shuffled) == pytest.approx(fuse_views(probs), abs=1e-12)

    @given(st.floats(0.02, 0.98))
    def test_half_is_neutral(self, p):
        assert fuse_views([p, 0.5]) == pytest.approx(p, abs=1e-9)


class TestStore:
    def test_single_pair_value(self):
        ds = Dataset(np.array([[0.0], [2.0]]))
        graph = build_neighbor_graph(ds, 1)
        model = IsotonicModel(np.array([1.0, 3.0]), np.array([0.9, 0.3]))
        store = build_store(graph, model, ds)
        assert store.get(0, 1) == pytest.approx(model.predict(2.0))
        assert store.get(1, 0) == store.get(0, 1)

    def test_absent_pair_default(self):
        ds = Dataset(np.array([[0.0], [1.0], [50.0]]))
        graph = build_neighbor_graph(ds, 1)
        model = IsotonicModel(np.array([1.0]), np.array([0.9]))
        store = build_store(graph, model, ds)
        assert store.get(0, 2) == store.epsilon

    def test_multi_view_fusion_matches_manual(self):
        rng = np.random.default_rng(0)
        base = rng.normal(size=(6, 2))
        ds = Dataset(base, views=[base, base * 2.0])
        graph = build_neighbor_graph(ds, 2)
        m1 = IsotonicModel(np.array([0.5, 4.0]), np.array([0.9, 0.2]))
        m2 = IsotonicModel(np.array([0.5, 4.0]), np.array([0.8, 0.3]))
        store = build_store(graph, [m1, m2], ds)
        s, t, _ = graph.pairs()
        s0, t0 = int(s[0]), int(t[0])
        d1 = np.linalg.norm(base[s0] - base[t0])
        manual = fuse_views([m1.predict(d1), m2.predict(d1 * 2.0)])
        assert store.get(s0, t0) == pytest.approx(manual, abs=1e-12)

    def test_calibration_separates_blobs(self, two_blob_dataset):
        graph = build_neighbor_graph(two_blob_dataset, 40)
        store = calibrate(two_blob_dataset, graph, seed=0)
        labels = two_blob_dataset.labels
        same, cross = [], []
        s, t, _ = graph.pairs()
        for a, b in zip(s, t):
            (same if labels[a] == labels[b] else cross).append(store.get(int(a), int(b)))
        assert np.mean(same) > np.mean(cross)

    def test_partners_round_trip(self):
        ds = Dataset(np.array([[0.0], [1.0], [2.5]]))
        graph = build_neighbor_graph(ds, 2)
        model = IsotonicModel(np.array([1.0, 3.0]), np.array([0.9, 0.3]))
        store = build_store(graph, model, ds)
        partners, logits = store.partners(1)
        assert set(partners.tolist()) == {0, 2}
        assert len(logits) == 2
