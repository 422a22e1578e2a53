import math
import random

import numpy as np
import pytest

from linkexplain.graph import Edge, Node, PropertyGraph, bfs_distances
from linkexplain.predictor import (
    DimensionMismatch,
    EmptyGraph,
    Hyperparameters,
    ScorerModel,
    SubgraphTask,
    bce_loss_and_grad,
    compute_position_features,
    pair_features,
    position_features,
    predict_watchlist,
    score_link,
    select_anchors,
    train,
)
from linkexplain.sampler import make_split


def make_graph(ids, edges, labels=None, attrs=None):
    labels = labels or {}
    attrs = attrs or {}
    nodes = [
        Node(i, labels.get(i, "Person"), tuple(sorted(attrs.get(i, {}).items()))) for i in ids
    ]
    return PropertyGraph(nodes, [Edge(u, v, "knows") for u, v in edges])


def random_graph(n, m, seed):
    rng = random.Random(seed)
    ids = [f"n{i:03d}" for i in range(n)]
    edges = set()
    while len(edges) < m:
        edges.add(tuple(sorted(rng.sample(ids, 2))))
    return make_graph(ids, sorted(edges))


class TestAnchors:
    def test_clamp_to_graph_size(self):
        g = make_graph("ABCDE", [("A", "B")])
        anchors = select_anchors(g, k=64, seed=0)
        assert sorted(anchors.anchors) == ["A", "B", "C", "D", "E"]

    def test_determinism(self):
        g = random_graph(100, 200, seed=1)
        assert select_anchors(g, k=10, seed=5) == select_anchors(g, k=10, seed=5)

    def test_64_distinct_on_large_graph(self):
        g = random_graph(300, 600, seed=2)
        anchors = select_anchors(g, k=64, seed=3)
        assert len(anchors.anchors) == 64
        assert len(set(anchors.anchors)) == 64

    def test_empty_graph(self):
        with pytest.raises(EmptyGraph):
            select_anchors(PropertyGraph([], []), k=4, seed=0)


class TestPositionFeatures:
    def test_formula(self):
        g = make_graph("ABCD", [("A", "B"), ("B", "C")])
        anchors = select_anchors(g, k=4, seed=0)
        table = bfs_distances(g, list(anchors.anchors), cutoff=6)
        feats = position_features(g, anchors, table)
        idx = {a: i for i, a in enumerate(anchors.anchors)}
        # anchor sees itself at 1.0
        for a in anchors.anchors:
            assert feats[a][idx[a]] == 1.0
        # d(A, C) = 2 -> 1/3
        assert feats["C"][idx["A"]] == pytest.approx(1 / 3)
        # D is disconnected -> zeros except its own anchor slot
        assert feats["D"][idx["D"]] == 1.0
        assert sum(feats["D"]) == 1.0

    def test_entries_in_unit_interval_and_unique_one(self):
        g = random_graph(40, 80, seed=6)
        anchors = select_anchors(g, k=8, seed=1)
        table = bfs_distances(g, list(anchors.anchors), cutoff=6)
        feats = position_features(g, anchors, table)
        for node_id, vec in feats.items():
            assert np.all(vec >= 0) and np.all(vec <= 1)
        for i, a in enumerate(anchors.anchors):
            ones = [n for n, vec in feats.items() if vec[i] == 1.0]
            assert ones == [a]

    def test_padding_to_requested_k(self):
        g = make_graph("ABC", [("A", "B")])
        feats = compute_position_features(g, k=8, seed=0)
        assert all(len(v) == 8 for v in feats.values())


class TestPairFeatures:
    def test_shape_and_blocks(self):
        n1 = Node("A", "Person", (("city", "x"),))
        n2 = Node("B", "Person", (("city", "x"), ("job", "y")))
        f = pair_features(np.array([0.5, 1.0]), np.array([0.25, 0.5]), n1, n2)
        assert len(f) == 2 * 2 + 2
        assert f[0] == pytest.approx(0.125)
        assert f[2] == pytest.approx(0.25)
        assert f[4] == pytest.approx(0.5)  # Jaccard {city:x} over {city:x, job:y}
        assert f[5] == 1.0

    def test_dimension_mismatch(self):
        n = Node("A", "Person")
        with pytest.raises(DimensionMismatch):
            pair_features(np.zeros(3), np.zeros(4), n, n)


def finite_difference_grad(weights, X, y, l2, eps=1e-6):
    grad = np.zeros_like(weights)
    for i in range(len(weights)):
        up = weights.copy()
        up[i] += eps
        down = weights.copy()
        down[i] -= eps
        grad[i] = (bce_loss_and_grad(up, X, y, l2)[0] - bce_loss_and_grad(down, X, y, l2)[0]) / (
            2 * eps
        )
    return grad


class TestTraining:
    def fixture_task(self, seed=0):
        g = random_graph(30, 70, seed=seed)
        split = make_split(g, ratio=0.2, seed=seed)
        feats = compute_position_features(split.training_graph, k=8, seed=seed)
        return SubgraphTask(graph=g, split=split, features=feats)

    def test_initial_score_is_half(self):
        model = ScorerModel(weights=np.zeros(10), k=4, hyperparameters=Hyperparameters())
        assert score_link(model, np.random.default_rng(0).random(10)) == 0.5

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(10, 6))
        y = (rng.random(10) > 0.5).astype(float)
        for _ in range(10):
            w = rng.normal(size=6)
            _, analytic = bce_loss_and_grad(w, X, y, l2=1e-3)
            numeric = finite_difference_grad(w, X, y, l2=1e-3)
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel < 1e-5

    def test_separable_fixture_converges(self):
        # disjoint endpoint sets with all-ones vs all-zeros features: the
        # product block linearly separates the classes
        from linkexplain.sampler import LinkSample, SampleSplit

        pos_ids = [f"p{i}" for i in range(10)]
        neg_ids = [f"q{i}" for i in range(10)]
        g = make_graph(pos_ids + neg_ids, [(pos_ids[i], pos_ids[i + 1]) for i in range(9)])
        feats = {i: np.ones(4) for i in pos_ids}
        feats.update({i: np.zeros(4) for i in neg_ids})
        positives = [
            LinkSample(pos_ids[i], pos_ids[i + 1], "positive", "held_out_edge") for i in range(5)
        ]
        negatives = [
            LinkSample(neg_ids[2 * i], neg_ids[2 * i + 1], "negative", "corrupted")
            for i in range(5)
        ]
        split = SampleSplit(training_graph=g, positives=positives, negatives=negatives, seed=0)
        task = SubgraphTask(graph=g, split=split, features=feats)
        hp = Hyperparameters(learning_rate=1.0, epochs=500, l2=0.0, seed=0)
        model = train([task], hp)
        assert model.training_log[-1] < 0.05

    def test_loss_trend_and_finiteness(self):
        model = train([self.fixture_task()], Hyperparameters(epochs=50, seed=1))
        assert all(math.isfinite(x) for x in model.training_log)
        assert model.training_log[-1] <= model.training_log[0]

    def test_determinism(self):
        a = train([self.fixture_task()], Hyperparameters(epochs=30, seed=2))
        b = train([self.fixture_task()], Hyperparameters(epochs=30, seed=2))
        assert np.array_equal(a.weights, b.weights)

    def test_model_round_trip(self):
        model = train([self.fixture_task()], Hyperparameters(epochs=10, seed=3))
        restored = ScorerModel.from_json(model.to_json())
        assert np.allclose(restored.weights, model.weights)
        assert restored.k == model.k
        assert restored.seed == 3


class TestScoreLink:
    def test_hand_computed_sigmoid(self):
        w = np.array([0.3, -0.2, 0.5])
        p = np.array([1.0, 2.0, 0.5])
        model = ScorerModel(weights=w, k=0, hyperparameters=Hyperparameters())
        z = float(w @ p)
        assert score_link(model, p) == pytest.approx(1 / (1 + math.exp(-z)), abs=1e-12)

    def test_monotone_in_dot_product(self):
        w = np.ones(4)
        model = ScorerModel(weights=w, k=1, hyperparameters=Hyperparameters())
        low = score_link(model, np.array([0.1, 0.1, 0.0, 1.0]))
        high = score_link(model, np.array([0.9, 0.9, 0.0, 1.0]))
        assert high > low


class TestWatchlist:
    def setup_model(self, g, seed=0):
        split = make_split(g, ratio=0.2, seed=seed)
        feats = compute_position_features(split.training_graph, k=8, seed=seed)
        model = train(
            [SubgraphTask(graph=g, split=split, features=feats)],
            Hyperparameters(epochs=30, seed=seed),
        )
        return model, feats

    def test_empty_watchlist(self):
        g = random_graph(20, 40, seed=0)
        model, feats = self.setup_model(g)
        assert predict_watchlist(model, g, feats, [], threshold=0.0) == []

    def test_all_adjacent_excluded(self):
        g = make_graph("WABC", [("W", "A"), ("W", "B"), ("W", "C"), ("A", "B")])
        feats = compute_position_features(g, k=4, seed=0)
        model = ScorerModel(weights=np.zeros(10), k=4, hyperparameters=Hyperparameters())
        assert predict_watchlist(model, g, feats, ["W"], threshold=0.0) == []

    def test_matches_brute_force_oracle(self):
        g = random_graph(50, 100, seed=7)
        model, feats = self.setup_model(g, seed=7)
        watchlist = g.node_ids[:5]
        preds = predict_watchlist(model, g, feats, watchlist, threshold=0.4, top_n=10**6)
        expected = set()
        for w in watchlist:
            for other in g.node_ids:
                if other in watchlist or other == w or g.has_edge(w, other):
                    continue
                pf = pair_features(feats[w], feats[other], g.node(w), g.node(other))
                s = score_link(model, pf)
                if s >= 0.4:
                    expected.add((w, other))
        assert {(p.u, p.v) for p in preds} == expected
        scores = [p.score for p in preds]
        assert scores == sorted(scores, reverse=True)

    def test_rank_invariant_under_monotone_transform(self):
        g = random_graph(40, 90, seed=9)
        model, feats = self.setup_model(g, seed=9)
        pairs = []
        for w in g.node_ids[:4]:
            for other in g.node_ids[10:30]:
                if other != w and not g.has_edge(w, other):
                    pairs.append((w, other))
        logits = []
        for u, v in pairs:
            pf = pair_features(feats[u], feats[v], g.node(u), g.node(v))
            logits.append(float(model.weights @ pf))
        sigmoids = [1 / (1 + math.exp(-z)) for z in logits]
        assert np.argsort(logits).tolist() == np.argsort(sigmoids).tolist()
