"""Position-aware link scorer: anchor selection, inverse-distance features,
a logistic head trained by mini-batch gradient descent, and watchlist screening."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .graph import UNREACHABLE, DistanceTable, Node, PropertyGraph, UnknownNode, bfs_distances
from .sampler import LinkSample, SampleSplit

MODEL_FORMAT_VERSION = 1


class PredictorError(Exception):
    pass


class EmptyGraph(PredictorError):
    pass


class AnchorMissingFromTable(PredictorError):
    pass


class DimensionMismatch(PredictorError):
    pass


class NonFiniteLoss(PredictorError):
    pass


class UnknownWatchlistNode(PredictorError):
    def __init__(self, node_id: str):
        super().__init__(f"watchlist node {node_id!r} not in graph")
        self.node_id = node_id


@dataclass(frozen=True)
class AnchorSet:
    anchors: Tuple[str, ...]
    seed: int


@dataclass
class Hyperparameters:
    learning_rate: float = 0.1
    epochs: int = 200
    batch_subgraphs: int = 8
    l2: float = 1e-4
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_subgraphs": self.batch_subgraphs,
            "l2": self.l2,
            "seed": self.seed,
        }


@dataclass
class ScorerModel:
    weights: np.ndarray
    k: int
    hyperparameters: Hyperparameters
    training_log: List[float] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.hyperparameters.seed

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": MODEL_FORMAT_VERSION,
                "k": self.k,
                "weights": [float(w) for w in self.weights],
                "hyperparameters": self.hyperparameters.to_dict(),
                "seed": self.seed,
                "training_log": [float(x) for x in self.training_log],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScorerModel":
        doc = json.loads(text)
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise PredictorError(f"unsupported model format {doc.get('format_version')!r}")
        hp = Hyperparameters(**doc["hyperparameters"])
        return cls(
            weights=np.asarray(doc["weights"], dtype=float),
            k=doc["k"],
            hyperparameters=hp,
            training_log=list(doc.get("training_log", [])),
        )


@dataclass(frozen=True)
class LinkPrediction:
    u: str
    v: str
    score: float
    threshold: float
    decision: bool
    model_seed: int

    def to_record(self) -> dict:
        return {
            "u": self.u,
            "v": self.v,
            "score": self.score,
            "threshold": self.threshold,
            "decision": self.decision,
            "model_seed": self.model_seed,
        }


def select_anchors(graph: PropertyGraph, k: int = 64, seed: int = 0) -> AnchorSet:
    """k distinct nodes drawn uniformly without replacement; all nodes if |V| < k."""
    node_ids = graph.node_ids
    if not node_ids:
        raise EmptyGraph("cannot select anchors from an empty graph")
    count = min(k, len(node_ids))
    rng = random.Random(seed)
    return AnchorSet(anchors=tuple(rng.sample(node_ids, count)), seed=seed)


def position_features(
    graph: PropertyGraph, anchors: AnchorSet, table: DistanceTable, k: Optional[int] = None
) -> Dict[str, np.ndarray]:
    """Per-node vector f with f_i = 1 / (d(v, anchor_i) + 1); unreachable -> 0.

    Vectors are padded with zeros to length k so models trained with a global
    anchor budget accept components smaller than the budget.
    """
    width = k if k is not None else len(anchors.anchors)
    if width < len(anchors.anchors):
        raise ValueError("k smaller than the anchor set")
    for anchor in anchors.anchors:
        if anchor not in table.distances:
            raise AnchorMissingFromTable(anchor)
    features: Dict[str, np.ndarray] = {}
    for node_id in graph.node_ids:
        vec = np.zeros(width)
        for i, anchor in enumerate(anchors.anchors):
            d = table.get(anchor, node_id)
            if d != UNREACHABLE:
                vec[i] = 1.0 / (d + 1)
        features[node_id] = vec
    return features


def compute_position_features(
    graph: PropertyGraph, k: int = 64, seed: int = 0, cutoff: int = 6
) -> Dict[str, np.ndarray]:
    """Anchor selection + truncated BFS + feature transform in one step."""
    anchors = select_anchors(graph, k=k, seed=seed)
    table = bfs_distances(graph, list(anchors.anchors), cutoff=cutoff)
    return position_features(graph, anchors, table, k=k)


def attribute_jaccard(node_u: Node, node_v: Node) -> float:
    """Jaccard similarity of the two nodes' attribute key-value sets."""
    a = set(node_u.attributes)
    b = set(node_v.attributes)
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def pair_features(
    f_u: np.ndarray, f_v: np.ndarray, node_u: Node, node_v: Node
) -> np.ndarray:
    """[elementwise product] ++ [elementwise abs diff] ++ [Jaccard] ++ [bias 1]."""
    if f_u.shape != f_v.shape:
        raise DimensionMismatch(f"{f_u.shape} vs {f_v.shape}")
    return np.concatenate(
        [f_u * f_v, np.abs(f_u - f_v), [attribute_jaccard(node_u, node_v)], [1.0]]
    )


@dataclass
class SubgraphTask:
    """One connected component's training material."""

    graph: PropertyGraph  # original component, attribute source
    split: SampleSplit
    features: Dict[str, np.ndarray]  # computed on split.training_graph


def _task_matrix(task: SubgraphTask) -> Tuple[np.ndarray, np.ndarray]:
    rows = []
    labels = []
    for sample in list(task.split.positives) + list(task.split.negatives):
        rows.append(
            pair_features(
                task.features[sample.u],
                task.features[sample.v],
                task.graph.node(sample.u),
                task.graph.node(sample.v),
            )
        )
        labels.append(1.0 if sample.label == "positive" else 0.0)
    return np.asarray(rows), np.asarray(labels)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss_and_grad(
    weights: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0
) -> Tuple[float, np.ndarray]:
    """Mean binary cross-entropy with L2 penalty, and its analytic gradient."""
    if X.shape[1] != weights.shape[0]:
        raise DimensionMismatch(f"features {X.shape[1]} vs weights {weights.shape[0]}")
    p = sigmoid(X @ weights)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss += 0.5 * l2 * float(weights @ weights)
    grad = X.T @ (p - y) / len(y) + l2 * weights
    return float(loss), grad


def train(
    tasks: Sequence[SubgraphTask], hyperparameters: Optional[Hyperparameters] = None
) -> ScorerModel:
    """Fit the logistic head over all subgraph tasks.

    Mini-batches group whole subgraphs, batch_subgraphs at a time; subgraph
    order is reshuffled each epoch under the training seed. Weights start at
    zero, so the untrained model scores every pair 0.5.
    """
    hp = hyperparameters or Hyperparameters()
    if not tasks:
        raise PredictorError("no training tasks")
    matrices = [_task_matrix(t) for t in tasks]
    if any(len(y) == 0 for _, y in matrices):
        raise PredictorError("task with no samples")
    dim = matrices[0][0].shape[1]
    if any(X.shape[1] != dim for X, _ in matrices):
        raise DimensionMismatch("inconsistent pair-feature dimensions across tasks")
    k = (dim - 2) // 2

    weights = np.zeros(dim)
    rng = np.random.default_rng(hp.seed)
    order = np.arange(len(tasks))
    log: List[float] = []
    for _ in range(hp.epochs):
        rng.shuffle(order)
        epoch_losses = []
        for start in range(0, len(order), hp.batch_subgraphs):
            chunk = order[start : start + hp.batch_subgraphs]
            X = np.vstack([matrices[i][0] for i in chunk])
            y = np.concatenate([matrices[i][1] for i in chunk])
            loss, grad = bce_loss_and_grad(weights, X, y, l2=hp.l2)
            if not np.isfinite(loss):
                raise NonFiniteLoss("training diverged; lower the learning rate")
            weights = weights - hp.learning_rate * grad
            epoch_losses.append(loss)
        log.append(float(np.mean(epoch_losses)))
    return ScorerModel(weights=weights, k=k, hyperparameters=hp, training_log=log)


def score_link(model: ScorerModel, pair: np.ndarray) -> float:
    """sigmoid(weights . pair)."""
    if pair.shape[0] != model.weights.shape[0]:
        raise DimensionMismatch(f"pair {pair.shape[0]} vs weights {model.weights.shape[0]}")
    return float(sigmoid(np.asarray([model.weights @ pair]))[0])


def predict_watchlist(
    model: ScorerModel,
    graph: PropertyGraph,
    features: Mapping[str, np.ndarray],
    watchlist: Iterable[str],
    threshold: float = 0.5,
    top_n: int = 100,
) -> List[LinkPrediction]:
    """Score every (watchlist, non-watchlist) non-edge pair; keep decisions
    at or above threshold, best first, at most top_n."""
    watch = sorted(set(watchlist))
    for node_id in watch:
        if node_id not in graph:
            raise UnknownWatchlistNode(node_id)
    watch_set = set(watch)
    predictions: List[LinkPrediction] = []
    for w in watch:
        adjacent = set(graph.neighbors(w))
        for other in graph.node_ids:
            if other in watch_set or other in adjacent or other == w:
                continue
            pair = pair_features(features[w], features[other], graph.node(w), graph.node(other))
            score = score_link(model, pair)
            if score >= threshold:
                predictions.append(
                    LinkPrediction(
                        u=w,
                        v=other,
                        score=score,
                        threshold=threshold,
                        decision=True,
                        model_seed=model.seed,
                    )
                )
    predictions.sort(key=lambda p: (-p.score, p.u, p.v))
    return predictions[:top_n]
