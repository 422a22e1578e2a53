"""End-to-end orchestration shared by the CLI and the HTTP service:
component filtering, per-component splits, feature building, training,
prediction, explanation, and seeded evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import anchors as anchors_mod
from . import paths as paths_mod
from . import verify as verify_mod
from .evaluation import ScoredLabel
from .graph import PropertyGraph, connected_components
from .predictor import (
    Hyperparameters,
    LinkPrediction,
    ScorerModel,
    SubgraphTask,
    compute_position_features,
    pair_features,
    predict_watchlist,
    score_link,
    train,
)
from .sampler import make_split


@dataclass
class PipelineConfig:
    min_component_size: int = 10
    split_ratio: float = 0.10
    anchor_count: int = 64
    bfs_cutoff: int = 6
    threshold: float = 0.5
    seed: int = 0
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)


def build_tasks(
    graph: PropertyGraph, config: PipelineConfig
) -> Tuple[List[PropertyGraph], List[SubgraphTask]]:
    """Component filter, per-component split, and position features on each
    component's training graph."""
    components, _ = connected_components(graph, min_size=config.min_component_size)
    tasks = []
    for component in components:
        split = make_split(component, ratio=config.split_ratio, seed=config.seed)
        features = compute_position_features(
            split.training_graph,
            k=config.anchor_count,
            seed=config.seed,
            cutoff=config.bfs_cutoff,
        )
        tasks.append(SubgraphTask(graph=component, split=split, features=features))
    return components, tasks


def train_model(tasks: Sequence[SubgraphTask], config: PipelineConfig) -> ScorerModel:
    hp = Hyperparameters(**{**config.hyperparameters.to_dict(), "seed": config.seed})
    return train(tasks, hp)


def serving_features(graph: PropertyGraph, config: PipelineConfig) -> Dict[str, np.ndarray]:
    """Per-component position features over the full (untrimmed) graph."""
    components, _ = connected_components(graph, min_size=1)
    features: Dict[str, np.ndarray] = {}
    for component in components:
        features.update(
            compute_position_features(
                component, k=config.anchor_count, seed=config.seed, cutoff=config.bfs_cutoff
            )
        )
    return features


def score_split(
    model: ScorerModel, tasks: Sequence[SubgraphTask]
) -> List[ScoredLabel]:
    """Held-out positives and matched negatives scored by the model."""
    items = []
    for task in tasks:
        for sample in list(task.split.positives) + list(task.split.negatives):
            pair = pair_features(
                task.features[sample.u],
                task.features[sample.v],
                task.graph.node(sample.u),
                task.graph.node(sample.v),
            )
            items.append(
                ScoredLabel(score_link(model, pair), 1 if sample.label == "positive" else 0)
            )
    return items


def run_seed(graph: PropertyGraph, config: PipelineConfig, seed: int) -> List[ScoredLabel]:
    """Full split/train/score cycle for one seed, for multi-seed reports."""
    cfg = PipelineConfig(**{**config.__dict__, "seed": seed})
    _, tasks = build_tasks(graph, cfg)
    model = train_model(tasks, cfg)
    return score_split(model, tasks)


def watchlist_predictions(
    model: ScorerModel,
    graph: PropertyGraph,
    features: Dict[str, np.ndarray],
    watchlist: Sequence[str],
    threshold: float = 0.5,
    top_n: int = 100,
) -> List[LinkPrediction]:
    return predict_watchlist(model, graph, features, watchlist, threshold=threshold, top_n=top_n)


@dataclass
class Explainers:
    """The three explanation backends built once per loaded model/graph."""

    surrogate: Optional[anchors_mod.Surrogate]
    ranker: Optional[paths_mod.PathRanker]
    index: Optional[verify_mod.CorpusIndex]


def build_explainers(
    graph: PropertyGraph,
    model: ScorerModel,
    features: Dict[str, np.ndarray],
    config: PipelineConfig,
    corpus: Optional[Sequence[verify_mod.Document]] = None,
) -> Explainers:
    """Distill the surrogate, train the path ranker, and index the corpus.

    The surrogate's instance pool mixes all existing edges with an equal
    count of seeded non-edges so both predictor decisions are represented.
    """
    import random as _random

    rng = _random.Random(config.seed)
    edge_pairs = sorted({tuple(sorted((e.source, e.target))) for e in graph.edges})
    node_ids = graph.node_ids
    non_edges = set()
    attempts = 0
    while len(non_edges) < len(edge_pairs) and attempts < 50 * len(edge_pairs) + 100:
        attempts += 1
        u, v = rng.sample(node_ids, 2)
        pair = tuple(sorted((u, v)))
        if not graph.has_edge(*pair):
            non_edges.add(pair)
    pool = edge_pairs + sorted(non_edges)
    surrogate = None
    if pool:
        instances, labels = anchors_mod.build_instances(
            graph, model, features, pool, threshold=config.threshold
        )
        try:
            surrogate = anchors_mod.fit_surrogate(instances, labels, seed=config.seed)
        except anchors_mod.AnchorsError:
            surrogate = None

    ranker = None
    try:
        positive_pairs = edge_pairs
        negative_pairs = sorted(non_edges)
        if positive_pairs and negative_pairs:
            ranker = paths_mod.train_path_ranker(
                graph, positive_pairs, negative_pairs, seed=config.seed
            )
    except paths_mod.EmptyVocabulary:
        ranker = None

    index = verify_mod.index_corpus(list(corpus)) if corpus else None
    return Explainers(surrogate=surrogate, ranker=ranker, index=index)


def display_name(graph: PropertyGraph, node_id: str) -> str:
    return str(graph.node(node_id).attribute_map().get("name", node_id))


class NoPathEvidence(Exception):
    pass


class ExplainerUnavailable(Exception):
    pass


def explain_link(
    graph: PropertyGraph,
    explainers: Explainers,
    u: str,
    v: str,
    technique: str,
    config: Optional[PipelineConfig] = None,
    model: Optional[ScorerModel] = None,
    features: Optional[Dict[str, np.ndarray]] = None,
) -> dict:
    """Dispatch to one explanation technique; returns the payload record."""
    config = config or PipelineConfig()
    if technique == "verification":
        if explainers.index is None:
            raise ExplainerUnavailable("no corpus indexed")
        result = verify_mod.verify_link(
            explainers.index, display_name(graph, u), display_name(graph, v)
        )
        return result.to_record()
    if technique == "anchors":
        if explainers.surrogate is None or model is None or features is None:
            raise ExplainerUnavailable("no surrogate available")
        instances, _ = anchors_mod.build_instances(
            graph, model, features, [(u, v)], threshold=config.threshold
        )
        rule = anchors_mod.explain_anchor(
            explainers.surrogate, instances[0], seed=config.seed
        )
        return rule.to_record()
    if technique == "path_ranking":
        if explainers.ranker is None:
            raise ExplainerUnavailable("no path ranker available")
        paths = paths_mod.enumerate_paths(graph, u, v)
        if not paths:
            raise NoPathEvidence("no path evidence")
        ranked = paths_mod.rank_paths(explainers.ranker, graph, u, v, paths)
        return ranked.to_record()
    raise ValueError(f"unknown technique {technique!r}")
