"""Path-based explanation: enumerate existing simple paths between a pair and
rank them with a bootstrap tree ensemble over binary path-type features."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graph import PropertyGraph, UnknownNode


class PathError(Exception):
    pass


class EmptyVocabulary(PathError):
    """No connecting paths exist anywhere in the training pairs."""


class InvalidPath(PathError):
    pass


@dataclass(frozen=True)
class Path:
    nodes: Tuple[str, ...]
    relations: Tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.relations)

    def to_record(self) -> dict:
        return {"nodes": list(self.nodes), "relations": list(self.relations)}


PathType = Tuple[str, ...]


def path_type(path: Path, graph: Optional[PropertyGraph] = None, include_labels: bool = False) -> PathType:
    """Node-free abstraction of a path: its relation sequence, with intermediate
    node labels interleaved when the graph's labels are heterogeneous."""
    if not include_labels or graph is None:
        return tuple(path.relations)
    parts: List[str] = []
    for i, relation in enumerate(path.relations):
        parts.append(relation)
        if i < len(path.relations) - 1:
            parts.append(graph.node(path.nodes[i + 1]).label)
    return tuple(parts)


def validate_path(graph: PropertyGraph, path: Path) -> None:
    if len(path.nodes) != len(path.relations) + 1:
        raise InvalidPath("node/relation length mismatch")
    if len(set(path.nodes)) != len(path.nodes):
        raise InvalidPath("path repeats a node")
    for i, relation in enumerate(path.relations):
        u, v = path.nodes[i], path.nodes[i + 1]
        if (v, relation) not in graph.neighbor_relations(u):
            raise InvalidPath(f"no {relation!r} edge between {u!r} and {v!r}")


def enumerate_paths(
    graph: PropertyGraph,
    u: str,
    v: str,
    max_len: int = 4,
    max_count: int = 200,
    include_direct: bool = False,
) -> List[Path]:
    """All simple paths from u to v up to max_len edges, shortest first,
    truncated at max_count. The direct u-v edge is skipped by default since
    the pair being explained usually is not an existing link."""
    for node_id in (u, v):
        if node_id not in graph:
            raise UnknownNode(node_id)
    if u == v:
        raise PathError("endpoints must differ")
    results: List[Path] = []
    for length in range(1, max_len + 1):
        found: List[Path] = []

        def dfs(current: str, nodes: Tuple[str, ...], relations: Tuple[str, ...]) -> None:
            remaining = length - len(relations)
            if remaining == 0:
                if current == v:
                    found.append(Path(nodes, relations))
                return
            for nbr, relation in graph.neighbor_relations(current):
                if nbr in nodes:
                    continue
                # the last hop must land on v; earlier hops must avoid it
                if (remaining == 1) != (nbr == v):
                    continue
                dfs(nbr, nodes + (nbr,), relations + (relation,))

        dfs(u, (u,), ())
        found.sort(key=lambda p: (p.nodes, p.relations))
        for path in found:
            if length == 1 and not include_direct:
                continue
            results.append(path)
            if len(results) >= max_count:
                return results
    return results


# ---------------------------------------------------------------------------
# bootstrap tree ensemble over binary path-type features


@dataclass
class _TreeNode:
    feature: int = -1  # -1 marks a leaf
    prediction: float = 0.0
    left: Optional["_TreeNode"] = None  # feature present
    right: Optional["_TreeNode"] = None  # feature absent


def _gini(y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    p = float(np.mean(y))
    return 2 * p * (1 - p)


def _build_tree(
    X: np.ndarray, y: np.ndarray, depth: int, max_depth: int, importances: np.ndarray
) -> _TreeNode:
    if depth >= max_depth or len(y) < 2 or len(np.unique(y)) == 1:
        return _TreeNode(prediction=float(np.mean(y)) if len(y) else 0.0)
    base = _gini(y)
    best_gain, best_feature = 0.0, -1
    for f in range(X.shape[1]):
        mask = X[:, f] == 1
        n_true = int(mask.sum())
        if n_true == 0 or n_true == len(y):
            continue
        gain = base - (n_true * _gini(y[mask]) + (len(y) - n_true) * _gini(y[~mask])) / len(y)
        if gain > best_gain + 1e-12:
            best_gain, best_feature = gain, f
    if best_feature < 0:
        return _TreeNode(prediction=float(np.mean(y)))
    importances[best_feature] += best_gain * len(y)
    mask = X[:, best_feature] == 1
    node = _TreeNode(feature=best_feature, prediction=float(np.mean(y)))
    node.left = _build_tree(X[mask], y[mask], depth + 1, max_depth, importances)
    node.right = _build_tree(X[~mask], y[~mask], depth + 1, max_depth, importances)
    return node


def _predict_tree(node: _TreeNode, x: np.ndarray) -> float:
    while node.feature >= 0:
        node = node.left if x[node.feature] == 1 else node.right  # type: ignore[assignment]
    return node.prediction


@dataclass
class PathRanker:
    vocabulary: List[PathType]
    importances: Dict[PathType, float]
    trees: List[_TreeNode] = field(repr=False, default_factory=list)
    oob_accuracy: Optional[float] = None
    seed: int = 0
    max_len: int = 4
    include_labels: bool = False

    def feature_vector(self, types: Sequence[PathType]) -> np.ndarray:
        present = set(types)
        return np.array([1.0 if t in present else 0.0 for t in self.vocabulary])

    def predict(self, types: Sequence[PathType]) -> float:
        x = self.feature_vector(types)
        return float(np.mean([_predict_tree(t, x) for t in self.trees]))


@dataclass
class RankedPathExplanation:
    u: str
    v: str
    paths: List[Tuple[Path, float]]
    ranker_version: str = "ensemble-v1"

    @property
    def top_path(self) -> Optional[Path]:
        return self.paths[0][0] if self.paths else None

    def to_record(self) -> dict:
        return {
            "pair": {"u": self.u, "v": self.v},
            "paths": [
                {**path.to_record(), "score": score} for path, score in self.paths
            ],
            "top_path": self.top_path.to_record() if self.top_path else None,
            "ranker_version": self.ranker_version,
        }


def pair_path_types(
    graph: PropertyGraph,
    u: str,
    v: str,
    max_len: int = 4,
    max_count: int = 200,
    include_labels: bool = False,
) -> List[PathType]:
    paths = enumerate_paths(graph, u, v, max_len=max_len, max_count=max_count)
    return sorted({path_type(p, graph, include_labels) for p in paths})


def train_path_ranker(
    graph: PropertyGraph,
    positive_pairs: Sequence[Tuple[str, str]],
    negative_pairs: Sequence[Tuple[str, str]],
    max_len: int = 4,
    seed: int = 0,
    num_trees: int = 50,
    max_depth: int = 3,
) -> PathRanker:
    """Fit the ensemble on binary presence features of observed path types.

    Bootstrap indices come from one seeded generator consumed tree by tree,
    so the whole schedule is reproducible from the seed. Records out-of-bag
    accuracy when any sample is left out of some bootstrap.
    """
    if not positive_pairs or not negative_pairs:
        raise PathError("both positive and negative pairs are required")
    labels = sorted({graph.node(n).label for n in graph.node_ids})
    include_labels = len(labels) > 1
    per_pair: List[List[PathType]] = []
    for u, v in list(positive_pairs) + list(negative_pairs):
        per_pair.append(pair_path_types(graph, u, v, max_len=max_len, include_labels=include_labels))
    vocabulary = sorted({t for types in per_pair for t in types})
    if not vocabulary:
        raise EmptyVocabulary("no connecting paths among the training pairs")
    index = {t: i for i, t in enumerate(vocabulary)}
    n = len(per_pair)
    X = np.zeros((n, len(vocabulary)))
    for row, types in enumerate(per_pair):
        for t in types:
            X[row, index[t]] = 1.0
    y = np.array([1.0] * len(positive_pairs) + [0.0] * len(negative_pairs))

    rng = np.random.default_rng(seed)
    raw_importance = np.zeros(len(vocabulary))
    trees: List[_TreeNode] = []
    oob_votes: Dict[int, List[float]] = {}
    for _ in range(num_trees):
        idx = rng.integers(0, n, size=n)
        in_bag = set(idx.tolist())
        trees.append(_build_tree(X[idx], y[idx], 0, max_depth, raw_importance))
        for i in range(n):
            if i not in in_bag:
                oob_votes.setdefault(i, []).append(_predict_tree(trees[-1], X[i]))
    oob_accuracy = None
    if oob_votes:
        correct = sum(
            1 for i, votes in oob_votes.items() if (np.mean(votes) >= 0.5) == bool(y[i])
        )
        oob_accuracy = correct / len(oob_votes)

    total = float(raw_importance.sum())
    if total > 0:
        raw_importance = raw_importance / total
    importances = {t: float(raw_importance[index[t]]) for t in vocabulary}
    return PathRanker(
        vocabulary=vocabulary,
        importances=importances,
        trees=trees,
        oob_accuracy=oob_accuracy,
        seed=seed,
        max_len=max_len,
        include_labels=include_labels,
    )


def rank_paths(
    ranker: PathRanker, graph: PropertyGraph, u: str, v: str, paths: Sequence[Path]
) -> RankedPathExplanation:
    """Score each path by its path type's ensemble importance (unseen types
    score 0); ties break by shorter length then lexicographic node ids."""
    for path in paths:
        validate_path(graph, path)
    scored = [
        (path, ranker.importances.get(path_type(path, graph, ranker.include_labels), 0.0))
        for path in paths
    ]
    scored.sort(key=lambda item: (-item[1], item[0].length, item[0].nodes))
    return RankedPathExplanation(u=u, v=v, paths=scored)
