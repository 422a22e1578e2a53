"""Post-hoc surrogate and anchors-style rule induction.

A depth-limited decision tree is distilled from the link scorer's decisions
over interpretable pair features; beam search then finds a small predicate
rule under which the surrogate keeps predicting the same class, with
Monte-Carlo precision estimates over marginal perturbations.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .graph import UNREACHABLE, PropertyGraph, bfs_distances
from .predictor import ScorerModel, pair_features, score_link

FeatureValue = Union[bool, int, float, str]
Instance = Dict[str, FeatureValue]

DISTANCE_BUCKETS = ("1", "2", "3", "4+", "unreachable")


class AnchorsError(Exception):
    pass


class UnknownPair(AnchorsError):
    pass


class SingleClass(AnchorsError):
    pass


class EmptyRuleSpace(AnchorsError):
    pass


def distance_bucket(graph: PropertyGraph, u: str, v: str, max_hops: int = 4) -> str:
    table = bfs_distances(graph, [u], cutoff=max_hops)
    d = table.get(u, v)
    if d == UNREACHABLE:
        return "unreachable"
    if d >= 4:
        return "4+"
    return str(d)


def build_instances(
    graph: PropertyGraph,
    model: ScorerModel,
    features: Mapping[str, np.ndarray],
    pairs: Sequence[Tuple[str, str]],
    threshold: float = 0.5,
) -> Tuple[List[Instance], List[bool]]:
    """Interpretable feature maps for node pairs, labeled with the predictor's
    thresholded decisions (distillation labels, not ground truth)."""
    # shared-attribute features use one consistent schema across the pair set
    shared_keys = set()
    for u, v in pairs:
        if u not in graph or v not in graph:
            raise UnknownPair(f"({u}, {v})")
        shared_keys |= set(graph.node(u).attribute_map()) & set(graph.node(v).attribute_map())

    instances: List[Instance] = []
    labels: List[bool] = []
    for u, v in pairs:
        attrs_u = graph.node(u).attribute_map()
        attrs_v = graph.node(v).attribute_map()
        instance: Instance = {}
        for key in sorted(shared_keys):
            instance[f"same_attribute:{key}"] = (
                key in attrs_u and key in attrs_v and attrs_u[key] == attrs_v[key]
            )
        instance["degree_u"] = graph.degree(u)
        instance["degree_v"] = graph.degree(v)
        nbrs_u = set(graph.neighbors(u))
        nbrs_v = set(graph.neighbors(v))
        instance["common_neighbors"] = len(nbrs_u & nbrs_v)
        instance["distance_bucket"] = distance_bucket(graph, u, v)
        instances.append(instance)
        pair = pair_features(features[u], features[v], graph.node(u), graph.node(v))
        labels.append(score_link(model, pair) >= threshold)
    return instances, labels


# ---------------------------------------------------------------------------
# surrogate decision tree


@dataclass
class _Leaf:
    prediction: bool


@dataclass
class _Split:
    feature: str
    comparator: str  # "<=" for numeric, "==" for bool/categorical
    constant: FeatureValue
    left: Union["_Split", _Leaf]  # branch where the test holds
    right: Union["_Split", _Leaf]


def _test(instance: Instance, feature: str, comparator: str, constant: FeatureValue) -> bool:
    value = instance[feature]
    if comparator == "<=":
        return value <= constant  # type: ignore[operator]
    if comparator == ">=":
        return value >= constant  # type: ignore[operator]
    return value == constant


def _entropy(labels: Sequence[bool]) -> float:
    if not labels:
        return 0.0
    p = sum(labels) / len(labels)
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def _candidate_tests(
    instances: Sequence[Instance], feature: str
) -> List[Tuple[str, FeatureValue]]:
    values = sorted({inst[feature] for inst in instances}, key=str)
    sample = values[0]
    if isinstance(sample, bool) or isinstance(sample, str):
        return [("==", v) for v in values]
    numeric = sorted(values)  # type: ignore[type-var]
    return [("<=", (numeric[i] + numeric[i + 1]) / 2) for i in range(len(numeric) - 1)]


def _grow(
    instances: Sequence[Instance],
    labels: Sequence[bool],
    depth: int,
    max_depth: int,
) -> Union[_Split, _Leaf]:
    majority = sum(labels) * 2 >= len(labels)
    if depth >= max_depth or len(set(labels)) == 1 or len(labels) < 2:
        return _Leaf(majority)
    base = _entropy(labels)
    best: Optional[Tuple[float, str, str, FeatureValue]] = None
    for feature in sorted(instances[0]):
        for comparator, constant in _candidate_tests(instances, feature):
            mask = [_test(inst, feature, comparator, constant) for inst in instances]
            n_true = sum(mask)
            if n_true == 0 or n_true == len(mask):
                continue
            left = [lab for lab, m in zip(labels, mask) if m]
            right = [lab for lab, m in zip(labels, mask) if not m]
            gain = base - (len(left) * _entropy(left) + len(right) * _entropy(right)) / len(labels)
            key = (-gain, feature, comparator, str(constant))
            if best is None or key < best[0]:
                best = (key, feature, comparator, constant)  # type: ignore[assignment]
    if best is None or -best[0][0] <= 1e-12:
        return _Leaf(majority)
    _, feature, comparator, constant = best
    mask = [_test(inst, feature, comparator, constant) for inst in instances]
    left_items = [(i, l) for (i, l), m in zip(zip(instances, labels), mask) if m]
    right_items = [(i, l) for (i, l), m in zip(zip(instances, labels), mask) if not m]
    return _Split(
        feature=feature,
        comparator=comparator,
        constant=constant,
        left=_grow([i for i, _ in left_items], [l for _, l in left_items], depth + 1, max_depth),
        right=_grow([i for i, _ in right_items], [l for _, l in right_items], depth + 1, max_depth),
    )


@dataclass
class Surrogate:
    root: Union[_Split, _Leaf]
    fidelity: float
    single_class: bool
    instances: List[Instance]  # training instances, the perturbation distribution
    max_depth: int

    def predict(self, instance: Instance) -> bool:
        node = self.root
        while isinstance(node, _Split):
            node = node.left if _test(instance, node.feature, node.comparator, node.constant) else node.right
        return node.prediction

    def depth(self) -> int:
        def walk(node, d=0):
            if isinstance(node, _Leaf):
                return d
            return max(walk(node.left, d + 1), walk(node.right, d + 1))

        return walk(self.root)


def fit_surrogate(
    instances: Sequence[Instance],
    labels: Sequence[bool],
    max_depth: int = 4,
    seed: int = 0,
) -> Surrogate:
    """Greedy information-gain tree with fidelity measured on a held-out 20%.

    Constant labels yield a constant tree flagged single_class. Ties between
    splits break by feature name order for determinism.
    """
    if len(instances) != len(labels) or not instances:
        raise AnchorsError("instances and labels must be non-empty and aligned")
    single_class = len(set(labels)) < 2
    order = list(range(len(instances)))
    random.Random(seed).shuffle(order)
    n_holdout = max(1, len(order) // 5) if len(order) > 1 else 0
    holdout = order[:n_holdout]
    train_idx = order[n_holdout:] or order
    root = _grow(
        [instances[i] for i in train_idx], [labels[i] for i in train_idx], 0, max_depth
    )
    surrogate = Surrogate(
        root=root,
        fidelity=1.0,
        single_class=single_class,
        instances=list(instances),
        max_depth=max_depth,
    )
    eval_idx = holdout or list(range(len(instances)))
    agree = sum(1 for i in eval_idx if surrogate.predict(instances[i]) == labels[i])
    surrogate.fidelity = agree / len(eval_idx)
    return surrogate


# ---------------------------------------------------------------------------
# anchors rule induction


@dataclass(frozen=True)
class Predicate:
    feature: str
    comparator: str  # "==", "<=", ">="
    constant: FeatureValue

    def satisfied_by(self, instance: Instance) -> bool:
        return _test(instance, self.feature, self.comparator, self.constant)

    def to_record(self) -> dict:
        return {"feature": self.feature, "comparator": self.comparator, "constant": self.constant}

    def render(self) -> str:
        symbol = {"==": "=", "<=": "≤", ">=": "≥"}[self.comparator]
        return f"{self.feature} {symbol} {self.constant}"


@dataclass
class AnchorsRule:
    predicates: List[Predicate]
    estimated_precision: float
    coverage: float
    samples_used: int
    budget_exhausted: bool = False
    fidelity_of_surrogate: float = 1.0

    def satisfied_by(self, instance: Instance) -> bool:
        return all(p.satisfied_by(instance) for p in self.predicates)

    def to_record(self) -> dict:
        return {
            "predicates": [p.to_record() for p in self.predicates],
            "precision": self.estimated_precision,
            "coverage": self.coverage,
            "samples_used": self.samples_used,
            "budget_exhausted": self.budget_exhausted,
            "fidelity_of_surrogate": self.fidelity_of_surrogate,
        }


def _coverage(rule: Sequence[Predicate], instances: Sequence[Instance]) -> float:
    if not instances:
        return 1.0
    hits = sum(1 for inst in instances if all(p.satisfied_by(inst) for p in rule))
    return hits / len(instances)


def _estimate_precision(
    surrogate: Surrogate,
    instance: Instance,
    rule: Sequence[Predicate],
    target: bool,
    n_samples: int,
    rng: random.Random,
) -> float:
    """Fraction of perturbations (free features resampled from the empirical
    marginals, rule features held at the instance's values) the surrogate
    still classifies as the target class."""
    fixed = {p.feature for p in rule}
    marginals = {
        f: [inst[f] for inst in surrogate.instances] for f in instance if f not in fixed
    }
    agree = 0
    for _ in range(n_samples):
        perturbed = dict(instance)
        for feature, pool in marginals.items():
            if pool:
                perturbed[feature] = pool[rng.randrange(len(pool))]
        if surrogate.predict(perturbed) == target:
            agree += 1
    return agree / n_samples if n_samples else 0.0


def _candidate_predicates(instance: Instance) -> List[Predicate]:
    candidates: List[Predicate] = []
    for feature in sorted(instance):
        value = instance[feature]
        if isinstance(value, bool) or isinstance(value, str):
            candidates.append(Predicate(feature, "==", value))
        else:
            candidates.append(Predicate(feature, "<=", value))
            candidates.append(Predicate(feature, ">=", value))
    return candidates


def explain_anchor(
    surrogate: Surrogate,
    instance: Instance,
    tau: float = 0.90,
    beam: int = 3,
    budget: int = 2000,
    seed: int = 0,
    max_total_samples: Optional[int] = None,
) -> AnchorsRule:
    """Beam search for a short predicate rule with estimated precision >= tau.

    Each candidate rule's precision uses `budget` Monte-Carlo perturbations.
    The search stops at tau, when no extension improves precision, or when
    the overall sampling cap is hit (rule returned flagged budget_exhausted).
    """
    target = surrogate.predict(instance)
    candidates = _candidate_predicates(instance)
    if not candidates:
        raise EmptyRuleSpace("instance has no features to build predicates from")
    rng = random.Random(seed)
    cap = max_total_samples if max_total_samples is not None else 50 * budget
    spent = 0

    def estimate(rule: Tuple[Predicate, ...]) -> float:
        nonlocal spent
        n = min(budget, max(0, cap - spent))
        spent += n
        if n == 0:
            return 0.0
        return _estimate_precision(surrogate, instance, rule, target, n, rng)

    empty: Tuple[Predicate, ...] = ()
    best_rule = empty
    best_precision = estimate(empty)
    best_samples = min(budget, cap)
    if best_precision >= tau:
        return AnchorsRule(
            predicates=[],
            estimated_precision=best_precision,
            coverage=1.0,
            samples_used=best_samples,
            fidelity_of_surrogate=surrogate.fidelity,
        )

    frontier: List[Tuple[Tuple[Predicate, ...], float, float]] = [(empty, best_precision, 1.0)]
    exhausted = False
    while True:
        extensions: List[Tuple[Tuple[Predicate, ...], float, float]] = []
        for rule, _, rule_cov in frontier:
            used = set(rule)
            for predicate in candidates:
                if predicate in used:
                    continue
                extended = tuple(sorted(used | {predicate}, key=lambda p: (p.feature, p.comparator, str(p.constant))))
                if any(extended == r for r, _, _ in extensions):
                    continue
                if spent >= cap:
                    exhausted = True
                    break
                precision = estimate(extended)
                cov = _coverage(extended, surrogate.instances)
                assert cov <= rule_cov + 1e-12  # predicates only restrict
                extensions.append((extended, precision, cov))
            if exhausted:
                break
        if not extensions:
            break
        extensions.sort(key=lambda e: (-e[1], -e[2], [p.render() for p in e[0]]))
        top = extensions[0]
        if top[1] > best_precision + 1e-12:
            best_rule, best_precision = top[0], top[1]
        else:
            break  # no predicate improves precision
        if best_precision >= tau or exhausted:
            break
        frontier = extensions[:beam]
        if all(len(r) == len(candidates) for r, _, _ in frontier):
            break

    return AnchorsRule(
        predicates=list(best_rule),
        estimated_precision=best_precision,
        coverage=_coverage(best_rule, surrogate.instances),
        samples_used=min(budget, cap),
        budget_exhausted=exhausted,
        fidelity_of_surrogate=surrogate.fidelity,
    )
