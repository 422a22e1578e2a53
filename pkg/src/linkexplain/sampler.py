"""Train/test split of edges and matched negative sampling, deterministic per seed."""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, List, Set, Tuple

from .graph import PropertyGraph


class SamplerError(Exception):
    pass


class TooFewEdges(SamplerError):
    pass


class SaturatedNode(SamplerError):
    def __init__(self, node_id: str):
        super().__init__(f"node {node_id!r} is adjacent to all other nodes")
        self.node_id = node_id


class NoCandidates(SamplerError):
    pass


@dataclass(frozen=True)
class LinkSample:
    u: str
    v: str
    label: str  # "positive" | "negative"
    origin: str  # "held_out_edge" | "corrupted"

    def pair(self) -> Tuple[str, str]:
        return tuple(sorted((self.u, self.v)))  # type: ignore[return-value]


@dataclass
class SampleSplit:
    training_graph: PropertyGraph
    positives: List[LinkSample]
    negatives: List[LinkSample]
    seed: int


def _edge_rank(seed: int, u: str, v: str, relation: str) -> str:
    """Stable cross-platform rank: hex digest of the seeded edge key."""
    a, b = sorted((u, v))
    payload = f"{seed}:{a}:{b}:{relation}".encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def split_positives(graph: PropertyGraph, ratio: float = 0.10, seed: int = 0) -> SampleSplit:
    """Hold out ceil(ratio * |E|) edges as positives and remove them from training.

    Selection sorts edges by a seeded hash and takes the head, so the same
    seed picks the same edges on any platform.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    edges = graph.edges
    count = math.ceil(ratio * len(edges))
    if count == 0 or not edges:
        raise TooFewEdges(f"graph has {len(edges)} edges; nothing to select")
    ranked = sorted(edges, key=lambda e: _edge_rank(seed, e.source, e.target, e.relation_type))
    chosen = ranked[:count]
    positives = [
        LinkSample(*sorted((e.source, e.target)), label="positive", origin="held_out_edge")
        for e in chosen
    ]
    training = graph.without_edges((e.source, e.target) for e in chosen)
    return SampleSplit(training_graph=training, positives=positives, negatives=[], seed=seed)


def sample_negatives(
    graph: PropertyGraph,
    positives: List[LinkSample],
    seed: int = 0,
    max_attempts: int = 100,
) -> List[LinkSample]:
    """One corrupted pair per positive: keep one endpoint, draw a non-neighbor.

    Endpoints are tried in order (u first, then v); a uniformly drawn partner
    is rejected while it is the endpoint itself or already adjacent in the
    original graph. Deterministic under the seed.
    """
    rng = random.Random(seed)
    all_nodes = graph.node_ids
    negatives: List[LinkSample] = []
    for positive in positives:
        sample = None
        saturated: List[str] = []
        for anchor in (positive.u, positive.v):
            adjacent = set(graph.neighbors(anchor))
            for _ in range(max_attempts):
                candidate = all_nodes[rng.randrange(len(all_nodes))]
                if candidate == anchor or candidate in adjacent:
                    continue
                sample = LinkSample(anchor, candidate, label="negative", origin="corrupted")
                break
            if sample is not None:
                break
            saturated.append(anchor)
        if sample is None:
            if len(saturated) == 2:
                raise NoCandidates(f"both endpoints of {positive.pair()} saturated")
            raise SaturatedNode(saturated[0])
        negatives.append(sample)
    return negatives


def make_split(
    graph: PropertyGraph, ratio: float = 0.10, seed: int = 0
) -> SampleSplit:
    """split_positives followed by sample_negatives against the original graph."""
    split = split_positives(graph, ratio=ratio, seed=seed)
    split.negatives = sample_negatives(graph, split.positives, seed=seed)
    return split


def dump_samples(split: SampleSplit) -> List[str]:
    """Serialize positives then negatives as JSONL records."""
    lines = []
    for sample in list(split.positives) + list(split.negatives):
        lines.append(
            json.dumps(
                {
                    "u": sample.u,
                    "v": sample.v,
                    "label": sample.label,
                    "origin": sample.origin,
                    "seed": split.seed,
                },
                sort_keys=True,
            )
        )
    return lines


def load_samples(lines: Iterable[str]) -> Tuple[List[LinkSample], List[LinkSample], int]:
    """Parse sample records back into (positives, negatives, seed)."""
    positives: List[LinkSample] = []
    negatives: List[LinkSample] = []
    seed = 0
    for line in lines:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        sample = LinkSample(rec["u"], rec["v"], rec["label"], rec["origin"])
        seed = rec.get("seed", seed)
        (positives if sample.label == "positive" else negatives).append(sample)
    return positives, negatives, seed
