"""Deterministic synthetic fixtures: a two-community people graph, a text
corpus that co-mentions linked people, and a replay of the case-study
feedback log."""

from __future__ import annotations

import json
import random
from typing import Dict, List, Tuple

from .graph import Edge, Node, PropertyGraph

FIRST_NAMES = [
    "Ann", "Bob", "Carla", "Dmitri", "Elena", "Farid", "Grace", "Hugo",
    "Iris", "Jonas", "Kiran", "Lena", "Marco", "Nadia", "Omar", "Priya",
    "Quentin", "Rosa", "Samir", "Tara",
]
LAST_NAMES = [
    "Smith", "Tanaka", "Okafor", "Lindgren", "Moreau", "Petrov", "Silva",
    "Weiss", "Haddad", "Novak", "Iversen", "Castro",
]
CITIES = ["Pune", "Austin", "Lagos", "Tallinn"]
RELATIONS = ["colleague", "spouse", "friend", "neighbor"]


def person_name(rng: random.Random, used: set) -> str:
    while True:
        name = f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}"
        if name not in used:
            used.add(name)
            return name


def two_community_graph(
    n_per_community: int = 60,
    p_intra: float = 0.15,
    p_inter: float = 0.01,
    seed: int = 0,
) -> PropertyGraph:
    """Stochastic block model with two communities of people nodes."""
    rng = random.Random(seed)
    used: set = set()
    nodes = []
    ids = []
    for c in range(2):
        for i in range(n_per_community):
            node_id = f"c{c}_{i:03d}"
            ids.append(node_id)
            nodes.append(
                Node(
                    node_id,
                    "Person",
                    tuple(sorted({"name": person_name(rng, used), "city": rng.choice(CITIES)}.items())),
                )
            )
    edges = []
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            same = (a < n_per_community) == (b < n_per_community)
            p = p_intra if same else p_inter
            if rng.random() < p:
                edges.append(Edge(ids[a], ids[b], rng.choice(RELATIONS)))
    return PropertyGraph(nodes, edges)


def graph_to_records(graph: PropertyGraph) -> Tuple[List[str], List[str]]:
    node_lines = [
        json.dumps(
            {
                "id": n,
                "label": graph.node(n).label,
                "attributes": graph.node(n).attribute_map(),
            },
            sort_keys=True,
        )
        for n in graph.node_ids
    ]
    edge_lines = [
        json.dumps(
            {
                "source": e.source,
                "target": e.target,
                "relation_type": e.relation_type,
                "properties": dict(e.properties),
            },
            sort_keys=True,
        )
        for e in sorted(graph.edges, key=lambda e: (e.source, e.target, e.relation_type))
    ]
    return node_lines, edge_lines


def corpus_records(graph: PropertyGraph, seed: int = 0, coverage: float = 0.5) -> List[str]:
    """One short document per covered edge, co-mentioning both endpoint names,
    plus single-mention filler documents."""
    rng = random.Random(seed)
    templates = [
        "{a} and {b} worked on the same project for several years.",
        "Internal records show {a} signed the partner agreement alongside {b}.",
        "{a} attended the quarterly review meeting hosted by {b}.",
        "A field report notes {a} shared an office address with {b}.",
    ]
    single_templates = [
        "{a} joined the regional office after a long assignment abroad.",
        "The compliance audit interviewed {a} about vendor onboarding.",
    ]
    lines = []
    doc_no = 0
    edges = sorted(graph.edges, key=lambda e: (e.source, e.target, e.relation_type))
    for edge in edges:
        if rng.random() > coverage:
            continue
        name_a = graph.node(edge.source).attribute_map().get("name", edge.source)
        name_b = graph.node(edge.target).attribute_map().get("name", edge.target)
        body = rng.choice(templates).format(a=name_a, b=name_b)
        lines.append(
            json.dumps(
                {"doc_id": f"doc{doc_no:04d}", "title": f"record {doc_no}", "body": body},
                sort_keys=True,
            )
        )
        doc_no += 1
    for node_id in graph.node_ids:
        if rng.random() < 0.2:
            name = graph.node(node_id).attribute_map().get("name", node_id)
            body = rng.choice(single_templates).format(a=name)
            lines.append(
                json.dumps(
                    {"doc_id": f"doc{doc_no:04d}", "title": f"record {doc_no}", "body": body},
                    sort_keys=True,
                )
            )
            doc_no += 1
    return lines


def case_study_feedback_records() -> List[str]:
    """The 100-sample case-study log: 81/100 verification, 56/100 anchors,
    63/100 path-ranking agreements."""
    counts = {"verification": 81, "anchors": 56, "path_ranking": 63}
    lines = []
    for technique, agrees in counts.items():
        for i in range(100):
            lines.append(
                json.dumps(
                    {
                        "link_id": f"link{i:03d}",
                        "technique": technique,
                        "annotator": "steward1",
                        "verdict": "agree" if i < agrees else "disagree",
                        "timestamp": "",
                    },
                    sort_keys=True,
                )
            )
    return lines
