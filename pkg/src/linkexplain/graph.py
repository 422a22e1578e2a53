"""Property graph loading, validation, components, and truncated BFS distances."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

NODE_LABELS = ("Person", "Organization", "Location")

#: Sentinel hop count for nodes beyond the BFS cutoff (or in another component).
UNREACHABLE = -1


class GraphError(Exception):
    pass


class MalformedRecord(GraphError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DanglingEdge(GraphError):
    def __init__(self, source: str, target: str, missing: str):
        super().__init__(f"edge {source}->{target}: unknown endpoint {missing!r}")
        self.source = source
        self.target = target
        self.missing = missing


class SelfLoop(GraphError):
    def __init__(self, node_id: str):
        super().__init__(f"self loop on {node_id!r}")
        self.node_id = node_id


class UnknownNode(GraphError):
    def __init__(self, node_id: str):
        super().__init__(f"unknown node {node_id!r}")
        self.node_id = node_id


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    attributes: Tuple[Tuple[str, object], ...] = ()

    def attribute_map(self) -> Dict[str, object]:
        return dict(self.attributes)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    relation_type: str
    properties: Tuple[Tuple[str, object], ...] = ()

    def key(self) -> Tuple[str, str, str]:
        """Undirected dedup key: sorted endpoints plus relation type."""
        a, b = sorted((self.source, self.target))
        return (a, b, self.relation_type)


@dataclass
class LoadReport:
    nodes: int = 0
    edges: int = 0
    dropped_duplicates: int = 0


class PropertyGraph:
    """Immutable homogeneous attributed graph with an undirected adjacency index.

    Edges keep the direction they were written with, and their relation types,
    but connectivity, distances, and path enumeration treat them as undirected.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        self._nodes: Dict[str, Node] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise GraphError(f"duplicate node id {node.id!r}")
            self._nodes[node.id] = node
        self._edges: List[Edge] = []
        self._edge_keys: Set[Tuple[str, str, str]] = set()
        # neighbor -> list of (other endpoint, relation_type)
        self._adj: Dict[str, List[Tuple[str, str]]] = {nid: [] for nid in self._nodes}
        for edge in edges:
            if edge.source == edge.target:
                raise SelfLoop(edge.source)
            for endpoint in (edge.source, edge.target):
                if endpoint not in self._nodes:
                    raise DanglingEdge(edge.source, edge.target, endpoint)
            key = edge.key()
            if key in self._edge_keys:
                continue
            self._edge_keys.add(key)
            self._edges.append(edge)
            self._adj[edge.source].append((edge.target, edge.relation_type))
            self._adj[edge.target].append((edge.source, edge.relation_type))

    @property
    def node_ids(self) -> List[str]:
        return sorted(self._nodes)

    @property
    def edges(self) -> List[Edge]:
        return list(self._edges)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        if node_id not in self._nodes:
            raise UnknownNode(node_id)
        return self._nodes[node_id]

    def num_nodes(self) -> int:
        return len(self._nodes)

    def num_edges(self) -> int:
        return len(self._edges)

    def neighbors(self, node_id: str) -> List[str]:
        """Distinct neighbor ids, sorted."""
        if node_id not in self._adj:
            raise UnknownNode(node_id)
        return sorted({other for other, _ in self._adj[node_id]})

    def neighbor_relations(self, node_id: str) -> List[Tuple[str, str]]:
        """(neighbor, relation_type) pairs, sorted; one per distinct relation."""
        if node_id not in self._adj:
            raise UnknownNode(node_id)
        return sorted(set(self._adj[node_id]))

    def degree(self, node_id: str) -> int:
        return len(self.neighbors(node_id))

    def has_edge(self, u: str, v: str) -> bool:
        a, b = sorted((u, v))
        return any(k[0] == a and k[1] == b for k in self._edge_keys)

    def subgraph(self, node_ids: Iterable[str]) -> "PropertyGraph":
        keep = set(node_ids)
        for nid in keep:
            if nid not in self._nodes:
                raise UnknownNode(nid)
        nodes = [self._nodes[nid] for nid in sorted(keep)]
        edges = [e for e in self._edges if e.source in keep and e.target in keep]
        return PropertyGraph(nodes, edges)

    def without_edges(self, pairs: Iterable[Tuple[str, str]]) -> "PropertyGraph":
        """Copy of the graph with every relation between the given pairs removed."""
        drop = {tuple(sorted(p)) for p in pairs}
        edges = [e for e in self._edges if tuple(sorted((e.source, e.target))) not in drop]
        return PropertyGraph(self._nodes.values(), edges)


@dataclass
class DistanceTable:
    sources: List[str]
    cutoff: int
    distances: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def get(self, source: str, node: str) -> int:
        return self.distances.get(source, {}).get(node, UNREACHABLE)


def _parse_record(line: str, line_no: int, required: Tuple[str, ...]) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(line_no, f"invalid JSON: {exc}") from None
    if not isinstance(record, dict):
        raise MalformedRecord(line_no, "record is not an object")
    for name in required:
        if name not in record:
            raise MalformedRecord(line_no, f"missing field {name!r}")
    return record


def load_graph(
    node_records: Iterable[str], edge_records: Iterable[str]
) -> Tuple[PropertyGraph, LoadReport]:
    """Parse JSONL node and edge streams into a validated PropertyGraph.

    Node record: {"id", "label", "attributes": {k: v}}.
    Edge record: {"source", "target", "relation_type", "properties": {k: v}}.
    Duplicate (endpoints, relation_type) edges are dropped and counted.
    """
    nodes: List[Node] = []
    for line_no, line in enumerate(node_records, start=1):
        line = line.strip()
        if not line:
            continue
        rec = _parse_record(line, line_no, ("id", "label"))
        if not rec["id"]:
            raise MalformedRecord(line_no, "empty node id")
        if rec["label"] not in NODE_LABELS:
            raise MalformedRecord(line_no, f"unknown label {rec['label']!r}")
        attrs = rec.get("attributes", {})
        if not isinstance(attrs, dict) or any(not k for k in attrs):
            raise MalformedRecord(line_no, "bad attributes map")
        nodes.append(Node(rec["id"], rec["label"], tuple(sorted(attrs.items()))))

    edges: List[Edge] = []
    for line_no, line in enumerate(edge_records, start=1):
        line = line.strip()
        if not line:
            continue
        rec = _parse_record(line, line_no, ("source", "target", "relation_type"))
        if not rec["relation_type"]:
            raise MalformedRecord(line_no, "empty relation_type")
        props = rec.get("properties", {})
        if not isinstance(props, dict):
            raise MalformedRecord(line_no, "bad properties map")
        edges.append(
            Edge(rec["source"], rec["target"], rec["relation_type"], tuple(sorted(props.items())))
        )

    seen: Set[Tuple[str, str, str]] = set()
    dropped = 0
    for edge in edges:
        key = edge.key()
        if key in seen:
            dropped += 1
        seen.add(key)
    graph = PropertyGraph(nodes, edges)
    report = LoadReport(nodes=graph.num_nodes(), edges=graph.num_edges(), dropped_duplicates=dropped)
    return graph, report


def connected_components(
    graph: PropertyGraph, min_size: int = 10
) -> Tuple[List[PropertyGraph], int]:
    """Induced subgraphs of connected components with at least min_size nodes.

    Returns (components sorted by smallest node id, count of filtered-out nodes).
    """
    unvisited = set(graph.node_ids)
    components: List[PropertyGraph] = []
    filtered_nodes = 0
    for start in graph.node_ids:
        if start not in unvisited:
            continue
        members = {start}
        queue = deque([start])
        unvisited.discard(start)
        while queue:
            current = queue.popleft()
            for nbr in graph.neighbors(current):
                if nbr in unvisited:
                    unvisited.discard(nbr)
                    members.add(nbr)
                    queue.append(nbr)
        if len(members) >= min_size:
            components.append(graph.subgraph(members))
        else:
            filtered_nodes += len(members)
    components.sort(key=lambda c: c.node_ids[0])
    return components, filtered_nodes


def bfs_distances(graph: PropertyGraph, sources: List[str], cutoff: int = 6) -> DistanceTable:
    """Exact hop distances from each source, truncated at cutoff hops.

    Nodes beyond cutoff are simply absent from the table and read back as
    UNREACHABLE.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    table = DistanceTable(sources=list(sources), cutoff=cutoff)
    for source in sources:
        if source not in graph:
            raise UnknownNode(source)
        dist = {source: 0}
        queue = deque([source])
        while queue:
            current = queue.popleft()
            d = dist[current]
            if d >= cutoff:
                continue
            for nbr in graph.neighbors(current):
                if nbr not in dist:
                    dist[nbr] = d + 1
                    queue.append(nbr)
        table.distances[source] = dist
    return table
