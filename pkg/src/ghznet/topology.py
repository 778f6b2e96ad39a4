"""Network topology model: ingestion, rescaling, user selection and graph metrics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from itertools import combinations

import networkx as nx
import numpy as np

from .errors import TopologyError
from .routing.paths import adjacency_from_edges, components, dijkstra, edge_key


@dataclass(frozen=True)
class Node:
    id: str
    x: float | None = None
    y: float | None = None


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    length_km: float

    @property
    def key(self) -> tuple[str, str]:
        return edge_key(self.u, self.v)


@dataclass(frozen=True)
class NetworkTopology:
    """Undirected, simple, weighted graph of repeater nodes and fibre edges.

    Structural invariants (no self-loops, no parallel edges, positive lengths,
    known endpoints, unique ids) are checked on construction. Connectivity is
    checked by :func:`load_topology` and :meth:`validate`, because trimmed
    sub-topologies may legitimately strand non-user nodes.
    """

    name: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        ids = set()
        for node in self.nodes:
            if node.id in ids:
                raise TopologyError("duplicate node id", node.id)
            ids.add(node.id)
        seen = set()
        canon = []
        for e in self.edges:
            if e.u == e.v:
                raise TopologyError("self-loop", asdict(e))
            if e.u not in ids or e.v not in ids:
                raise TopologyError("edge references unknown node", asdict(e))
            if not (isinstance(e.length_km, (int, float)) and math.isfinite(e.length_km) and e.length_km > 0):
                raise TopologyError("non-positive edge length", asdict(e))
            if e.key in seen:
                raise TopologyError("duplicate edge", asdict(e))
            seen.add(e.key)
            canon.append(Edge(*e.key, float(e.length_km)))
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, "edges", tuple(sorted(canon, key=lambda e: e.key)))

    @cached_property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    @cached_property
    def adjacency(self) -> dict[str, dict[str, float]]:
        return adjacency_from_edges(((e.u, e.v, e.length_km) for e in self.edges), self.node_ids)

    @cached_property
    def lengths(self) -> dict[tuple[str, str], float]:
        return {e.key: e.length_km for e in self.edges}

    def is_connected(self) -> bool:
        return len(self.nodes) > 0 and len(components(self.adjacency)) == 1

    def validate(self) -> "NetworkTopology":
        if not self.is_connected():
            comps = components(self.adjacency)
            raise TopologyError("disconnected graph", [sorted(c) for c in comps])
        return self

    def without_nodes(self, removed) -> "NetworkTopology":
        removed = set(removed)
        return NetworkTopology(
            self.name,
            tuple(n for n in self.nodes if n.id not in removed),
            tuple(e for e in self.edges if e.u not in removed and e.v not in removed),
        )

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.node_ids)
        g.add_weighted_edges_from(((e.u, e.v, e.length_km) for e in self.edges), weight="length")
        return g

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes:
            rec = {"id": n.id}
            if n.x is not None:
                rec["x"] = n.x
            if n.y is not None:
                rec["y"] = n.y
            nodes.append(rec)
        return {
            "name": self.name,
            "nodes": nodes,
            "edges": [{"u": e.u, "v": e.v, "length_km": e.length_km} for e in self.edges],
        }


def from_edges(name: str, edges, nodes=()) -> NetworkTopology:
    """Build a topology from ``(u, v, length)`` triples; isolated ``nodes`` may be added."""
    edges = [Edge(str(u), str(v), length) for u, v, length in edges]
    ids = {str(n) for n in nodes} | {e.u for e in edges} | {e.v for e in edges}
    return NetworkTopology(name, tuple(Node(i) for i in ids), tuple(edges))


def _num(value, record):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise TopologyError("non-numeric value", record) from None
    return out


def load_topology(source, format: str = "json", name: str | None = None) -> NetworkTopology:
    """Parse a topology from bytes/str/stream in ``json`` or ``edge-list-csv`` format."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if format == "json":
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"invalid JSON ({exc})") from None
        if not isinstance(doc, dict) or "edges" not in doc:
            raise TopologyError("topology JSON needs an 'edges' list")
        nodes = []
        for rec in doc.get("nodes", []):
            if not isinstance(rec, dict) or "id" not in rec:
                raise TopologyError("malformed node record", rec)
            x = _num(rec["x"], rec) if rec.get("x") is not None else None
            y = _num(rec["y"], rec) if rec.get("y") is not None else None
            nodes.append(Node(str(rec["id"]), x, y))
        known = {n.id for n in nodes}
        edges = []
        for rec in doc["edges"]:
            if not isinstance(rec, dict) or not {"u", "v", "length_km"} <= rec.keys():
                raise TopologyError("malformed edge record", rec)
            edges.append(Edge(str(rec["u"]), str(rec["v"]), _num(rec["length_km"], rec)))
        if not doc.get("nodes"):
            known = {e.u for e in edges} | {e.v for e in edges}
            nodes = [Node(i) for i in known]
        topo = NetworkTopology(name or str(doc.get("name", "topology")), tuple(nodes), tuple(edges))
    elif format in ("csv", "edge-list-csv"):
        reader = csv.DictReader(io.StringIO(source))
        if reader.fieldnames is None or not {"u", "v", "length_km"} <= set(reader.fieldnames):
            raise TopologyError("CSV header must be u,v,length_km", reader.fieldnames)
        edges = [Edge(str(r["u"]).strip(), str(r["v"]).strip(), _num(r["length_km"], r)) for r in reader]
        ids = {e.u for e in edges} | {e.v for e in edges}
        topo = NetworkTopology(name or "topology", tuple(Node(i) for i in ids), tuple(edges))
    else:
        raise TopologyError("unknown topology format", format)
    return topo.validate()


def read_topology(path) -> NetworkTopology:
    """Load a topology file, picking the format from its extension."""
    path = str(path)
    fmt = "edge-list-csv" if path.lower().endswith(".csv") else "json"
    stem = path.replace("\\", "/").rsplit("/", 1)[-1].rsplit(".", 1)[0]
    with open(path, "rb") as fh:
        return load_topology(fh, fmt, name=stem if fmt != "json" else None)


def rescale(t: NetworkTopology, target_max: float = 100.0) -> NetworkTopology:
    """Scale every edge so the longest one is exactly ``target_max`` km."""
    longest = max(e.length_km for e in t.edges)
    factor = target_max / longest
    edges = tuple(
        replace(e, length_km=target_max if e.length_km == longest else e.length_km * factor)
        for e in t.edges
    )
    return NetworkTopology(t.name, t.nodes, edges)


def all_pairs_shortest_paths(t: NetworkTopology) -> np.ndarray:
    """Weighted distance matrix (km), rows/cols in ``t.node_ids`` order."""
    ids = t.node_ids
    index = {n: i for i, n in enumerate(ids)}
    dist = np.full((len(ids), len(ids)), np.inf)
    for i, src in enumerate(ids):
        d, _ = dijkstra(t.adjacency, src)
        for v, dv in d.items():
            dist[i, index[v]] = dv
    return dist


def select_users(t: NetworkTopology, k: int = 4) -> tuple[str, ...]:
    """Pick the ``k`` nodes maximising the sum of pairwise shortest-path distances.

    Exhaustive over all subsets; subsets are generated in lexicographic id
    order and the first maximum wins, which fixes the tie-break.
    """
    n = len(t.nodes)
    if k > n:
        raise ValueError(f"cannot select {k} users from {n} nodes")
    if k < 2:
        raise ValueError("need at least 2 users")
    dist = all_pairs_shortest_paths(t)
    pairs = list(combinations(range(k), 2))
    best_val, best = -np.inf, None
    it = combinations(range(n), k)
    chunk = 200_000
    while True:
        block = np.fromiter((x for c in _take(it, chunk) for x in c), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, k)
        score = np.zeros(len(block))
        for a, b in pairs:
            score += dist[block[:, a], block[:, b]]
        i = int(np.argmax(score))
        if score[i] > best_val:
            best_val, best = score[i], block[i]
    return tuple(t.node_ids[i] for i in best)


def _take(it, n):
    for _, item in zip(range(n), it):
        yield item


def star_feasible(t: NetworkTopology, users) -> bool:
    from .routing import select_centre

    return select_centre(t.adjacency, tuple(users)) is not None


def exclusion_category(t: NetworkTopology, users) -> str | None:
    """Name the unsuitable-topology class (ring / barbell-like / star-like) if one applies."""
    g = t.to_networkx()
    degrees = [d for _, d in g.degree()]
    if all(d == 2 for d in degrees):
        return "ring"
    users = set(users)
    # a bridge with >= 2 users on each side: any centre sits on one side and the
    # far-side users would have to share the bridge
    for a, b in nx.bridges(g):
        h = g.copy()
        h.remove_edge(a, b)
        side = nx.node_connected_component(h, a)
        if len(users & side) >= 2 and len(users - side) >= 2:
            return "barbell-like"
    if nx.is_tree(g) and sum(1 for d in degrees if d > 2) <= 1:
        return "star-like"
    return None


@dataclass(frozen=True)
class MetricsReport:
    node_count: int
    edge_count: int
    mean_edge_length: float
    diameter: float
    radius: float
    mean_shortest_path_length: float
    edge_length_std_dev: float
    density: float
    mean_global_efficiency: float
    mean_laplacian_centrality: float
    mean_closeness_centrality: float
    node_connectivity: int
    mean_node_degree: float

    def to_dict(self) -> dict:
        return asdict(self)


def compute_metrics(t: NetworkTopology) -> MetricsReport:
    """Graph-level metrics; km for eccentricity/lengths, hop counts for efficiency and centrality."""
    n, m = len(t.nodes), len(t.edges)
    lengths = np.array([e.length_km for e in t.edges])
    dist = all_pairs_shortest_paths(t)
    ecc = dist.max(axis=1)
    iu = np.triu_indices(n, 1)
    g = t.to_networkx()
    if n > 1:
        closeness = nx.closeness_centrality(g)
        laplacian = nx.laplacian_centrality(g, normalized=True, weight=None)
        efficiency = nx.global_efficiency(g)
        connectivity = nx.node_connectivity(g)
    else:
        closeness = laplacian = {t.node_ids[0]: 0.0}
        efficiency, connectivity = 0.0, 0
    return MetricsReport(
        node_count=n,
        edge_count=m,
        mean_edge_length=float(lengths.mean()) if m else 0.0,
        diameter=float(ecc.max()),
        radius=float(ecc.min()),
        mean_shortest_path_length=float(dist[iu].mean()) if n > 1 else 0.0,
        edge_length_std_dev=float(lengths.std()) if m else 0.0,
        density=2 * m / (n * (n - 1)) if n > 1 else 0.0,
        mean_global_efficiency=float(efficiency),
        mean_laplacian_centrality=float(np.mean(list(laplacian.values()))),
        mean_closeness_centrality=float(np.mean(list(closeness.values()))),
        node_connectivity=int(connectivity),
        mean_node_degree=2 * m / n,
    )
