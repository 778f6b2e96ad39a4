"""Shortest-path primitives over adjacency mappings.

A graph view throughout the routing code is a mapping
``node -> {neighbour: length_km}``. Neighbours are visited in sorted order and
heap ties are broken by node id, so every result is reproducible.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Mapping

Adjacency = Mapping[str, Mapping[str, float]]
EdgeKey = tuple[str, str]


def edge_key(u: str, v: str) -> EdgeKey:
    return (u, v) if u < v else (v, u)


def adjacency_from_edges(edges: Iterable[tuple[str, str, float]], nodes: Iterable[str] = ()) -> dict:
    adj: dict[str, dict[str, float]] = {n: {} for n in nodes}
    for u, v, length in edges:
        adj.setdefault(u, {})[v] = length
        adj.setdefault(v, {})[u] = length
    return {n: dict(sorted(nbrs.items())) for n, nbrs in sorted(adj.items())}


def dijkstra(adj: Adjacency, source: str) -> tuple[dict[str, float], dict[str, str]]:
    """Single-source shortest paths. Returns ``(dist, pred)`` for reachable nodes."""
    dist = {source: 0.0}
    pred: dict[str, str] = {}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in sorted(adj[u].items()):
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def walk_back(pred: Mapping[str, str], source: str, target: str) -> list[str]:
    """Rebuild the ``source -> target`` path from a predecessor map."""
    path = [target]
    while path[-1] != source:
        path.append(pred[path[-1]])
    path.reverse()
    return path


def components(adj: Adjacency) -> list[set[str]]:
    seen: set[str] = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        comps.append(comp)
    return comps


def path_length(adj: Adjacency, path: list[str]) -> float:
    return sum(adj[a][b] for a, b in zip(path, path[1:]))
