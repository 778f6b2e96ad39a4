"""Approximate Steiner trees (Kou and Mehlhorn) with deterministic tie-breaking."""

from __future__ import annotations

import heapq

from ..errors import InfeasibleRoutingError
from ..unionfind import UnionFind
from .paths import Adjacency, dijkstra, edge_key, walk_back
from .solutions import TreeSolution

_EPS = 1e-9


def _kruskal(weighted_edges):
    """MST/forest over ``(w, u, v)`` triples; ties fall to the lexicographic edge key."""
    uf = UnionFind()
    chosen = []
    for w, u, v in sorted(weighted_edges):
        uf.add(u)
        uf.add(v)
        if uf.union(u, v):
            chosen.append((u, v))
    return chosen


def _finish(adj: Adjacency, edges, terminals) -> TreeSolution:
    """MST of the expanded subgraph, then strip non-terminal leaves."""
    tree = _kruskal((adj[u][v], *edge_key(u, v)) for u, v in edges)
    nbrs: dict[str, set[str]] = {}
    for u, v in tree:
        nbrs.setdefault(u, set()).add(v)
        nbrs.setdefault(v, set()).add(u)
    term = set(terminals)
    leaves = [n for n, s in nbrs.items() if len(s) == 1 and n not in term]
    while leaves:
        leaf = leaves.pop()
        if leaf not in nbrs or len(nbrs[leaf]) != 1:
            continue
        (other,) = nbrs.pop(leaf)
        nbrs[other].discard(leaf)
        if len(nbrs[other]) == 1 and other not in term:
            leaves.append(other)
        elif not nbrs[other]:
            del nbrs[other]
    kept = frozenset(edge_key(u, v) for u, s in nbrs.items() for v in s)
    return TreeSolution(kept, sum(adj[u][v] for u, v in kept), tuple(terminals))


def _check_terminals(adj: Adjacency, terminals):
    terminals = tuple(dict.fromkeys(terminals))
    missing = [t for t in terminals if t not in adj]
    if missing:
        raise InfeasibleRoutingError(f"terminals not in graph: {missing}")
    return terminals


def kou_steiner(adj: Adjacency, terminals) -> TreeSolution:
    """Kou-Markowsky-Berman: MST of the terminal metric closure, expanded and re-spanned."""
    terminals = _check_terminals(adj, terminals)
    ordered = sorted(terminals)
    trees = {t: dijkstra(adj, t) for t in ordered}
    closure = []
    for i, s in enumerate(ordered):
        dist = trees[s][0]
        for t in ordered[i + 1:]:
            if t not in dist:
                raise InfeasibleRoutingError(f"terminals {s!r} and {t!r} are disconnected")
            closure.append((dist[t], s, t))
    expanded = set()
    for s, t in _kruskal(closure):
        path = walk_back(trees[s][1], s, t)
        expanded.update(edge_key(a, b) for a, b in zip(path, path[1:]))
    return _finish(adj, expanded, terminals)


def mehlhorn_steiner(adj: Adjacency, terminals) -> TreeSolution:
    """Mehlhorn: terminal Voronoi regions from one multi-source Dijkstra, then MST of region bridges."""
    terminals = _check_terminals(adj, terminals)
    dist: dict[str, float] = {}
    owner: dict[str, str] = {}
    pred: dict[str, str] = {}
    heap = [(0.0, t, t, None) for t in sorted(terminals)]
    heapq.heapify(heap)
    while heap:
        d, src, u, p = heapq.heappop(heap)
        if u in owner:
            continue
        dist[u], owner[u] = d, src
        if p is not None:
            pred[u] = p
        for v, w in adj[u].items():
            if v not in owner:
                heapq.heappush(heap, (d + w, src, v, u))

    bridges: dict[tuple[str, str], tuple[float, str, str]] = {}
    for u in sorted(owner):
        for v, w in adj[u].items():
            if u < v and v in owner and owner[u] != owner[v]:
                pair = edge_key(owner[u], owner[v])
                cand = (dist[u] + w + dist[v], u, v)
                if pair not in bridges or cand < bridges[pair]:
                    bridges[pair] = cand
    aux = [(w, *pair) for pair, (w, _, _) in bridges.items()]
    chosen = _kruskal(aux)
    if len(chosen) != len(terminals) - 1:
        raise InfeasibleRoutingError("terminals are disconnected")
    expanded = set()
    for pair in chosen:
        _, u, v = bridges[edge_key(*pair)]
        expanded.add(edge_key(u, v))
        for end in (u, v):
            path = walk_back(pred, owner[end], end)
            expanded.update(edge_key(a, b) for a, b in zip(path, path[1:]))
    return _finish(adj, expanded, terminals)


def best_steiner(adj: Adjacency, terminals) -> TreeSolution:
    """Cheaper of the Kou and Mehlhorn trees; Mehlhorn wins ties."""
    mehl = mehlhorn_steiner(adj, terminals)
    kou = kou_steiner(adj, terminals)
    if kou.total_length < mehl.total_length - _EPS * max(1.0, mehl.total_length):
        return kou
    return mehl
