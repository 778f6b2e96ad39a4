"""Star routing: internally vertex-disjoint user paths via min-cost max-flow.

Every node is split into an ``in`` and ``out`` half joined by a unit-capacity
arc, so at most one path can cross it. The candidate centre is fed by a
super-source; each user (other than the centre) drains into a super-sink and
has no ``in -> out`` arc, so users are never relays for other users. Flow is
pushed by successive shortest augmenting paths (Dijkstra with potentials),
which yields a minimum-length decomposition among all maximum flows.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .paths import Adjacency
from .solutions import StarSolution

_EPS = 1e-9


@dataclass(frozen=True)
class DisjointPaths:
    flow: int
    paths: tuple[tuple[str, ...], ...]  # user -> centre
    cost: float


class _Network:
    __slots__ = ("head", "cap", "cost", "out")

    def __init__(self, n):
        self.head: list[int] = []
        self.cap: list[int] = []
        self.cost: list[float] = []
        self.out: list[list[int]] = [[] for _ in range(n)]

    def arc(self, a, b, cap, cost):
        self.out[a].append(len(self.head))
        self.head.append(b)
        self.cap.append(cap)
        self.cost.append(cost)
        self.out[b].append(len(self.head))
        self.head.append(a)
        self.cap.append(0)
        self.cost.append(-cost)


def _augment(net: _Network, src: int, dst: int, potential: list[float]) -> float | None:
    """One shortest augmenting path under reduced costs; returns its true cost."""
    n = len(net.out)
    inf = float("inf")
    dist = [inf] * n
    via = [-1] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    head, cap, cost, out = net.head, net.cap, net.cost, net.out
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        pu = potential[u]
        for a in out[u]:
            if cap[a] <= 0:
                continue
            v = head[a]
            rc = cost[a] + pu - potential[v]
            if rc < 0:
                rc = 0.0
            nd = d + rc
            if nd < dist[v] - _EPS:
                dist[v] = nd
                via[v] = a
                heapq.heappush(heap, (nd, v))
    if dist[dst] == inf:
        return None
    for v in range(n):
        if dist[v] < inf:
            potential[v] += dist[v]
    total = 0.0
    v = dst
    while v != src:
        a = via[v]
        cap[a] -= 1
        cap[a ^ 1] += 1
        total += cost[a]
        v = head[a ^ 1]
    return total


def max_disjoint_paths(adj: Adjacency, centre: str, users) -> DisjointPaths:
    """Maximum number of internally vertex-disjoint centre-user paths, at minimum total length.

    If ``centre`` is itself a user, paths are sought only to the other users;
    the centre's own zero-length path is not included in ``paths``.
    """
    if centre not in adj:
        raise KeyError(f"centre {centre!r} not in graph")
    targets = [u for u in users if u != centre]
    missing = [u for u in targets if u not in adj]
    if missing:
        raise KeyError(f"users not in graph: {missing}")
    ids = sorted(adj)
    index = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    src, dst = 2 * n, 2 * n + 1
    net = _Network(2 * n + 2)
    target_set = set(targets)
    ci = index[centre]
    for v in ids:
        i = index[v]
        if v in target_set:
            net.arc(2 * i, dst, 1, 0.0)
        elif v != centre:
            net.arc(2 * i, 2 * i + 1, 1, 0.0)
    net.arc(src, 2 * ci + 1, len(targets), 0.0)
    for u in ids:
        if u in target_set:
            continue
        iu = index[u]
        for v, w in adj[u].items():
            if v == centre:
                continue
            net.arc(2 * iu + 1, 2 * index[v], 1, float(w))

    potential = [0.0] * (2 * n + 2)
    flow, cost = 0, 0.0
    while flow < len(targets):
        c = _augment(net, src, dst, potential)
        if c is None:
            break
        flow += 1
        cost += c

    # decompose: saturated forward arcs leaving an ``out`` half lead to the next
    # node; only the centre's out half carries more than one unit
    succ: dict[int, list[int]] = {}
    for i in range(n):
        o = 2 * i + 1
        for a in net.out[o]:
            if a % 2 == 0 and net.cap[a] == 0 and net.head[a] < 2 * n:
                succ.setdefault(i, []).append(net.head[a] // 2)
    paths = []
    for start in succ.get(ci, []):
        walk = [centre, ids[start]]
        cur = start
        while ids[cur] not in target_set:
            (cur,) = succ[cur]
            walk.append(ids[cur])
        paths.append(tuple(reversed(walk)))
    order = {u: k for k, u in enumerate(targets)}
    paths.sort(key=lambda p: order[p[0]])
    return DisjointPaths(flow, tuple(paths), cost)


def select_centre(adj: Adjacency, users) -> StarSolution | None:
    """Best star over all candidate centres: full flow first, then least total length, then id."""
    users = tuple(users)
    user_set = set(users)
    if any(u not in adj for u in users):
        return None
    if any(not adj[u] for u in users) and len(users) > 1:
        return None
    best: StarSolution | None = None
    for c in sorted(adj):
        need = len(users) - (1 if c in user_set else 0)
        if len(adj[c]) < need:
            continue
        res = max_disjoint_paths(adj, c, users)
        if res.flow < need:
            continue
        if best is None or res.cost < best.total_length - _EPS * max(1.0, best.total_length):
            by_user = {p[0]: p for p in res.paths}
            paths = tuple(by_user.get(u, (c,)) for u in users)
            best = StarSolution(c, paths, res.cost)
    return best
