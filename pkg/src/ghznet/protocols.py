"""Timeslotted SPS / SPT / MPS / MPT protocol execution.

Randomness contract
-------------------
Every edge owns an independent PCG64 stream keyed by ``(run seed, u, v)``.
In every slot an edge that is not yet live consumes exactly one uniform from
its stream and succeeds when the draw is below its success probability.
Links persist, so a run is fully determined by each edge's first-success
slot. Because the stream depends only on the seed and the edge endpoints,
protocols that share a seed see the same link history (coupled randomness),
and deleting nodes leaves the history of the surviving edges untouched.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleRoutingError, TimeslotLimitExceeded
from .linkmodel import LinkModel, link_success_probability
from .routing import StarSolution, TreeSolution, best_steiner, select_centre
from .routing.paths import EdgeKey, adjacency_from_edges
from .topology import NetworkTopology, exclusion_category
from .unionfind import UnionFind

DEFAULT_MAX_TIMESLOTS = 1_000_000
_FIRST_WINDOW = 64


class ProtocolKind(str, enum.Enum):
    SPS = "SPS"
    SPT = "SPT"
    MPS = "MPS"
    MPT = "MPT"

    @property
    def multi_path(self) -> bool:
        return self in (ProtocolKind.MPS, ProtocolKind.MPT)

    @property
    def star(self) -> bool:
        return self in (ProtocolKind.SPS, ProtocolKind.MPS)

    @classmethod
    def parse(cls, name) -> "ProtocolKind":
        return name if isinstance(name, cls) else cls(str(name).upper())


@dataclass(frozen=True)
class ProtocolOutcome:
    timeslots: int
    solution: StarSolution | TreeSolution
    used_repeaters: frozenset[str]


def precompute_route(kind, t: NetworkTopology, users) -> StarSolution | TreeSolution:
    """Fixed route for single-path protocols, computed once on the full graph."""
    kind = ProtocolKind.parse(kind)
    users = tuple(users)
    if kind is ProtocolKind.SPS:
        sol = select_centre(t.adjacency, users)
        if sol is None:
            raise InfeasibleRoutingError("no valid centre node", exclusion_category(t, users))
        return sol
    if kind is ProtocolKind.SPT:
        return best_steiner(t.adjacency, users)
    raise ValueError(f"{kind.value} does not precompute a route")


def attempt_generation(edges, probabilities, rng: np.random.Generator) -> set:
    """One Bernoulli attempt per edge, one uniform draw each, in the given edge order."""
    edges = list(edges)
    draws = rng.random(len(edges))
    return {e for e, u, p in zip(edges, draws, probabilities) if u < p}


def edge_stream(seed: int, edge: EdgeKey) -> np.random.Generator:
    digest = hashlib.blake2b(f"{seed}|{edge[0]}|{edge[1]}".encode(), digest_size=16).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))


class LinkClock:
    """Lazily computed first-success slot for each edge of a run.

    Streams are consumed in growing windows; since consecutive ``random(n)``
    calls concatenate to the same sequence as one long call, the result is
    identical to drawing once per slot.
    """

    def __init__(self, probabilities: dict[EdgeKey, float], seed: int, max_timeslots: int):
        self.p = probabilities
        self.seed = seed
        self.max_timeslots = max_timeslots
        self._first: dict[EdgeKey, float] = {}
        self._streams: dict[EdgeKey, np.random.Generator] = {}
        self._scanned: dict[EdgeKey, int] = {}

    def first_success(self, e: EdgeKey, horizon: int | None = None) -> float:
        """Slot (1-based) of the edge's first success, scanning at most ``horizon`` slots.

        Returns ``inf`` if none occurs within the horizon (or the slot budget).
        """
        if e in self._first:
            return self._first[e]
        horizon = self.max_timeslots if horizon is None else min(horizon, self.max_timeslots)
        p = self.p[e]
        scanned = self._scanned.get(e, 0)
        if p <= 0.0:
            return math.inf
        rng = self._streams.get(e)
        if rng is None:
            rng = self._streams[e] = edge_stream(self.seed, e)
        while scanned < horizon:
            n = min(max(_FIRST_WINDOW, scanned, int(4 / p)), horizon - scanned)
            hits = np.flatnonzero(rng.random(n) < p)
            if hits.size:
                slot = scanned + int(hits[0]) + 1
                self._first[e] = slot
                del self._streams[e]
                return slot
            scanned += n
        self._scanned[e] = scanned
        return math.inf


def edge_probabilities(t: NetworkTopology, m: LinkModel) -> dict[EdgeKey, float]:
    return {e.key: link_success_probability(m, e.length_km) for e in t.edges}


def _live_adjacency(t: NetworkTopology, live) -> dict:
    return adjacency_from_edges((u, v, t.lengths[(u, v)]) for u, v in live)


def check_termination_star(live, t: NetworkTopology, users) -> StarSolution | None:
    users = tuple(users)
    adj = _live_adjacency(t, live)
    uf = UnionFind(adj)
    for u, v in live:
        uf.union(u, v)
    if any(u not in adj for u in users) or not uf.all_connected(users):
        return None
    return select_centre(adj, users)


def check_termination_tree(live, t: NetworkTopology, users) -> TreeSolution | None:
    users = tuple(users)
    adj = _live_adjacency(t, live)
    uf = UnionFind(adj)
    for u, v in live:
        uf.union(u, v)
    if any(u not in adj for u in users) or not uf.all_connected(users):
        return None
    return best_steiner(adj, users)


def _outcome(slot, solution, users) -> ProtocolOutcome:
    return ProtocolOutcome(int(slot), solution, frozenset(solution.nodes) - set(users))


def run_protocol(
    kind,
    t: NetworkTopology,
    users,
    m: LinkModel,
    seed: int,
    max_timeslots: int = DEFAULT_MAX_TIMESLOTS,
    route=None,
    trace: list | None = None,
) -> ProtocolOutcome:
    """Run one protocol until a valid GHZ routing solution exists over live links.

    ``route`` may carry a precomputed single-path route to avoid recomputing
    it per run. ``trace`` (if given) receives one record per slot in which new
    links were generated.
    """
    kind = ProtocolKind.parse(kind)
    users = tuple(users)
    probs = edge_probabilities(t, m)
    clock = LinkClock(probs, seed, max_timeslots)

    if not kind.multi_path:
        if route is None:
            route = precompute_route(kind, t, users)
        edges = sorted(route.edges)
        slots = {e: clock.first_success(e) for e in edges}
        done = max(slots.values(), default=1)
        if done == math.inf:
            raise TimeslotLimitExceeded(f"{kind.value} did not finish within {max_timeslots} slots (seed {seed})")
        if trace is not None:
            _emit_trace(trace, slots)
        return _outcome(done, route, users)

    # multi-path: reveal edges in first-success order, checking after each busy slot
    uf = UnionFind(t.node_ids)
    live_adj: dict[str, dict[str, float]] = {}
    edges = [e.key for e in t.edges]
    horizon = 0
    pending = set(edges)
    slot_of: dict[EdgeKey, float] = {}
    checked_upto = 0
    window = _FIRST_WINDOW
    while True:
        horizon = min(horizon + window, max_timeslots)
        window *= 2
        for e in sorted(pending):
            s = clock.first_success(e, horizon)
            if s != math.inf:
                slot_of[e] = s
                pending.discard(e)
        events: dict[int, list[EdgeKey]] = {}
        for e, s in slot_of.items():
            if checked_upto < s <= horizon:
                events.setdefault(int(s), []).append(e)
        for slot in sorted(events):
            new = sorted(events[slot])
            if trace is not None:
                trace.append({"slot": slot, "new_edges": [list(e) for e in new]})
            for u, v in new:
                length = t.lengths[(u, v)]
                live_adj.setdefault(u, {})[v] = length
                live_adj.setdefault(v, {})[u] = length
                uf.union(u, v)
            if not uf.all_connected(users):
                continue
            sol = _mp_solution(kind, live_adj, users)
            if sol is not None:
                return _outcome(slot, sol, users)
        checked_upto = horizon
        if horizon >= max_timeslots:
            raise TimeslotLimitExceeded(f"{kind.value} did not finish within {max_timeslots} slots (seed {seed})")


def _mp_solution(kind: ProtocolKind, live_adj, users):
    adj = {n: dict(sorted(nb.items())) for n, nb in sorted(live_adj.items())}
    if kind is ProtocolKind.MPT:
        return best_steiner(adj, users)
    return select_centre(adj, users)


def _emit_trace(trace, slots):
    by_slot: dict[int, list] = {}
    for e, s in slots.items():
        by_slot.setdefault(int(s), []).append(list(e))
    for s in sorted(by_slot):
        trace.append({"slot": s, "new_edges": sorted(by_slot[s])})
