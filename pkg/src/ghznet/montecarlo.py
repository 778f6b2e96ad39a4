"""Repeated protocol runs: E[T], distribution rate and per-node usage."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRoutingError, TimeslotLimitExceeded
from .linkmodel import LinkModel, link_success_probability
from .protocols import DEFAULT_MAX_TIMESLOTS, ProtocolKind, precompute_route, run_protocol
from .topology import NetworkTopology


@dataclass(frozen=True)
class SimulationConfig:
    iterations: int = 5000
    master_seed: int = 0
    max_timeslots: int = DEFAULT_MAX_TIMESLOTS
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_timeslots < 1:
            raise ValueError("max_timeslots must be >= 1")


@dataclass(frozen=True)
class SimulationSummary:
    expected_timeslots: float
    rate: float
    std_error: float
    samples: tuple[int, ...]
    usage: dict[str, float]
    solutions: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "expected_timeslots": self.expected_timeslots,
            "rate": self.rate,
            "std_error": self.std_error,
            "iterations": len(self.samples),
            "usage": dict(sorted(self.usage.items())),
        }


def derive_seed(master_seed: int, iteration: int) -> int:
    """Stable 63-bit seed for one iteration, independent of every other iteration."""
    digest = hashlib.blake2b(f"{master_seed}:{iteration}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def _run_chunk(args):
    kind, t, users, m, master_seed, max_timeslots, route, start, stop = args
    out = []
    for i in range(start, stop):
        try:
            res = run_protocol(kind, t, users, m, derive_seed(master_seed, i), max_timeslots, route=route)
        except TimeslotLimitExceeded as exc:
            raise TimeslotLimitExceeded(f"iteration {i}: {exc}") from None
        out.append((res.timeslots, tuple(sorted(res.used_repeaters))))
    return start, out


def run_simulation(
    t: NetworkTopology,
    users,
    kind,
    m: LinkModel = LinkModel(),
    cfg: SimulationConfig = SimulationConfig(),
) -> SimulationSummary:
    """Monte Carlo estimate of E[T] for one protocol-topology pair.

    Iteration ``i`` runs with ``derive_seed(cfg.master_seed, i)``; results are
    collected by index, so the summary does not depend on ``cfg.workers``.
    """
    kind = ProtocolKind.parse(kind)
    users = tuple(users)
    route = None if kind.multi_path else precompute_route(kind, t, users)
    if kind is ProtocolKind.MPS:
        # a star must exist on the full graph or MPS can never terminate
        precompute_route(ProtocolKind.SPS, t, users)
    n = cfg.iterations
    workers = max(1, min(cfg.workers, n))
    bounds = np.linspace(0, n, workers * 4 + 1 if workers > 1 else 2).astype(int)
    jobs = [
        (kind, t, users, m, cfg.master_seed, cfg.max_timeslots, route, int(a), int(b))
        for a, b in zip(bounds, bounds[1:])
        if b > a
    ]
    if workers == 1:
        chunks = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, jobs))
    results = [r for _, rs in sorted(chunks, key=lambda c: c[0]) for r in rs]

    samples = np.array([r[0] for r in results], dtype=np.int64)
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    counts = dict.fromkeys(t.node_ids, 0)
    for _, used in results:
        for v in used:
            counts[v] += 1
    usage = {v: c / n for v, c in counts.items()}
    for u in users:
        usage[u] = 1.0
    return SimulationSummary(
        expected_timeslots=mean,
        rate=1.0 / mean,
        std_error=se,
        samples=tuple(int(x) for x in samples),
        usage=usage,
        solutions=tuple(used for _, used in results),
    )


def expected_max_geometric(probabilities) -> float:
    """``E[max_e G_e]`` for independent geometric first-success times with the given probabilities.

    Uses ``sum_{t>=0} (1 - prod_e (1 - (1 - p_e)^t))``, truncated once a term
    drops below 1e-12.
    """
    p = np.asarray(list(probabilities), dtype=float)
    if p.size == 0:
        return 0.0
    if np.any(p <= 0):
        raise InfeasibleRoutingError("route contains an edge that never succeeds")
    q = 1.0 - p
    total = 0.0
    qt = np.ones_like(q)
    while True:
        term = 1.0 - float(np.prod(1.0 - qt))
        total += term
        if term < 1e-12:
            return total
        qt = qt * q


def sp_expected_timeslots_exact(route, m: LinkModel, t: NetworkTopology) -> float:
    """Exact E[T] of a single-path protocol on a fixed route of ``t``."""
    return expected_max_geometric(link_success_probability(m, t.lengths[e]) for e in sorted(route.edges))
