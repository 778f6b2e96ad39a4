"""Usage-driven repeater trimming and lambda/lambda0 drop-off traces."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MaximallyTrimmed
from .linkmodel import LinkModel
from .montecarlo import SimulationConfig, SimulationSummary, run_simulation
from .protocols import ProtocolKind, precompute_route
from .routing import select_centre
from .routing.paths import components
from .topology import NetworkTopology


@dataclass(frozen=True)
class TrimStep:
    removed_nodes: frozenset[str]
    remaining_active: int
    rate: float
    usage: dict[str, float]
    std_error: float = 0.0  # of E[T]


@dataclass(frozen=True)
class TrimTrace:
    baseline_rate: float
    baseline_active_count: int
    steps: tuple[TrimStep, ...]

    def cumulative_removed(self) -> list[int]:
        """Active repeaters removed so far, per step (the redundant pass counts as 0)."""
        total, out = 0, []
        for i, step in enumerate(self.steps):
            if i > 0:
                total += len(step.removed_nodes)
            out.append(total)
        return out

    def rows(self) -> list[dict]:
        return [
            {
                "step": i,
                "removed_nodes": " ".join(sorted(s.removed_nodes)),
                "remaining_active": s.remaining_active,
                "lambda": s.rate,
                "lambda_over_lambda0": s.rate / self.baseline_rate,
            }
            for i, s in enumerate(self.steps)
        ]


def redundant_repeaters(summary: SimulationSummary, users) -> frozenset[str]:
    users = set(users)
    return frozenset(v for v, u in summary.usage.items() if v not in users and u == 0)


def _feasible(t: NetworkTopology, users, kind: ProtocolKind) -> bool:
    if any(u not in t.adjacency for u in users):
        return False
    if kind.star:
        return select_centre(t.adjacency, users) is not None
    return any(set(users) <= comp for comp in components(t.adjacency))


def trim_step(t: NetworkTopology, usage: dict, users, kind=ProtocolKind.MPT):
    """Remove the least-used trimmable repeaters; returns ``(trimmed, removed)``.

    All candidates tied at the lowest usage tier go together, except those
    whose removal would leave the protocol without a routing solution; if a
    whole tier is blocked, the next tier is tried.
    """
    kind = ProtocolKind.parse(kind)
    users = tuple(users)
    present = set(t.node_ids)
    candidates = {v: u for v, u in usage.items() if v in present and v not in users and u < 1.0}
    for level in sorted(set(candidates.values())):
        removed: list[str] = []
        for v in sorted(v for v, u in candidates.items() if u == level):
            if _feasible(t.without_nodes(removed + [v]), users, kind):
                removed.append(v)
        if removed:
            return t.without_nodes(removed), frozenset(removed)
    raise MaximallyTrimmed("no repeater can be removed without breaking routing feasibility")


def run_trimming(
    t: NetworkTopology,
    users,
    kind,
    m: LinkModel = LinkModel(),
    cfg: SimulationConfig = SimulationConfig(),
) -> TrimTrace:
    """Trim redundant repeaters, then repeatedly the least used ones, re-simulating after each step.

    Every re-simulation reuses ``cfg.master_seed``, so all stages see the same
    per-edge link histories. Single-path kinds stop after the redundant pass:
    every repeater left is on the fixed route.
    """
    kind = ProtocolKind.parse(kind)
    users = tuple(users)
    user_set = set(users)
    base = run_simulation(t, users, kind, m, cfg)
    redundant = redundant_repeaters(base, users)
    if not kind.multi_path:
        route_nodes = precompute_route(kind, t, users).nodes
        redundant = frozenset(v for v in t.node_ids if v not in route_nodes and v not in user_set)
    current = t.without_nodes(redundant)
    active = sum(1 for v in current.node_ids if v not in user_set)
    usage = {v: u for v, u in base.usage.items() if v not in redundant}
    steps = [TrimStep(redundant, active, base.rate, usage, base.std_error)]
    if not kind.multi_path:
        return TrimTrace(base.rate, active, tuple(steps))

    while any(u < 1.0 for v, u in usage.items() if v not in user_set):
        try:
            current, removed = trim_step(current, usage, users, kind)
        except MaximallyTrimmed:
            break
        summary = run_simulation(current, users, kind, m, cfg)
        usage = dict(summary.usage)
        remaining = sum(1 for v in current.node_ids if v not in user_set)
        steps.append(TrimStep(removed, remaining, summary.rate, usage, summary.std_error))
    return TrimTrace(base.rate, active, tuple(steps))


def trimmable_fraction(trace: TrimTrace, threshold: float) -> float:
    """Share of active repeaters removable while lambda/lambda0 stays at or above ``threshold``.

    Walks the effective steps in order and stops at the first one that falls
    below the threshold.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if trace.baseline_active_count == 0:
        return 0.0
    cum = trace.cumulative_removed()
    best = 0
    for step, removed in zip(trace.steps[1:], cum[1:]):
        if step.rate / trace.baseline_rate < threshold:
            break
        best = removed
    return best / trace.baseline_active_count
