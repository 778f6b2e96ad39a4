from __future__ import annotations

from dataclasses import dataclass

from .paths import EdgeKey, edge_key


@dataclass(frozen=True)
class StarSolution:
    """Centre node plus one internally vertex-disjoint path per user (user -> centre)."""

    centre: str
    paths: tuple[tuple[str, ...], ...]
    total_length: float

    variant = "star"

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(n for p in self.paths for n in p) | {self.centre}

    @property
    def edges(self) -> frozenset[EdgeKey]:
        return frozenset(edge_key(a, b) for p in self.paths for a, b in zip(p, p[1:]))

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "centre": self.centre,
            "paths": [list(p) for p in self.paths],
            "nodes": sorted(self.nodes),
            "edges": [list(e) for e in sorted(self.edges)],
            "total_length_km": self.total_length,
        }


@dataclass(frozen=True)
class TreeSolution:
    edges: frozenset[EdgeKey]
    total_length: float
    terminals: tuple[str, ...] = ()

    variant = "tree"

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(n for e in self.edges for n in e) | set(self.terminals)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "nodes": sorted(self.nodes),
            "edges": [list(e) for e in sorted(self.edges)],
            "total_length_km": self.total_length,
        }


RoutingSolution = StarSolution | TreeSolution
