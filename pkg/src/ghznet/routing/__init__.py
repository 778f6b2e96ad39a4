"""Star (centre + disjoint paths) and tree (Steiner) routing on weighted graph views."""

from .flow import DisjointPaths, max_disjoint_paths, select_centre
from .paths import adjacency_from_edges, dijkstra, edge_key
from .solutions import RoutingSolution, StarSolution, TreeSolution
from .steiner import best_steiner, kou_steiner, mehlhorn_steiner

__all__ = [
    "DisjointPaths",
    "RoutingSolution",
    "StarSolution",
    "TreeSolution",
    "adjacency_from_edges",
    "best_steiner",
    "dijkstra",
    "edge_key",
    "kou_steiner",
    "max_disjoint_paths",
    "mehlhorn_steiner",
    "select_centre",
]
