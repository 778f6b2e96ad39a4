"""GHZ-state distribution over weighted repeater networks: routing, simulation, trimming, clustering."""

__version__ = "0.1.0"

from .linkmodel import LinkModel, link_success_probability, transmission_probability
from .montecarlo import SimulationConfig, SimulationSummary, run_simulation, sp_expected_timeslots_exact
from .protocols import ProtocolKind, ProtocolOutcome, run_protocol
from .topology import NetworkTopology, compute_metrics, load_topology, rescale, select_users
from .trimming import TrimTrace, run_trimming, trimmable_fraction

__all__ = [
    "LinkModel",
    "NetworkTopology",
    "ProtocolKind",
    "ProtocolOutcome",
    "SimulationConfig",
    "SimulationSummary",
    "TrimTrace",
    "compute_metrics",
    "link_success_probability",
    "load_topology",
    "rescale",
    "run_protocol",
    "run_simulation",
    "run_trimming",
    "select_users",
    "sp_expected_timeslots_exact",
    "transmission_probability",
    "trimmable_fraction",
]
