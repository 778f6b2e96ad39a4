"""Entanglement-link success probability as a function of fibre length."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LinkModel:
    attenuation: float = 0.2  # dB/km
    p_op: float = 1.0

    def __post_init__(self):
        if self.attenuation < 0:
            raise ValueError(f"attenuation must be >= 0, got {self.attenuation}")
        if not 0 < self.p_op <= 1:
            raise ValueError(f"p_op must be in (0, 1], got {self.p_op}")


def transmission_probability(m: LinkModel, length_km: float) -> float:
    """Photon survival probability ``10 ** (-attenuation * L / 10)``."""
    if length_km < 0:
        raise ValueError(f"negative fibre length {length_km}")
    return 10.0 ** (-m.attenuation * length_km / 10.0)


def link_success_probability(m: LinkModel, length_km: float) -> float:
    return transmission_probability(m, length_km) * m.p_op


def length_for_probability(m: LinkModel, p: float) -> float:
    """Inverse of :func:`link_success_probability` (handy for building test graphs)."""
    if not 0 < p <= m.p_op:
        raise ValueError(f"probability {p} unreachable with p_op={m.p_op}")
    return -10.0 * math.log10(p / m.p_op) / m.attenuation
