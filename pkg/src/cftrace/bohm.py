"""Channel-crossing estimates read off path-amplitude magnitudes.

The chance that a trajectory-based particle enters the channel is estimated by
the largest single-path probability ``max |fwd|^2``; the expected number of
channel crossings by the summed path probabilities. No trajectories are
integrated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .networks import NetworkSpec, build, _forward

__all__ = ["BohmReport", "path_probabilities", "bohm_estimate"]


def path_probabilities(spec: NetworkSpec) -> dict:
    """Forward (unconditioned) probability of the particle on each channel path."""
    fwd, _ = _forward(build(spec))
    return {p: abs(a) ** 2 for p, a in fwd.items()}


@dataclass(frozen=True)
class BohmReport:
    """Amplitude-based crossing estimates for one network.

    ``visits_bit0`` / ``visits_bit1`` are the summed path probabilities for
    each value of Bob's bit. Every visit to a channel path is a trip to Bob's
    side and back, so ``cross_expectation`` counts two crossings per visit
    with the bits weighted equally: ``visits_bit0 + visits_bit1``.
    ``caveat`` flags kinds other than Li, where this reading is
    not the intended one.
    """

    kind: str
    M: int
    N: int
    bit: int
    max_path_prob: float
    counterfactual_prob: float
    visits_bit0: float
    visits_bit1: float
    visit_expectation: float
    cross_expectation: float
    caveat: bool

    def __post_init__(self):
        for name in ("max_path_prob", "counterfactual_prob"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name} out of [0, 1]: {v}")
        if self.cross_expectation < 0:
            raise ValueError("crossing expectation must be non-negative")

    def record(self) -> dict:
        return dict(self.__dict__)


def bohm_estimate(spec: NetworkSpec) -> BohmReport:
    """Crossing-probability and crossing-count estimates for ``spec``."""
    visits = []
    for bit in (0, 1):
        probs = path_probabilities(replace(spec, bit=bit))
        visits.append(float(np.sum(list(probs.values()))))
        if bit == spec.bit:
            p_max = float(max(probs.values()))
    mean_visits = 0.5 * (visits[0] + visits[1])
    return BohmReport(
        kind=spec.kind,
        M=spec.M,
        N=spec.N,
        bit=spec.bit,
        max_path_prob=p_max,
        counterfactual_prob=1.0 - p_max,
        visits_bit0=visits[0],
        visits_bit1=visits[1],
        visit_expectation=mean_visits,
        cross_expectation=2.0 * mean_visits,
        caveat=spec.kind != "Li",
    )
