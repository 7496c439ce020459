"""Counterfactuality verdicts against the single-particle standard.

A protocol run is judged by two numbers measured in the channel after the
run has been post-selected on the protocol's correct detector:

* the probability that at least one probe is found flipped, and
* the summed magnitude of the pointer shifts, ``delta * sum |weak value|``.

Each is compared with the same quantity for one particle deliberately sent
through an equal-amplitude channel with as many paths, post-selected on the
undisturbed state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, RegimeWarning
from .networks import NetworkSpec, build, path_amplitudes, simulate
from .trace import ProbeModel, TraceReport, post_select, shift_sum, trace_detect_prob

__all__ = [
    "STANDARD_SIMULATION_LIMIT",
    "WEAK_COUPLING_LIMIT",
    "Standard",
    "AsymptoticFormula",
    "ASYMPTOTIC",
    "single_particle_standard",
    "eval_asymptotic",
    "formula_ids",
    "classify",
    "compare",
    "weak_coupling_ok",
]

# above this many paths the standard uses its exact closed form instead of
# propagating an n-mode fan-out (memory grows as n^2)
STANDARD_SIMULATION_LIMIT = 512

# eps * max(M, N) above this breaks the first-order picture
WEAK_COUPLING_LIMIT = 0.3

PI2 = np.pi**2
PI4 = np.pi**4


def _probe(probe) -> ProbeModel:
    return probe if isinstance(probe, ProbeModel) else ProbeModel.from_epsilon(float(probe))


def weak_coupling_ok(eps: float, M: int, N: int) -> bool:
    return eps * max(M, N) <= WEAK_COUPLING_LIMIT


@dataclass(frozen=True)
class Standard:
    n_paths: int
    epsilon: float
    delta: float
    detect_prob: float
    shift_sum: float
    postselect_prob: float
    method: str


def single_particle_standard(n_paths: int, probe: ProbeModel | float) -> Standard:
    """Trace left by one particle crossing an ``n_paths`` equal-amplitude channel.

    Up to :data:`STANDARD_SIMULATION_LIMIT` paths the fan-out network is
    propagated; beyond that the exact post-selected expression
    ``eps^2 / (n (1 - eps^2) + eps^2)`` is used directly.
    """
    if n_paths < 1:
        raise ConfigurationError(f"a channel needs at least one path, got {n_paths}")
    probe = _probe(probe)
    eps, delta = probe.epsilon, probe.delta
    if eps == 0.0:
        return Standard(n_paths, 0.0, delta, 0.0, 0.0, 1.0, "trivial")
    if n_paths > STANDARD_SIMULATION_LIMIT:
        n = float(n_paths)
        p = 1.0 - eps * eps + eps * eps / n
        return Standard(n_paths, eps, delta, eps * eps / n / p, abs(delta), p, "closed-form")
    spec = NetworkSpec("SimpleChannel", N=n_paths)
    net = build(spec)
    _, state = simulate(net, eps)
    p, channel = post_select(state, "D")
    wv = path_amplitudes(net, "D").weak_values()
    return Standard(
        n_paths, eps, delta, trace_detect_prob(channel), shift_sum(wv, delta), p, "simulated"
    )


@dataclass(frozen=True)
class AsymptoticFormula:
    id: str
    evaluate: Callable[[int, int, float, float], float]
    regime: Callable[[int, int], bool]
    regime_text: str


def _salih_regime(M, N):
    return M >= 8 and N >= 10 * M


def _li_regime(M, N):
    return M >= 8 and N >= 8 and M % 2 == 0 and N % 2 == 0


ASYMPTOTIC: dict[str, AsymptoticFormula] = {
    f.id: f
    for f in [
        AsymptoticFormula(
            "zeno_bit0_trace", lambda M, N, e, d: 3 * e * e * N / 8,
            lambda M, N: N >= 100, "N >= 100",
        ),
        AsymptoticFormula(
            "salih_bit0_trace", lambda M, N, e, d: e * e * PI4 * N / (2**7 * M**3),
            _salih_regime, "M >= 8, N >= 10 M",
        ),
        AsymptoticFormula(
            "salih_bit0_shift", lambda M, N, e, d: abs(d) * PI2 * N / (16 * M),
            _salih_regime, "M >= 8, N >= 10 M",
        ),
        AsymptoticFormula(
            "li_bit0_trace", lambda M, N, e, d: e * e * PI4 * N / (2**8 * M**3),
            _li_regime, "M, N >= 8 and even",
        ),
        AsymptoticFormula(
            "li_bit0_shift", lambda M, N, e, d: abs(d) * PI2 * N / (16 * M),
            _li_regime, "M, N >= 8 and even",
        ),
        AsymptoticFormula(
            "li_bit1_trace", lambda M, N, e, d: 3 * e * e * PI4 * M / (2**6 * N**3),
            _li_regime, "M, N >= 8 and even",
        ),
        AsymptoticFormula(
            "li_bit1_shift", lambda M, N, e, d: abs(d) * PI2 * M / (4 * N),
            _li_regime, "M, N >= 8 and even",
        ),
        AsymptoticFormula(
            "salih_fail_bit1", lambda M, N, e, d: PI2 * M / (4 * N),
            lambda M, N: N >= 10 * M, "N >= 10 M",
        ),
        AsymptoticFormula(
            "salih_fail_bit0", lambda M, N, e, d: PI2 / 4 * (M / N + 1 / M),
            _salih_regime, "M >= 8, N >= 10 M",
        ),
        AsymptoticFormula(
            "salih_error", lambda M, N, e, d: PI2 / (4 * M * M),
            lambda M, N: M >= 8, "M >= 8",
        ),
        AsymptoticFormula(
            "bohm_cross_expect", lambda M, N, e, d: PI2 / 4 * (M / N + N / (4 * M)),
            _li_regime, "M, N >= 8 and even",
        ),
    ]
}

# (trace formula, shift formula) for the correct post-selection of each protocol
_FORMULAS_FOR = {
    ("ZenoChain", 0): ("zeno_bit0_trace", None),
    ("Salih", 0): ("salih_bit0_trace", "salih_bit0_shift"),
    ("Li", 0): ("li_bit0_trace", "li_bit0_shift"),
    ("Li", 1): ("li_bit1_trace", "li_bit1_shift"),
}


def formula_ids(kind: str, bit: int) -> tuple[str | None, str | None]:
    return _FORMULAS_FOR.get((kind, bit), (None, None))


def eval_asymptotic(
    id: str, M: int, N: int, eps: float = 0.0, delta: float = 0.0, warn: bool = True
) -> float:
    """Closed-form large-size prediction ``id`` at the given parameters.

    Emits :class:`RegimeWarning` when (M, N) fall outside the formula's regime.
    """
    try:
        f = ASYMPTOTIC[id]
    except KeyError:
        raise ValueError(f"unknown asymptotic formula {id!r}; known: {sorted(ASYMPTOTIC)}") from None
    if warn and not f.regime(M, N):
        warnings.warn(f"{id} at M={M}, N={N}: outside regime ({f.regime_text})", RegimeWarning, stacklevel=2)
    return float(f.evaluate(M, N, eps, delta))


def classify(detect_ratio: float, shift_ratio: float) -> str:
    """Verdict from the two trace ratios (protocol / single-particle standard)."""
    if detect_ratio < 1.0 and shift_ratio < 1.0:
        return "counterfactual"
    if detect_ratio > 1.0 and shift_ratio > 1.0:
        return "not counterfactual"
    return "mixed"


def compare(spec: NetworkSpec, probe: ProbeModel | float) -> TraceReport:
    """Trace of a correctly working protocol run versus the single-particle standard."""
    probe = _probe(probe)
    eps, delta = probe.epsilon, probe.delta
    if eps <= 0.0:
        raise ValueError("compare needs a nonzero probe coupling")
    detector = spec.correct_detector
    if detector is None:
        raise ConfigurationError(f"{spec.kind} bit {spec.bit}: no detector fires")
    net = build(spec)
    _, state = simulate(net, eps)
    p, channel = post_select(state, detector)
    trace = trace_detect_prob(channel)
    wv = path_amplitudes(net, detector).weak_values()
    shifts = shift_sum(wv, delta)
    std = single_particle_standard(spec.n_paths, probe)

    trace_id, shift_id = formula_ids(spec.kind, spec.bit)
    in_regime = None
    a_trace = a_shift = None
    if trace_id:
        in_regime = ASYMPTOTIC[trace_id].regime(spec.M, spec.N)
        a_trace = eval_asymptotic(trace_id, spec.M, spec.N, eps, delta, warn=False)
    if shift_id:
        a_shift = eval_asymptotic(shift_id, spec.M, spec.N, eps, delta, warn=False)

    detect_ratio = trace / std.detect_prob
    shift_ratio = shifts / std.shift_sum
    return TraceReport(
        kind=spec.kind,
        M=spec.M,
        N=spec.N,
        bit=spec.bit,
        detector=detector,
        epsilon=eps,
        delta=delta,
        n_paths=spec.n_paths,
        postselect_prob=p,
        trace_detect_prob=trace,
        shift_sum=shifts,
        standard_detect=std.detect_prob,
        standard_shift=std.shift_sum,
        detect_ratio=detect_ratio,
        shift_ratio=shift_ratio,
        verdict=classify(detect_ratio, shift_ratio),
        asymptotic_trace=a_trace,
        asymptotic_shift=a_shift,
        in_regime=in_regime,
        weak_values=wv,
    )
