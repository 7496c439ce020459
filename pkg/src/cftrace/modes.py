"""Single-particle mode amplitudes and the lossless/lossy optical elements.

A :class:`ModeState` assigns a complex amplitude to every live port of a
network. Anything that leaves the network (absorbed by a shutter, transmitted
through a leaky mirror, exiting on Bob's side) is booked as *weight* in a named
sink. Sinks are never fed back into an element, so they are stored as
probabilities rather than amplitudes: two losses at different times are
orthogonal events and must not interfere.

Beam splitters use the real rotation convention

    |L> -> cos(a)|L> + sin(a)|R>
    |R> -> -sin(a)|L> + cos(a)|R>

with transmittance ``sin(a)**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ModeState",
    "BeamSplitter",
    "rotate",
    "beam_splitter_matrix",
    "apply_beam_splitter",
    "chain_evolve",
    "apply_lossy_mirror",
    "apply_hwp_phase",
    "apply_shutter",
]


def rotate(a, b, alpha: float):
    """Apply the beam-splitter rotation to amplitude(s) ``a`` (left), ``b`` (right).

    Works elementwise on scalars or arrays; used by every propagator in the
    package so that all of them share one phase convention.
    """
    c, s = np.cos(alpha), np.sin(alpha)
    return c * a - s * b, s * a + c * b


def beam_splitter_matrix(alpha: float) -> np.ndarray:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class ModeState:
    """Amplitudes over named live ports plus absorbed weight per sink."""

    ports: tuple[str, ...]
    amps: np.ndarray
    sinks: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        ports = tuple(self.ports)
        if len(set(ports)) != len(ports):
            raise ConfigurationError(f"duplicate port names in {ports}")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.shape != (len(ports),):
            raise ConfigurationError(
                f"{len(ports)} ports but {amps.shape[0]} amplitudes"
            )
        if not np.all(np.isfinite(amps)):
            raise ConfigurationError("amplitudes must be finite")
        amps.setflags(write=False)
        overlap = set(ports) & set(self.sinks)
        if overlap:
            raise ConfigurationError(f"names used both as port and sink: {sorted(overlap)}")
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "sinks", dict(self.sinks))

    @classmethod
    def prepare(cls, ports: Sequence[str], source: str) -> "ModeState":
        """A freshly emitted particle: amplitude 1 at ``source``, 0 elsewhere."""
        ports = tuple(ports)
        if source not in ports:
            raise ConfigurationError(f"unknown source port {source!r}")
        amps = np.zeros(len(ports), dtype=complex)
        amps[ports.index(source)] = 1.0
        return cls(ports, amps)

    def index(self, port: str) -> int:
        if port in self.sinks:
            raise ConfigurationError(f"port {port!r} is a loss sink")
        try:
            return self.ports.index(port)
        except ValueError:
            raise ConfigurationError(f"unknown port {port!r}") from None

    def amp(self, port: str) -> complex:
        return complex(self.amps[self.index(port)])

    def probability(self, name: str) -> float:
        """Weight found at a live port or accumulated in a sink."""
        if name in self.sinks:
            return float(self.sinks[name])
        return abs(self.amp(name)) ** 2

    @property
    def live_weight(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def sink_weight(self) -> float:
        return float(sum(self.sinks.values()))

    @property
    def total_weight(self) -> float:
        return self.live_weight + self.sink_weight

    def replace(self, amps=None, sinks=None) -> "ModeState":
        return ModeState(
            self.ports,
            self.amps if amps is None else amps,
            self.sinks if sinks is None else sinks,
        )

    def __repr__(self):
        body = ", ".join(f"{p}={a:.6g}" for p, a in zip(self.ports, self.amps))
        if self.sinks:
            body += "; " + ", ".join(f"[{k}]={v:.6g}" for k, v in self.sinks.items())
        return f"ModeState({body})"


@dataclass(frozen=True)
class BeamSplitter:
    """A real two-port rotation acting on ``(left, right)``."""

    alpha: float
    left: str = "L"
    right: str = "R"

    @property
    def transmittance(self) -> float:
        return float(np.sin(self.alpha) ** 2)

    @property
    def matrix(self) -> np.ndarray:
        return beam_splitter_matrix(self.alpha)


def apply_beam_splitter(state: ModeState, bs: BeamSplitter) -> ModeState:
    i, j = state.index(bs.left), state.index(bs.right)
    if i == j:
        raise ConfigurationError("a beam splitter needs two distinct ports")
    amps = state.amps.copy()
    amps[i], amps[j] = rotate(state.amps[i], state.amps[j], bs.alpha)
    return state.replace(amps=amps)


def chain_evolve(
    state: ModeState,
    alpha: float,
    n: int,
    ports: tuple[str, str] = ("L", "R"),
) -> ModeState:
    """Pass ``n`` identical beam splitters; closed form is a rotation by ``n*alpha``."""
    if n < 0:
        raise ConfigurationError(f"chain length must be >= 0, got {n}")
    return apply_beam_splitter(state, BeamSplitter(n * alpha, *ports))


def _move_to_sink(state: ModeState, port: str, fraction: float, sink: str) -> ModeState:
    i = state.index(port)
    if sink in state.ports:
        raise ConfigurationError(f"sink name {sink!r} collides with a live port")
    a = state.amps[i]
    amps = state.amps.copy()
    amps[i] = np.sqrt(1.0 - fraction) * a
    sinks = dict(state.sinks)
    sinks[sink] = sinks.get(sink, 0.0) + fraction * abs(a) ** 2
    return state.replace(amps=amps, sinks=sinks)


def apply_lossy_mirror(
    state: ModeState, port: str, T3: float, sink: str | None = None
) -> ModeState:
    """Reflect ``sqrt(1-T3)`` of the amplitude at ``port``; the transmitted part is lost.

    No phase is attached to the reflected wave.
    """
    if not 0.0 <= T3 <= 1.0:
        raise ConfigurationError(f"mirror transmittance must lie in [0, 1], got {T3}")
    return _move_to_sink(state, port, T3, sink or f"mirror:{port}")


def apply_hwp_phase(state: ModeState, port: str) -> ModeState:
    """Half-wave plate in one arm: a pi phase on that port."""
    i = state.index(port)
    amps = state.amps.copy()
    amps[i] = -amps[i]
    return state.replace(amps=amps)


def apply_shutter(state: ModeState, port: str, sink: str | None = None) -> ModeState:
    """Bob's absorber: all weight at ``port`` goes to ``shutter:<port>``."""
    return _move_to_sink(state, port, 1.0, sink or f"shutter:{port}")
