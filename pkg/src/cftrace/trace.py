"""Weak probes on channel paths, tagged branches, post-selection and weak values.

Every channel path carries a Gaussian pointer of width ``Delta`` that is shifted
by ``delta`` when the particle passes. Only two pointer states matter: the
undisturbed ``|Phi0>`` and the orthogonal remainder ``|Phi_perp>`` of the
shifted pointer, so a pass maps ``|Phi0> -> sqrt(1-eps^2)|Phi0> + eps|Phi_perp>``.

The joint particle-probe state is kept as a list of *branches*. A branch is
labelled by the set of paths whose probe has flipped; the empty set is the
untagged branch. In ``"first-order"`` truncation at most one probe is ever
flipped, which is exact to O(eps) in every amplitude. ``"exact"`` keeps all
subsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from .errors import ConfigurationError, PostSelectionError
from .modes import ModeState

__all__ = [
    "FIRST_ORDER",
    "EXACT",
    "POSTSELECT_FLOOR",
    "ProbeModel",
    "epsilon_from_probe",
    "BranchedState",
    "tag_interaction",
    "post_select",
    "trace_detect_prob",
    "weak_value_projection",
    "shift_sum",
    "TraceReport",
]

FIRST_ORDER = "first-order"
EXACT = "exact"

# below this a post-selection is treated as impossible
POSTSELECT_FLOOR = 1e-14

Path = Hashable
UNTAGGED: frozenset = frozenset()


def epsilon_from_probe(delta: float, Delta: float) -> float:
    """Overlap parameter of a pointer shifted by ``delta`` with width ``Delta``.

    >>> round(epsilon_from_probe(1.0, 1.0), 5)
    0.79512
    """
    if not Delta > 0:
        raise ValueError(f"probe width must be positive, got {Delta}")
    x = (delta / Delta) ** 2
    return float(np.sqrt(-np.expm1(-x)))


@dataclass(frozen=True)
class ProbeModel:
    """Gaussian pointer: shift ``delta`` and width ``Delta`` in the same units."""

    delta: float
    Delta: float = 1.0

    def __post_init__(self):
        if not self.Delta > 0:
            raise ValueError(f"probe width must be positive, got {self.Delta}")

    @property
    def epsilon(self) -> float:
        return epsilon_from_probe(self.delta, self.Delta)

    @classmethod
    def from_epsilon(cls, eps: float, Delta: float = 1.0) -> "ProbeModel":
        """Invert the overlap relation: the shift that produces coupling ``eps``."""
        if not 0.0 <= eps < 1.0:
            raise ValueError(f"eps must lie in [0, 1), got {eps}")
        return cls(Delta * float(np.sqrt(-np.log1p(-eps * eps))), Delta)


@dataclass(frozen=True, eq=False)
class BranchedState:
    """Joint particle-probe state as amplitude rows, one per tag set.

    ``amps[k, i]`` is the amplitude of branch ``keys[k]`` at port ``ports[i]``;
    ``sink_weights[k, j]`` is the weight that branch lost into ``sinks[j]``.
    Rows for different keys are orthogonal in probe space, so they never
    interfere with each other.
    """

    ports: tuple[str, ...]
    keys: tuple[frozenset, ...]
    amps: np.ndarray
    sinks: tuple[str, ...] = ()
    sink_weights: np.ndarray | None = None
    truncation: str = FIRST_ORDER

    def __post_init__(self):
        if self.truncation not in (FIRST_ORDER, EXACT):
            raise ValueError(f"unknown truncation {self.truncation!r}")
        amps = np.array(self.amps, dtype=complex)
        keys = tuple(frozenset(k) for k in self.keys)
        if amps.shape != (len(keys), len(self.ports)):
            raise ConfigurationError(
                f"amplitude table {amps.shape} does not match "
                f"{len(keys)} branches x {len(self.ports)} ports"
            )
        if len(set(keys)) != len(keys):
            raise ConfigurationError("duplicate branch keys")
        if self.truncation == FIRST_ORDER and any(len(k) > 1 for k in keys):
            raise ConfigurationError("first-order branches carry at most one tag")
        sw = (
            np.zeros((len(keys), len(self.sinks)))
            if self.sink_weights is None
            else np.array(self.sink_weights, dtype=float)
        )
        if sw.shape != (len(keys), len(self.sinks)):
            raise ConfigurationError("sink weight table has the wrong shape")
        for arr in (amps, sw):
            arr.setflags(write=False)
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "sinks", tuple(self.sinks))
        object.__setattr__(self, "sink_weights", sw)

    @classmethod
    def from_mode_state(cls, state: ModeState, truncation: str = FIRST_ORDER):
        sinks = tuple(state.sinks)
        return cls(
            state.ports,
            (UNTAGGED,),
            state.amps[None, :],
            sinks,
            np.array([[state.sinks[s] for s in sinks]]),
            truncation,
        )

    def _row(self, key) -> int:
        try:
            return self.keys.index(frozenset(key))
        except ValueError:
            raise KeyError(f"no branch tagged {set(key)}") from None

    def branch(self, key: Iterable[Path] = ()) -> ModeState:
        k = self._row(key)
        return ModeState(
            self.ports,
            self.amps[k],
            {s: float(w) for s, w in zip(self.sinks, self.sink_weights[k])},
        )

    @property
    def untagged(self) -> ModeState:
        return self.branch(UNTAGGED)

    @property
    def tagged(self) -> dict:
        """Tagged branches keyed by path (first-order) or by tag set (exact)."""
        out = {}
        for key in self.keys:
            if not key:
                continue
            label = next(iter(key)) if self.truncation == FIRST_ORDER else key
            out[label] = self.branch(key)
        return out

    @property
    def paths(self) -> tuple:
        seen = []
        for key in self.keys:
            for p in key:
                if p not in seen:
                    seen.append(p)
        return tuple(seen)

    def port_index(self, port: str) -> int:
        if port in self.sinks:
            raise ConfigurationError(f"port {port!r} is a loss sink")
        try:
            return self.ports.index(port)
        except ValueError:
            raise ConfigurationError(f"unknown port {port!r}") from None

    def weight(self, name: str) -> float:
        """Total probability at a port or sink, summed over branches."""
        if name in self.sinks:
            return float(self.sink_weights[:, self.sinks.index(name)].sum())
        return float(np.sum(np.abs(self.amps[:, self.port_index(name)]) ** 2))

    @property
    def total_weight(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) + self.sink_weights.sum())

    def branch_weights(self) -> np.ndarray:
        return np.sum(np.abs(self.amps) ** 2, axis=1) + self.sink_weights.sum(axis=1)

    def map_modes(self, fn: Callable[[ModeState], ModeState]) -> "BranchedState":
        """Apply a linear mode operation to every branch independently."""
        states = [fn(self.branch(k)) for k in self.keys]
        sinks = list(self.sinks)
        for st in states:
            sinks += [s for s in st.sinks if s not in sinks]
        return BranchedState(
            states[0].ports,
            self.keys,
            np.array([st.amps for st in states]),
            tuple(sinks),
            np.array([[st.sinks.get(s, 0.0) for s in sinks] for st in states]),
            self.truncation,
        )


def tag_interaction(bs: BranchedState, port: str, path: Path, eps: float) -> BranchedState:
    """Couple the probe of ``path`` to the amplitude currently at ``port``.

    First-order: only the untagged branch feeds the new tag; branches already
    carrying a tag pass through (their re-tagging is O(eps^2)). Exact: every
    branch not yet tagged at ``path`` splits.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    i = bs.port_index(port)
    if any(path in k for k in bs.keys):
        raise ConfigurationError(f"path {path!r} was already traversed")
    if eps == 0.0:
        return bs
    keep = np.sqrt(1.0 - eps * eps)
    amps = bs.amps.copy()
    sources = [k for k in bs.keys if not k] if bs.truncation == FIRST_ORDER else list(bs.keys)
    new_keys, new_rows = [], []
    for key in sources:
        r = bs.keys.index(key)
        new_keys.append(key | {path})
        row = np.zeros(len(bs.ports), dtype=complex)
        row[i] = eps * amps[r, i]
        new_rows.append(row)
        amps[r, i] *= keep
    return BranchedState(
        bs.ports,
        bs.keys + tuple(new_keys),
        np.vstack([amps, np.array(new_rows)]),
        bs.sinks,
        np.vstack([bs.sink_weights, np.zeros((len(new_keys), len(bs.sinks)))]),
        bs.truncation,
    )


def post_select(bs: BranchedState, detector: str) -> tuple[float, BranchedState]:
    """Condition on ``detector`` firing.

    Returns the click probability and the normalised channel state: one
    amplitude per branch, i.e. the probe state left behind in the channel.
    """
    col = bs.amps[:, bs.port_index(detector)]
    prob = float(np.sum(np.abs(col) ** 2))
    if prob < POSTSELECT_FLOOR:
        raise PostSelectionError(f"detector {detector} cannot fire (p={prob:.3g})")
    return prob, BranchedState(
        (detector,), bs.keys, (col / np.sqrt(prob))[:, None], truncation=bs.truncation
    )


def trace_detect_prob(channel_state: BranchedState) -> float:
    """Probability that at least one channel probe is found flipped."""
    w = np.sum(np.abs(channel_state.amps) ** 2, axis=1)
    total = w.sum()
    tagged = sum(wk for key, wk in zip(channel_state.keys, w) if key)
    return float(tagged / total) if total > 0 else 0.0


def weak_value_projection(fwd: complex, bwd: complex, overlap: complex) -> complex:
    """Weak value of a path projector.

    ``fwd`` is the forward-evolving amplitude at the path, ``bwd`` the amplitude
    to reach the post-selected state from that path, ``overlap`` = <fin|in>.
    """
    if abs(overlap) ** 2 < POSTSELECT_FLOOR:
        raise PostSelectionError("pre- and post-selected states are orthogonal")
    return complex(fwd) * complex(bwd) / complex(overlap)


def shift_sum(weak_values: Mapping[Path, complex] | Iterable[complex], delta: float) -> float:
    """Sum of pointer-shift magnitudes, ``delta * sum |weak value|``."""
    vals = weak_values.values() if isinstance(weak_values, Mapping) else weak_values
    return float(abs(delta) * sum(abs(complex(w)) for w in vals))


@dataclass
class TraceReport:
    """Trace left in the channel by a post-selected run, and the verdict."""

    kind: str
    M: int
    N: int
    bit: int
    detector: str
    epsilon: float
    delta: float
    n_paths: int
    postselect_prob: float
    trace_detect_prob: float
    shift_sum: float
    standard_detect: float
    standard_shift: float
    detect_ratio: float
    shift_ratio: float
    verdict: str
    asymptotic_trace: float | None = None
    asymptotic_shift: float | None = None
    in_regime: bool | None = None
    weak_values: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not -1e-15 <= self.trace_detect_prob <= 1 + 1e-12:
            raise ValueError(f"trace probability out of range: {self.trace_detect_prob}")
        if self.shift_sum < 0:
            raise ValueError("shift sum must be non-negative")

    def record(self) -> dict:
        """Flat record without the per-path weak values."""
        return {k: v for k, v in self.__dict__.items() if k != "weak_values"}
