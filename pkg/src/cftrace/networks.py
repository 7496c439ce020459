"""Interferometer networks for every communication setup, and their propagation.

A :class:`NetworkSpec` is a declarative description (kind, sizes, Bob's bit,
per-path element overrides). :func:`build` compiles it into a :class:`Network`:
a straight-line program of optical operations over a handful of wavefront
modes. Nested chains reuse modes, so a Salih network with thousands of
channel paths still lives on three ports:

    L  outer left arm (Alice's side, leaky side mirrors)
    R  outer right arm, which is also the inner chain's left arm
    C  inner right arm, the channel path on Bob's side

Channel paths are labelled ``(m, n)``: n-th interferometer of the m-th inner
chain. Single-chain setups use ``m = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigurationError
from .modes import rotate
from .trace import (
    FIRST_ORDER,
    BranchedState,
    ProbeModel,
    post_select,
    weak_value_projection,
)

__all__ = [
    "KINDS",
    "ELEMENTS",
    "NetworkSpec",
    "Network",
    "PathAmplitudeTable",
    "Split",
    "Absorb",
    "Leak",
    "Flip",
    "Probe",
    "Mix",
    "side_mirror_transmittance",
    "build",
    "simulate",
    "path_amplitudes",
    "nested_mzi3_channel_state",
]

KINDS = ("SimpleChannel", "IfmMzi", "HwpMzi", "ZenoChain", "NestedMzi3", "Salih", "Li")
ELEMENTS = ("free", "shutter", "hwp")

_ALIASES = {
    "simple": "SimpleChannel",
    "simplechannel": "SimpleChannel",
    "ifm": "IfmMzi",
    "ifmmzi": "IfmMzi",
    "hwp": "HwpMzi",
    "hwpmzi": "HwpMzi",
    "zeno": "ZenoChain",
    "zenochain": "ZenoChain",
    "nested": "NestedMzi3",
    "nested3": "NestedMzi3",
    "nestedmzi3": "NestedMzi3",
    "salih": "Salih",
    "li": "Li",
}

# element Bob installs on every channel path for bit 1 (bit 0 is always free)
_BIT1_ELEMENT = {
    "SimpleChannel": "shutter",
    "IfmMzi": "shutter",
    "HwpMzi": "hwp",
    "ZenoChain": "shutter",
    "NestedMzi3": "shutter",
    "Salih": "shutter",
    "Li": "hwp",
}

# detector that fires when the protocol works as intended
_CORRECT_DETECTOR = {
    ("SimpleChannel", 0): "D",
    ("SimpleChannel", 1): None,
    ("IfmMzi", 0): "D2",
    ("IfmMzi", 1): "D1",
    ("HwpMzi", 0): "D2",
    ("HwpMzi", 1): "D1",
    ("ZenoChain", 0): "D2",
    ("ZenoChain", 1): "D1",
    ("NestedMzi3", 0): "D1",
    ("NestedMzi3", 1): "D2",
    ("Salih", 0): "D1",
    ("Salih", 1): "D2",
    ("Li", 0): "D1",
    ("Li", 1): "D2",
}

# images of the three inner paths on the detector ports
_NESTED3_OUT = np.array(
    [
        [1 / np.sqrt(3), -1 / np.sqrt(3), 1 / np.sqrt(3)],
        [-1 / np.sqrt(6), 1 / np.sqrt(6), np.sqrt(2 / 3)],
        [1 / np.sqrt(2), 1 / np.sqrt(2), 0.0],
    ]
)


def side_mirror_transmittance(N: int) -> float:
    """Leak ``1 - cos^(2N)(pi/2N)`` that balances one blocked inner chain."""
    return float(-np.expm1(2 * N * np.log(np.cos(np.pi / (2 * N)))))


def _parse_path(text: str) -> tuple[int, int]:
    m, n = text.replace(",", ".").split(".")
    return int(m), int(n)


@dataclass(frozen=True)
class NetworkSpec:
    """Declarative description of one apparatus.

    ``M`` counts outer beam splitters and ``N`` inner ones (for a simple channel
    ``N`` is the number of parallel paths). ``elements`` overrides the
    bit-derived element on individual paths.
    """

    kind: str
    M: int = 1
    N: int = 2
    bit: int = 0
    elements: Mapping[tuple[int, int], str] = field(default_factory=dict)
    side_mirror_T3: float | None = None

    def __post_init__(self):
        kind = _ALIASES.get(str(self.kind).lower().replace("_", "").replace("-", ""), self.kind)
        if kind not in KINDS:
            raise ConfigurationError(f"unknown network kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "elements", dict(self.elements))
        M, N = self.M, self.N
        if self.bit not in (0, 1):
            raise ConfigurationError(f"bit must be 0 or 1, got {self.bit!r}")
        if kind == "SimpleChannel" and N < 1:
            raise ConfigurationError("SimpleChannel: needs N >= 1 paths")
        if kind == "ZenoChain" and N < 2:
            raise ConfigurationError("ZenoChain: needs N >= 2 beam splitters")
        if kind == "Salih" and (M < 2 or N < 2):
            raise ConfigurationError("Salih: needs M >= 2 and N >= 2")
        if kind == "Li":
            if M < 2 or N < 2:
                raise ConfigurationError("Li: needs M >= 2 and N >= 2")
            if M % 2 or N % 2:
                raise ConfigurationError(f"Li: M and N have to be even (got M={M}, N={N})")
        if self.side_mirror_T3 is not None:
            if kind != "Salih":
                raise ConfigurationError("side_mirror_T3 applies to Salih networks only")
            if not 0.0 <= self.side_mirror_T3 <= 1.0:
                raise ConfigurationError("side_mirror_T3 must lie in [0, 1]")
        valid = set(self.paths)
        for path, el in self.elements.items():
            if path not in valid:
                raise ConfigurationError(f"{kind}: no channel path {path}")
            if el not in ELEMENTS:
                raise ConfigurationError(f"unknown element {el!r} (use one of {ELEMENTS})")

    @property
    def paths(self) -> tuple[tuple[int, int], ...]:
        if self.kind == "SimpleChannel":
            return tuple((1, i) for i in range(1, self.N + 1))
        if self.kind in ("IfmMzi", "HwpMzi", "NestedMzi3"):
            return ((1, 1),)
        if self.kind == "ZenoChain":
            return tuple((1, n) for n in range(1, self.N))
        return tuple((m, n) for m in range(1, self.M) for n in range(1, self.N))

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def element(self, path) -> str:
        if path in self.elements:
            return self.elements[path]
        return _BIT1_ELEMENT[self.kind] if self.bit else "free"

    @property
    def correct_detector(self) -> str | None:
        return _CORRECT_DETECTOR[(self.kind, self.bit)]

    @property
    def T3(self) -> float:
        if self.kind != "Salih":
            return 0.0
        if self.side_mirror_T3 is not None:
            return self.side_mirror_T3
        return side_mirror_transmittance(self.N)

    def to_config(self) -> dict[str, str]:
        """Flat string key-value form (inverse of :meth:`from_config`)."""
        cfg = {"kind": self.kind, "M": str(self.M), "N": str(self.N), "bit": str(self.bit)}
        if self.elements:
            cfg["elements"] = ",".join(
                f"{m}.{n}:{el}" for (m, n), el in sorted(self.elements.items())
            )
        if self.side_mirror_T3 is not None:
            cfg["side_mirror_T3"] = repr(float(self.side_mirror_T3))
        return cfg

    @classmethod
    def from_config(cls, cfg: Mapping[str, str]) -> "NetworkSpec":
        unknown = set(cfg) - {"kind", "M", "N", "bit", "elements", "side_mirror_T3"}
        if unknown:
            raise ConfigurationError(f"unknown network keys: {sorted(unknown)}")
        if "kind" not in cfg:
            raise ConfigurationError("network config needs a 'kind'")
        elements = {}
        for item in filter(None, str(cfg.get("elements", "")).split(",")):
            path, _, el = item.partition(":")
            elements[_parse_path(path.strip())] = el.strip()
        t3 = cfg.get("side_mirror_T3")
        return cls(
            kind=cfg["kind"],
            M=int(cfg.get("M", 1)),
            N=int(cfg.get("N", 2)),
            bit=int(cfg.get("bit", 0)),
            elements=elements,
            side_mirror_T3=None if t3 in (None, "") else float(t3),
        )


# -- compiled operations --------------------------------------------------


@dataclass(frozen=True)
class Split:
    left: int
    right: int
    alpha: float


@dataclass(frozen=True)
class Absorb:
    port: int
    sink: int


@dataclass(frozen=True)
class Leak:
    port: int
    T3: float
    sink: int


@dataclass(frozen=True)
class Flip:
    port: int


@dataclass(frozen=True)
class Probe:
    port: int
    path: tuple[int, int]


@dataclass(frozen=True, eq=False)
class Mix:
    ports: tuple[int, ...]
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class Network:
    spec: NetworkSpec
    ports: tuple[str, ...]
    sinks: tuple[str, ...]
    ops: tuple
    source: int
    detectors: Mapping[str, int]
    paths: tuple
    aliases: Mapping[str, str] = field(default_factory=dict)

    def port(self, name: str) -> int:
        name = self.aliases.get(name, name)
        if name in self.detectors:
            return self.detectors[name]
        try:
            return self.ports.index(name)
        except ValueError:
            raise ConfigurationError(f"unknown port {name!r}") from None

    def detector(self, name: str) -> int:
        try:
            return self.detectors[name]
        except KeyError:
            raise ConfigurationError(
                f"{name!r} is not a detector of {self.spec.kind} ({sorted(self.detectors)})"
            ) from None


class _Builder:
    def __init__(self, spec: NetworkSpec, ports, sinks):
        self.spec = spec
        self.ports = tuple(ports)
        self.sinks = tuple(sinks)
        self.ops: list = []
        self.paths: list = []

    def p(self, name):
        return self.ports.index(name)

    def s(self, name):
        return self.sinks.index(name)

    def split(self, left, right, alpha):
        self.ops.append(Split(self.p(left), self.p(right), alpha))

    def absorb(self, port, sink):
        self.ops.append(Absorb(self.p(port), self.s(sink)))

    def leak(self, port, T3, sink):
        if T3 > 0.0:
            self.ops.append(Leak(self.p(port), T3, self.s(sink)))

    def channel(self, port, path):
        """Probe coupling on the way to Bob, then Bob's element."""
        self.ops.append(Probe(self.p(port), path))
        self.paths.append(path)
        el = self.spec.element(path)
        if el == "shutter":
            self.absorb(port, "shutter")
        elif el == "hwp":
            self.ops.append(Flip(self.p(port)))

    def finish(self, source, detectors, aliases=None) -> Network:
        return Network(
            self.spec,
            self.ports,
            self.sinks,
            tuple(self.ops),
            self.p(source),
            {d: self.p(p) for d, p in detectors.items()},
            tuple(self.paths),
            aliases or {},
        )


def _build_simple(spec):
    names = [f"P{i}" for i in range(1, spec.N + 1)]
    b = _Builder(spec, names, ("shutter", "bob_reject"))
    # equal-amplitude fan-out; P_k takes 1/sqrt(N) of the remaining carrier
    thetas = [np.arcsin(1 / np.sqrt(spec.N - k + 2)) for k in range(2, spec.N + 1)]
    for k, th in zip(range(2, spec.N + 1), thetas):
        b.split("P1", f"P{k}", th)
    for i in range(1, spec.N + 1):
        b.channel(f"P{i}", (1, i))
    for k, th in reversed(list(zip(range(2, spec.N + 1), thetas))):
        b.split("P1", f"P{k}", -th)
    for k in range(2, spec.N + 1):
        b.absorb(f"P{k}", "bob_reject")
    return b.finish("P1", {"D": "P1"})


def _build_mzi(spec):
    b = _Builder(spec, ("L", "R"), ("shutter",))
    b.split("L", "R", np.pi / 4)
    b.channel("R", (1, 1))
    b.split("L", "R", np.pi / 4)
    return b.finish("L", {"D1": "L", "D2": "R"})


def _build_zeno(spec):
    alpha = np.pi / (2 * spec.N)
    b = _Builder(spec, ("L", "R"), ("shutter",))
    for n in range(1, spec.N + 1):
        b.split("L", "R", alpha)
        if n < spec.N:
            b.channel("R", (1, n))
    return b.finish("L", {"D1": "L", "D2": "R"})


def _build_nested3(spec):
    b = _Builder(spec, ("A", "B", "C"), ("shutter",))
    b.split("A", "B", np.arccos(1 / np.sqrt(3)))
    b.split("B", "C", np.pi / 4)
    b.channel("A", (1, 1))
    b.ops.append(Mix((0, 1, 2), _NESTED3_OUT))
    return b.finish("A", {"D1": "A", "D2": "B", "D3": "C"})


def _build_nested_chains(spec):
    M, N = spec.M, spec.N
    beta = np.pi / (2 * M)
    alpha = np.pi / (2 * N) if spec.kind == "Salih" else np.pi / N
    T3 = spec.T3
    b = _Builder(spec, ("L", "R", "C"), ("side_mirror", "shutter", "bob_exit"))
    for k in range(1, M + 1):
        b.split("L", "R", beta)
        if k == M:
            break
        b.leak("L", T3, "side_mirror")
        for n in range(1, N + 1):
            b.split("R", "C", alpha)
            if n < N:
                b.channel("C", (k, n))
        # what leaves the inner chain on Bob's side never returns
        b.absorb("C", "bob_exit")
    aliases = {"outer.L": "L", "outer.R": "R", "inner.L": "R", "inner.R": "C"}
    return b.finish("L", {"D1": "L", "D2": "R"}, aliases)


_BUILDERS = {
    "SimpleChannel": _build_simple,
    "IfmMzi": _build_mzi,
    "HwpMzi": _build_mzi,
    "ZenoChain": _build_zeno,
    "NestedMzi3": _build_nested3,
    "Salih": _build_nested_chains,
    "Li": _build_nested_chains,
}


def build(spec: NetworkSpec) -> Network:
    """Compile ``spec`` into a propagatable :class:`Network`."""
    return _BUILDERS[spec.kind](spec)


# -- propagation ----------------------------------------------------------


def _abs2(x):
    return x.real * x.real + x.imag * x.imag


def _propagate_first_order(net: Network, eps: float):
    """Forward propagation keeping the untagged branch and one branch per path.

    Returns ``(amps, sink_weights, keys)`` with amps shaped (ports, branches).
    """
    n_rows = 1 + (len(net.paths) if eps > 0 else 0)
    A = np.zeros((len(net.ports), n_rows), dtype=complex)
    W = np.zeros((len(net.sinks), n_rows))
    A[net.source, 0] = 1.0
    keep = np.sqrt(1.0 - eps * eps)
    live = 1
    for op in net.ops:
        if isinstance(op, Split):
            a, b = A[op.left, :live], A[op.right, :live]
            A[op.left, :live], A[op.right, :live] = rotate(a, b, op.alpha)
        elif isinstance(op, Probe):
            if eps > 0:
                A[op.port, live] = eps * A[op.port, 0]
                A[op.port, 0] *= keep
                live += 1
        elif isinstance(op, Absorb):
            W[op.sink, :live] += _abs2(A[op.port, :live])
            A[op.port, :live] = 0.0
        elif isinstance(op, Leak):
            W[op.sink, :live] += op.T3 * _abs2(A[op.port, :live])
            A[op.port, :live] *= np.sqrt(1.0 - op.T3)
        elif isinstance(op, Flip):
            A[op.port, :live] *= -1.0
        elif isinstance(op, Mix):
            idx = list(op.ports)
            A[idx, :live] = op.matrix @ A[idx, :live]
        else:  # pragma: no cover
            raise TypeError(f"unknown operation {op!r}")
    keys = [frozenset()] + ([frozenset([p]) for p in net.paths] if eps > 0 else [])
    return A, W, keys


def _to_branched(net: Network, A, W, keys, truncation) -> BranchedState:
    det_names = list(net.detectors)
    det_rows = [net.detectors[d] for d in det_names]
    stray = np.delete(A, det_rows, axis=0)
    if stray.size and np.max(np.abs(stray)) > 1e-9:  # pragma: no cover - builder bug
        raise RuntimeError("amplitude left on a non-detector port")
    return BranchedState(
        tuple(det_names),
        tuple(keys),
        A[det_rows, :].T,
        net.sinks,
        W.T,
        truncation,
    )


def simulate(
    spec: NetworkSpec | Network, probe: ProbeModel | float = 0.0
) -> tuple[dict[str, float], BranchedState]:
    """Send one particle through the network with a probe on every channel path.

    ``probe`` may be a :class:`ProbeModel` or a bare coupling ``eps``. Returns
    the probability of each detector and sink, and the first-order branched
    state on the detector ports.
    """
    net = spec if isinstance(spec, Network) else build(spec)
    eps = probe.epsilon if isinstance(probe, ProbeModel) else float(probe)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    A, W, keys = _propagate_first_order(net, eps)
    state = _to_branched(net, A, W, keys, FIRST_ORDER)
    probs = {d: state.weight(d) for d in state.ports}
    probs.update({s: state.weight(s) for s in state.sinks})
    return probs, state


@dataclass(frozen=True, eq=False)
class PathAmplitudeTable:
    """Forward and backward amplitudes on every channel path for one post-selection."""

    spec: NetworkSpec
    detector: str
    paths: tuple
    fwd: dict
    bwd: dict
    overlap: complex

    def weak_values(self) -> dict:
        return {
            p: weak_value_projection(self.fwd[p], self.bwd[p], self.overlap) for p in self.paths
        }

    def grid(self, which: str = "fwd") -> np.ndarray:
        """Values as an (M-1) x (N-1) array, zeros where a path is absent."""
        table = {"fwd": self.fwd, "bwd": self.bwd}.get(which)
        if table is None:
            table = self.weak_values()
        rows = max(m for m, _ in self.paths)
        cols = max(n for _, n in self.paths)
        out = np.zeros((rows, cols), dtype=complex)
        for (m, n), v in table.items():
            out[m - 1, n - 1] = v
        return out

    @property
    def postselect_prob(self) -> float:
        return abs(self.overlap) ** 2


def _backward(net: Network, covector: np.ndarray) -> dict:
    """Amplitude to reach the post-selected state from each probe location."""
    b = np.array(covector, dtype=complex)
    bwd = {}
    for op in reversed(net.ops):
        if isinstance(op, Split):
            b[op.left], b[op.right] = rotate(b[op.left], b[op.right], -op.alpha)
        elif isinstance(op, Probe):
            bwd[op.path] = complex(b[op.port])
        elif isinstance(op, Absorb):
            b[op.port] = 0.0
        elif isinstance(op, Leak):
            b[op.port] *= np.sqrt(1.0 - op.T3)
        elif isinstance(op, Flip):
            b[op.port] = -b[op.port]
        elif isinstance(op, Mix):
            idx = list(op.ports)
            b[idx] = op.matrix.T @ b[idx]
    return bwd


def _forward(net: Network):
    a = np.zeros(len(net.ports), dtype=complex)
    a[net.source] = 1.0
    fwd = {}
    for op in net.ops:
        if isinstance(op, Split):
            a[op.left], a[op.right] = rotate(a[op.left], a[op.right], op.alpha)
        elif isinstance(op, Probe):
            fwd[op.path] = complex(a[op.port])
        elif isinstance(op, Absorb):
            a[op.port] = 0.0
        elif isinstance(op, Leak):
            a[op.port] *= np.sqrt(1.0 - op.T3)
        elif isinstance(op, Flip):
            a[op.port] = -a[op.port]
        elif isinstance(op, Mix):
            idx = list(op.ports)
            a[idx] = op.matrix @ a[idx]
    return fwd, a


def path_amplitudes(
    spec: NetworkSpec | Network,
    detector: str | None = None,
    final_state: Mapping[str, complex] | None = None,
) -> PathAmplitudeTable:
    """Forward/backward path amplitudes and <fin|in> for a post-selection.

    Post-selects on ``detector`` (default: the protocol's correct detector) or
    on an arbitrary normalised superposition ``final_state`` of detector ports.
    """
    net = spec if isinstance(spec, Network) else build(spec)
    if not net.paths:
        raise ConfigurationError(f"{net.spec.kind} has no channel paths")
    covector = np.zeros(len(net.ports), dtype=complex)
    if final_state is not None:
        for name, amp in final_state.items():
            covector[net.detector(name)] += np.conj(amp)
        label = "custom"
    else:
        label = detector or net.spec.correct_detector
        if label is None:
            raise ConfigurationError(f"{net.spec.kind} bit {net.spec.bit}: no detector fires")
        covector[net.detector(label)] = 1.0
    fwd, out = _forward(net)
    bwd = _backward(net, covector)
    return PathAmplitudeTable(
        net.spec, label, net.paths, fwd, bwd, complex(covector @ out)
    )


def nested_mzi3_channel_state(
    element: str = "free", probe: ProbeModel | float = 0.0, detector: str = "D1"
) -> BranchedState:
    """Channel-probe state left by the three-path nested interferometer.

    Post-selected on ``detector``; raises :class:`PostSelectionError` when that
    detector cannot fire.
    """
    if element not in ("free", "shutter"):
        raise ConfigurationError(f"path A holds 'free' or 'shutter', not {element!r}")
    spec = NetworkSpec("NestedMzi3", elements={(1, 1): element})
    _, state = simulate(spec, probe)
    _, channel = post_select(state, detector)
    return channel

