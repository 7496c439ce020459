"""Eavesdropper probes on the channel and Zeno-chain key distribution.

Eve couples a probe of her own to one or more channel paths, just before
Bob's element. Her probe is a two-outcome measurement with Kraus operators

    K0 = I - (1 - sqrt(1 - e^2)) |q><q|,   K1 = e |q><q|

on the particle's mode space (``q`` the monitored port). The no-click record
stays a pure amplitude vector; everything after a click is carried as a
density matrix, so later interference is handled exactly for both records.
A projective probe is the ``e = 1`` limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .networks import Absorb, Flip, Leak, Mix, Network, NetworkSpec, Probe, Split, build

__all__ = [
    "EveProbe",
    "EveDistribution",
    "KeyRound",
    "KeyReport",
    "eve_joint_distribution",
    "keydist_simulate",
    "mutual_information",
]

MODES = ("projective", "weak")


def _parse_location(loc):
    if isinstance(loc, str):
        text = loc.strip().replace(",", ".")
        if "." in text:
            m, n = text.split(".")
            return int(m), int(n)
        return int(text)
    if isinstance(loc, (tuple, list)):
        m, n = loc
        return int(m), int(n)
    return int(loc)


@dataclass(frozen=True)
class EveProbe:
    """Where Eve listens and how hard.

    ``location`` is a path ``(m, n)`` or an inner-chain index ``m`` meaning
    every path of that chain. ``eps_eve`` is her coupling; projective probes
    always use 1.
    """

    location: tuple[int, int] | int
    eps_eve: float = 1.0
    mode: str = "projective"

    def __post_init__(self):
        object.__setattr__(self, "location", _parse_location(self.location))
        if self.mode not in MODES:
            raise ConfigurationError(f"eavesdropper mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "projective":
            object.__setattr__(self, "eps_eve", 1.0)
        elif not 0.0 < self.eps_eve <= 1.0:
            raise ConfigurationError(f"eps_eve must lie in (0, 1], got {self.eps_eve}")

    def monitored(self, spec: NetworkSpec) -> tuple:
        paths = spec.paths
        if isinstance(self.location, tuple):
            if self.location not in paths:
                raise ConfigurationError(f"{spec.kind} has no channel path {self.location}")
            return (self.location,)
        chain = tuple(p for p in paths if p[0] == self.location)
        if not chain:
            raise ConfigurationError(f"{spec.kind} has no inner chain {self.location}")
        return chain

    def label(self) -> str:
        loc = self.location
        return f"{loc[0]}.{loc[1]}" if isinstance(loc, tuple) else str(loc)


@dataclass(frozen=True, eq=False)
class EveDistribution:
    """Joint probabilities of (Eve clicked, where the particle ended up).

    Outcomes are the detector names plus every loss sink.
    """

    spec: NetworkSpec
    eve: EveProbe | None
    outcomes: tuple[str, ...]
    no_click: np.ndarray
    click: np.ndarray

    def prob(self, outcome: str, clicked: bool) -> float:
        table = self.click if clicked else self.no_click
        return float(table[self.outcomes.index(outcome)])

    @property
    def p_click(self) -> float:
        return float(self.click.sum())

    @property
    def total(self) -> float:
        return float(self.click.sum() + self.no_click.sum())

    def detector_given_click(self, detector: str) -> float:
        """P(detector | Eve clicked and some detector fired)."""
        dets = [i for i, o in enumerate(self.outcomes) if o.startswith("D")]
        fired = self.click[dets].sum()
        if fired <= 0:
            raise ZeroDivisionError("no detector fires after an eavesdropper click")
        return float(self.click[self.outcomes.index(detector)] / fired)

    def rows(self) -> list[dict]:
        loc = self.eve.label() if self.eve else ""
        eps = self.eve.eps_eve if self.eve else 0.0
        mode = self.eve.mode if self.eve else "none"
        out = []
        for clicked, table in ((False, self.no_click), (True, self.click)):
            for o, p in zip(self.outcomes, table):
                out.append(
                    {
                        "kind": self.spec.kind,
                        "M": self.spec.M,
                        "N": self.spec.N,
                        "bit": self.spec.bit,
                        "location": loc,
                        "eps_eve": eps,
                        "mode": mode,
                        "eve_click": clicked,
                        "outcome": o,
                        "probability": float(p),
                    }
                )
        return out


def eve_joint_distribution(
    spec: NetworkSpec | Network, eve: EveProbe | None = None
) -> EveDistribution:
    """Exact outcome statistics with Eve's probe(s) in place.

    The protocol's own weak probes are left out; only Eve measures.
    """
    net = spec if isinstance(spec, Network) else build(spec)
    watched = set(eve.monitored(net.spec)) if eve is not None else set()
    e = eve.eps_eve if eve is not None else 0.0
    keep = np.sqrt(1.0 - e * e)

    n = len(net.ports)
    psi = np.zeros(n, dtype=complex)
    psi[net.source] = 1.0
    rho = np.zeros((n, n), dtype=complex)
    w_no = np.zeros(len(net.sinks))
    w_click = np.zeros(len(net.sinks))

    for op in net.ops:
        if isinstance(op, Split):
            rows = [op.left, op.right]
            c, s = np.cos(op.alpha), np.sin(op.alpha)
            U = np.array([[c, -s], [s, c]])
        elif isinstance(op, Mix):
            rows, U = list(op.ports), op.matrix
        else:
            rows = None
        if rows is not None:
            psi[rows] = U @ psi[rows]
            rho[rows, :] = U @ rho[rows, :]
            rho[:, rows] = rho[:, rows] @ U.T
            continue
        p = op.port
        if isinstance(op, Probe):
            if op.path not in watched:
                continue
            # K0 rho K0 + K1 rho K1 dephases port p but keeps its population
            diag = rho[p, p]
            rho[p, :] *= keep
            rho[:, p] *= keep
            rho[p, p] = diag + e * e * abs(psi[p]) ** 2
            psi[p] *= keep
        elif isinstance(op, Absorb):
            w_no[op.sink] += abs(psi[p]) ** 2
            w_click[op.sink] += rho[p, p].real
            psi[p] = 0.0
            rho[p, :] = 0.0
            rho[:, p] = 0.0
        elif isinstance(op, Leak):
            k = np.sqrt(1.0 - op.T3)
            w_no[op.sink] += op.T3 * abs(psi[p]) ** 2
            w_click[op.sink] += op.T3 * rho[p, p].real
            psi[p] *= k
            rho[p, :] *= k
            rho[:, p] *= k
        elif isinstance(op, Flip):
            psi[p] = -psi[p]
            rho[p, :] = -rho[p, :]
            rho[:, p] = -rho[:, p]
        else:  # pragma: no cover
            raise TypeError(f"unknown operation {op!r}")

    dets = list(net.detectors)
    rows = [net.detectors[d] for d in dets]
    no_click = np.concatenate([np.abs(psi[rows]) ** 2, w_no])
    click = np.concatenate([rho[rows, rows].real, w_click])
    return EveDistribution(net.spec, eve, tuple(dets) + net.sinks, no_click, click)


def mutual_information(x, y) -> float:
    """Plug-in mutual information in bits between two discrete samples."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise ValueError("samples must have equal length")
    if x.size == 0:
        return 0.0
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    joint = np.zeros((xi.max() + 1, yi.max() + 1))
    np.add.at(joint, (xi, yi), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log2(joint[nz] / (px @ py)[nz])))


@dataclass(frozen=True)
class KeyRound:
    alice: int
    bob: int
    outcome: str
    eve_click: bool

    @property
    def announced(self) -> bool:
        return self.outcome == "D1"

    @property
    def error(self) -> bool:
        return self.announced and self.alice != self.bob


@dataclass(eq=False)
class KeyReport:
    """Outcome of many key-distribution rounds.

    A round is announced when Alice's detector D1 fires; the raw key bit is
    Alice's choice and it is in error when Bob chose differently.
    """

    N: int
    rounds: int
    seed: int
    eve: EveProbe | None
    outcomes: tuple[str, ...]
    alice: np.ndarray = field(repr=False)
    bob: np.ndarray = field(repr=False)
    outcome_index: np.ndarray = field(repr=False)
    eve_click: np.ndarray = field(repr=False)
    expected_announced_rate: float = 0.0
    expected_error_rate: float = 0.0

    def __len__(self):
        return self.rounds

    def round(self, i: int) -> KeyRound:
        return KeyRound(
            int(self.alice[i]),
            int(self.bob[i]),
            self.outcomes[self.outcome_index[i]],
            bool(self.eve_click[i]),
        )

    @property
    def announced(self) -> np.ndarray:
        return self.outcome_index == self.outcomes.index("D1")

    @property
    def errors(self) -> np.ndarray:
        return self.announced & (self.alice != self.bob)

    @property
    def key_alice(self) -> np.ndarray:
        return self.alice[self.announced]

    @property
    def key_bob(self) -> np.ndarray:
        return self.bob[self.announced]

    @property
    def n_announced(self) -> int:
        return int(self.announced.sum())

    @property
    def n_errors(self) -> int:
        return int(self.errors.sum())

    @property
    def error_rate(self) -> float:
        return self.n_errors / self.n_announced if self.n_announced else 0.0

    @property
    def announced_rate(self) -> float:
        return self.n_announced / self.rounds

    def eve_view(self) -> np.ndarray:
        """Eve's record per round: 0 no click, else 1 + the chain she clicked in.

        She can only click in the chain carrying the particle, which is Alice's.
        """
        return np.where(self.eve_click, 1 + self.alice, 0)

    def eve_information(self, correct_only: bool = True) -> float:
        """Mutual information (bits) between Eve's record and the key bit."""
        mask = self.announced & (self.alice == self.bob) if correct_only else self.announced
        return mutual_information(self.eve_view()[mask], self.alice[mask])

    @property
    def n_eve_clicks(self) -> int:
        return int(self.eve_click.sum())

    @property
    def n_eve_click_announced_correct(self) -> int:
        return int((self.eve_click & self.announced & (self.alice == self.bob)).sum())

    def record(self) -> dict:
        return {
            "N": self.N,
            "rounds": self.rounds,
            "seed": self.seed,
            "eve_location": self.eve.label() if self.eve else "",
            "eve_eps": self.eve.eps_eve if self.eve else 0.0,
            "eve_mode": self.eve.mode if self.eve else "none",
            "n_announced": self.n_announced,
            "n_errors": self.n_errors,
            "announced_rate": self.announced_rate,
            "error_rate": self.error_rate,
            "expected_announced_rate": self.expected_announced_rate,
            "expected_error_rate": self.expected_error_rate,
            "n_eve_clicks": self.n_eve_clicks,
            "n_eve_click_announced_correct": self.n_eve_click_announced_correct,
            "eve_info_correct": self.eve_information(True),
            "eve_info_announced": self.eve_information(False),
        }


def keydist_simulate(
    N: int, rounds: int, seed: int = 0, eve: EveProbe | None = None
) -> KeyReport:
    """Zeno-chain key distribution: Alice and Bob each pick one of two chains.

    Alice sends her particle into chain ``a``; Bob blocks chain ``b``. When
    ``a == b`` the particle meets shutters, otherwise it crosses a free chain.
    Eve, if present, monitors the same location in both chains.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    blocked = eve_joint_distribution(NetworkSpec("ZenoChain", N=N, bit=1), eve)
    free = eve_joint_distribution(NetworkSpec("ZenoChain", N=N, bit=0), eve)
    if blocked.outcomes != free.outcomes:  # pragma: no cover
        raise RuntimeError("outcome tables disagree")
    outcomes = blocked.outcomes
    k = len(outcomes)
    # category c < k: no click, outcome c; c >= k: click, outcome c - k
    p_same = np.concatenate([blocked.no_click, blocked.click])
    p_diff = np.concatenate([free.no_click, free.click])
    cum = np.stack([np.cumsum(p_diff / p_diff.sum()), np.cumsum(p_same / p_same.sum())])

    rng = np.random.Generator(np.random.PCG64(seed))
    alice = rng.integers(0, 2, rounds)
    bob = rng.integers(0, 2, rounds)
    u = rng.random(rounds)
    cat = np.where(
        alice == bob,
        np.searchsorted(cum[1], u, side="right"),
        np.searchsorted(cum[0], u, side="right"),
    )
    cat = np.minimum(cat, 2 * k - 1)

    d1 = outcomes.index("D1")
    pd1_same = blocked.no_click[d1] + blocked.click[d1]
    pd1_diff = free.no_click[d1] + free.click[d1]
    announced_rate = 0.5 * (pd1_same + pd1_diff)
    return KeyReport(
        N=N,
        rounds=rounds,
        seed=seed,
        eve=eve,
        outcomes=outcomes,
        alice=alice,
        bob=bob,
        outcome_index=cat % k,
        eve_click=cat >= k,
        expected_announced_rate=float(announced_rate),
        expected_error_rate=float(0.5 * pd1_diff / announced_rate),
    )
