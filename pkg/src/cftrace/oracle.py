"""Exact particle-plus-probes propagation over every tag subset.

The validation reference for the first-order truncation. Branch ``i`` of the
dense table is the tag subset whose bits are set in ``i``; each probe update is
applied to every branch, so multi-tag branches are kept.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, SizeError
from .modes import beam_splitter_matrix
from .networks import Absorb, Flip, Leak, Mix, Network, NetworkSpec, Probe, Split, build
from .trace import EXACT, BranchedState

__all__ = ["MAX_ORACLE_PATHS", "exact_oracle_simulate", "max_branch_deviation"]

MAX_ORACLE_PATHS = 14


def exact_oracle_simulate(spec: NetworkSpec | Network, eps: float) -> BranchedState:
    net = spec if isinstance(spec, Network) else build(spec)
    n_paths = len(net.paths)
    if n_paths > MAX_ORACLE_PATHS:
        raise SizeError(
            f"exact oracle handles at most {MAX_ORACLE_PATHS} paths, network has {n_paths}"
        )
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    n_branch = 1 << n_paths
    A = np.zeros((len(net.ports), n_branch), dtype=complex)
    W = np.zeros((len(net.sinks), n_branch))
    A[net.source, 0] = 1.0
    flag = {p: 1 << k for k, p in enumerate(net.paths)}
    idx = np.arange(n_branch)
    probe_update = np.array([[np.sqrt(1.0 - eps * eps)], [eps]])

    for op in net.ops:
        if isinstance(op, Split):
            rows = [op.left, op.right]
            A[rows] = beam_splitter_matrix(op.alpha) @ A[rows]
        elif isinstance(op, Probe):
            bit = flag[op.path]
            clean = idx[(idx & bit) == 0]
            if np.any(A[op.port, clean | bit] != 0):
                raise ConfigurationError(f"path {op.path} traversed twice")
            both = probe_update * A[op.port, clean]
            A[op.port, clean] = both[0]
            A[op.port, clean | bit] = both[1]
        elif isinstance(op, Absorb):
            W[op.sink] += np.abs(A[op.port]) ** 2
            A[op.port] = 0.0
        elif isinstance(op, Leak):
            W[op.sink] += op.T3 * np.abs(A[op.port]) ** 2
            A[op.port] = np.sqrt(1.0 - op.T3) * A[op.port]
        elif isinstance(op, Flip):
            A[op.port] = -A[op.port]
        elif isinstance(op, Mix):
            rows = list(op.ports)
            A[rows] = op.matrix @ A[rows]
        else:  # pragma: no cover
            raise TypeError(f"unknown operation {op!r}")

    keys = tuple(
        frozenset(p for p, b in flag.items() if i & b) for i in range(n_branch)
    )
    names = list(net.detectors)
    rows = [net.detectors[d] for d in names]
    return BranchedState(tuple(names), keys, A[rows].T, net.sinks, W.T, EXACT)


def max_branch_deviation(approx: BranchedState, exact: BranchedState) -> float:
    """Largest |amplitude difference| over all exact branches and detector ports.

    Branches missing from ``approx`` count as zero amplitude.
    """
    if approx.ports != exact.ports:
        raise ValueError("states live on different detector ports")
    lookup = {k: r for r, k in enumerate(approx.keys)}
    worst = 0.0
    for r, key in enumerate(exact.keys):
        other = approx.amps[lookup[key]] if key in lookup else 0.0
        worst = max(worst, float(np.max(np.abs(exact.amps[r] - other))))
    return worst
