"""Zeno chain: free rotation versus a blocked arm, and the weak trace left behind."""

import numpy as np

from cftrace import NetworkSpec, compare, simulate

for N in (10, 100, 1000):
    free, _ = simulate(NetworkSpec("ZenoChain", N=N, bit=0))
    blocked, _ = simulate(NetworkSpec("ZenoChain", N=N, bit=1))
    print(f"N={N:5d}  free D2 {free['D2']:.6f}  blocked survival {blocked['D1']:.6f}"
          f"  (cos^2N = {np.cos(np.pi / (2 * N)) ** (2 * N):.6f})")

r = compare(NetworkSpec("ZenoChain", N=200), 0.01)
print(f"\nfree-chain (bit 0) trace at N=200, eps=0.01: {r.trace_detect_prob:.4e}  (3 eps^2 N / 8 = {3e-4 * 200 / 8:.4e})")
print(f"standard for {r.n_paths} paths: {r.standard_detect:.4e}  ratio {r.detect_ratio:.1f}  -> {r.verdict}")
