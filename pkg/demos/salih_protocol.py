"""Nested-chain protocol with absorbing blocker: success rates and trace verdicts."""

import warnings

from cftrace import NetworkSpec, compare, simulate

warnings.simplefilter("ignore")

M, N = 10, 1000
for bit in (0, 1):
    probs, _ = simulate(NetworkSpec("Salih", M=M, N=N, bit=bit))
    print(f"bit {bit}: D1 {probs['D1']:.4f}  D2 {probs['D2']:.4f}  lost {1 - probs['D1'] - probs['D2']:.4f}")

print()
for bit in (0, 1):
    r = compare(NetworkSpec("Salih", M=8, N=800, bit=bit), 5e-4)
    print(f"bit {bit} via {r.detector}: trace {r.trace_detect_prob:.3e}  shift {r.shift_sum:.3e}"
          f"  ratios ({r.detect_ratio:.2f}, {r.shift_ratio:.2f})  -> {r.verdict}")
