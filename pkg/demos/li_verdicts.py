"""Ratio of trace to single-particle standard across the (M, N) grid for the leaky-mirror protocol."""

from cftrace import NetworkSpec, compare

sizes = (8, 16, 32, 64)
for bit in (0, 1):
    print(f"bit {bit}: trace / standard   (rows M, columns N)")
    print("      " + "".join(f"{N:>10d}" for N in sizes))
    for M in sizes:
        cells = []
        for N in sizes:
            r = compare(NetworkSpec("Li", M=M, N=N, bit=bit), 1e-3)
            cells.append(f"{r.detect_ratio:10.3f}")
        print(f"{M:6d}" + "".join(cells))
    print()
print("below 1 for one bit and above 1 for the other: which bit looks counterfactual depends on M/N")
