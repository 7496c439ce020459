"""Single-particle standard: trace expected if the particle really took one of n paths."""

from cftrace import single_particle_standard

for n in (1, 2, 4, 16, 256, 4096):
    s = single_particle_standard(n, 0.01)
    print(f"n={n:5d}  detect {s.detect_prob:.4e}  eps^2/n {1e-4 / n:.4e}  shift sum {s.shift_sum:.3e}  ({s.method})")
