"""Path occupation along the channel and the expected number of crossings."""

from cftrace import NetworkSpec, bohm_estimate, eval_asymptotic

for M, N in ((64, 16), (16, 64), (32, 32)):
    r0 = bohm_estimate(NetworkSpec("Li", M=M, N=N, bit=0))
    r1 = bohm_estimate(NetworkSpec("Li", M=M, N=N, bit=1))
    print(f"M={M:2d} N={N:2d}  max path prob bit0 {r0.max_path_prob:.2e}  bit1 {r1.max_path_prob:.2e}"
          f"  crossings {r0.cross_expectation:.3f}  (closed form {eval_asymptotic('bohm_cross_expect', M, N):.3f})")
