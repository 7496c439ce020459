"""An eavesdropper watching one channel path, and the resulting key statistics."""

from cftrace import EveProbe, NetworkSpec, eve_joint_distribution, keydist_simulate

spec = NetworkSpec("Salih", M=8, N=80, bit=1)
d = eve_joint_distribution(spec, EveProbe((2, 7)))
print(f"bit 1, Eve on path 2.7: P(D2 and click) = {d.prob('D2', True):.1e}")

for m in (1, 4, 7):
    d = eve_joint_distribution(NetworkSpec("Salih", M=8, N=80, bit=0), EveProbe(m))
    print(f"bit 0, Eve on outer cycle {m}: P(click) {d.p_click:.3f}  P(D1|click) {d.detector_given_click('D1'):.3f}")

print()
for eve in (None, EveProbe((1, 15))):
    r = keydist_simulate(30, 100_000, seed=1, eve=eve)
    label = "no Eve" if eve is None else f"Eve at {eve.label()}"
    print(f"{label:12s} announced {r.n_announced:6d}  errors {r.n_errors:5d}"
          f"  Eve clicks on correct bits {r.n_eve_click_announced_correct}"
          f"  Eve info on correct bits {r.eve_information():.3f} bit")
