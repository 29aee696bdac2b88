"""
Monogamy in three qubits
========================

The squared concurrence obeys the CKW inequality on every pure three-qubit
state, while the entanglement of formation does not.
"""

from entmono import monogamy as mg
from entmono import states as S

# Scan a few thousand Haar-random states; slack is the residual tangle
report = mg.scan("concurrence_sq", n_samples=2000, seed=0)
print(f"CKW: {report.violations} violations, smallest slack {report.min_slack:.3e}")

# The counterexample shares more formation-entanglement than A holds in total
t = mg.triple(S.counterexample_state(), "eof")
print(f"E_AB + E_AC = {t.e_ab + t.e_ac:.6f} > E_A(BC) = {t.e_abc:.6f}")

# Raising each pair to a power restores monogamy; find the smallest one
for measure in ("concurrence", "eof"):
    print(f"alpha* for {measure}: {mg.alpha_search(measure, n_samples=500, seed=0):.4f}")

# When A is already maximally entangled with B nothing is left for C
probe = mg.def15_probe("concurrence_sq", n_samples=2000, seed=0, epsilon=1e-3)
print(f"{probe.in_slab} states near E_A(BC) = E_AB, largest E_AC {probe.max_e_ac:.2e}")
