"""
Entanglement of a pair of qubits
================================

Concurrence, entanglement of formation and relative entropy of
entanglement on a few familiar two-qubit states.
"""

import numpy as np

from entmono import measures as ms
from entmono import states as S

# A Bell pair is maximally entangled: one ebit by every measure
bell = S.bell_state()
print("Bell entropy      ", ms.entropy_of_entanglement(bell))
print("Bell concurrence  ", ms.concurrence_two_qubit(bell))

# Werner states interpolate between the Bell pair and white noise
for p in (0.2, 1 / 3, 0.6, 0.9):
    rho = p * bell.density_matrix() + (1 - p) * np.eye(4) / 4
    eof = ms.eof_two_qubit(rho)
    print(f"Werner p={p:.3f}  C={ms.concurrence_two_qubit(rho):.4f}  E_F={eof.value:.4f}")

# The closed form is the exact minimum of the convex roof, so the
# ensemble optimiser should land on it from above
rho = S.induced_mixed(4, 3, seed=7, dims=[2, 2])
closed = ms.eof_two_qubit(rho).value
roof = ms.eof_convex_roof(rho)
print(f"closed form {closed:.8f}  convex roof {roof.value:.8f}  gap {roof.value - closed:.2e}")

# Relative entropy of entanglement is only bounded from above for mixed input
ree = ms.ree_upper_bound(rho)
print(f"relative entropy of entanglement <= {ree.value:.6f} ({ree.method.value})")
