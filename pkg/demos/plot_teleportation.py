"""
Teleporting a qubit
===================

Alice holds an unknown qubit and half of a Bell pair. One Bell measurement
and two classical bits later, Bob holds the qubit.
"""

import numpy as np

from entmono import protocols as pr
from entmono import states as S

psi = S.haar_random_pure(2, seed=3).data

# Enumerate all four measurement outcomes instead of sampling one
for run in pr.teleport_branches(psi):
    fidelity = abs(np.vdot(psi, run.final_state.data)) ** 2
    print(f"outcome {run.outcomes[0]}  p={run.path_probability:.3f}  fidelity={fidelity:.12f}")

# A single sampled run and its transcript
print(pr.teleport(psi, rng=1).to_json())

# Without Bob's correction the protocol fails on most branches
bad = [abs(np.vdot(psi, r.final_state.data)) ** 2 for r in pr.teleport_branches(psi, correct=False)]
print("uncorrected fidelities", np.round(bad, 4))
