"""
Diluting a Bell pair
====================

A shared Bell pair plus local operations and classical communication turns
into any weaker pure state, and into mixtures of them.
"""

import numpy as np

from entmono import linalg as la
from entmono import measures as ms
from entmono import protocols as pr
from entmono import states as S

alpha, beta = np.sqrt(0.8), 0.4 + 0.2j
for run in pr.locc_prepare_branches(alpha, beta):
    weights = S.schmidt_decompose(run.final_state).mu
    print(f"p={run.path_probability:.3f}  schmidt weights {np.round(weights, 6)}")

# Entanglement never grows along the way
target = S.validate([2, 2], [alpha, 0, 0, beta])
print(f"E(target) = {ms.entropy_of_entanglement(target):.6f} <= E(Bell) = 1")

# Mixed targets: sample an ensemble member, then prepare it
ensemble = [(0.3, 1, 0), (0.7, np.sqrt(0.5), np.sqrt(0.5))]
rng = np.random.default_rng(0)
runs = [pr.locc_prepare_mixed(ensemble, rng) for _ in range(4000)]
distance = la.trace_distance(pr.empirical_density(runs), pr.ensemble_target(ensemble))
print(f"trace distance to the target mixture after 4000 runs: {distance:.4f}")
