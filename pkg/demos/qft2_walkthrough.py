"""
Fidelity of a noisy two-qubit QFT, step by step
===============================================

A bit flip and a phase flip are inserted into the QFT on two qubits. The
fidelity against the ideal circuit is computed three ways: term by term,
with one doubled-register contraction, and with dense matrices.
"""

import numpy as np

from noisyeq import fidelity_collective, fidelity_individual, gen_qft, insert_noise, serialize
from noisyeq.network import build_trace_miter, circuit_to_network, contract, optimize
from noisyeq.oracle import jamiolkowski_fidelity_dense

p = 0.9
ideal = gen_qft(2)
noisy = insert_noise(ideal, [(0, 1, "bit_flip", p), (1, 0, "phase_flip", p)])
print(serialize(noisy))

# one trace per Kraus term: only the identity-identity term survives
for choice in [(0, 0), (0, 1), (1, 0), (1, 1)]:
    miter = build_trace_miter(ideal, circuit_to_network(noisy, choice))
    print(choice, np.round(contract(miter), 12))

ind = fidelity_individual(ideal, noisy)
col = fidelity_collective(ideal, noisy)
print("term by term :", ind.fj)
print("doubled      :", col.fj, "(network value", col.scalar.real, "= 16 p^2)")
print("dense        :", jamiolkowski_fidelity_dense(ideal, noisy))

# the miter shrinks once the swaps and the back-to-back H gates are gone
miter = build_trace_miter(ideal, circuit_to_network(noisy, (0, 0)))
small = optimize(miter)
print(len(miter), "tensors ->", len(small), [t.name for t in small.tensors])

# early exit: at p = 0.95 and eps = 0.1 the first term gives 0.9025 > 0.9,
# which already proves equivalence
noisy95 = insert_noise(ideal, [(0, 1, "bit_flip", 0.95), (1, 0, "phase_flip", 0.95)])
r = fidelity_individual(ideal, noisy95, early_exit=0.1)
print(r.equivalent, r.fj, f"after {r.terms_evaluated} of {r.total_terms} terms")
