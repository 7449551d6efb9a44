"""
Reusing the computed table across Kraus terms
=============================================

Every trace network of the term-by-term method shares all gate tensors and
differs only in the noise tensors, so partial contractions repeat. Keeping
one computed table for the whole loop reuses them.
"""

from noisyeq import fidelity_individual, insert_noise, random_noise_spec
from noisyeq.cli import bench_circuit
from noisyeq.tdd import Session

base = bench_circuit("bv", 4)
noisy = insert_noise(base, random_noise_spec(base, 6, "bit_flip", 0.999, seed=0))

for shared in (True, False):
    s = Session()
    r = fidelity_individual(base, noisy, shared_table=shared, keep_traces=False, session=s)
    rate = s.hits / max(s.lookups, 1)
    print(f"shared={shared!s:5}  fj={r.fj:.12f}  time={r.wall_time:.4f}s  "
          f"cache hit rate={rate:.0%}  peak nodes={r.peak_nodes}")
