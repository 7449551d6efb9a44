"""
When does one contraction beat many?
====================================

The term-by-term method costs one contraction per Kraus term, i.e. 4^k for
k depolarizing noises. The doubled-register method costs a single, wider
contraction. This prints both times on bv4 as noises are added.
"""

import math

from noisyeq.cli import run_bench

rows = run_bench("bv", 4, range(1, 7), channel="depolarizing", p=0.999, seed=0)
print(f"{'noises':>6} {'individual':>11} {'collective':>11} {'log ratio':>10}")
for row in rows:
    print(f"{row['noises']:>6} {row['individual_time_s']:>11.4f} {row['collective_time_s']:>11.4f} "
          f"{row['log_ratio']:>10.2f}")

# past the crossover, the individual method grows roughly like 4^k
slope = (rows[-1]["log_ratio"] - rows[2]["log_ratio"]) / (rows[-1]["noises"] - rows[2]["noises"])
print("log-ratio slope", round(slope, 2), "vs log 4 =", round(math.log(4), 2))
