"""When does min-max trust lock onto one source?

Two sources forecast four regions.  In regions 1 and 2 source 1 is more
often closer to the truth, in region 3 source 2 is, and in region 4 the two
are mirror images, so neither is closer more than half the time.  Trust
saturates exactly where one source is closer with probability above 1/2.
"""

import numpy as np

from mrdro.fusion import compute_errors
from mrdro.sim import TruthModel, dominance_errors, generate_event_log
from mrdro.trust import UpdateConfig, estimate_dominance, run_trust_sequence

truth = TruthModel.uniform(10.0, 20.0, 4)
errors = dominance_errors()
groups = [[0], [1], [2], [3]]
seeds = range(1, 31)

probs, final, saturated = [], [], np.zeros(4, dtype=int)
for seed in seeds:
    log = generate_event_log(truth, errors, 300, seed)
    err = compute_errors(log)
    probs.append([estimate_dominance(err, (0, 1), "L1", g).estimate for g in groups])
    hist = run_trust_sequence(log, UpdateConfig.minmax(0.01), [0.5, 0.5], groups).history[:, :, 0]
    final.append(hist[-1])
    saturated += ((hist >= 0.99) | (hist <= 0.01)).any(axis=0)

probs, final = np.array(probs), np.array(final)
print(f"{'region':<8}{'P[source 1 closer]':>20}{'final trust in source 1':>26}{'seeds saturated':>18}")
for k in range(4):
    print(f"{k + 1:<8}{probs[:, k].mean():20.3f}{final[:, k].mean():26.3f}{saturated[k]:>12d}/{len(seeds)}")
print("\nRegion 4 hovers around one half: min-max only does a random walk there.")
