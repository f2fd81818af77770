"""How the three trust rules react when a reliable source goes bad.

Source 1 is sharp for the first 150 events and then picks up a bias of 5.
Min-max moves a fixed step toward whoever was closest; the exponential
rule weighs every error; variable-share adds a floor so a source that was
written off can win trust back quickly.
"""

import numpy as np

from mrdro.sim import ErrorSegment, SourceErrorModel, TruthModel, generate_event_log
from mrdro.trust import UpdateConfig, run_trust_sequence

truth = TruthModel.uniform(10.0, 20.0, 1)
errors = SourceErrorModel(
    (ErrorSegment([[0.0], [0.0]], [[0.5], [1.5]]), ErrorSegment([[5.0], [0.0]], [[0.5], [1.5]])),
    (150,), 0.0, 30.0)
log = generate_event_log(truth, errors, 300, seed=7)

rules = {
    "min-max (step 0.01)": UpdateConfig.minmax(0.01),
    "exponential (eta 0.5)": UpdateConfig.exponential(0.5),
    "variable-share (eta 0.5, beta 0.01)": UpdateConfig.variable_share(0.5, 0.01),
}
checkpoints = [0, 25, 75, 150, 160, 175, 200, 300]
print("trust in source 1 after n events")
print(f"{'rule':<38}" + "".join(f"{n:>7d}" for n in checkpoints))
for name, cfg in rules.items():
    hist = run_trust_sequence(log, cfg, [0.5, 0.5]).history[:, 0, 0]
    print(f"{name:<38}" + "".join(f"{hist[n]:7.3f}" for n in checkpoints))

print("\nAfter the switch at event 150, variable-share drops source 1 within ten events because")
print("its share floor keeps source 2 in play; the exponential rule first has to burn off the")
print("lead it built up, and min-max moves one step per event, so it needs 50 events to reach 1/2.")
