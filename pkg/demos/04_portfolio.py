"""Mean plus CVaR portfolio selection fed by four noisy return forecasters.

Returns are synthetic here; ``mrdro.applications.load_returns_csv`` reads a
real history with one column per asset.  Source 1 is nearly unbiased, the
others are noisier or biased, and the MR-DRO models learn that over time.
The realized loss of a single period is (1 + rho) times its negative return,
so lower is better and negative values are gains.
"""

import numpy as np

from mrdro.applications import discrete_cvar
from mrdro.sim import portfolio_plan, run_trials, summarize, synthetic_returns

assets = 6
history = synthetic_returns(assets, periods=80, seed=3)
mu = np.array([[0.0] * assets, [0.01] * assets, [-0.01] * assets, [0.0] * assets])
sigma = np.array([[0.01] * assets, [0.02] * assets, [0.02] * assets, [0.05] * assets])
plan = portfolio_plan((1, 2), history, mu, sigma, events=30, epsilon=0.01, alpha=0.2, rho=10.0)

results = run_trials(plan)
print(f"{'model':<26}{'objective':>12}{'realized loss':>16}")
for row in summarize(results):
    print(f"{row['model']:<26}{row['objective_mean']:12.4f}{row['loss_mean']:16.4f}")

x = results[0].decisions[1, -1, :assets]
print("\nlast exponential MR-DRO portfolio:", np.round(x, 3).tolist())
r = history[-30:]
print(f"CVaR(0.2) of its loss over the last 30 periods: {discrete_cvar(-(r @ x), 0.2):.4f}")
print(f"mean return over the same window: {float((r @ x).mean()):.4f}")
