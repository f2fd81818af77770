"""Resource allocation and CVaR portfolio selection as worst-case LPs,
with out-of-sample evaluators."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .fusion import SupportPolytope, WeightedScenarioSet, check_trust
from .lp import EQ, LE
from .reform import DecisionSet, DroInstance, PiecewiseAffineLoss, SeparableAffineLoss

RESULTS_HEADER = ["trial", "model", "objective", "avg_loss", "solve_seconds"]


def _vec(v, n, name):
    out = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ResourceAllocationSpec:
    """Newsvendor-style allocation of ``budget`` units over ``regions``.

    Scalars for the costs and demand bounds are broadcast to every region.
    """

    regions: int
    underage: np.ndarray = 5000.0
    overage: np.ndarray = 1000.0
    budget: float = 200.0
    demand_lo: np.ndarray = 0.0
    demand_hi: np.ndarray = 30.0

    def __post_init__(self):
        K = int(self.regions)
        if K < 1:
            raise ValueError("need at least one region")
        for name in ("underage", "overage", "demand_lo", "demand_hi"):
            object.__setattr__(self, name, _vec(getattr(self, name), K, name))
        if np.any(self.underage <= 0) or np.any(self.overage <= 0):
            raise ValueError("unit underage and overage costs must be > 0")
        if not self.budget > 0:
            raise ValueError("budget must be > 0")
        if np.any(self.demand_lo > self.demand_hi):
            raise ValueError("demand support needs lo <= hi")

    @property
    def dim(self) -> int:
        return self.regions

    @property
    def groups(self) -> list:
        """One trust group per region."""
        return [[k] for k in range(self.regions)]

    def support(self) -> SupportPolytope:
        return SupportPolytope.box(self.demand_lo, self.demand_hi, self.regions)

    def decisions(self) -> DecisionSet:
        K = self.regions
        return DecisionSet.box(0.0, np.inf, K).with_rows(np.ones((1, K)), [LE], [self.budget])

    def scenario_trust(self, trust):
        """Fusion weights from ``(G, H)`` group trust: one column per region."""
        trust = np.atleast_2d(np.asarray(trust, dtype=float))
        if trust.shape[0] == 1:
            trust = np.repeat(trust, self.regions, axis=0)
        if trust.shape[0] != self.regions:
            raise DimensionMismatch("need one trust vector per region")
        return trust.T


def resource_loss(spec: ResourceAllocationSpec) -> SeparableAffineLoss:
    """Per region ``max(c_u (d - x), c_o (x - d))``."""
    K = spec.regions
    blocks = []
    for k in range(K):
        beta = np.zeros((2, K))
        beta[0, k] = -spec.underage[k]
        beta[1, k] = spec.overage[k]
        alpha = np.array([[spec.underage[k]], [-spec.overage[k]]])
        blocks.append(((k,), PiecewiseAffineLoss(np.zeros((2, 1, K)), alpha, beta, np.zeros(2))))
    return SeparableAffineLoss(tuple(blocks))


def resource_instance(spec: ResourceAllocationSpec, scenarios: WeightedScenarioSet, epsilon,
                      norm="L1") -> DroInstance:
    """Separable instance; ``scenarios`` may carry one weight column per region."""
    return DroInstance(resource_loss(spec), scenarios, spec.support(), epsilon, norm, spec.decisions())


@dataclass(frozen=True, eq=False)
class PortfolioSpec:
    """Mean plus ``rho`` times CVaR at level ``alpha`` of the portfolio loss.

    Decisions are ``(x_1..x_K, tau)`` with ``tau`` the CVaR threshold.
    """

    assets: int
    alpha: float = 0.2
    rho: float = 10.0
    return_lo: float = -1.0
    return_hi: float = 1.0

    def __post_init__(self):
        if int(self.assets) < 1:
            raise ValueError("need at least one asset")
        if not 0 < self.alpha <= 1:
            raise ValueError("CVaR level alpha must lie in (0, 1]")
        if not self.rho >= 0:
            raise ValueError("risk aversion rho must be >= 0")

    @property
    def dim(self) -> int:
        return self.assets

    @property
    def groups(self) -> list:
        return [list(range(self.assets))]

    def support(self) -> SupportPolytope:
        return SupportPolytope.box(self.return_lo, self.return_hi, self.assets)

    def decisions(self) -> DecisionSet:
        K = self.assets
        lower = np.r_[np.zeros(K), -np.inf]
        upper = np.full(K + 1, np.inf)
        return DecisionSet(lower, upper, np.r_[np.ones(K), 0.0][None, :], (EQ,), [1.0])

    def scenario_trust(self, trust):
        return aggregate_portfolio_trust(trust)


def aggregate_portfolio_trust(trust) -> np.ndarray:
    """Per-source weight ``mean_k t[k, h]``, renormalised over sources.

    ``trust`` is ``(H,)`` for a single group or ``(G, H)`` with per-asset
    groups.
    """
    trust = np.atleast_2d(np.asarray(trust, dtype=float))
    w = trust.mean(axis=0)
    return check_trust(w / w.sum())


def portfolio_loss(spec: PortfolioSpec) -> PiecewiseAffineLoss:
    K, a, rho = spec.assets, spec.alpha, spec.rho
    A = np.zeros((2, K, K + 1))
    A[0, :, :K] = -np.eye(K)
    A[1, :, :K] = -(1.0 + rho / a) * np.eye(K)
    beta = np.zeros((2, K + 1))
    beta[0, K] = rho
    beta[1, K] = rho * (1.0 - 1.0 / a)
    return PiecewiseAffineLoss(A, np.zeros((2, K)), beta, np.zeros(2))


def portfolio_instance(spec: PortfolioSpec, scenarios: WeightedScenarioSet, epsilon, norm="L1") -> DroInstance:
    return DroInstance(portfolio_loss(spec), scenarios, spec.support(), epsilon, norm, spec.decisions())


# ---------------------------------------------------------------------------
# out-of-sample evaluation


@dataclass(frozen=True, eq=False)
class OosSample:
    """Equally weighted realizations, shape ``(|Psi|, M)``."""

    events: np.ndarray

    def __post_init__(self):
        ev = np.array(self.events, dtype=float)
        if ev.ndim == 1:
            ev = ev[None, :]
        if ev.shape[0] < 1:
            raise ValueError("out-of-sample set needs at least one event")
        ev.flags.writeable = False
        object.__setattr__(self, "events", ev)

    @property
    def size(self) -> int:
        return self.events.shape[0]


def oos_eval_resource(x, sample: OosSample, spec: ResourceAllocationSpec) -> float:
    x = np.asarray(x, dtype=float).ravel()
    d = sample.events
    if d.shape[1] != x.size:
        raise DimensionMismatch("decision and demand dimensions differ")
    cost = spec.underage * np.maximum(d - x, 0.0) + spec.overage * np.maximum(x - d, 0.0)
    return float(cost.sum(axis=1).mean())


def discrete_cvar(losses, alpha, weights=None) -> float:
    """Mean of the worst ``alpha`` probability mass of a discrete loss.

    The boundary atom enters with the fractional weight needed to make the
    tail mass exactly ``alpha``.
    """
    losses = np.asarray(losses, dtype=float).ravel()
    if alpha >= 1.0:
        # whole distribution: the mean, computed the same way as elsewhere
        return float(losses.mean() if weights is None else np.asarray(weights, dtype=float).ravel() @ losses)
    w = np.full(losses.size, 1.0 / losses.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    order = np.argsort(-losses, kind="stable")
    l, w = losses[order], w[order]
    before = np.concatenate([[0.0], np.cumsum(w)[:-1]])
    take = np.clip(alpha - before, 0.0, w)
    return float(take @ l / alpha)


def oos_eval_portfolio(x, sample: OosSample, alpha, rho) -> float:
    """Mean portfolio loss plus ``rho`` times its CVaR over the sample."""
    x = np.asarray(x, dtype=float).ravel()
    r = sample.events
    if r.shape[1] != x.size:
        raise DimensionMismatch("portfolio and return dimensions differ")
    loss = -(r @ x)
    return float(loss.mean() + rho * discrete_cvar(loss, alpha))


def load_returns_csv(path) -> np.ndarray:
    """Return history with one column per asset and one row per period.

    A non-numeric first row is treated as a header.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    data = np.array([[float(c) for c in r] for r in rows])
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError(f"{path}: ragged or empty return table")
    return data


def write_results_csv(rows, path) -> None:
    """``rows`` are mappings keyed by the results header."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULTS_HEADER, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})


@dataclass(frozen=True)
class Application:
    """What the event loop needs to know about a case study."""

    spec: object
    kind: str = field(default="resource")

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def decision_dim(self) -> int:
        return self.spec.dim

    def instance(self, scenarios, epsilon, norm="L1") -> DroInstance:
        if self.kind == "resource":
            return resource_instance(self.spec, scenarios, epsilon, norm)
        return portfolio_instance(self.spec, scenarios, epsilon, norm)

    def evaluate(self, x, events) -> float:
        """Out-of-sample loss of the decision part of ``x``."""
        x = np.asarray(x, dtype=float).ravel()[: self.decision_dim]
        sample = events if isinstance(events, OosSample) else OosSample(events)
        if self.kind == "resource":
            return oos_eval_resource(x, sample, self.spec)
        return oos_eval_portfolio(x, sample, self.spec.alpha, self.spec.rho)

    @classmethod
    def resource(cls, spec: ResourceAllocationSpec) -> "Application":
        return cls(spec, "resource")

    @classmethod
    def portfolio(cls, spec: PortfolioSpec) -> "Application":
        return cls(spec, "portfolio")
