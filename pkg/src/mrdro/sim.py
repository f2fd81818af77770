"""Synthetic multi-source event streams and the fuse/solve/realize/update loop.

A trial draws an event log from a truth model and per-source error
models, then walks through it: at each decision event every model fuses
the revised past errors with its current trust, solves its worst-case
LP, is charged the realized loss of its decision, and (for the MR-DRO
models) updates its trust from the errors just revealed.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .applications import Application, PortfolioSpec, ResourceAllocationSpec
from .errors import BadTruncation, ConfigError, MrDroError
from .fusion import EventLog, compute_errors, error_norm, fuse, project_to_support, revise_predictions
from .reform import solve_instance
from .trust import Method, TrustTracker, UpdateConfig, run_trust_sequence

REJECTION_ROUNDS = 1000
TRUNCATION_SIGMAS = 6.0

METHOD_LABELS = {
    Method.MINMAX: "Min-max",
    Method.EXPONENTIAL: "Exponential",
    Method.VARIABLE_SHARE: "Variable-share",
}

TRAJECTORY_HEADER = ["trial", "model", "event", "objective", "realized_loss", "solve_seconds"]
TRUST_HEADER = ["trial", "model", "event", "group", "source", "trust"]
SUMMARY_HEADER = [
    "model", "trials", "objective_mean", "objective_std", "loss_mean", "loss_std",
    "seconds_mean", "seconds_std", "objective_k", "loss_k",
]


# ---------------------------------------------------------------------------
# stochastic models


@dataclass(frozen=True, eq=False)
class ErrorSegment:
    """Per ``(source, dim)`` error law for one stretch of time.

    Entries flagged in ``lognormal`` draw ``mean + std * Z`` with ``Z`` a
    standardised lognormal of log-scale ``shape``; the rest are normal.
    """

    mean: np.ndarray
    std: np.ndarray
    lognormal: np.ndarray = None
    shape: np.ndarray = 0.5

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        std = np.broadcast_to(np.array(self.std, dtype=float), mean.shape).copy()
        logn = np.zeros(mean.shape, bool) if self.lognormal is None else np.broadcast_to(
            np.array(self.lognormal, dtype=bool), mean.shape).copy()
        shape = np.broadcast_to(np.array(self.shape, dtype=float), mean.shape).copy()
        if mean.ndim != 2:
            raise ConfigError("error means must be a (sources, dims) table")
        if np.any(std <= 0):
            raise ConfigError("error standard deviations must be > 0")
        if np.any(shape[logn] <= 0):
            raise ConfigError("lognormal shape must be > 0")
        for k, v in (("mean", mean), ("std", std), ("lognormal", logn), ("shape", shape)):
            v.flags.writeable = False
            object.__setattr__(self, k, v)

    def draw(self, rng, n):
        """``n`` error draws, shape ``(n, H, M)``."""
        z = rng.standard_normal((n,) + self.mean.shape)
        if self.lognormal.any():
            s = self.shape
            ln = (np.exp(s * z) - np.exp(s * s / 2)) / np.sqrt((np.exp(s * s) - 1) * np.exp(s * s))
            z = np.where(self.lognormal, ln, z)
        return self.mean + self.std * z


@dataclass(frozen=True, eq=False)
class SourceErrorModel:
    """Error laws of every source, possibly switching over time.

    ``segments[0]`` applies from event 0; ``segments[s]`` takes over at the
    event index ``starts[s - 1]`` (scalar or ``(H, M)``).  Predictions are
    ``truth + error`` restricted to ``[lo, hi]`` per dimension by rejection.
    """

    segments: tuple
    starts: tuple = ()
    lo: np.ndarray = -np.inf
    hi: np.ndarray = np.inf

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ConfigError("need at least one error segment")
        shape = segs[0].mean.shape
        if any(s.mean.shape != shape for s in segs):
            raise ConfigError("error segments must share their (sources, dims) shape")
        if len(self.starts) != len(segs) - 1:
            raise ConfigError("need one start time per additional segment")
        starts = tuple(np.broadcast_to(np.asarray(t, dtype=np.int64), shape).copy() for t in self.starts)
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), shape[1:]).copy()
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), shape[1:]).copy()
        if np.any(lo >= hi):
            raise ConfigError("truncation interval needs lo < hi")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def num_sources(self) -> int:
        return self.segments[0].mean.shape[0]

    @property
    def dim(self) -> int:
        return self.segments[0].mean.shape[1]

    @classmethod
    def normal(cls, mean, std, lo=-np.inf, hi=np.inf) -> "SourceErrorModel":
        return cls((ErrorSegment(mean, std),), (), lo, hi)

    def segment_index(self, n) -> np.ndarray:
        """Active segment per event and ``(h, m)``, shape ``(n, H, M)``."""
        ev = np.arange(n)[:, None, None]
        idx = np.zeros((n,) + self.segments[0].mean.shape, dtype=np.int64)
        for t in self.starts:
            idx += ev >= t
        return idx

    def sample(self, rng, truth) -> np.ndarray:
        """Predictions for ``truth`` of shape ``(n, M)``: ``(n, H, M)``."""
        n = truth.shape[0]
        seg = self.segment_index(n)
        for s, segment in enumerate(self.segments):
            mu = truth[:, None, :] + segment.mean
            far = (mu < self.lo - TRUNCATION_SIGMAS * segment.std) | (mu > self.hi + TRUNCATION_SIGMAS * segment.std)
            if np.any(far & (seg == s)):
                raise BadTruncation("truncation interval excludes the prediction mean by more than 6 sigma")
        draws = [segment.draw(rng, n) for segment in self.segments]
        pred = truth[:, None, :] + np.choose(seg, draws)
        bad = (pred < self.lo) | (pred > self.hi)
        rounds = 0
        while bad.any():
            rounds += 1
            if rounds > REJECTION_ROUNDS:
                raise BadTruncation("rejection sampling budget exhausted")
            redraw = [segment.draw(rng, n) for segment in self.segments]
            fresh = truth[:, None, :] + np.choose(seg, redraw)
            pred = np.where(bad, fresh, pred)
            bad = (pred < self.lo) | (pred > self.hi)
        return pred


@dataclass(frozen=True, eq=False)
class TruthModel:
    """Uniform draws per dimension, or replay of a history table."""

    lo: np.ndarray = None
    hi: np.ndarray = None
    history: np.ndarray = None

    def __post_init__(self):
        if self.history is not None:
            h = np.array(self.history, dtype=float)
            if h.ndim != 2 or h.shape[0] == 0:
                raise ConfigError("truth history must be a non-empty (periods, dims) table")
            h.flags.writeable = False
            object.__setattr__(self, "history", h)
            return
        if self.lo is None or self.hi is None:
            raise ConfigError("uniform truth needs lo and hi")
        lo = np.atleast_1d(np.array(self.lo, dtype=float))
        hi = np.broadcast_to(np.array(self.hi, dtype=float), lo.shape).copy()
        if np.any(lo >= hi):
            raise ConfigError("uniform truth needs lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def uniform(cls, lo, hi, dim=1) -> "TruthModel":
        return cls(np.broadcast_to(lo, (dim,)), np.broadcast_to(hi, (dim,)))

    @classmethod
    def replay(cls, history) -> "TruthModel":
        return cls(history=history)

    def sample(self, rng, n, offset=0) -> np.ndarray:
        if self.history is not None:
            if offset + n > self.history.shape[0]:
                raise ConfigError(f"truth history has {self.history.shape[0]} periods, need {offset + n}")
            return np.array(self.history[offset:offset + n])
        return rng.uniform(self.lo, self.hi, (n, self.lo.size))


def generate_event_log(truth: TruthModel, errors: SourceErrorModel, num_events, seed, offset=0) -> EventLog:
    """Fully realized log of ``num_events`` events; deterministic per seed."""
    rng = np.random.default_rng(seed)
    real = truth.sample(rng, num_events, offset)
    if real.shape[1] != errors.dim:
        raise ConfigError("truth and error models disagree on the dimension")
    return EventLog(errors.sample(rng, real), real)


# ---------------------------------------------------------------------------
# plans and trials


@dataclass(frozen=True)
class ModelSpec:
    """An MR-DRO model with a trust rule, or a single-source DRO."""

    name: str
    update: UpdateConfig = None
    source: int = None

    @classmethod
    def mr_dro(cls, config: UpdateConfig) -> "ModelSpec":
        return cls(f"MR-DRO ({METHOD_LABELS[config.method]})", update=config)

    @classmethod
    def single(cls, h) -> "ModelSpec":
        return cls(f"DRO (h{h + 1})", source=h)


def default_models(updates, num_sources) -> tuple:
    return tuple(ModelSpec.mr_dro(u) for u in updates) + tuple(ModelSpec.single(h) for h in range(num_sources))


@dataclass(frozen=True, eq=False)
class TrialPlan:
    """Everything needed to replay a set of seeded trials.

    ``events`` counts decision events; each trial's log also holds
    ``warmup`` leading events that only supply history.  ``window`` caps
    the history used at each decision (default: all past events).
    """

    application: Application
    truth: TruthModel
    errors: SourceErrorModel
    seeds: tuple
    events: int
    epsilon: float = 0.01
    models: tuple = None
    updates: tuple = ()
    t0: np.ndarray = None
    warmup: int = 1
    window: int = None
    norm: str = "L1"
    solver: str = "highs"
    timing: bool = True
    support_policy: str = "clip"

    def __post_init__(self):
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ConfigError("need at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds must be distinct")
        object.__setattr__(self, "seeds", seeds)
        if int(self.events) < 1:
            raise ConfigError("events must be >= 1")
        if int(self.warmup) < 1:
            raise ConfigError("warmup must be >= 1 so the first decision has history")
        if self.window is not None and int(self.window) < 1:
            raise ConfigError("window must be >= 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.support_policy not in ("clip", "keep"):
            raise ConfigError("support_policy must be 'clip' or 'keep'")
        if self.errors.dim != self.application.dim:
            raise ConfigError("error model dimension does not match the application")
        H = self.errors.num_sources
        if self.models is None:
            object.__setattr__(self, "models", default_models(self.updates, H))
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError("model names must be unique")
        for m in self.models:
            if m.source is not None and not 0 <= m.source < H:
                raise ConfigError(f"{m.name}: no source {m.source + 1}")
        G = len(self.groups)
        t0 = np.full((G, H), 1.0 / H) if self.t0 is None else np.asarray(self.t0, dtype=float)
        if t0.ndim == 1:
            t0 = np.tile(t0, (G, 1))
        if t0.shape != (G, H):
            raise ConfigError(f"t0 must have {H} entries per trust group")
        object.__setattr__(self, "t0", t0)

    @property
    def num_sources(self) -> int:
        return self.errors.num_sources

    @property
    def groups(self) -> list:
        return self.application.spec.groups

    @property
    def model_names(self) -> list:
        return [m.name for m in self.models]


@dataclass(frozen=True, eq=False)
class TrialResult:
    """Per-model trajectories of one seeded trial.

    Arrays are indexed ``[model, decision event]``; ``trust[name]`` is
    ``(decisions + 1, G, H)``.  ``failure`` holds a diagnostic when a solve
    aborted the trial.
    """

    seed: int
    models: tuple
    objective: np.ndarray
    realized: np.ndarray
    seconds: np.ndarray
    decisions: np.ndarray
    trust: dict
    log: EventLog
    failure: str = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def mean_loss(self) -> np.ndarray:
        return self.realized.mean(axis=1)


def _indicator(G, H, h):
    t = np.zeros((G, H))
    t[:, h] = 1.0
    return t


def _solve(plan, revised, trust):
    app = plan.application
    scn = fuse(revised, app.spec.scenario_trust(trust))
    # a point farther than epsilon outside the support empties the ball
    scn, _ = project_to_support(scn, app.spec.support(), policy=plan.support_policy)
    inst = app.instance(scn, plan.epsilon, plan.norm)
    return solve_instance(inst, plan.solver)


def _event_norms(log, i, groups, norm):
    err = log.predictions[i] - log.realizations[i][None, :]  # (H, M)
    return np.stack([error_norm(err[:, g], norm) for g in groups])  # (G, H)


def run_trial(plan: TrialPlan, seed) -> TrialResult:
    """Walk one seeded event stream with every model of the plan."""
    app = plan.application
    H, G = plan.num_sources, len(plan.groups)
    E = plan.warmup + plan.events
    log = generate_event_log(plan.truth, plan.errors, E, seed)
    nm = len(plan.models)
    obj = np.full((nm, plan.events), np.nan)
    loss = np.full((nm, plan.events), np.nan)
    secs = np.zeros((nm, plan.events))
    dec = None
    trackers = {m.name: TrustTracker(m.update, plan.t0) for m in plan.models if m.update is not None}
    failure = None
    for d in range(plan.events):
        i = plan.warmup + d
        start = 0 if plan.window is None else max(0, i - plan.window)
        errors = compute_errors(log.window(start, i))
        revised = revise_predictions(log.predictions[i], errors)
        for mi, m in enumerate(plan.models):
            trust = trackers[m.name].t if m.update is not None else _indicator(G, H, m.source)
            tic = time.perf_counter()
            try:
                sol = _solve(plan, revised, trust)
            except MrDroError as exc:
                failure = f"seed {seed}, event {i}, {m.name}: {exc}"
                break
            secs[mi, d] = time.perf_counter() - tic if plan.timing else 0.0
            if dec is None:
                dec = np.full((nm, plan.events, sol.x.size), np.nan)
            dec[mi, d] = sol.x
            obj[mi, d] = sol.value
            loss[mi, d] = app.evaluate(sol.x, log.realizations[i][None, :])
        if failure:
            break
        for m in plan.models:
            if m.update is not None:
                trackers[m.name].update(_event_norms(log, i, plan.groups, m.update.error_norm))
    trust = {}
    for m in plan.models:
        if m.update is not None:
            trust[m.name] = np.array(trackers[m.name].history)
        else:
            trust[m.name] = np.repeat(_indicator(G, H, m.source)[None], plan.events + 1, axis=0)
    if dec is None:
        dec = np.zeros((nm, plan.events, 0))
    return TrialResult(seed, tuple(plan.model_names), obj, loss, secs, dec, trust, log, failure)


def run_trials(plan: TrialPlan, workers=1) -> list:
    """All seeds of the plan, optionally across worker processes."""
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(run_trial, [plan] * len(plan.seeds), plan.seeds))
    return [run_trial(plan, s) for s in plan.seeds]


# ---------------------------------------------------------------------------
# out-of-sample study


@dataclass(frozen=True, eq=False)
class OosResult:
    seed: int
    models: tuple
    losses: np.ndarray  # (models,)
    final_trust: dict


HOLDOUT_SEED_OFFSET = 1_000_003


def run_oos_study(plan: TrialPlan, holdout_size, seed=None) -> list:
    """Out-of-sample loss of every model after training on the plan's log.

    Trust is trained on the full training log (it depends only on the
    errors, not on the decisions).  A holdout of fresh events is then drawn
    from the same models with a different seed; each model decides every
    holdout event from its training history and that event's predictions,
    and is charged the mean realized loss.
    """
    if int(holdout_size) < 1:
        raise ConfigError("holdout size must be >= 1")
    seeds = plan.seeds if seed is None else (int(seed),)
    return [_oos_one(plan, int(holdout_size), s) for s in seeds]


def _oos_one(plan, n_hold, seed):
    H, G = plan.num_sources, len(plan.groups)
    E = plan.warmup + plan.events
    train = generate_event_log(plan.truth, plan.errors, E, seed)
    offset = E if plan.truth.history is not None else 0
    hold = generate_event_log(plan.truth, plan.errors, n_hold, seed + HOLDOUT_SEED_OFFSET, offset=offset)
    start = 0 if plan.window is None else max(0, E - plan.window)
    errors = compute_errors(train.window(start, E))
    final = {}
    for m in plan.models:
        if m.update is None:
            final[m.name] = _indicator(G, H, m.source)
        else:
            final[m.name] = run_trust_sequence(train.window(plan.warmup, E), m.update, plan.t0, plan.groups).t
    losses = np.zeros(len(plan.models))
    for mi, m in enumerate(plan.models):
        total = 0.0
        for j in range(n_hold):
            revised = revise_predictions(hold.predictions[j], errors)
            sol = _solve(plan, revised, final[m.name])
            total += plan.application.evaluate(sol.x, hold.realizations[j][None, :])
        losses[mi] = total / n_hold
    return OosResult(seed, tuple(plan.model_names), losses, final)


# ---------------------------------------------------------------------------
# output


def _f(v):
    return repr(float(v))


def summarize(results) -> list:
    """One row per model: mean and sample std across trials."""
    ok = [r for r in results if r.ok]
    if not ok:
        return []
    rows = []
    for mi, name in enumerate(ok[0].models):
        o = np.array([r.objective[mi].mean() for r in ok])
        l = np.array([r.realized[mi].mean() for r in ok])
        s = np.array([r.seconds[mi].sum() for r in ok])
        sd = (lambda a: float(a.std(ddof=1)) if a.size > 1 else 0.0)
        rows.append({
            "model": name, "trials": len(ok),
            "objective_mean": float(o.mean()), "objective_std": sd(o),
            "loss_mean": float(l.mean()), "loss_std": sd(l),
            "seconds_mean": float(s.mean()), "seconds_std": sd(s),
            "objective_k": float(o.mean()) / 1000.0, "loss_k": float(l.mean()) / 1000.0,
        })
    return rows


def results_rows(results) -> list:
    """``trial,model,objective,avg_loss,solve_seconds`` per trial and model."""
    rows = []
    for r in results:
        if not r.ok:
            continue
        for mi, name in enumerate(r.models):
            rows.append({"trial": r.seed, "model": name, "objective": float(r.objective[mi].mean()),
                         "avg_loss": float(r.realized[mi].mean()), "solve_seconds": float(r.seconds[mi].sum())})
    return rows


def write_summary_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for row in rows:
            w.writerow([row["model"], row["trials"]] + [_f(row[k]) for k in SUMMARY_HEADER[2:]])


def write_trajectory_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        for r in results:
            for mi, name in enumerate(r.models):
                for d in range(r.objective.shape[1]):
                    if math.isnan(r.objective[mi, d]):
                        continue
                    w.writerow([r.seed, name, d, _f(r.objective[mi, d]), _f(r.realized[mi, d]),
                                _f(r.seconds[mi, d])])


def write_trust_history_csv(results, path, groups=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRUST_HEADER)
        for r in results:
            for name in r.models:
                hist = r.trust[name]
                for e, mat in enumerate(hist):
                    for g, vec in enumerate(mat):
                        label = groups[g] if groups else g
                        for h, v in enumerate(vec):
                            w.writerow([r.seed, name, e, label, h, _f(v)])


# ---------------------------------------------------------------------------
# experiment presets


BASELINE_MU = ((0, 0, 0, 0), (0, 5, 0, 5), (0, -5, 5, 2))
BASELINE_SIGMA = ((1, 1, 1, 5), (2, 1, 5, 5), (5, 1, 1, 2))
NONSTATIONARY_MU = ((0, 0, 0, 0), (0, 5, 0, 0), (0, -5, 5, 0))
NONSTATIONARY_MU_AFTER = ((5, 0, 0, 5), (0, 5, 0, 5), (0, -5, 5, 2))
NONSTATIONARY_SIGMA = ((1, 1, 5, 1), (2, 1, 2, 2), (5, 1, 1, 5))
NONSTATIONARY_SWITCH = (100, 100, 100, 50)
DOMINANCE_MU = ((0, 0, 0, 2), (0, 5, 2, -2))
DOMINANCE_SIGMA = ((1, 5, 5, 2), (5, 5, 2, 2))


def resource_updates(step=0.01, eta=0.5, beta=0.01):
    return (UpdateConfig.minmax(step), UpdateConfig.exponential(eta), UpdateConfig.variable_share(eta, beta))


def portfolio_updates(step=0.01, eta=100.0, beta=0.5):
    return resource_updates(step, eta, beta)


def resource_plan(seeds, events=200, regime="baseline", budget=200.0, epsilon=0.01, **kw) -> TrialPlan:
    """Resource-allocation plan for one of the sensitivity regimes.

    ``regime`` is ``baseline``, ``nonstationary`` or ``lognormal``; the
    tighter budget variant is ``baseline`` with ``budget=60``.
    """
    spec = ResourceAllocationSpec(4, 5000.0, 1000.0, budget, 0.0, 30.0)
    if regime == "baseline":
        errors = SourceErrorModel.normal(BASELINE_MU, BASELINE_SIGMA, 0.0, 30.0)
    elif regime == "lognormal":
        logn = np.array([[False] * 4, [True] * 4, [True] * 4])
        errors = SourceErrorModel((ErrorSegment(BASELINE_MU, BASELINE_SIGMA, logn),), (), 0.0, 30.0)
    elif regime == "nonstationary":
        errors = SourceErrorModel(
            (ErrorSegment(NONSTATIONARY_MU, NONSTATIONARY_SIGMA),
             ErrorSegment(NONSTATIONARY_MU_AFTER, NONSTATIONARY_SIGMA)),
            (np.broadcast_to(NONSTATIONARY_SWITCH, (3, 4)),), 0.0, 30.0)
    else:
        raise ConfigError(f"unknown resource regime {regime!r}")
    kw.setdefault("updates", resource_updates())
    return TrialPlan(Application.resource(spec), TruthModel.uniform(10.0, 20.0, 4), errors,
                     tuple(seeds), events, epsilon, **kw)


def dominance_errors() -> SourceErrorModel:
    return SourceErrorModel.normal(DOMINANCE_MU, DOMINANCE_SIGMA, 0.0, 30.0)


def synthetic_returns(assets, periods, seed, drift=0.005, vol=0.03) -> np.ndarray:
    """Gaussian return history with asset-specific drift and volatility."""
    rng = np.random.default_rng(seed)
    mu = drift * rng.uniform(-1.0, 2.0, assets)
    sd = vol * rng.uniform(0.5, 1.5, assets)
    return np.clip(mu + sd * rng.standard_normal((periods, assets)), -0.99, 0.99)


def portfolio_plan(seeds, history, mu, sigma, events=None, epsilon=0.01, alpha=0.2, rho=10.0, **kw) -> TrialPlan:
    """Portfolio plan replaying ``history``; predictions are truncated to (-1, 1)."""
    history = np.asarray(history, dtype=float)
    K = history.shape[1]
    spec = PortfolioSpec(K, alpha, rho)
    errors = SourceErrorModel.normal(mu, sigma, -1.0, 1.0)
    if events is None:
        events = history.shape[0] - kw.get("warmup", 1)
    kw.setdefault("updates", portfolio_updates())
    return TrialPlan(Application.portfolio(spec), TruthModel.replay(history), errors,
                     tuple(seeds), events, epsilon, **kw)
