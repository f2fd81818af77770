"""Trust dynamics over sources and probability-dominance diagnostics.

Three update rules are provided.  All of them take the trust vector on the
last axis, so a stack of independent trust vectors of shape ``(..., H)``
can be advanced in one call.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllWeightsVanished,
    ConfigError,
    InsufficientSamples,
    NeedTwoSources,
)
from .fusion import EventLog, PredictionErrors, check_trust, compute_errors, error_norm

MIN_DOMINANCE_SAMPLES = 30


class Method(str, enum.Enum):
    MINMAX = "MinMax"
    EXPONENTIAL = "Exponential"
    VARIABLE_SHARE = "VariableShare"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").replace(" ", "").lower()
        for m in cls:
            if m.value.lower() == key:
                return m
        raise ConfigError(f"unknown trust update method {value!r}")


@dataclass(frozen=True)
class UpdateConfig:
    method: Method
    step: float | None = None
    eta: float | None = None
    beta: float | None = None
    error_norm: str = "L1"

    def __post_init__(self):
        method = Method.parse(self.method)
        object.__setattr__(self, "method", method)
        norm = str(self.error_norm).upper()
        if norm == "INF":
            norm = "LINF"
        if norm not in ("L1", "L2", "LINF"):
            raise ConfigError(f"error_norm must be L1, L2 or Linf, got {self.error_norm!r}")
        object.__setattr__(self, "error_norm", norm)
        if method is Method.MINMAX:
            if self.step is None:
                raise ConfigError("MinMax update needs 'step'")
            if not self.step > 0:
                raise ConfigError("'step' must be > 0")
        else:
            if self.eta is None:
                raise ConfigError(f"{method.value} update needs 'eta'")
            if not self.eta > 0:
                raise ConfigError("'eta' must be > 0")
        if method is Method.VARIABLE_SHARE:
            if self.beta is None:
                raise ConfigError("VariableShare update needs 'beta'")
            if not 0 < self.beta <= 1:
                raise ConfigError("'beta' must lie in (0, 1]")

    @classmethod
    def minmax(cls, step=0.01, error_norm="L1"):
        return cls(Method.MINMAX, step=step, error_norm=error_norm)

    @classmethod
    def exponential(cls, eta=0.5, error_norm="L1"):
        return cls(Method.EXPONENTIAL, eta=eta, error_norm=error_norm)

    @classmethod
    def variable_share(cls, eta=0.5, beta=0.01, error_norm="L1"):
        return cls(Method.VARIABLE_SHARE, eta=eta, beta=beta, error_norm=error_norm)


def update_min_max(t, norms, step):
    """Move ``step`` of trust from the worst source to the best one.

    Ties go to the lowest index.  The transfer is capped by the mass the
    losing source holds and the room the winner has below one, so the
    result never leaves the simplex.
    """
    t = np.array(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if t.shape[-1] < 2:
        raise NeedTwoSources("min-max update needs at least two sources")
    best = np.argmin(norms, axis=-1)[..., None]
    worst = np.argmax(norms, axis=-1)[..., None]
    moving = best != worst
    tb = np.take_along_axis(t, best, -1)
    tw = np.take_along_axis(t, worst, -1)
    amount = np.where(moving, np.minimum(np.minimum(step, tw), 1.0 - tb), 0.0)
    np.put_along_axis(t, best, np.minimum(tb + amount, 1.0), -1)
    np.put_along_axis(t, worst, np.maximum(tw - amount, 0.0), -1)
    return t


def _normalize(w):
    total = w.sum(axis=-1, keepdims=True)
    if np.any(~(total > 0)) or np.any(~np.isfinite(total)):
        raise AllWeightsVanished("all trust weights vanished")
    return w / total


def update_exponential(t, norms, eta):
    """Multiplicative update ``t_h * exp(-eta * err_h)``, renormalised."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        logw = np.log(t) - eta * np.asarray(norms, dtype=float)
    top = logw.max(axis=-1, keepdims=True)
    if np.any(~np.isfinite(top)):
        raise AllWeightsVanished("all trust weights vanished")
    return _normalize(np.exp(logw - top))


def update_variable_share(t, norms, eta, beta):
    """Exponential update followed by variable-share redistribution.

    A source with error ``e`` keeps ``(1 - beta) ** e`` of its
    intermediate trust and releases the rest into a pool; each source then
    receives an equal share of what the *other* sources released.
    """
    t = np.asarray(t, dtype=float)
    H = t.shape[-1]
    if H < 2:
        raise NeedTwoSources("variable-share update divides by H - 1")
    n = np.asarray(norms, dtype=float)
    # the share step is linear in tp, so rescale it by its largest entry
    with np.errstate(divide="ignore"):
        logw = np.log(t) - eta * n
    top = logw.max(axis=-1, keepdims=True)
    if np.any(~np.isfinite(top)):
        raise AllWeightsVanished("all trust weights vanished")
    tp = np.exp(logw - top)
    keep = (1.0 - beta) ** n
    released = (1.0 - keep) * tp
    pool = released.sum(axis=-1, keepdims=True)
    new = keep * tp + (pool - released) / (H - 1)
    return _normalize(new)


def apply_update(t, norms, config: UpdateConfig):
    if config.method is Method.MINMAX:
        return update_min_max(t, norms, config.step)
    if config.method is Method.EXPONENTIAL:
        return update_exponential(t, norms, config.eta)
    return update_variable_share(t, norms, config.eta, config.beta)


class TrustTracker:
    """Running trust for one or more groups under a fixed update rule.

    The exponential rule is tracked through accumulated log-weights, which
    is algebraically the same as repeated normalised updates but does not
    underflow over long horizons.
    """

    def __init__(self, config: UpdateConfig, t0):
        self.config = config
        t0 = check_trust(np.asarray(t0, dtype=float).T).T
        self.t = np.array(t0, dtype=float)
        with np.errstate(divide="ignore"):
            self._logw = np.log(self.t)
        self.history = [self.t.copy()]

    def update(self, norms):
        norms = np.asarray(norms, dtype=float)
        if self.config.method is Method.EXPONENTIAL:
            self._logw = self._logw - self.config.eta * norms
            top = self._logw.max(axis=-1, keepdims=True)
            if np.any(~np.isfinite(top)):
                raise AllWeightsVanished("all trust weights vanished")
            self._logw = self._logw - top
            self.t = _normalize(np.exp(self._logw))
        else:
            self.t = apply_update(self.t, norms, self.config)
        self.history.append(self.t.copy())
        return self.t


@dataclass(frozen=True, eq=False)
class TrustState:
    """Trust per group and source, with its full history.

    ``history`` has shape ``(steps + 1, G, H)``; row 0 is the initial trust.
    """

    history: np.ndarray
    groups: tuple = ()

    def __post_init__(self):
        h = np.array(self.history, dtype=float)
        if h.ndim == 2:
            h = h[:, None, :]
        h.flags.writeable = False
        object.__setattr__(self, "history", h)
        if not self.groups:
            object.__setattr__(self, "groups", tuple(f"g{k}" for k in range(h.shape[1])))

    @property
    def t(self) -> np.ndarray:
        """Current trust, ``(G, H)``."""
        return self.history[-1]

    @property
    def num_groups(self) -> int:
        return self.history.shape[1]

    def to_csv(self, path) -> None:
        write_trust_csv(self, path)


def write_trust_csv(state: TrustState, path, prefix=None) -> None:
    """``event,group,source,trust`` rows; ``prefix`` adds leading columns."""
    prefix = prefix or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(prefix) + ["event", "group", "source", "trust"])
        for e, row in enumerate(state.history):
            for g, vec in enumerate(row):
                for h, v in enumerate(vec):
                    w.writerow(list(prefix.values()) + [e, state.groups[g], h, repr(float(v))])


def run_trust_sequence(log: EventLog, config: UpdateConfig, t0, groups=None) -> TrustState:
    """Replay a fully realized log, updating trust once per event.

    ``groups`` lists the dimensions that make up each trust group (default:
    a single group over all dimensions); each group's error norm is taken
    over its own dimensions.
    """
    M = log.dim
    if groups is None:
        groups = [list(range(M))]
    groups = [list(g) for g in groups]
    H = log.num_sources
    t0 = np.asarray(t0, dtype=float)
    if t0.ndim == 1:
        t0 = np.tile(t0, (len(groups), 1))
    if t0.shape != (len(groups), H):
        raise ValueError(f"t0 must have shape ({len(groups)}, {H})")
    tracker = TrustTracker(config, t0)
    if log.num_realized:
        err = compute_errors(log).errors  # (H, I, M)
        norms = np.stack([error_norm(err[..., g], config.error_norm) for g in groups])  # (G, H, I)
        for i in range(err.shape[1]):
            tracker.update(norms[:, :, i])
    names = tuple("all" if len(groups) == 1 and len(groups[0]) == M else f"g{k}" for k in range(len(groups)))
    return TrustState(np.array(tracker.history), names)


# ---------------------------------------------------------------------------
# dominance


@dataclass(frozen=True)
class DominanceReport:
    pair: tuple
    estimate: float
    fsd_flag: bool
    samples: int


def first_order_dominates(y, z) -> bool:
    """Empirical CDF of ``y`` lies on or above that of ``z`` everywhere,
    strictly above somewhere."""
    y = np.sort(np.asarray(y, dtype=float))
    z = np.sort(np.asarray(z, dtype=float))
    grid = np.union1d(y, z)
    Fy = np.searchsorted(y, grid, side="right") / y.size
    Fz = np.searchsorted(z, grid, side="right") / z.size
    return bool(np.all(Fy >= Fz) and np.any(Fy > Fz))


def dominance_from_samples(y, z, pair=(0, 1)) -> DominanceReport:
    """Fraction of paired draws with ``y < z`` and the empirical FSD flag."""
    y = np.asarray(y, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if y.size != z.size:
        raise ValueError("paired samples must have equal length")
    if y.size < MIN_DOMINANCE_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_DOMINANCE_SAMPLES} events, got {y.size}")
    return DominanceReport(tuple(pair), float(np.mean(y < z)), first_order_dominates(y, z), int(y.size))


def estimate_dominance(errors: PredictionErrors, pair, norm="L1", dims=None) -> DominanceReport:
    """Does source ``pair[0]`` have smaller error norms than ``pair[1]``?"""
    hy, hz = pair
    n = errors.norms(norm, dims)
    return dominance_from_samples(n[hy], n[hz], pair=(hy, hz))
