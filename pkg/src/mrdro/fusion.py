"""Nonparametric fusion of multi-source predictions.

Past prediction errors of every source are replayed on top of that
source's current prediction; the resulting points are weighted by the
source's trust, spread evenly over its points.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoRealizedEvents, TrustNotSimplex
from .lp import LpProblem, LpStatus, solve_lp

SIMPLEX_TOL = 1e-9


def _ro(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EventLog:
    """Predictions of ``H`` sources for a sequence of events, plus truths.

    ``predictions`` has shape ``(E, H, M)``; ``realizations`` has shape
    ``(E, M)`` and its last row may be NaN when the final event is still
    undecided.
    """

    predictions: np.ndarray
    realizations: np.ndarray

    def __post_init__(self):
        pred = _ro(self.predictions)
        real = _ro(self.realizations)
        if pred.ndim != 3:
            raise DimensionMismatch("predictions must have shape (events, sources, dim)")
        E, H, M = pred.shape
        if real.shape != (E, M):
            raise DimensionMismatch(f"realizations must have shape ({E}, {M}), got {real.shape}")
        if np.isnan(pred).any():
            raise DimensionMismatch("every source must predict every event (complete panels only)")
        missing = np.isnan(real).any(axis=1)
        if missing[:-1].any() if E else False:
            raise DimensionMismatch("only the final (current) event may lack a realization")
        if missing.any() and not np.isnan(real[-1]).all():
            raise DimensionMismatch("a realization is either complete or absent")
        object.__setattr__(self, "predictions", pred)
        object.__setattr__(self, "realizations", real)

    @classmethod
    def from_arrays(cls, predictions, realizations, current=None) -> "EventLog":
        """``current``: optional ``(H, M)`` predictions of an undecided event."""
        pred = np.asarray(predictions, dtype=float)
        real = np.asarray(realizations, dtype=float)
        if pred.ndim == 2:  # (E, H) with M == 1
            pred = pred[..., None]
        if real.ndim == 1:
            real = real[:, None]
        if current is not None:
            cur = np.asarray(current, dtype=float).reshape(1, pred.shape[1], pred.shape[2])
            pred = np.concatenate([pred, cur])
            real = np.concatenate([real, np.full((1, real.shape[1]), np.nan)])
        return cls(pred, real)

    @property
    def num_events(self) -> int:
        return self.predictions.shape[0]

    @property
    def num_sources(self) -> int:
        return self.predictions.shape[1]

    @property
    def dim(self) -> int:
        return self.predictions.shape[2]

    @property
    def has_current(self) -> bool:
        return self.num_events > 0 and bool(np.isnan(self.realizations[-1]).all())

    @property
    def num_realized(self) -> int:
        return self.num_events - int(self.has_current)

    def realized(self) -> "EventLog":
        k = self.num_realized
        return EventLog(self.predictions[:k], self.realizations[:k])

    def window(self, start, stop) -> "EventLog":
        return EventLog(self.predictions[start:stop], self.realizations[start:stop])

    def current_predictions(self) -> np.ndarray:
        if not self.has_current:
            raise ValueError("log has no undecided current event")
        return self.predictions[-1]

    def with_current(self, predictions) -> "EventLog":
        base = self.realized()
        return EventLog.from_arrays(base.predictions, base.realizations, current=predictions)

    def to_csv(self, path) -> None:
        write_event_log(self, path)

    @classmethod
    def from_csv(cls, path) -> "EventLog":
        return read_event_log(path)


@dataclass(frozen=True, eq=False)
class PredictionErrors:
    """``errors[h, i]`` is the error vector of source ``h`` at event ``i``."""

    errors: np.ndarray

    def __post_init__(self):
        e = _ro(self.errors)
        if e.ndim != 3:
            raise DimensionMismatch("errors must have shape (H, I, M)")
        object.__setattr__(self, "errors", e)

    @property
    def shape(self):
        return self.errors.shape

    def norms(self, norm="L1", dims=None) -> np.ndarray:
        """Per-source, per-event error norms, shape ``(H, I)``."""
        e = self.errors if dims is None else self.errors[..., list(dims)]
        return error_norm(e, norm)


def error_norm(e, norm="L1"):
    e = np.asarray(e, dtype=float)
    key = str(norm).upper()
    if key == "L1":
        return np.abs(e).sum(axis=-1)
    if key == "L2":
        return np.sqrt((e * e).sum(axis=-1))
    if key in ("LINF", "INF"):
        return np.abs(e).max(axis=-1)
    raise ValueError(f"unknown error norm {norm!r}")


@dataclass(frozen=True, eq=False)
class WeightedScenarioSet:
    """Discrete distribution over revised prediction points.

    ``points`` is ``(P, M)``; ``sources[p]`` is the source that produced
    point ``p``.  ``weights`` is ``(P,)`` for a single trust group or
    ``(P, G)`` with one column per group; every column sums to one.
    """

    points: np.ndarray
    weights: np.ndarray
    sources: np.ndarray

    def __post_init__(self):
        pts = _ro(self.points)
        if pts.ndim == 1:
            pts = _ro(pts[:, None])
        w = _ro(self.weights)
        src = np.array(self.sources, dtype=np.int64)
        src.flags.writeable = False
        P = pts.shape[0]
        if w.shape[0] != P or w.ndim not in (1, 2) or src.shape != (P,):
            raise DimensionMismatch("weights/sources must have one entry per point")
        if np.any(w < 0):
            raise ValueError("scenario weights must be nonnegative")
        sums = w.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError(f"scenario weights must sum to one, got {sums}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "sources", src)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def num_groups(self) -> int:
        return 1 if self.weights.ndim == 1 else self.weights.shape[1]

    @classmethod
    def uniform(cls, points) -> "WeightedScenarioSet":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if np.ndim(points) == 1:
            pts = pts.T
        P = pts.shape[0]
        return cls(pts, np.full(P, 1.0 / P), np.zeros(P, dtype=np.int64))

    def for_source(self, h) -> "WeightedScenarioSet":
        """Points of source ``h`` alone, equally weighted."""
        keep = self.sources == h
        P = int(keep.sum())
        w = np.full(P, 1.0 / P)
        if self.weights.ndim == 2:
            w = np.repeat(w[:, None], self.weights.shape[1], axis=1)
        return WeightedScenarioSet(self.points[keep], w, self.sources[keep])


@dataclass(frozen=True, eq=False)
class SupportPolytope:
    """``{xi : C xi <= g}``; an empty ``C`` means all of R^M."""

    C: np.ndarray
    g: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        g = _ro(self.g).ravel()
        if C.ndim != 2 or C.shape[0] != g.size:
            raise DimensionMismatch("C must be (rows, M) with one g entry per row")
        C.flags.writeable = False
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "g", g)
        if self.check and not self.is_nonempty():
            raise ValueError("support polytope is empty")

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    @property
    def num_rows(self) -> int:
        return self.C.shape[0]

    @classmethod
    def free(cls, dim) -> "SupportPolytope":
        return cls(np.zeros((0, dim)), np.zeros(0), check=False)

    @classmethod
    def box(cls, lo, hi, dim=None) -> "SupportPolytope":
        """Box ``lo <= xi <= hi``; infinite sides produce no rows."""
        if dim is None:
            dim = max(np.size(lo), np.size(hi))
        lo = np.broadcast_to(np.asarray(lo, float), (dim,))
        hi = np.broadcast_to(np.asarray(hi, float), (dim,))
        if np.any(lo > hi):
            raise ValueError("support box needs lo <= hi")
        rows, g = [], []
        eye = np.eye(dim)
        for k in range(dim):
            if np.isfinite(hi[k]):
                rows.append(eye[k])
                g.append(hi[k])
            if np.isfinite(lo[k]):
                rows.append(-eye[k])
                g.append(-lo[k])
        C = np.array(rows) if rows else np.zeros((0, dim))
        return cls(C, np.array(g), check=False)

    def is_nonempty(self) -> bool:
        if self.num_rows == 0:
            return True
        M = self.dim
        # maximise a common slack s <= 1: nonempty iff optimum >= 0
        A = np.hstack([self.C, np.ones((self.num_rows, 1))])
        p = LpProblem(
            np.r_[np.zeros(M), -1.0], A, ("<=",) * self.num_rows, self.g,
            np.r_[np.full(M, -np.inf), -np.inf], np.r_[np.full(M, np.inf), 1.0],
        )
        sol = solve_lp(p)
        return sol.status is LpStatus.OPTIMAL and -sol.objective_value >= -1e-9

    def slacks(self, points) -> np.ndarray:
        """``g - C xi`` for each point, shape ``(P, rows)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.g[None, :] - pts @ self.C.T

    def contains(self, points, tol=1e-9) -> np.ndarray:
        return np.all(self.slacks(points) >= -tol, axis=1)

    def restrict(self, dims) -> "SupportPolytope":
        """Rows of ``C`` that involve only ``dims``, projected onto them."""
        dims = list(dims)
        other = np.setdiff1d(np.arange(self.dim), dims)
        rows = np.flatnonzero(np.all(self.C[:, other] == 0.0, axis=1)) if other.size else np.arange(self.num_rows)
        return SupportPolytope(self.C[np.ix_(rows, dims)], self.g[rows], check=False)

    def is_separable(self, blocks) -> bool:
        """True if every row touches a single block of ``blocks``."""
        owner = np.full(self.dim, -1)
        for n, dims in enumerate(blocks):
            owner[list(dims)] = n
        for row in self.C:
            touched = set(owner[np.flatnonzero(row)].tolist())
            if len(touched) > 1:
                return False
        return True


@dataclass(frozen=True)
class SupportReport:
    """Points lying outside the support: ``(point, row, slack)`` triples."""

    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def points(self) -> list:
        return sorted({p for p, _, _ in self.violations})


def compute_errors(log: EventLog) -> PredictionErrors:
    """Prediction minus realization for every realized event."""
    k = log.num_realized
    if k == 0:
        raise NoRealizedEvents("need at least one realized event")
    diff = log.predictions[:k] - log.realizations[:k, None, :]
    return PredictionErrors(np.transpose(diff, (1, 0, 2)))


def revise_predictions(current, errors: PredictionErrors) -> np.ndarray:
    """Replay each source's past errors on its current prediction.

    Returns an ``(H, I, M)`` array; ``current`` is ``(H, M)``.
    """
    e = errors.errors
    H, I, M = e.shape
    if I == 0:
        raise NoRealizedEvents("no historical errors to revise with")
    cur = np.asarray(current, dtype=float)
    if cur.ndim == 1 and M == 1:
        cur = cur[:, None]
    if cur.shape != (H, M):
        raise DimensionMismatch(f"current predictions must have shape ({H}, {M}), got {cur.shape}")
    return cur[:, None, :] - e


def check_trust(trust, tol=SIMPLEX_TOL) -> np.ndarray:
    t = np.asarray(trust, dtype=float)
    if np.any(t < -tol) or np.any(t > 1 + tol) or np.any(np.isnan(t)):
        raise TrustNotSimplex(f"trust values must lie in [0, 1]: {t}")
    s = t.sum(axis=0)
    if np.any(np.abs(s - 1.0) > tol):
        raise TrustNotSimplex(f"trust must sum to one over sources, got {s}")
    return t


def fuse(revised, trust) -> WeightedScenarioSet:
    """Trust-weighted scenario set from revised points.

    ``revised`` is ``(H, I, M)``.  ``trust`` is ``(H,)`` for one group or
    ``(H, G)`` for per-group trust, giving ``(P, G)`` weights.  Points are
    ordered source-major.
    """
    pts = np.asarray(revised, dtype=float)
    if pts.ndim == 2:
        pts = pts[..., None]
    H, I, M = pts.shape
    t = check_trust(trust)
    if t.shape[0] != H:
        raise DimensionMismatch(f"trust has {t.shape[0]} sources, points have {H}")
    w = t / I
    weights = np.repeat(w, I, axis=0)
    sources = np.repeat(np.arange(H), I)
    return WeightedScenarioSet(pts.reshape(H * I, M), weights, sources)


def project_to_support(scenarios: WeightedScenarioSet, support: SupportPolytope, tol=1e-9, policy="keep"):
    """Report points outside the support and optionally move them inside.

    ``policy="keep"`` returns the points untouched.  ``policy="clip"``
    replaces each outside point by an L1-nearest point of the support; for
    a box this is coordinate-wise clipping.  Weights never change.
    """
    sl = support.slacks(scenarios.points)
    bad = np.argwhere(sl < -tol)
    report = SupportReport(tuple((int(p), int(r), float(sl[p, r])) for p, r in bad))
    if policy == "keep" or report.ok:
        return scenarios, report
    if policy != "clip":
        raise ValueError(f"unknown support policy {policy!r}")
    pts = np.array(scenarios.points)
    box = _box_bounds(support)
    if box is not None:
        pts = np.clip(pts, box[0], box[1])
    else:
        for p in report.points:
            pts[p] = _l1_nearest(support, pts[p])
    return WeightedScenarioSet(pts, scenarios.weights, scenarios.sources), report


def _box_bounds(support):
    """``(lo, hi)`` if every row bounds a single coordinate, else None."""
    C, g = support.C, support.g
    nz = C != 0.0
    if np.any(nz.sum(axis=1) != 1):
        return None
    lo = np.full(support.dim, -np.inf)
    hi = np.full(support.dim, np.inf)
    for row, bound in zip(C, g):
        k = int(np.flatnonzero(row)[0])
        v = bound / row[k]
        if row[k] > 0:
            hi[k] = min(hi[k], v)
        else:
            lo[k] = max(lo[k], v)
    return lo, hi


def _l1_nearest(support, point):
    # min sum(u) s.t. C y <= g, -u <= y - point <= u
    M, R = support.dim, support.num_rows
    eye = np.eye(M)
    A = np.block([
        [support.C, np.zeros((R, M))],
        [eye, -eye],
        [-eye, -eye],
    ])
    rhs = np.r_[support.g, point, -point]
    p = LpProblem(np.r_[np.zeros(M), np.ones(M)], A, ("<=",) * (R + 2 * M), rhs,
                  np.r_[np.full(M, -np.inf), np.zeros(M)], np.full(2 * M, np.inf))
    sol = solve_lp(p)
    return sol.values[:M]


# ---------------------------------------------------------------------------
# CSV


def write_event_log(log: EventLog, path) -> None:
    M = log.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["event", "source", "kind"] + [f"dim_{k}" for k in range(M)])
        for e in range(log.num_events):
            for h in range(log.num_sources):
                w.writerow([e, h, "pred"] + [repr(float(v)) for v in log.predictions[e, h]])
            if not np.isnan(log.realizations[e]).any():
                w.writerow([e, "", "true"] + [repr(float(v)) for v in log.realizations[e]])


def read_event_log(path) -> EventLog:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if header[:3] != ["event", "source", "kind"]:
        raise ValueError("event log CSV must start with event,source,kind")
    M = len(header) - 3
    preds: dict = {}
    truths: dict = {}
    for r in rows[1:]:
        if not r:
            continue
        e = int(r[0])
        vals = [float(v) for v in r[3:3 + M]]
        if r[2] == "pred":
            preds.setdefault(e, {})[int(r[1])] = vals
        elif r[2] == "true":
            truths[e] = vals
        else:
            raise ValueError(f"unknown row kind {r[2]!r}")
    events = sorted(preds)
    H = 1 + max(max(d) for d in preds.values())
    P = np.full((len(events), H, M), np.nan)
    R = np.full((len(events), M), np.nan)
    for n, e in enumerate(events):
        for h, v in preds[e].items():
            P[n, h] = v
        if e in truths:
            R[n] = truths[e]
    return EventLog(P, R)
