"""Exact LP reformulations of worst-case expected loss over a Wasserstein
ball centred at a weighted scenario set.

Losses are pointwise maxima of affine pieces
``l_j(x, xi) = <a_j(x), xi> + b_j(x)`` whose coefficients are themselves
affine in the decision ``x``::

    a_j(x) = A[j] @ x + alpha[j]        b_j(x) = beta[j] @ x + beta0[j]

With a polyhedral support ``{xi : C xi <= g}`` and an L1 (or Linf) ground
norm the worst case is an LP over ``(x, lam, s, gamma)``.  In every LP
built here the decision occupies columns ``0..K-1`` and ``lam`` column
``K``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, InfeasibleDecision, SolveFailed, UnsupportedNorm
from .fusion import SupportPolytope, WeightedScenarioSet
from .lp import EQ, GE, LE, LpBuilder, LpProblem, LpSolution, LpStatus, get_solver

NORMS = ("L1", "LINF")


def _arr(a, ndim, name):
    a = np.array(a, dtype=float)
    if a.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-D, got shape {a.shape}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PiecewiseAffineLoss:
    """``max_j <A[j] x + alpha[j], xi> + beta[j] @ x + beta0[j]``."""

    A: np.ndarray  # (J, M, K)
    alpha: np.ndarray  # (J, M)
    beta: np.ndarray  # (J, K)
    beta0: np.ndarray  # (J,)

    def __post_init__(self):
        A = _arr(self.A, 3, "A")
        alpha = _arr(self.alpha, 2, "alpha")
        beta = _arr(self.beta, 2, "beta")
        beta0 = _arr(self.beta0, 1, "beta0")
        J, M, K = A.shape
        if J < 1:
            raise DimensionMismatch("need at least one piece")
        if alpha.shape != (J, M) or beta.shape != (J, K) or beta0.shape != (J,):
            raise DimensionMismatch("pieces must share J, M and K")
        for k, v in (("A", A), ("alpha", alpha), ("beta", beta), ("beta0", beta0)):
            object.__setattr__(self, k, v)

    @property
    def J(self) -> int:
        return self.A.shape[0]

    @property
    def M(self) -> int:
        return self.A.shape[1]

    @property
    def K(self) -> int:
        return self.A.shape[2]

    @classmethod
    def constant(cls, a, b, K=0) -> "PiecewiseAffineLoss":
        """Pieces whose coefficients do not depend on the decision."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        J, M = a.shape
        return cls(np.zeros((J, M, K)), a, np.zeros((J, K)), b)

    def coefficients(self, x):
        """``(a, b)`` at decision ``x``: shapes ``(J, M)`` and ``(J,)``."""
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.K:
            raise DimensionMismatch(f"decision has {x.size} entries, loss expects {self.K}")
        return self.A @ x + self.alpha, self.beta @ x + self.beta0

    def pieces(self, x, xi) -> np.ndarray:
        """Value of every piece, shape ``(P, J)``."""
        a, b = self.coefficients(x)
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return xi @ a.T + b

    def value(self, x, xi) -> np.ndarray:
        return self.pieces(x, xi).max(axis=1)

    def lipschitz(self, x, norm="L1") -> float:
        """Largest dual norm of the slopes ``a_j(x)``."""
        a, _ = self.coefficients(x)
        return float(np.max(_dual_norm(a, norm)))


def _dual_norm(v, norm):
    norm = _check_norm(norm)
    return np.abs(v).max(axis=-1) if norm == "L1" else np.abs(v).sum(axis=-1)


def _check_norm(norm):
    key = str(norm).upper()
    if key == "INF":
        key = "LINF"
    if key not in NORMS:
        raise UnsupportedNorm(f"ground norm must be L1 or Linf, got {norm!r}")
    return key


@dataclass(frozen=True, eq=False)
class SeparableAffineLoss:
    """Sum over blocks of piecewise-affine losses on disjoint coordinates.

    ``blocks`` is a sequence of ``(dims, PiecewiseAffineLoss)``; ``dims``
    lists the coordinates of ``xi`` the block acts on.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((tuple(int(d) for d in dims), loss) for dims, loss in self.blocks)
        if not blocks:
            raise DimensionMismatch("need at least one block")
        K = {loss.K for _, loss in blocks}
        if len(K) != 1:
            raise DimensionMismatch("all blocks must share the decision dimension")
        for dims, loss in blocks:
            if len(dims) != loss.M:
                raise DimensionMismatch("block dims must match the block loss dimension")
        used = sorted(d for dims, _ in blocks for d in dims)
        if used != list(range(len(used))):
            raise DimensionMismatch("blocks must partition the coordinates 0..M-1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def N(self) -> int:
        return len(self.blocks)

    @property
    def K(self) -> int:
        return self.blocks[0][1].K

    @property
    def M(self) -> int:
        return sum(len(d) for d, _ in self.blocks)

    def block_values(self, x, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.column_stack([loss.value(x, xi[:, list(d)]) for d, loss in self.blocks])

    def value(self, x, xi) -> np.ndarray:
        return self.block_values(x, xi).sum(axis=1)

    def lipschitz(self, x, norm="L1") -> float:
        return max(loss.lipschitz(x, norm) for _, loss in self.blocks)

    def to_joint(self) -> PiecewiseAffineLoss:
        """Equivalent single max over the product of block pieces."""
        M, K = self.M, self.K
        A, alpha, beta, beta0 = [], [], [], []
        for combo in itertools.product(*(range(loss.J) for _, loss in self.blocks)):
            Aj = np.zeros((M, K))
            aj = np.zeros(M)
            bj = np.zeros(K)
            b0 = 0.0
            for (dims, loss), j in zip(self.blocks, combo):
                Aj[list(dims)] += loss.A[j]
                aj[list(dims)] += loss.alpha[j]
                bj += loss.beta[j]
                b0 += loss.beta0[j]
            A.append(Aj)
            alpha.append(aj)
            beta.append(bj)
            beta0.append(b0)
        return PiecewiseAffineLoss(np.array(A), np.array(alpha), np.array(beta), np.array(beta0))


@dataclass(frozen=True, eq=False)
class DecisionSet:
    """Linear constraints ``G x (rel) h`` plus bounds on the decision."""

    lower: np.ndarray
    upper: np.ndarray
    G: np.ndarray = None
    senses: tuple = ()
    h: np.ndarray = None

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).ravel()
        upper = np.broadcast_to(np.array(self.upper, dtype=float), lower.shape).copy()
        K = lower.size
        G = np.zeros((0, K)) if self.G is None else np.atleast_2d(np.array(self.G, dtype=float))
        h = np.zeros(0) if self.h is None else np.array(self.h, dtype=float).ravel()
        if G.shape[1] != K or G.shape[0] != h.size or len(self.senses) != h.size:
            raise DimensionMismatch("decision constraints do not match the decision dimension")
        for k, v in (("lower", lower), ("upper", upper), ("G", G), ("h", h)):
            v.flags.writeable = False
            object.__setattr__(self, k, v)
        object.__setattr__(self, "senses", tuple(self.senses))

    @property
    def K(self) -> int:
        return self.lower.size

    @classmethod
    def free(cls, K) -> "DecisionSet":
        return cls(np.full(K, -np.inf), np.full(K, np.inf))

    @classmethod
    def box(cls, lo, hi, K=None) -> "DecisionSet":
        K = K or max(np.size(lo), np.size(hi))
        return cls(np.broadcast_to(lo, (K,)).astype(float), np.broadcast_to(hi, (K,)).astype(float))

    def with_rows(self, G, senses, h) -> "DecisionSet":
        G = np.atleast_2d(np.asarray(G, dtype=float))
        return DecisionSet(
            self.lower, self.upper, np.vstack([self.G, G]),
            self.senses + tuple(senses), np.concatenate([self.h, np.ravel(h)]),
        )

    def contains(self, x, tol=1e-7) -> bool:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.K or np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            return False
        r = self.G @ x
        for v, s, b in zip(r, self.senses, self.h):
            if (s == LE and v > b + tol) or (s == GE and v < b - tol) or (s == EQ and abs(v - b) > tol):
                return False
        return True


@dataclass(frozen=True, eq=False)
class DroInstance:
    loss: object  # PiecewiseAffineLoss | SeparableAffineLoss
    scenarios: WeightedScenarioSet
    support: SupportPolytope
    epsilon: float
    norm: str = "L1"
    decisions: DecisionSet = None

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError("radius epsilon must be >= 0")
        object.__setattr__(self, "norm", _check_norm(self.norm))
        M, K = self.loss.M, self.loss.K
        if self.scenarios.dim != M:
            raise DimensionMismatch(f"scenarios have dimension {self.scenarios.dim}, loss expects {M}")
        if self.support.dim != M:
            raise DimensionMismatch("support dimension does not match the loss")
        if self.decisions is None:
            object.__setattr__(self, "decisions", DecisionSet.free(K))
        elif self.decisions.K != K:
            raise DimensionMismatch("decision set dimension does not match the loss")
        G = self.scenarios.num_groups
        if isinstance(self.loss, SeparableAffineLoss):
            if G not in (1, self.loss.N):
                raise DimensionMismatch("need one trust column per block (or a single column)")
        elif G != 1:
            raise DimensionMismatch("piecewise losses take a single weight vector")

    @property
    def separable(self) -> bool:
        return isinstance(self.loss, SeparableAffineLoss)

    def replace(self, **kw) -> "DroInstance":
        fields = dict(loss=self.loss, scenarios=self.scenarios, support=self.support,
                      epsilon=self.epsilon, norm=self.norm, decisions=self.decisions)
        fields.update(kw)
        return DroInstance(**fields)


@dataclass(frozen=True, eq=False)
class DroSolution:
    value: float
    x: np.ndarray
    lam: float
    lp: LpSolution


# ---------------------------------------------------------------------------
# LP assembly


def _add_decisions(b: LpBuilder, dec: DecisionSet, fixed_x=None):
    if fixed_x is not None:
        fx = np.asarray(fixed_x, dtype=float).ravel()
        x = b.add_variables("x", dec.K, lower=fx, upper=fx)
    else:
        x = b.add_variables("x", dec.K, lower=dec.lower, upper=dec.upper)
    for row, s, rhs in zip(dec.G, dec.senses, dec.h):
        b.add_rows(np.zeros(dec.K, dtype=np.int64), x, row, s, [rhs])
    return x


def _add_block(b, x, lam, loss: PiecewiseAffineLoss, pts, w, C, g, norm, tag):
    """Epigraph variables and rows for one weighted point set and loss.

    Returns nothing; adds ``s`` (cost ``w``), ``gamma`` and the rows
    bounding ``s`` from below and the dual norm of ``C'gamma - a_j(x)``.
    """
    P = pts.shape[0]
    if P == 0:
        return
    J, M, K = loss.A.shape
    R = C.shape[0]
    s = b.add_variables(f"s{tag}_", P, lower=-np.inf, upper=np.inf, cost=w)
    gam = b.add_variables(f"gamma{tag}_", (P, J, R)) if R else np.zeros((P, J, 0), dtype=np.int64)
    slack = g[None, :] - pts @ C.T  # (P, R)

    # s_p >= b_j(x) + <a_j(x), xi_p> + <gamma_pj, g - C xi_p>
    nrow = P * J
    xcoef = loss.beta[None, :, :] + np.einsum("jmk,pm->pjk", loss.A, pts)  # (P, J, K)
    rhs = -loss.beta0[None, :] - pts @ loss.alpha.T  # (P, J)
    rid = np.arange(nrow).reshape(P, J)
    rows = [np.repeat(rid[..., None], K, -1), rid, np.repeat(rid[..., None], R, -1)]
    cols = [np.broadcast_to(x, (P, J, K)), np.repeat(s[:, None], J, 1), gam]
    vals = [xcoef, -np.ones((P, J)), np.broadcast_to(slack[:, None, :], (P, J, R))]
    b.add_rows(np.concatenate([r.ravel() for r in rows]), np.concatenate([c.ravel() for c in cols]),
               np.concatenate([v.ravel() for v in vals]), LE, rhs.ravel())

    # dual-norm rows on v_pjm = (C' gamma_pj)_m - (A_j x)_m - alpha_jm
    for sign in (1.0, -1.0):
        rid = np.arange(P * J * M).reshape(P, J, M)
        rows = [np.repeat(rid[..., None], R, -1), np.repeat(rid[..., None], K, -1)]
        cols = [np.repeat(gam[:, :, None, :], M, 2), np.broadcast_to(x, (P, J, M, K))]
        vals = [np.broadcast_to(sign * C.T, (P, J, M, R)), np.broadcast_to(-sign * loss.A, (P, J, M, K))]
        rhs = np.broadcast_to(sign * loss.alpha, (P, J, M))
        if norm == "L1":  # dual Linf: |v_pjm| <= lam
            rows.append(rid)
            cols.append(np.full((P, J, M), lam))
            vals.append(-np.ones((P, J, M)))
        else:  # dual L1: |v_pjm| <= u_pjm, sum_m u_pjm <= lam
            if sign > 0:
                u = b.add_variables(f"u{tag}_", (P, J, M))
            rows.append(rid)
            cols.append(u)
            vals.append(-np.ones((P, J, M)))
        b.add_rows(np.concatenate([r.ravel() for r in rows]), np.concatenate([c.ravel() for c in cols]),
                   np.concatenate([v.ravel() for v in vals]), LE, rhs.ravel())
    if norm == "LINF":
        rid = np.arange(P * J).reshape(P, J)
        b.add_rows(np.concatenate([np.repeat(rid[..., None], M, -1).ravel(), rid.ravel()]),
                   np.concatenate([u.ravel(), np.full(P * J, lam)]),
                   np.concatenate([np.ones(P * J * M), -np.ones(P * J)]), LE, np.zeros(P * J))


def _weights_column(scn: WeightedScenarioSet, n):
    w = scn.weights
    return w if w.ndim == 1 else (w[:, 0] if w.shape[1] == 1 else w[:, n])


def build_piecewise_lp(instance: DroInstance, fixed_x=None) -> LpProblem:
    """Worst-case expectation LP for a max-of-affine loss.

    Zero-weight points are left out: their epigraph variables carry no
    cost and are unbounded above, so their rows can never bind.
    """
    loss = instance.loss
    if instance.separable:
        loss = loss.to_joint()
    b = LpBuilder()
    x = _add_decisions(b, instance.decisions, fixed_x)
    lam = b.add_variables("lam", 1, lower=0.0, cost=instance.epsilon)[0]
    w = _weights_column(instance.scenarios, 0)
    keep = w > 0
    _add_block(b, x, lam, loss, instance.scenarios.points[keep], w[keep],
               instance.support.C, instance.support.g, instance.norm, "")
    return b.build()


def build_separable_lp(instance: DroInstance, fixed_x=None) -> LpProblem:
    """Block-wise LP for an additively separable loss with a shared ``lam``.

    Block ``n`` uses weight column ``n`` of the scenario set (per-block
    trust) or the single column when only one is given.
    """
    loss = instance.loss
    if not instance.separable:
        loss = SeparableAffineLoss(((tuple(range(loss.M)), loss),))
    block_dims = [d for d, _ in loss.blocks]
    if not instance.support.is_separable(block_dims):
        raise DimensionMismatch("support rows couple coordinates of different blocks")
    b = LpBuilder()
    x = _add_decisions(b, instance.decisions, fixed_x)
    lam = b.add_variables("lam", 1, lower=0.0, cost=instance.epsilon)[0]
    pts = instance.scenarios.points
    for n, (dims, bl) in enumerate(loss.blocks):
        w = _weights_column(instance.scenarios, n)
        keep = w > 0
        sup = instance.support.restrict(dims)
        _add_block(b, x, lam, bl, pts[keep][:, list(dims)], w[keep], sup.C, sup.g, instance.norm, f"{n}_")
    return b.build()


def build_lp(instance: DroInstance, fixed_x=None) -> LpProblem:
    if instance.separable:
        return build_separable_lp(instance, fixed_x)
    return build_piecewise_lp(instance, fixed_x)


def _finish(instance, problem, sol) -> DroSolution:
    if sol.status is not LpStatus.OPTIMAL:
        raise SolveFailed(sol.status, f"worst-case LP is {sol.status.value}")
    K = instance.loss.K
    x = np.array(sol.values[:K])
    x.flags.writeable = False
    return DroSolution(sol.objective_value, x, float(sol.values[K]), sol)


def solve_instance(instance: DroInstance, solver=None) -> DroSolution:
    """Minimise the worst-case expected loss over the decision set."""
    problem = build_lp(instance)
    return _finish(instance, problem, get_solver(solver).solve(problem))


def eval_worst_case_fixed_x(instance: DroInstance, x, solver=None) -> float:
    """Worst-case expected loss of a given decision."""
    x = np.asarray(x, dtype=float).ravel()
    if not instance.decisions.contains(x):
        raise InfeasibleDecision("decision violates the decision set")
    problem = build_lp(instance, fixed_x=x)
    return _finish(instance, problem, get_solver(solver).solve(problem)).value


def saa_value(loss, scenarios: WeightedScenarioSet, x) -> float:
    """Expected loss of ``x`` under the scenario distribution itself."""
    w = scenarios.weights
    if isinstance(loss, SeparableAffineLoss):
        vals = loss.block_values(x, scenarios.points)  # (P, N)
        if w.ndim == 2 and w.shape[1] == loss.N:
            return float(np.sum(w * vals))
        return float(np.ravel(w) @ vals.sum(axis=1))
    return float(np.ravel(w) @ loss.value(x, scenarios.points))


def build_saa_lp(instance: DroInstance) -> LpProblem:
    """``min_x`` of the scenario expectation, as a plain epigraph LP."""
    loss = instance.loss
    blocks = loss.blocks if instance.separable else ((tuple(range(loss.M)), loss),)
    b = LpBuilder()
    x = _add_decisions(b, instance.decisions)
    pts = instance.scenarios.points
    for n, (dims, bl) in enumerate(blocks):
        w = _weights_column(instance.scenarios, n)
        keep = w > 0
        p = pts[keep][:, list(dims)]
        P = p.shape[0]
        s = b.add_variables(f"s{n}_", P, lower=-np.inf, upper=np.inf, cost=w[keep])
        J, K = bl.J, bl.K
        rid = np.arange(P * J).reshape(P, J)
        xcoef = bl.beta[None] + np.einsum("jmk,pm->pjk", bl.A, p)
        b.add_rows(
            np.concatenate([np.repeat(rid[..., None], K, -1).ravel(), rid.ravel()]),
            np.concatenate([np.broadcast_to(x, (P, J, K)).ravel(), np.repeat(s[:, None], J, 1).ravel()]),
            np.concatenate([xcoef.ravel(), -np.ones(P * J)]),
            LE, (-bl.beta0[None] - p @ bl.alpha.T).ravel(),
        )
    return b.build()


def solve_saa(instance: DroInstance, solver=None) -> DroSolution:
    problem = build_saa_lp(instance)
    sol = get_solver(solver).solve(problem)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolveFailed(sol.status)
    K = instance.loss.K
    return DroSolution(sol.objective_value, np.array(sol.values[:K]), math.nan, sol)


def grid_transport_value(loss: PiecewiseAffineLoss, scenarios: WeightedScenarioSet, x,
                         lo, hi, epsilon, step=0.01, solver="highs") -> float:
    """Worst-case expectation of a 1-D loss by explicit transport on a grid.

    Mass ``w_p`` at each point is moved onto grid nodes in ``[lo, hi]``
    with total L1 transport cost at most ``epsilon``; the plan that
    maximises the expected loss is found by LP.  Independent of the dual
    reformulation and used to cross-check it.
    """
    if loss.M != 1:
        raise DimensionMismatch("grid transport is one-dimensional")
    npts = int(round((hi - lo) / step))
    grid = np.unique(np.concatenate([lo + step * np.arange(npts + 1), [hi], scenarios.points[:, 0]]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    w = _weights_column(scenarios, 0)
    keep = w > 0
    pts, w = scenarios.points[keep, 0], w[keep]
    P, Gn = pts.size, grid.size
    vals = loss.value(x, grid[:, None])  # (G,)
    cost = np.abs(grid[None, :] - pts[:, None])  # (P, G)
    ridx = np.repeat(np.arange(P), Gn)
    cidx = np.arange(P * Gn)
    A = sp.csr_array(
        (np.r_[np.ones(P * Gn), cost.ravel()], (np.r_[ridx, np.full(P * Gn, P)], np.r_[cidx, cidx])),
        shape=(P + 1, P * Gn),
    )
    problem = LpProblem(-np.tile(vals, P), A, (EQ,) * P + (LE,), np.r_[w, epsilon],
                        np.zeros(P * Gn), np.full(P * Gn, np.inf))
    sol = get_solver(solver).solve(problem)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolveFailed(sol.status)
    return -sol.objective_value


# ---------------------------------------------------------------------------
# serialization


def _loss_to_dict(loss: PiecewiseAffineLoss) -> dict:
    return {"A": loss.A.tolist(), "alpha": loss.alpha.tolist(),
            "beta": loss.beta.tolist(), "beta0": loss.beta0.tolist()}


def _loss_from_dict(d) -> PiecewiseAffineLoss:
    A = np.array(d["A"], dtype=float)
    alpha = np.array(d["alpha"], dtype=float)
    J, M = alpha.shape
    beta = np.array(d["beta"], dtype=float)
    if A.size == 0:
        A = A.reshape(J, M, beta.shape[1] if beta.ndim == 2 else 0)
    if beta.size == 0:
        beta = beta.reshape(J, A.shape[2])
    return PiecewiseAffineLoss(A, alpha, beta, np.array(d["beta0"], dtype=float))


def instance_to_dict(inst: DroInstance) -> dict:
    """Plain-data form of an instance; floats survive a JSON round trip."""
    if inst.separable:
        loss = {"kind": "separable",
                "blocks": [{"dims": list(d), **_loss_to_dict(l)} for d, l in inst.loss.blocks]}
    else:
        loss = {"kind": "piecewise", **_loss_to_dict(inst.loss)}
    dec = inst.decisions
    return {
        "dims": {"M": inst.loss.M, "K": inst.loss.K},
        "loss": loss,
        "scenarios": {"points": inst.scenarios.points.tolist(),
                      "weights": inst.scenarios.weights.tolist(),
                      "sources": inst.scenarios.sources.tolist()},
        "support": {"C": inst.support.C.tolist(), "g": inst.support.g.tolist()},
        "epsilon": inst.epsilon,
        "norm": inst.norm,
        "decisions": {"lower": dec.lower.tolist(), "upper": dec.upper.tolist(),
                      "G": dec.G.tolist(), "senses": list(dec.senses), "h": dec.h.tolist()},
    }


def instance_from_dict(d: dict) -> DroInstance:
    M, K = int(d["dims"]["M"]), int(d["dims"]["K"])
    ld = d["loss"]
    if ld["kind"] == "separable":
        loss = SeparableAffineLoss(tuple((tuple(b["dims"]), _loss_from_dict(b)) for b in ld["blocks"]))
    elif ld["kind"] == "piecewise":
        loss = _loss_from_dict(ld)
    else:
        raise ValueError(f"unknown loss kind {ld['kind']!r}")
    sc = d["scenarios"]
    pts = np.array(sc["points"], dtype=float).reshape(-1, M)
    w = np.array(sc["weights"], dtype=float)
    src = np.array(sc.get("sources", np.zeros(pts.shape[0])), dtype=np.int64)
    su = d.get("support", {"C": [], "g": []})
    C = np.array(su["C"], dtype=float).reshape(-1, M)
    dec = d.get("decisions")
    if dec is None:
        decisions = DecisionSet.free(K)
    else:
        G = np.array(dec.get("G", []), dtype=float).reshape(-1, K)
        decisions = DecisionSet(np.array(dec["lower"], dtype=float), np.array(dec["upper"], dtype=float),
                                G, tuple(dec.get("senses", ())), np.array(dec.get("h", []), dtype=float))
    if loss.K != K or loss.M != M:
        raise DimensionMismatch("declared dims disagree with the loss")
    return DroInstance(loss, WeightedScenarioSet(pts, w, src), SupportPolytope(C, np.array(su["g"], dtype=float)),
                       float(d["epsilon"]), d.get("norm", "L1"), decisions)


def dump_instance(inst: DroInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)


def load_instance(path) -> DroInstance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


__all__: Sequence[str] = [
    "PiecewiseAffineLoss", "SeparableAffineLoss", "DecisionSet", "DroInstance", "DroSolution",
    "build_piecewise_lp", "build_separable_lp", "build_lp", "solve_instance",
    "eval_worst_case_fixed_x", "saa_value", "build_saa_lp", "solve_saa", "grid_transport_value",
    "instance_to_dict", "instance_from_dict", "dump_instance", "load_instance",
]
