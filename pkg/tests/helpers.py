"""Shared generators for randomized tests."""

import numpy as np

from mrdro.fusion import SupportPolytope, WeightedScenarioSet
from mrdro.lp import LpProblem
from mrdro.reform import DecisionSet, DroInstance, PiecewiseAffineLoss, SeparableAffineLoss


def random_bounded_lp(rng, n, m, box=5.0):
    """Feasible LP with ``n`` boxed variables and ``m`` mixed-sense rows."""
    A = rng.normal(size=(m, n)).round(3)
    x0 = rng.uniform(-box / 2, box / 2, n)
    senses = rng.choice(["<=", ">="], m)
    slack = rng.uniform(0.1, 2.0, m)
    rhs = np.where(senses == "<=", A @ x0 + slack, A @ x0 - slack)
    c = rng.normal(size=n).round(3)
    return LpProblem(c, A, tuple(senses), rhs, np.full(n, -box), np.full(n, box))


def random_loss(rng, J, M, K, scale=3.0):
    return PiecewiseAffineLoss(
        rng.normal(size=(J, M, K)).round(3),
        (scale * rng.normal(size=(J, M))).round(3),
        rng.normal(size=(J, K)).round(3),
        rng.normal(size=J).round(3),
    )


def random_scenarios(rng, H, I, M, lo=-5.0, hi=5.0):
    pts = rng.uniform(lo, hi, (H * I, M))
    t = rng.dirichlet(np.ones(H))
    w = np.repeat(t / I, I)
    return WeightedScenarioSet(pts, w / w.sum(), np.repeat(np.arange(H), I))


def random_instance(rng, M=None, J=None, K=None, H=None, I=None, epsilon=0.1, support="box", norm="L1"):
    """Small random piecewise instance with a boxed decision."""
    M = M or int(rng.integers(1, 4))
    J = J or int(rng.integers(1, 4))
    K = K or int(rng.integers(1, 4))
    H = H or int(rng.integers(1, 4))
    I = I or int(rng.integers(1, max(2, 20 // H) + 1))
    loss = random_loss(rng, J, M, K)
    scn = random_scenarios(rng, H, I, M)
    sup = SupportPolytope.box(-10.0, 10.0, M) if support == "box" else SupportPolytope.free(M)
    return DroInstance(loss, scn, sup, epsilon, norm, DecisionSet.box(-5.0, 5.0, K))


def random_separable_instance(rng, N=2, J=2, K=2, epsilon=0.1):
    dims, start, blocks = [], 0, []
    for _ in range(N):
        Mn = int(rng.integers(1, 3))
        d = tuple(range(start, start + Mn))
        start += Mn
        blocks.append((d, random_loss(rng, J, Mn, K)))
        dims.append(d)
    M = start
    H, I = int(rng.integers(1, 4)), int(rng.integers(1, 6))
    scn = random_scenarios(rng, H, I, M)
    return DroInstance(SeparableAffineLoss(tuple(blocks)), scn, SupportPolytope.box(-10.0, 10.0, M),
                       epsilon, "L1", DecisionSet.box(-5.0, 5.0, K))


def newsvendor_loss(cu=5000.0, co=1000.0):
    """``max(cu (d - x), co (x - d))`` for a single scalar order ``x``."""
    return PiecewiseAffineLoss(np.zeros((2, 1, 1)), [[cu], [-co]], [[-cu], [co]], [0.0, 0.0])


def two_source_scenarios():
    """Revised demands {5, 5, 11, 8} with trust (0.6, 0.4) over two events."""
    return WeightedScenarioSet(np.array([[5.0], [5.0], [11.0], [8.0]]), np.array([0.3, 0.3, 0.2, 0.2]),
                               np.array([0, 0, 1, 1]))
