"""Linear programs: representation, a dense two-phase simplex solver, and
a brute-force vertex enumerator used as a test oracle.

Problems are stored as ``minimize c @ v`` subject to ``A v (<=|==|>=) rhs``
and per-variable bounds.  The constraint matrix is kept sparse because the
reformulations built on top of this module produce tall, very sparse
systems; the built-in simplex densifies it.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import MalformedProblem, NumericalBreakdown, TooLarge

LE, EQ, GE = "<=", "==", ">="
_SENSES = (LE, EQ, GE)
_SENSE_ALIASES = {"<=": LE, "<": LE, "L": LE, "==": EQ, "=": EQ, "E": EQ, ">=": GE, ">": GE, "G": GE}

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-7
OPT_TOL = 1e-9
TINY_PIVOT = 1e-12


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``minimize objective @ v`` s.t. ``A v senses rhs``, ``lower <= v <= upper``."""

    objective: np.ndarray
    A: sp.csr_array
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    names: tuple | None = None

    def __post_init__(self):
        c = _frozen(self.objective).ravel()
        n = c.size
        A = self.A
        if sp.issparse(A):
            A = sp.csr_array(A, dtype=float)
        else:
            A = np.asarray(A, dtype=float)
            if A.size == 0:
                A = A.reshape(0, n)
            if A.ndim != 2:
                raise MalformedProblem("constraint matrix must be 2-D")
            A = sp.csr_array(A)
        if A.shape[1] != n:
            raise MalformedProblem(
                f"constraint rows have length {A.shape[1]}, expected num_vars={n}"
            )
        m = A.shape[0]
        senses = tuple(_SENSE_ALIASES.get(s, s) for s in self.senses)
        if len(senses) != m or any(s not in _SENSES for s in senses):
            raise MalformedProblem("need one relation in {<=, ==, >=} per constraint row")
        rhs = _frozen(self.rhs).ravel()
        if rhs.size != m:
            raise MalformedProblem(f"rhs has {rhs.size} entries for {m} rows")
        lower = _frozen(np.broadcast_to(self.lower, (n,)))
        upper = _frozen(np.broadcast_to(self.upper, (n,)))
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise MalformedProblem("every variable needs lower <= upper")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise MalformedProblem("bounds must admit a finite value")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(rhs)) and np.all(np.isfinite(A.data))):
            raise MalformedProblem("objective, matrix and rhs must be finite")
        if self.names is not None and len(self.names) != n:
            raise MalformedProblem("names must match num_vars")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_rows(cls, objective, constraints=(), bounds=None) -> "LpProblem":
        """Build from a list of ``(row, relation, rhs)`` triples.

        ``bounds`` is a list of ``(lower, upper)`` pairs, ``None`` meaning
        unbounded on that side; the default is ``v >= 0``.
        """
        c = np.asarray(objective, dtype=float).ravel()
        n = c.size
        rows, senses, rhs = [], [], []
        for row, rel, b in constraints:
            row = np.asarray(row, dtype=float).ravel()
            if row.size != n:
                raise MalformedProblem(f"constraint row has length {row.size}, expected {n}")
            rows.append(row)
            senses.append(rel)
            rhs.append(b)
        A = np.vstack(rows) if rows else np.zeros((0, n))
        if bounds is None:
            lower, upper = np.zeros(n), np.full(n, np.inf)
        else:
            if len(bounds) != n:
                raise MalformedProblem("one (lower, upper) pair per variable")
            lower = np.array([-np.inf if lo is None else lo for lo, _ in bounds], dtype=float)
            upper = np.array([np.inf if hi is None else hi for _, hi in bounds], dtype=float)
        return cls(c, A, tuple(senses), np.asarray(rhs, dtype=float), lower, upper)

    def dense(self) -> np.ndarray:
        return self.A.toarray()

    def residuals(self, v) -> np.ndarray:
        """Constraint violation per row (0 when satisfied)."""
        v = np.asarray(v, dtype=float)
        Av = self.A @ v
        out = np.zeros(self.num_rows)
        s = np.asarray(self.senses)
        le, eq, ge = s == LE, s == EQ, s == GE
        out[le] = np.maximum(Av[le] - self.rhs[le], 0.0)
        out[ge] = np.maximum(self.rhs[ge] - Av[ge], 0.0)
        out[eq] = np.abs(Av[eq] - self.rhs[eq])
        return out

    def is_feasible(self, v, tol=FEAS_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        if np.any(v < self.lower - tol) or np.any(v > self.upper + tol):
            return False
        return bool(np.all(self.residuals(v) <= tol))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    values: np.ndarray
    objective_value: float
    iterations: int = 0
    solver: str = "simplex"

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class LpSolver(Protocol):
    name: str

    def solve(self, problem: LpProblem) -> LpSolution: ...


class LpBuilder:
    """Incremental sparse assembly of an :class:`LpProblem`.

    Variables are added in named blocks; rows are added in vectorised
    batches of COO triplets so that building LPs with tens of thousands of
    rows stays cheap.
    """

    def __init__(self):
        self._lower: list[np.ndarray] = []
        self._upper: list[np.ndarray] = []
        self._cost: list[np.ndarray] = []
        self._names: list[str] = []
        self.blocks: dict[str, slice] = {}
        self.n = 0
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._senses: list[str] = []
        self._rhs: list[np.ndarray] = []
        self.m = 0

    def add_variables(self, name, shape, lower=0.0, upper=np.inf, cost=0.0) -> np.ndarray:
        count = int(np.prod(shape)) if np.ndim(shape) else int(shape)
        idx = np.arange(self.n, self.n + count)
        self._lower.append(np.broadcast_to(np.asarray(lower, float), (count,)).copy())
        self._upper.append(np.broadcast_to(np.asarray(upper, float), (count,)).copy())
        self._cost.append(np.broadcast_to(np.asarray(cost, float), (count,)).copy())
        self.blocks[name] = slice(self.n, self.n + count)
        self._names.extend(f"{name}{k}" for k in range(count))
        self.n += count
        return idx.reshape(shape) if np.ndim(shape) else idx

    def set_cost(self, idx, cost):
        flat = np.concatenate(self._cost)
        flat[np.asarray(idx).ravel()] = np.broadcast_to(cost, np.asarray(idx).shape).ravel()
        self._cost = [flat]

    def add_rows(self, row_local, cols, vals, sense, rhs):
        """Add ``len(rhs)`` rows; ``row_local`` indexes into this batch."""
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float)).ravel()
        k = rhs.size
        if k == 0:
            return
        row_local = np.asarray(row_local, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        keep = vals != 0.0
        self._rows.append(row_local[keep] + self.m)
        self._cols.append(cols[keep])
        self._vals.append(vals[keep])
        self._senses.extend([_SENSE_ALIASES[sense]] * k)
        self._rhs.append(rhs)
        self.m += k

    def build(self) -> LpProblem:
        if self._rows:
            rows = np.concatenate(self._rows)
            cols = np.concatenate(self._cols)
            vals = np.concatenate(self._vals)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
        A = sp.coo_array((vals, (rows, cols)), shape=(self.m, self.n)).tocsr()
        A.sum_duplicates()
        rhs = np.concatenate(self._rhs) if self._rhs else np.zeros(0)
        return LpProblem(
            np.concatenate(self._cost) if self._cost else np.zeros(0),
            A,
            tuple(self._senses),
            rhs,
            np.concatenate(self._lower) if self._lower else np.zeros(0),
            np.concatenate(self._upper) if self._upper else np.zeros(0),
            names=tuple(self._names),
        )


# ---------------------------------------------------------------------------
# built-in simplex


@dataclass
class _StandardForm:
    """``min cs @ y`` s.t. ``As y (senses) bs``, ``y >= 0`` plus the map back."""

    A: np.ndarray
    b: np.ndarray
    senses: list
    c: np.ndarray
    const: float
    # original variable j = offset[j] + sum(sign * y[col]) over its columns
    offset: np.ndarray
    columns: list = field(default_factory=list)


def _to_standard(p: LpProblem) -> _StandardForm:
    A = p.dense()
    m, n = A.shape
    b = p.rhs.copy()
    senses = list(p.senses)
    cols, costs, const = [], [], 0.0
    offset = np.zeros(n)
    mapping = []
    extra_rows, extra_rhs = [], []
    for j in range(n):
        lo, hi, cj = p.lower[j], p.upper[j], p.objective[j]
        a = A[:, j]
        if np.isfinite(lo):
            offset[j] = lo
            b -= a * lo
            const += cj * lo
            mapping.append([(len(cols), 1.0)])
            if np.isfinite(hi):
                extra_rows.append(len(cols))
                extra_rhs.append(hi - lo)
            cols.append(a)
            costs.append(cj)
        elif np.isfinite(hi):
            offset[j] = hi
            b -= a * hi
            const += cj * hi
            mapping.append([(len(cols), -1.0)])
            cols.append(-a)
            costs.append(-cj)
        else:
            mapping.append([(len(cols), 1.0), (len(cols) + 1, -1.0)])
            cols.extend([a, -a])
            costs.extend([cj, -cj])
    ny = len(cols)
    As = np.column_stack(cols) if cols else np.zeros((m, 0))
    if extra_rows:
        U = np.zeros((len(extra_rows), ny))
        U[np.arange(len(extra_rows)), extra_rows] = 1.0
        As = np.vstack([As, U])
        b = np.concatenate([b, extra_rhs])
        senses += [LE] * len(extra_rows)
    return _StandardForm(As, b, senses, np.asarray(costs, float), const, offset, mapping)


class SimplexSolver:
    """Dense two-phase primal simplex on a full tableau.

    Dantzig pricing; after ``5 * (rows + cols)`` iterations the entering and
    leaving choices switch to Bland's rule, which cannot cycle.
    """

    name = "simplex"

    def __init__(self, pivot_tol=PIVOT_TOL, feas_tol=FEAS_TOL, opt_tol=OPT_TOL, max_iter=None):
        self.pivot_tol = pivot_tol
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.max_iter = max_iter

    def solve(self, problem: LpProblem) -> LpSolution:
        sf = _to_standard(problem)
        m, ny = sf.A.shape
        A, b = sf.A.copy(), sf.b.copy()
        senses = list(sf.senses)
        neg = b < 0
        A[neg] *= -1.0
        b[neg] *= -1.0
        for i in np.flatnonzero(neg):
            senses[i] = {LE: GE, GE: LE, EQ: EQ}[senses[i]]

        # slack / surplus / artificial columns
        n_slack = sum(s != EQ for s in senses)
        art_rows = [i for i, s in enumerate(senses) if s != LE]
        N = ny + n_slack + len(art_rows)
        T = np.zeros((m + 1, N + 1))
        T[:m, :ny] = A
        T[:m, -1] = b
        basis = np.empty(m, dtype=np.int64)
        k = ny
        for i, s in enumerate(senses):
            if s == LE:
                T[i, k] = 1.0
                basis[i] = k
                k += 1
            elif s == GE:
                T[i, k] = -1.0
                k += 1
        first_art = k
        for i in art_rows:
            T[i, k] = 1.0
            basis[i] = k
            k += 1
        full = np.hstack([A, T[:m, ny:first_art]])  # standard-form matrix without artificials

        budget = self.max_iter or 50 * (m + N) + 1000
        iters = 0

        # phase 1
        if art_rows:
            T[m, first_art:N] = 1.0
            T[m] -= T[art_rows].sum(axis=0)
            status, it = self._iterate(T, basis, N, budget)
            iters += it
            if T[m, -1] < -self.feas_tol * max(1.0, np.abs(b).max(initial=0.0)):
                return self._fail(LpStatus.INFEASIBLE, problem, iters)
            T, basis, kept = self._drive_out_artificials(T, basis, first_art)
            T = np.delete(T, np.s_[first_art:N], axis=1)
            N = first_art
            m = T.shape[0] - 1
            full = full[kept]
            b = b[kept]
        # phase 2 objective row
        cost = np.zeros(N)
        cost[:ny] = sf.c
        T[m, :N] = cost
        T[m, -1] = 0.0
        cb = cost[basis]
        T[m] -= cb @ T[:m]
        status, it = self._iterate(T, basis, N, budget - iters)
        iters += it
        if status is LpStatus.UNBOUNDED:
            return self._fail(LpStatus.UNBOUNDED, problem, iters)

        y_all = np.zeros(N)
        y_all[basis] = T[:m, -1]
        # re-solve the basic system against the original data to shed drift
        if m:
            try:
                B = full[:, basis]
                xb = np.linalg.solve(B, b)
                if np.all(np.isfinite(xb)) and np.abs(xb - T[:m, -1]).max() < 1e-6 * max(1.0, np.abs(xb).max()):
                    y_all[basis] = xb
            except np.linalg.LinAlgError:
                pass
        y = np.maximum(y_all[:ny], 0.0)
        x = sf.offset.copy()
        for j, parts in enumerate(sf.columns):
            for col, sign in parts:
                x[j] += sign * y[col]
        x = np.clip(x, problem.lower, problem.upper)
        return LpSolution(LpStatus.OPTIMAL, _frozen(x), float(problem.objective @ x), iters, self.name)

    def _fail(self, status, problem, iters):
        return LpSolution(status, _frozen(np.full(problem.num_vars, np.nan)), math.nan, iters, self.name)

    def _iterate(self, T, basis, N, budget):
        m = T.shape[0] - 1
        bland_after = 5 * (m + N)
        it = 0
        bland = False
        while True:
            if it >= bland_after:
                bland = True
            d = T[m, :N]
            if bland:
                cand = np.flatnonzero(d < -self.opt_tol)
                if cand.size == 0:
                    return LpStatus.OPTIMAL, it
                j = int(cand[0])
            else:
                j = int(np.argmin(d))
                if d[j] >= -self.opt_tol:
                    return LpStatus.OPTIMAL, it
            col = T[:m, j]
            rows = np.flatnonzero(col > self.pivot_tol)
            if rows.size == 0:
                if np.any(col > TINY_PIVOT):
                    if bland:
                        raise NumericalBreakdown(
                            f"only pivots below {self.pivot_tol:g} in column {j} under Bland's rule"
                        )
                    bland = True
                    continue
                return LpStatus.UNBOUNDED, it
            ratios = T[rows, -1] / col[rows]
            rmin = ratios.min()
            ties = rows[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
            r = int(ties[np.argmin(basis[ties])])
            self._pivot(T, r, j)
            basis[r] = j
            it += 1
            if it > budget:
                raise NumericalBreakdown(f"simplex exceeded {budget} iterations")

    @staticmethod
    def _pivot(T, r, j):
        T[r] /= T[r, j]
        colj = T[:, j].copy()
        colj[r] = 0.0
        T -= np.outer(colj, T[r])

    def _drive_out_artificials(self, T, basis, first_art):
        m = T.shape[0] - 1
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] < first_art:
                continue
            row = T[r, :first_art]
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size:
                j = int(cand[np.argmax(np.abs(row[cand]))])
                self._pivot(T, r, j)
                basis[r] = j
            else:
                keep[r] = False  # redundant row
        T = np.vstack([T[:m][keep], T[m:]])
        return T, basis[keep], np.flatnonzero(keep)


class HighsSolver:
    """Adapter to SciPy's HiGHS interface; used for large instances."""

    name = "highs"

    def __init__(self, **options):
        self.options = {"presolve": True, **options}

    def solve(self, problem: LpProblem) -> LpSolution:
        from scipy.optimize import linprog

        s = np.asarray(problem.senses)
        A = problem.A
        le, ge, eq = s == LE, s == GE, s == EQ
        A_ub = sp.vstack([A[le], -A[ge]]).tocsr() if (le.any() or ge.any()) else None
        b_ub = np.concatenate([problem.rhs[le], -problem.rhs[ge]]) if A_ub is not None else None
        A_eq = A[eq] if eq.any() else None
        b_eq = problem.rhs[eq] if eq.any() else None
        bounds = np.column_stack([problem.lower, problem.upper])
        bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi) for lo, hi in bounds]
        res = linprog(
            problem.objective, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
            bounds=bounds, method="highs", options=self.options,
        )
        nit = int(getattr(res, "nit", 0) or 0)
        if res.status == 0:
            x = np.clip(res.x, problem.lower, problem.upper)
            return LpSolution(LpStatus.OPTIMAL, _frozen(x), float(problem.objective @ x), nit, self.name)
        if res.status == 2:
            status = LpStatus.INFEASIBLE
        elif res.status == 3:
            status = LpStatus.UNBOUNDED
        else:
            raise NumericalBreakdown(f"HiGHS failed: {res.message}")
        return LpSolution(status, _frozen(np.full(problem.num_vars, np.nan)), math.nan, nit, self.name)


_SOLVERS = {"simplex": SimplexSolver, "highs": HighsSolver}


def get_solver(solver=None) -> LpSolver:
    if solver is None:
        return SimplexSolver()
    if isinstance(solver, str):
        try:
            return _SOLVERS[solver]()
        except KeyError:
            raise ValueError(f"unknown solver {solver!r}; choose from {sorted(_SOLVERS)}") from None
    return solver


def solve_lp(problem: LpProblem, solver=None) -> LpSolution:
    """Solve ``problem``; the built-in simplex is used unless told otherwise."""
    return get_solver(solver).solve(problem)


# ---------------------------------------------------------------------------
# vertex enumeration oracle


def _hyperplanes(p: LpProblem):
    A = p.dense()
    rows, rhs = [A], [p.rhs]
    n = p.num_vars
    eye = np.eye(n)
    fl = np.isfinite(p.lower)
    fu = np.isfinite(p.upper)
    rows += [eye[fl], eye[fu]]
    rhs += [p.lower[fl], p.upper[fu]]
    return np.vstack(rows), np.concatenate(rhs)


def enumerate_vertices(problem: LpProblem, tol=1e-7, max_vars=10, max_planes=24) -> list:
    """All basic feasible points: intersections of ``num_vars`` active
    constraints or bounds that satisfy every constraint."""
    n = problem.num_vars
    H, h = _hyperplanes(problem)
    if n > max_vars or H.shape[0] > max_planes:
        raise TooLarge(f"{n} variables / {H.shape[0]} planes exceeds budget {max_vars}/{max_planes}")
    if n == 0:
        return []
    A = problem.dense()
    senses = np.asarray(problem.senses)
    le, eq, ge = senses == LE, senses == EQ, senses == GE
    found = []
    combos = itertools.combinations(range(H.shape[0]), n)
    while True:
        cb = np.array(list(itertools.islice(combos, 20000)), dtype=np.int64)
        if cb.size == 0:
            break
        M = H[cb]
        rhs = h[cb]
        det = np.linalg.det(M)
        scale = np.prod(np.linalg.norm(M, axis=2), axis=1)
        ok = np.abs(det) > 1e-10 * np.maximum(scale, 1e-300)
        if not ok.any():
            continue
        pts = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        Av = pts @ A.T
        feas = np.all(pts >= problem.lower - tol, axis=1) & np.all(pts <= problem.upper + tol, axis=1)
        feas &= np.all(Av[:, le] <= problem.rhs[le] + tol, axis=1)
        feas &= np.all(Av[:, ge] >= problem.rhs[ge] - tol, axis=1)
        feas &= np.all(np.abs(Av[:, eq] - problem.rhs[eq]) <= tol, axis=1)
        found.extend(pts[feas])
    if not found:
        return []
    pts = np.array(found)
    # degenerate vertices are hit by many plane subsets; merge near-duplicates
    order = np.lexsort(np.round(pts, 7).T[::-1])
    pts = pts[order]
    keep = [0]
    for k in range(1, len(pts)):
        if not np.allclose(pts[k], pts[keep[-1]], atol=1e-7, rtol=1e-9):
            keep.append(k)
    return [pts[k] for k in keep]


# ---------------------------------------------------------------------------
# MPS export


def _fmt(v: float) -> str:
    for digits in range(12, 0, -1):
        s = f"{v:.{digits}g}"
        if len(s) <= 12:
            return s
    return f"{v:.1e}"


def to_mps(problem: LpProblem, name: str = "MRDRO") -> str:
    """Fixed-column MPS text of ``problem`` (debugging/cross-checking aid)."""
    n, m = problem.num_vars, problem.num_rows
    cname = [f"C{j:07d}" for j in range(n)]
    rname = [f"R{i:07d}" for i in range(m)]
    code = {LE: "L", EQ: "E", GE: "G"}
    out = [f"NAME          {name[:8]}", "ROWS", " N  COST"]
    out += [f" {code[s]}  {r}" for s, r in zip(problem.senses, rname)]
    out.append("COLUMNS")
    Acsc = problem.A.tocsc()
    for j in range(n):
        entries = []
        if problem.objective[j] != 0:
            entries.append(("COST", problem.objective[j]))
        lo, hi = Acsc.indptr[j], Acsc.indptr[j + 1]
        entries += [(rname[i], v) for i, v in zip(Acsc.indices[lo:hi], Acsc.data[lo:hi])]
        for row, v in entries:
            out.append(f"    {cname[j]:<8}  {row:<8}  {_fmt(v):>12}")
    out.append("RHS")
    for i in np.flatnonzero(problem.rhs):
        out.append(f"    {'RHS':<8}  {rname[i]:<8}  {_fmt(problem.rhs[i]):>12}")
    out.append("BOUNDS")
    for j in range(n):
        lo, hi = problem.lower[j], problem.upper[j]
        if lo == hi:
            out.append(f" FX {'BND':<8}  {cname[j]:<8}  {_fmt(lo):>12}")
            continue
        if not np.isfinite(lo) and not np.isfinite(hi):
            out.append(f" FR {'BND':<8}  {cname[j]}")
            continue
        if not np.isfinite(lo):
            out.append(f" MI {'BND':<8}  {cname[j]}")
        elif lo != 0:
            out.append(f" LO {'BND':<8}  {cname[j]:<8}  {_fmt(lo):>12}")
        if np.isfinite(hi):
            out.append(f" UP {'BND':<8}  {cname[j]:<8}  {_fmt(hi):>12}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def parse_mps(text: str) -> LpProblem:
    """Read back the subset of MPS written by :func:`to_mps`."""
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    cols: dict[str, dict[str, float]] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    bounds: dict[str, list] = {}
    inv = {"L": LE, "E": EQ, "G": GE}
    for line in text.splitlines():
        if not line.strip():
            continue
        if not line.startswith(" "):
            section = line.split()[0]
            continue
        f = line.split()
        if section == "ROWS":
            if f[0] != "N":
                row_sense[f[1]] = inv[f[0]]
                row_order.append(f[1])
        elif section == "COLUMNS":
            if f[0] not in cols:
                cols[f[0]] = {}
                col_order.append(f[0])
            cols[f[0]][f[1]] = float(f[2])
        elif section == "RHS":
            rhs[f[1]] = float(f[2])
        elif section == "BOUNDS":
            lo, hi = bounds.setdefault(f[2], [0.0, np.inf])
            kind = f[0]
            if kind == "FX":
                bounds[f[2]] = [float(f[3]), float(f[3])]
            elif kind == "FR":
                bounds[f[2]] = [-np.inf, np.inf]
            elif kind == "MI":
                bounds[f[2]][0] = -np.inf
            elif kind == "LO":
                bounds[f[2]][0] = float(f[3])
            elif kind == "UP":
                bounds[f[2]][1] = float(f[3])
    for name in bounds:
        if name not in cols:
            cols[name] = {}
            col_order.append(name)
    col_order.sort()
    ridx = {r: i for i, r in enumerate(row_order)}
    A = np.zeros((len(row_order), len(col_order)))
    c = np.zeros(len(col_order))
    lower = np.zeros(len(col_order))
    upper = np.full(len(col_order), np.inf)
    for j, name in enumerate(col_order):
        for r, v in cols[name].items():
            if r == "COST":
                c[j] = v
            else:
                A[ridx[r], j] = v
        if name in bounds:
            lower[j], upper[j] = bounds[name]
    b = np.array([rhs.get(r, 0.0) for r in row_order])
    return LpProblem(c, A, tuple(row_sense[r] for r in row_order), b, lower, upper)


__all__: Sequence[str] = [
    "LE", "EQ", "GE", "LpStatus", "LpProblem", "LpSolution", "LpBuilder", "LpSolver",
    "SimplexSolver", "HighsSolver", "get_solver", "solve_lp", "enumerate_vertices",
    "to_mps", "parse_mps",
]
