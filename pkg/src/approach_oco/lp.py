"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Small, deterministic, dependency-free (numpy only). Intended for the tiny
programs that show up here: scalarized matrix games and support-function
evaluations over halfspace intersections, both well under 100x100.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .errors import Infeasible, IterationLimit, Unbounded

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9

_SENSES = ("<=", "=", ">=")


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``min c.x`` (or max) subject to ``A x (sense) b`` and ``lower <= x <= upper``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = False

    def __post_init__(self):
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,) or len(self.senses) != m:
            raise ValueError("inconsistent linear program dimensions")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if any(s not in _SENSES for s in self.senses):
            raise ValueError(f"senses must be among {_SENSES}")
        for name in ("c", "A", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite coefficients in {name}")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("NaN bound")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @classmethod
    def build(
        cls,
        c: Sequence[float],
        A=None,
        b=None,
        senses: Sequence[str] | None = None,
        bounds=None,
        maximize: bool = False,
    ) -> "LinearProgram":
        """Convenience constructor.

        ``bounds`` is either None (all variables >= 0), a single ``(lo, hi)``
        pair applied to every variable, or one pair per variable; ``None``
        inside a pair means unbounded on that side.
        """
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
        b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
        if senses is None:
            senses = ("<=",) * A.shape[0]
        if bounds is None:
            bounds = [(0.0, None)] * n
        elif len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
            bounds = [tuple(bounds)] * n
        lower = np.array([-np.inf if lo is None else lo for lo, _ in bounds], dtype=float)
        upper = np.array([np.inf if hi is None else hi for _, hi in bounds], dtype=float)
        return cls(c, A, b, tuple(senses), lower, upper, maximize)


@dataclass
class LPSolution:
    value: float
    x: np.ndarray
    # d(value)/d(b_i) for each original row; zero for rows found redundant
    duals: np.ndarray
    iterations: int = 0
    basis: list[int] = field(default_factory=list)


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _run_simplex(T: np.ndarray, basis: list[int], ncols: int, max_iter: int, used: int) -> int:
    """Minimize the objective row of ``T`` in place. Returns the iteration count.

    Bland's rule: lowest-index improving column enters; among tied ratios the
    row whose basic variable has the lowest index leaves.
    """
    m = T.shape[0] - 1
    it = used
    while True:
        e = int(np.argmax(T[-1, :ncols] < -PIVOT_TOL))
        if not T[-1, e] < -PIVOT_TOL:
            return it
        if it >= max_iter:
            raise IterationLimit(f"simplex exceeded {max_iter} pivots")
        col = T[:m, e]
        pos = col > PIVOT_TOL
        if not pos.any():
            raise Unbounded("objective is unbounded below")
        ratios = np.where(pos, T[:m, -1] / np.where(pos, col, 1.0), np.inf)
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + 1e-12 * max(1.0, abs(rmin)))
        leave = int(ties[0]) if ties.size == 1 else int(min(ties, key=lambda i: basis[i]))
        _pivot(T, leave, e)
        basis[leave] = e
        it += 1


def _reinvert(F: np.ndarray, rhs: np.ndarray, cost: np.ndarray, basis: list[int]) -> np.ndarray:
    """Fresh tableau B^-1 [F | rhs] with reduced costs, from the original data.

    Pivoting on tiny elements (which Bland's rule can force on degenerate ties)
    amplifies round-off; rebuilding from the final basis removes it.
    """
    B = F[:, basis]
    body = np.linalg.solve(B, np.column_stack([F, rhs]))
    T = np.empty((F.shape[0] + 1, F.shape[1] + 1))
    T[:-1] = body
    T[-1, :-1] = cost - cost[basis] @ body[:, :-1]
    T[-1, -1] = -cost[basis] @ body[:, -1]
    return T


REINVERSIONS = 3


def solve_lp(lp: LinearProgram, max_iter: int = 10_000) -> LPSolution:
    """Solve ``lp`` to optimality.

    Raises Infeasible, Unbounded or IterationLimit.
    """
    m0, n = lp.A.shape
    c = -lp.c if lp.maximize else lp.c

    # substitute each original variable by nonnegative standard columns
    std_cols: list[tuple[int, float]] = []
    offset = np.zeros(n)
    ub_rows: list[tuple[int, float]] = []
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            std_cols.append((j, 1.0))
            if np.isfinite(hi):
                ub_rows.append((len(std_cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            std_cols.append((j, -1.0))
        else:
            std_cols.append((j, 1.0))
            std_cols.append((j, -1.0))
    N = len(std_cols)
    src = np.array([j for j, _ in std_cols], dtype=int)
    sgn = np.array([s for _, s in std_cols])

    m = m0 + len(ub_rows)
    M = np.zeros((m, N))
    M[:m0] = lp.A[:, src] * sgn
    rhs = np.empty(m)
    rhs[:m0] = lp.b - lp.A @ offset
    senses = list(lp.senses)
    for k, (col, bound) in enumerate(ub_rows):
        M[m0 + k, col] = 1.0
        rhs[m0 + k] = bound
        senses.append("<=")
    c_std = c[src] * sgn
    const = float(c @ offset)

    flip = np.where(rhs < 0, -1.0, 1.0)
    M *= flip[:, None]
    rhs *= flip
    senses = [
        s if f > 0 else {"<=": ">=", ">=": "<=", "=": "="}[s] for s, f in zip(senses, flip)
    ]

    n_slack = sum(s != "=" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    ncols = N + n_slack + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :N] = M
    T[:m, -1] = rhs
    basis = [0] * m
    k_slack, k_art = N, N + n_slack
    art_rows = []
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, k_slack] = 1.0
            basis[i] = k_slack
            k_slack += 1
        else:
            if s == ">=":
                T[i, k_slack] = -1.0
                k_slack += 1
            T[i, k_art] = 1.0
            basis[i] = k_art
            art_rows.append(i)
            k_art += 1
    first_art = N + n_slack

    # phase 1: minimize the sum of artificials
    it = 0
    if art_rows:
        T[-1, first_art:ncols] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        it = _run_simplex(T, basis, ncols, max_iter, 0)
        if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(rhs).max(initial=0.0)):
            raise Infeasible("linear program has no feasible point")
        # drive remaining artificials out of the basis
        redundant = []
        for i in range(m):
            if basis[i] >= first_art:
                cand = np.flatnonzero(np.abs(T[i, :first_art]) > PIVOT_TOL)
                if cand.size:
                    _pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                else:
                    redundant.append(i)
        keep = [i for i in range(m) if i not in redundant]
        T = np.vstack([T[keep][:, list(range(first_art)) + [ncols]], np.zeros((1, first_art + 1))])
        basis = [basis[i] for i in keep]
    else:
        keep = list(range(m))
        T = np.delete(T, np.s_[first_art:ncols], axis=1)
    ncols = first_art

    # phase 2
    cost = np.zeros(ncols)
    cost[:N] = c_std
    T[-1, :ncols] = cost
    T[-1, -1] = 0.0
    for i, bvar in enumerate(basis):
        if cost[bvar] != 0.0:
            T[-1] -= cost[bvar] * T[i]
    it = _run_simplex(T, basis, ncols, max_iter, it)

    # original standard form (flipped rows, slack columns) for reinversion and duals
    full = np.zeros((m, ncols))
    full[:, :N] = M
    k_slack = N
    for i, s in enumerate(senses):
        if s != "=":
            full[i, k_slack] = 1.0 if s == "<=" else -1.0
            k_slack += 1
    if keep:
        for _ in range(REINVERSIONS):
            T = _reinvert(full[keep], rhs[keep], cost, basis)
            before = it
            it = _run_simplex(T, basis, ncols, max_iter, it)
            if it == before:
                break

    x_std = np.zeros(ncols)
    x_std[basis] = np.maximum(T[:-1, -1], 0.0)
    x = offset.copy()
    np.add.at(x, src, sgn * x_std[:N])
    value = -T[-1, -1] + const

    # duals from the final basis: B^T y = c_B on the kept (flipped) rows
    B = full[keep][:, basis]
    y_kept = np.linalg.solve(B.T, cost[basis]) if keep else np.zeros(0)
    y = np.zeros(m)
    y[keep] = y_kept
    duals = (y * flip)[:m0]

    if lp.maximize:
        value = -value
        duals = -duals
    return LPSolution(float(value), x, duals, it, list(basis))


@njit(cache=True)
def _nb_pivot(T, row, col):
    piv = T[row, col]
    for k in range(T.shape[1]):
        T[row, k] /= piv
    for i in range(T.shape[0]):
        if i != row:
            f = T[i, col]
            if f != 0.0:
                for k in range(T.shape[1]):
                    T[i, k] -= f * T[row, k]


@njit(cache=True)
def _nb_simplex(T, basis, ncols, max_iter, it):
    """Compiled twin of ``_run_simplex``; returns (status, iterations).

    status 0 optimal, 1 unbounded, 2 iteration limit.
    """
    m = T.shape[0] - 1
    last = T.shape[1] - 1
    while True:
        e = -1
        for k in range(ncols):
            if T[m, k] < -PIVOT_TOL:
                e = k
                break
        if e < 0:
            return 0, it
        if it >= max_iter:
            return 2, it
        rmin = np.inf
        for i in range(m):
            if T[i, e] > PIVOT_TOL:
                ratio = T[i, last] / T[i, e]
                if ratio < rmin:
                    rmin = ratio
        if rmin == np.inf:
            return 1, it
        thresh = rmin + 1e-12 * max(1.0, abs(rmin))
        leave = -1
        for i in range(m):
            if T[i, e] > PIVOT_TOL and T[i, last] / T[i, e] <= thresh:
                if leave < 0 or basis[i] < basis[leave]:
                    leave = i
        _nb_pivot(T, leave, e)
        basis[leave] = e
        it += 1


@njit(cache=True)
def _nb_reinvert(F, rhs, cost, basis):
    r, c = F.shape
    B = np.empty((r, r))
    for k in range(r):
        B[:, k] = F[:, basis[k]]
    rhs_all = np.empty((r, c + 1))
    rhs_all[:, :c] = F
    rhs_all[:, c] = rhs
    body = np.linalg.solve(B, rhs_all)
    T = np.empty((r + 1, c + 1))
    T[:r] = body
    cb = np.empty(r)
    for k in range(r):
        cb[k] = cost[basis[k]]
    T[r, :c] = cost - cb @ body[:, :c]
    T[r, c] = -(cb @ body[:, c])
    return T


@njit(cache=True)
def _nb_matrix_game(A, max_iter):
    m, n = A.shape
    N = m + 2
    ncols = N + n + 1
    T = np.zeros((n + 2, ncols + 1))
    for j in range(n):
        for i in range(m):
            T[j, i] = A[i, j]
        T[j, m] = -1.0
        T[j, m + 1] = 1.0
        T[j, N + j] = 1.0
    for i in range(m):
        T[n, i] = 1.0
    T[n, ncols - 1] = 1.0
    T[n, ncols] = 1.0
    basis = np.empty(n + 1, np.int64)
    for j in range(n):
        basis[j] = N + j
    basis[n] = ncols - 1
    for k in range(ncols + 1):
        T[n + 1, k] = -T[n, k]
    T[n + 1, ncols - 1] = 0.0
    status, it = _nb_simplex(T, basis, ncols, max_iter, 0)
    if status != 0:
        return status, 0.0, np.zeros(m), np.zeros(n)
    if -T[n + 1, ncols] > FEAS_TOL:
        return 3, 0.0, np.zeros(m), np.zeros(n)
    first_art = ncols - 1
    if basis[n] >= first_art:
        for k in range(first_art):
            if abs(T[n, k]) > PIVOT_TOL:
                _nb_pivot(T, n, k)
                basis[n] = k
                break
    # phase 2 on the tableau without the artificial column
    T2 = np.empty((n + 2, first_art + 1))
    T2[:, :first_art] = T[:, :first_art]
    T2[:, first_art] = T[:, ncols]
    for k in range(first_art + 1):
        T2[n + 1, k] = 0.0
    T2[n + 1, m] = 1.0
    T2[n + 1, m + 1] = -1.0
    for i in range(n + 1):
        if basis[i] == m:
            for k in range(first_art + 1):
                T2[n + 1, k] -= T2[i, k]
        elif basis[i] == m + 1:
            for k in range(first_art + 1):
                T2[n + 1, k] += T2[i, k]
    status, it = _nb_simplex(T2, basis, first_art, max_iter, it)
    if status != 0:
        return status, 0.0, np.zeros(m), np.zeros(n)
    # reinvert from the original standard form to shed pivoting round-off
    F = np.zeros((n + 1, first_art))
    rhs = np.zeros(n + 1)
    for j in range(n):
        for i in range(m):
            F[j, i] = A[i, j]
        F[j, m] = -1.0
        F[j, m + 1] = 1.0
        F[j, N + j] = 1.0
    for i in range(m):
        F[n, i] = 1.0
    rhs[n] = 1.0
    cost = np.zeros(first_art)
    cost[m] = 1.0
    cost[m + 1] = -1.0
    for _ in range(3):
        T2 = _nb_reinvert(F, rhs, cost, basis)
        before = it
        status, it = _nb_simplex(T2, basis, first_art, max_iter, it)
        if status != 0:
            return status, 0.0, np.zeros(m), np.zeros(n)
        if it == before:
            break
    x_std = np.zeros(first_art)
    for i in range(n + 1):
        x_std[basis[i]] = max(T2[i, first_art], 0.0)
    value = x_std[m] - x_std[m + 1]
    # reduced cost of slack j is -y_j, and Nature's weight on column j is -y_j
    y = T2[n + 1, N:N + n].copy()
    return 0, value, x_std[:m].copy(), y


def solve_matrix_game_tableau(A: np.ndarray, max_iter: int = 10_000) -> tuple[float, np.ndarray, np.ndarray]:
    """Fast path for ``min v s.t. A^T x <= v 1, sum(x) = 1, x >= 0``.

    Builds the same standard form that ``solve_lp`` derives from the general
    program (columns x, v+, v-, slacks, one artificial) and runs the same
    Bland pivoting, compiled. Returns ``(value, x, y)`` with ``y`` Nature's
    optimal mixed action.
    """
    status, value, x, y = _nb_matrix_game(np.ascontiguousarray(A, dtype=np.float64), max_iter)
    if status == 1:
        raise Unbounded("matrix game program unbounded")
    if status == 2:
        raise IterationLimit(f"simplex exceeded {max_iter} pivots")
    if status == 3:
        raise Infeasible("matrix game program infeasible")
    return float(value), x, y
