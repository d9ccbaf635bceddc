"""Bounded-variable revised simplex for the MILP relaxations.

Solves ``min c.x  s.t.  A x (<=|>=|=) b,  lb <= x <= ub``. Every row gets a
slack (``A x + s = b``) whose bounds encode the sense, so the slack basis is
always available. With every structural variable boxed, placing each
nonbasic variable at the bound its cost prefers makes that basis dual
feasible, and the dual simplex runs to optimality from there. The same
property lets branch-and-bound re-solve a child from its parent's basis
after tightening bounds.

The basis inverse is kept as a sparse LU factorization plus an eta file of
column updates, refactorized every ``REFACTOR_EVERY`` pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
DUAL_TOL = 1e-9
BIG = 1e7
REFACTOR_EVERY = 80
HARRIS_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray | None
    objective: float
    basis: tuple[np.ndarray, np.ndarray] | None
    iterations: int = 0


class BoundedLP:
    """A fixed constraint matrix re-solvable under different variable bounds."""

    def __init__(self, c, A, senses, b):
        A = sp.csc_matrix(A, dtype=float)
        self.m, self.n = A.shape
        self.N = self.n + self.m
        self.A = sp.hstack([A, sp.identity(self.m, format="csc")], format="csc")
        self.AT = self.A.T.tocsr()
        self.b = np.asarray(b, dtype=float).reshape(self.m)
        self.c = np.concatenate([np.asarray(c, dtype=float).reshape(self.n), np.zeros(self.m)])
        slo, shi = np.zeros(self.m), np.zeros(self.m)
        for i, s in enumerate(senses):
            if s == "<=":
                shi[i] = np.inf
            elif s == ">=":
                slo[i] = -np.inf
            elif s != "=":
                raise ValueError(f"bad sense {s!r}")
        self.slack_lb, self.slack_ub = slo, shi

    def column(self, j: int) -> np.ndarray:
        out = np.zeros(self.m)
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        out[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return out

    def solve(self, lb, ub, basis=None, max_iter: int | None = None) -> LPResult:
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub + FEAS_TOL):
            return LPResult("infeasible", None, np.inf, None)
        res = self._solve_boxed(lb, ub, BIG, basis, max_iter)
        if res.status != "optimal":
            return res
        x = res.x
        on_box = (~np.isfinite(lb) & (x <= -BIG * 0.999)) | (~np.isfinite(ub) & (x >= BIG * 0.999))
        if np.any(on_box):
            # the artificial box is binding or merely touched at an alternative optimum
            wide = self._solve_boxed(lb, ub, BIG * 10, None, max_iter)
            if wide.status != "optimal" or wide.objective < res.objective - 1e-6 * (1 + abs(res.objective)):
                return LPResult("unbounded", None, -np.inf, None, res.iterations)
        return res

    def _solve_boxed(self, lb, ub, big, basis, max_iter) -> LPResult:
        boxed_lb = np.where(np.isfinite(lb), lb, -big)
        boxed_ub = np.where(np.isfinite(ub), ub, big)
        state = _Revised(self, np.concatenate([boxed_lb, self.slack_lb]), np.concatenate([boxed_ub, self.slack_ub]))
        if basis is None or not state.load(*basis):
            state.cold()
        limit = max_iter or 50 * (self.N + 10)
        status = state.run(limit)
        if status != "optimal":
            return LPResult(status, None, np.inf, None, state.iterations)
        x = state.values()[: self.n]
        return LPResult("optimal", x, float(self.c[: self.n] @ x), state.snapshot(), state.iterations)


class _Revised:
    def __init__(self, lp: BoundedLP, lb: np.ndarray, ub: np.ndarray):
        self.lp = lp
        self.lb, self.ub = lb, ub
        self.fixed = ub - lb <= 0.0
        self.iterations = 0

    # -- basis management ---------------------------------------------------

    def cold(self):
        lp = self.lp
        self.basis = np.arange(lp.n, lp.N)
        self.at_upper = np.zeros(lp.N, dtype=bool)
        self.refactor()
        self.fix_nonbasic_sides()
        self.recompute_primal()

    def load(self, basis, at_upper) -> bool:
        self.basis = np.array(basis, dtype=int)
        self.at_upper = np.array(at_upper, dtype=bool)
        if not self.refactor():
            return False
        self.fix_nonbasic_sides()
        self.recompute_primal()
        return self.dual_feasible()

    def snapshot(self):
        return self.basis.copy(), self.at_upper.copy()

    def refactor(self) -> bool:
        lp = self.lp
        self.is_basic = np.zeros(lp.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.etas: list[tuple[int, np.ndarray]] = []
        if lp.m:
            try:
                self.lu = splu(lp.A[:, self.basis].tocsc())
            except RuntimeError:  # singular basis
                return False
        y = self.btran(lp.c[self.basis])
        self.d = lp.c - lp.AT @ y
        self.d[self.basis] = 0.0
        if not np.all(np.isfinite(self.d)):
            return False
        if hasattr(self, "xB"):
            self.recompute_primal()
        return True

    def recompute_primal(self):
        xn = self.nonbasic_values()
        self.xB = self.ftran(self.lp.b - self.lp.A @ xn)

    def ftran(self, v: np.ndarray) -> np.ndarray:
        if not self.lp.m:
            return v.copy()
        y = self.lu.solve(v)
        for r, col in self.etas:
            yr = y[r] / col[r]
            y -= yr * col
            y[r] = yr
        return y

    def btran(self, v: np.ndarray) -> np.ndarray:
        if not self.lp.m:
            return v.copy()
        w = np.array(v, dtype=float)
        for r, col in reversed(self.etas):
            w[r] = (w[r] - (col @ w - col[r] * w[r])) / col[r]
        return self.lu.solve(w, trans="T")

    def fix_nonbasic_sides(self):
        """Move dual-infeasible nonbasic boxed variables to the other bound."""
        lb_fin, ub_fin = np.isfinite(self.lb), np.isfinite(self.ub)
        nb = ~self.is_basic
        both = nb & lb_fin & ub_fin
        self.at_upper[both & (self.d < -DUAL_TOL)] = True
        self.at_upper[both & (self.d > DUAL_TOL)] = False
        self.at_upper[nb & ~lb_fin] = True
        self.at_upper[nb & ~ub_fin] = False
        self.at_upper[self.is_basic] = False

    def bad_duals(self) -> np.ndarray:
        nb = ~self.is_basic & ~self.fixed
        return nb & ((~self.at_upper & (self.d < -DUAL_TOL)) | (self.at_upper & (self.d > DUAL_TOL)))

    def dual_feasible(self) -> bool:
        return not self.bad_duals().any()

    def nonbasic_values(self) -> np.ndarray:
        xn = np.where(self.at_upper, self.ub, self.lb)
        xn[self.is_basic] = 0.0
        return xn

    def values(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.xB
        return x

    def swap(self, r: int, q: int, col: np.ndarray, alpha: np.ndarray, xq_new: float, p_upper: bool):
        """Basis change: ``q`` enters at row ``r``; reduced costs follow ``alpha``."""
        theta_d = self.d[q] / alpha[q]
        self.d -= theta_d * alpha
        self.d[q] = 0.0
        p = self.basis[r]
        self.xB[r] = xq_new
        self.basis[r] = q
        self.is_basic[p] = False
        self.is_basic[q] = True
        self.at_upper[q] = False
        self.at_upper[p] = p_upper
        self.d[self.basis] = 0.0
        self.etas.append((r, col))
        self.iterations += 1
        if len(self.etas) >= REFACTOR_EVERY:
            return self.refactor()
        return True

    def current(self, j: int) -> float:
        return self.ub[j] if self.at_upper[j] else self.lb[j]

    # -- algorithms ---------------------------------------------------------

    def run(self, limit: int) -> str:
        for _ in range(10):
            status = self.dual_simplex(limit)
            if status != "optimal":
                return status
            if not self.refactor():
                return "iteration-limit"
            if not self.dual_feasible():
                bad = self.bad_duals()
                if np.all(np.isfinite(self.lb[bad]) & np.isfinite(self.ub[bad])):
                    # bound flips restore dual feasibility; dual simplex repairs the rows
                    self.fix_nonbasic_sides()
                    self.recompute_primal()
                    continue
                status = self.primal_simplex(limit)
                if status != "optimal":
                    return status
                if not self.refactor():
                    return "iteration-limit"
            lo, hi = self.lb[self.basis], self.ub[self.basis]
            if np.all(self.xB >= lo - 1e-7) and np.all(self.xB <= hi + 1e-7) and self.dual_feasible():
                return "optimal"
        return "iteration-limit"

    def dual_simplex(self, limit: int) -> str:
        lp = self.lp
        stall = 0
        while True:
            if self.iterations >= limit:
                return "iteration-limit"
            xb = self.xB
            lo, hi = self.lb[self.basis], self.ub[self.basis]
            below, above = lo - xb, xb - hi
            infeas = np.maximum(below, above)
            cand = infeas > FEAS_TOL * (1.0 + np.abs(xb))
            if not cand.any():
                return "optimal"
            if stall > 50:
                # Bland-style choice to break cycling
                r = int(np.flatnonzero(cand)[np.argmin(self.basis[cand])])
            else:
                r = int(np.argmax(np.where(cand, infeas, -np.inf)))
            to_upper = bool(above[r] > below[r])
            target = hi[r] if to_upper else lo[r]
            e = np.zeros(lp.m)
            e[r] = 1.0
            alpha = lp.AT @ self.btran(e)
            movable = ~self.is_basic & ~self.fixed
            up, at_lo = self.at_upper, ~self.at_upper
            if to_upper:
                elig = movable & ((at_lo & (alpha > PIVOT_TOL)) | (up & (alpha < -PIVOT_TOL)))
            else:
                elig = movable & ((at_lo & (alpha < -PIVOT_TOL)) | (up & (alpha > PIVOT_TOL)))
            if not elig.any():
                return "infeasible"
            idx = np.flatnonzero(elig)
            mag = np.abs(alpha[idx])
            dj = np.abs(self.d[idx])
            # Harris: widen the step by the dual tolerance, then take the largest pivot
            bound = ((dj + HARRIS_TOL) / mag).min()
            within = dj / mag <= bound
            if stall > 50:
                q = int(idx[within].min())
            else:
                q = int(idx[within][np.argmax(mag[within])])
            ratio = dj[idx == q][0] / abs(alpha[q])
            stall = stall + 1 if ratio <= 1e-12 else 0
            col = self.ftran(lp.column(q))
            drift = abs(col[r] - alpha[q]) > 1e-6 * max(1.0, abs(alpha[q]))
            if (drift or abs(col[r]) <= PIVOT_TOL) and self.etas:
                # row and column disagree: drop the eta file and redo the iteration
                if not self.refactor():
                    return "numerical"
                continue
            if abs(col[r]) <= PIVOT_TOL:
                return "numerical"
            t = (xb[r] - target) / col[r]
            xq_new = self.current(q) + t
            self.xB = xb - t * col
            if not self.swap(r, q, col, alpha, xq_new, to_upper):
                return "numerical"

    def primal_simplex(self, limit: int) -> str:
        """Bounded primal simplex from a primal-feasible basis."""
        lp = self.lp
        while True:
            if self.iterations >= limit:
                return "iteration-limit"
            movable = ~self.is_basic & ~self.fixed
            score = np.where(movable & ~self.at_upper, -self.d, 0.0)
            score = np.where(movable & self.at_upper, self.d, score)
            q = int(np.argmax(score))
            if score[q] <= DUAL_TOL:
                return "optimal"
            direction = -1.0 if self.at_upper[q] else 1.0
            col = self.ftran(lp.column(q))
            xb = self.xB
            lo, hi = self.lb[self.basis], self.ub[self.basis]
            change = -direction * col
            with np.errstate(divide="ignore", invalid="ignore"):
                to_lo = np.where(change < -PIVOT_TOL, (xb - lo) / -change, np.inf)
                to_hi = np.where(change > PIVOT_TOL, (hi - xb) / change, np.inf)
            ratios = np.maximum(np.minimum(to_lo, to_hi), 0.0)
            flip = self.ub[q] - self.lb[q]
            r = int(np.argmin(ratios)) if len(ratios) else -1
            theta = ratios[r] if r >= 0 else np.inf
            if flip <= theta:
                if not np.isfinite(flip):
                    return "unbounded"
                self.xB = xb - direction * flip * col
                self.at_upper[q] = not self.at_upper[q]
                self.iterations += 1
                continue
            e = np.zeros(lp.m)
            e[r] = 1.0
            alpha = lp.AT @ self.btran(e)
            xq_new = self.current(q) + direction * theta
            self.xB = xb - direction * theta * col
            if not self.swap(r, q, col, alpha, xq_new, bool(to_hi[r] <= to_lo[r])):
                return "iteration-limit"
