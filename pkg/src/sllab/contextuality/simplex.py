"""Small dense simplex solver, exact over Fractions with a float fallback.

Solves   maximize c.x   subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0
by the two-phase tableau method with Bland's rule.  When every input is a
fractions.Fraction (or int) all arithmetic is exact, pivoting tolerance is
zero, and the returned primal/dual vectors and certificates are exact.
Intended for the desk-scale polytopes arising in contextuality analysis
(tens of variables); no sparsity, no revised simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional


class LpError(RuntimeError):
    pass


@dataclass
class LpResult:
    status: str                    # optimal | infeasible | unbounded
    x: Optional[list] = None
    objective: Optional[object] = None
    dual: Optional[list] = None    # one multiplier per constraint row
    farkas: Optional[list] = None  # certificate y with y.A <= 0, y.b > 0


def _all_rational(values):
    return all(isinstance(v, Rational) for v in values)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> LpResult:
    A_ub = [list(r) for r in (A_ub or [])]
    b_ub = list(b_ub or [])
    A_eq = [list(r) for r in (A_eq or [])]
    b_eq = list(b_eq or [])
    c = list(c)
    n = len(c)
    rows = A_ub + A_eq
    rhs = b_ub + b_eq
    m = len(rows)
    if any(len(r) != n for r in rows):
        raise LpError("constraint row length does not match objective length")

    flat = [v for row in rows for v in row] + rhs + c
    if _all_rational(flat):
        conv, tol = Fraction, Fraction(0)
    else:
        conv, tol = float, 1e-9
    zero, one = conv(0), conv(1)

    n_ub = len(A_ub)
    # Stored system: rhs normalized nonnegative; `flipped` marks negated rows.
    stored = []
    flipped = []
    for i in range(m):
        row = [conv(v) for v in rows[i]]
        b = conv(rhs[i])
        slack = [zero] * n_ub
        if i < n_ub:
            slack[i] = one
        row = row + slack
        if b < zero:
            row, b = [-v for v in row], -b
            flipped.append(True)
        else:
            flipped.append(False)
        stored.append((row, b))

    ncols = n + n_ub
    # Flipped ub rows and all eq rows need an artificial basic variable.
    art_of_row = {}
    for i in range(m):
        if i >= n_ub or flipped[i]:
            art_of_row[i] = ncols + len(art_of_row)
    total_cols = ncols + len(art_of_row)

    tab = []
    basis = [None] * m
    for i in range(m):
        row, b = stored[i]
        full = row + [zero] * len(art_of_row) + [b]
        if i in art_of_row:
            full[art_of_row[i]] = one
            basis[i] = art_of_row[i]
        else:
            basis[i] = n + i
        tab.append(full)

    def pivot(pr, pc):
        piv = tab[pr][pc]
        tab[pr] = [v / piv for v in tab[pr]]
        for r in range(m):
            if r != pr and tab[r][pc] != zero:
                f = tab[r][pc]
                tab[r] = [a - f * b for a, b in zip(tab[r], tab[pr])]
        basis[pr] = pc

    def run_simplex(cost, allowed_cols):
        """Minimize cost.x from the current basic feasible tableau."""
        while True:
            cb = [cost[basis[r]] for r in range(m)]
            entering = None
            for j in allowed_cols:
                if j in basis:
                    continue
                red = cost[j] - sum(cb[r] * tab[r][j] for r in range(m))
                if red < -tol:
                    entering = j   # Bland: lowest improving index
                    break
            if entering is None:
                return "optimal"
            ratio, leaving = None, None
            for r in range(m):
                a = tab[r][entering]
                if a > tol:
                    q = tab[r][-1] / a
                    if (leaving is None or q < ratio
                            or (q == ratio and basis[r] < basis[leaving])):
                        ratio, leaving = q, r
            if leaving is None:
                return "unbounded"
            pivot(leaving, entering)

    def duals(cost):
        """y = c_B B^-1 in original row order and signs.

        Read from the column that was the unit vector of each stored row:
        the artificial where one exists, the slack otherwise.
        """
        cb = [cost[basis[r]] for r in range(m)]
        y = []
        for i in range(m):
            col = art_of_row.get(i, n + i)
            yi = sum(cb[r] * tab[r][col] for r in range(m))
            y.append(-yi if flipped[i] else yi)
        return y

    if art_of_row:
        cost1 = [zero] * total_cols
        for col in art_of_row.values():
            cost1[col] = one
        if run_simplex(cost1, range(total_cols)) != "optimal":
            raise LpError("phase-1 simplex did not terminate optimally")
        w = sum(tab[r][-1] for r in range(m) if basis[r] >= ncols)
        if w > tol:
            # Infeasible: phase-1 duals give y.A <= 0, y.b = w > 0.
            return LpResult(status="infeasible", farkas=duals(cost1))
        for r in range(m):
            if basis[r] >= ncols:  # degenerate artificial still basic
                for j in range(ncols):
                    if tab[r][j] > tol or tab[r][j] < -tol:
                        pivot(r, j)
                        break

    cost2 = [-conv(v) for v in c] + [zero] * (n_ub + len(art_of_row))
    status = run_simplex(cost2, range(ncols))
    if status == "unbounded":
        return LpResult(status="unbounded")

    x = [zero] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = tab[r][-1]
    obj = sum(conv(ci) * xi for ci, xi in zip(c, x))
    return LpResult(status="optimal", x=x, objective=obj,
                    dual=[-v for v in duals(cost2)])
