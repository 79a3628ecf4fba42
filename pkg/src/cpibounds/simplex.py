"""Two-phase primal simplex over exact rationals.

Variables are implicitly nonnegative.  Rows are (coeffs, rel, rhs) with
rel one of ``<=``, ``=``, ``>=`` and all arithmetic in
:class:`fractions.Fraction`, so answers are exact and degeneracy is
handled by Bland's rule (lowest-index entering column, lowest basis
index on ratio ties), which rules out cycling.

This solver is deliberately dense and tableau-based: the polytopes in
this package have at most a few dozen rows and columns, and exactness
matters far more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None
    x: list[Fraction] | None
    pivots: int


def _pivot(tableau, basis, row, col) -> None:
    prow = tableau[row]
    inv = ONE / prow[col]
    if inv != ONE:
        tableau[row] = prow = [v * inv for v in prow]
    nonzero = [j for j, v in enumerate(prow) if v != ZERO]
    for i, r in enumerate(tableau):
        if i == row:
            continue
        factor = r[col]
        if factor != ZERO:
            for j in nonzero:
                r[j] -= factor * prow[j]
    basis[row] = col


def _run_simplex(tableau, basis) -> tuple[str, int]:
    """Minimize until reduced costs are nonnegative. Returns (status, pivots)."""
    m = len(tableau) - 1
    width = len(tableau[0]) - 1
    pivots = 0
    while True:
        obj = tableau[m]
        enter = -1
        for j in range(width):
            if obj[j] < ZERO:
                enter = j
                break
        if enter < 0:
            return "optimal", pivots
        leave = -1
        best = None
        for i in range(m):
            a = tableau[i][enter]
            if a > ZERO:
                ratio = tableau[i][-1] / a
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded", pivots
        _pivot(tableau, basis, leave, enter)
        pivots += 1


def solve_lp(num_vars: int, rows, objective, sense: str = "min") -> LpResult:
    """Optimize ``objective . x`` subject to ``rows`` and x >= 0.

    ``rows`` is an iterable of objects with ``coeffs`` (mapping column to
    Fraction), ``rel``, and ``rhs`` attributes, or plain (coeffs, rel, rhs)
    tuples.  ``objective`` maps columns to Fractions (missing = 0).
    """
    if sense not in ("min", "max"):
        raise ValueError(f"bad sense {sense!r}")
    canon = []
    for row in rows:
        if hasattr(row, "coeffs"):
            coeffs, rel, rhs = row.coeffs, row.rel, row.rhs
        else:
            coeffs, rel, rhs = row
        rhs = Fraction(rhs)
        if rhs < ZERO:
            coeffs = {j: -c for j, c in coeffs.items()}
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        canon.append((coeffs, rel, rhs))

    m = len(canon)
    n_slack = sum(1 for _, rel, _ in canon if rel != "=")
    n_art = sum(1 for _, rel, _ in canon if rel != "<=")
    total = num_vars + n_slack + n_art
    art_start = num_vars + n_slack

    tableau = []
    basis = []
    slack_at = num_vars
    art_at = art_start
    for coeffs, rel, rhs in canon:
        line = [ZERO] * (total + 1)
        for j, c in coeffs.items():
            if not 0 <= j < num_vars:
                raise ValueError(f"column {j} out of range")
            line[j] = Fraction(c)
        line[-1] = rhs
        if rel == "<=":
            line[slack_at] = ONE
            basis.append(slack_at)
            slack_at += 1
        elif rel == ">=":
            line[slack_at] = -ONE
            slack_at += 1
            line[art_at] = ONE
            basis.append(art_at)
            art_at += 1
        else:
            line[art_at] = ONE
            basis.append(art_at)
            art_at += 1
        tableau.append(line)

    pivots = 0
    if n_art:
        # phase 1: minimize the artificial total, priced out of the cost row
        cost = [ZERO] * (total + 1)
        for j in range(art_start, total):
            cost[j] = ONE
        for i, b in enumerate(basis):
            if b >= art_start:
                cost = [cj - ri for cj, ri in zip(cost, tableau[i])]
        tableau.append(cost)
        status, p = _run_simplex(tableau, basis)
        pivots += p
        assert status == "optimal"  # phase-1 objective is bounded below by 0
        if -tableau[-1][-1] > ZERO:
            return LpResult("infeasible", None, None, pivots)
        tableau.pop()
        # drive leftover artificials out of the (degenerate) basis
        dead_rows = []
        for i, b in enumerate(basis):
            if b >= art_start:
                col = next(
                    (j for j in range(art_start) if tableau[i][j] != ZERO), None
                )
                if col is None:
                    dead_rows.append(i)
                else:
                    _pivot(tableau, basis, i, col)
                    pivots += 1
        if dead_rows:
            dead = set(dead_rows)
            tableau = [r for i, r in enumerate(tableau) if i not in dead]
            basis = [b for i, b in enumerate(basis) if i not in dead]
        tableau = [r[:art_start] + r[-1:] for r in tableau]

    # phase 2
    sign = ONE if sense == "min" else -ONE
    width = art_start
    cost = [ZERO] * (width + 1)
    for j, c in objective.items():
        if not 0 <= j < num_vars:
            raise ValueError(f"objective column {j} out of range")
        cost[j] = sign * Fraction(c)
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb != ZERO:
            row = tableau[i]
            cost = [cj - cb * ri for cj, ri in zip(cost, row)]
    tableau.append(cost)
    status, p = _run_simplex(tableau, basis)
    pivots += p
    if status == "unbounded":
        return LpResult("unbounded", None, None, pivots)

    x = [ZERO] * num_vars
    for i, b in enumerate(basis):
        if b < num_vars:
            x[b] = tableau[i][-1]
    value = -tableau[-1][-1] * sign
    return LpResult("optimal", value, x, pivots)
