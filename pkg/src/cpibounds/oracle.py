"""Brute-force verification oracles, independent of the simplex solver.

Two oracles with complementary failure modes certify the LP path:

* :func:`grid_bounds` scans every composition of 1 into ``1/step`` parts
  over the worlds, keeps the points satisfying the axioms (and, within a
  slack, the bilinear assumptions), and reports the query range over the
  kept points.  Approximate but assumption-aware.
* :func:`vertex_bounds` enumerates basic feasible solutions of the exact
  constraint system by solving all square active-set subsystems with
  rational Gaussian elimination.  Exact but linear-only.

Neither touches the simplex code; the only shared layer is the axiom
linearization, which defines the problem rather than solving it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor, gcd

import numpy as np

from .errors import OracleSizeError
from .kb import (
    CondIndependence,
    KnowledgeBase,
    NegativeCorrelation,
    PositiveCorrelation,
    ProbabilityInterval,
    kb_rows,
)
from .sentences import TRUE, Sentence, WorldSpace, conjunction, extension

ZERO = Fraction(0)
ONE = Fraction(1)

MAX_GRID_POINTS = 20_000_000
MAX_VERTEX_SUBSETS = 500_000


@dataclass(frozen=True)
class GridSearchConfig:
    step: Fraction = Fraction(1, 200)
    slack: Fraction = Fraction(1, 100)

    def __post_init__(self):
        if self.step <= 0 or (1 / self.step).denominator != 1:
            raise ValueError(f"step {self.step} must divide 1 evenly")
        if self.slack < 0:
            raise ValueError("slack must be nonnegative")


_COMPOSITION_CACHE: dict = {}


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of the given length summing to total."""
    cached = _COMPOSITION_CACHE.get((total, parts))
    if cached is not None:
        return cached
    if parts == 1:
        out = np.array([[total]], dtype=np.int64)
    else:
        blocks = []
        for first in range(total + 1):
            rest = _compositions(total - first, parts - 1)
            head = np.full((rest.shape[0], 1), first, dtype=np.int64)
            blocks.append(np.hstack([head, rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    _COMPOSITION_CACHE[(total, parts)] = out
    return out


def _indicator(indices, n: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.int64)
    for i in indices:
        v[i] = 1
    return v


def grid_bounds(
    kb: KnowledgeBase,
    ws: WorldSpace,
    target: Sentence,
    given: Sentence = TRUE,
    cfg: GridSearchConfig | None = None,
):
    """Query range over grid distributions satisfying the knowledge base.

    Returns a ProbabilityInterval of exact grid ratios, or None when no
    kept grid point gives the antecedent positive mass.  Limited to five
    worlds; the grid size explodes combinatorially beyond that.
    """
    cfg = cfg or GridSearchConfig()
    n = len(ws)
    if n > 5:
        raise OracleSizeError(f"{n} worlds exceeds the 5-world grid limit")
    scale = int(1 / cfg.step)
    if comb(scale + n - 1, n - 1) > MAX_GRID_POINTS:
        raise OracleSizeError(f"grid would have more than {MAX_GRID_POINTS} points")

    counts = _compositions(scale, n)
    keep = np.ones(counts.shape[0], dtype=bool)

    # axiom rows: coeffs . x  rel  0, allowing +/- slack; scaled to integers
    # (flooring the scaled slack keeps the comparison exact on integer lhs)
    for row in kb_rows(kb, ws):
        denom = 1
        for c in row.coeffs.values():
            denom = denom * c.denominator // gcd(denom, c.denominator)
        lim = floor(cfg.slack * scale * denom)
        vec = np.zeros(n, dtype=np.int64)
        for i, c in row.coeffs.items():
            vec[i] = int(c * denom)
        lhs = counts @ vec
        if row.rel == ">=":
            keep &= lhs >= -lim
        elif row.rel == "<=":
            keep &= lhs <= lim
        else:
            keep &= np.abs(lhs) <= lim

    # bilinear assumptions, in squared-count units: p*q -> counts/scale^2
    slack_sq = floor(cfg.slack * scale * scale)
    for a in kb.assumptions:
        if isinstance(a, CondIndependence):
            cdg = counts @ _indicator(
                extension(conjunction(a.first, a.second, a.given), ws), n
            )
            g = counts @ _indicator(extension(a.given, ws), n)
            cg = counts @ _indicator(extension(conjunction(a.first, a.given), ws), n)
            dg = counts @ _indicator(extension(conjunction(a.second, a.given), ws), n)
            keep &= np.abs(cdg * g - cg * dg) <= slack_sq
        else:
            ab = counts @ _indicator(extension(conjunction(a.a, a.b), ws), n)
            pa = counts @ _indicator(extension(a.a, ws), n)
            pb = counts @ _indicator(extension(a.b, ws), n)
            if isinstance(a, NegativeCorrelation):
                keep &= ab * scale <= pa * pb + slack_sq
            else:
                keep &= ab * scale >= pa * pb - slack_sq

    kept = counts[keep]
    if kept.shape[0] == 0:
        return None
    num = kept @ _indicator(extension(conjunction(target, given), ws), n)
    den = kept @ _indicator(extension(given, ws), n)
    positive = den > 0
    if not positive.any():
        return None
    ratios = num[positive] / den[positive]
    i_min = int(np.argmin(ratios))
    i_max = int(np.argmax(ratios))
    nums = num[positive]
    dens = den[positive]
    return ProbabilityInterval(
        Fraction(int(nums[i_min]), int(dens[i_min])),
        Fraction(int(nums[i_max]), int(dens[i_max])),
    )


def _solve_square(matrix, rhs):
    """Rational Gaussian elimination; returns None on a singular system."""
    d = len(matrix)
    aug = [list(row) + [r] for row, r in zip(matrix, rhs)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if aug[r][col] != ZERO), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = ONE / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != ZERO:
                factor = aug[r][col]
                aug[r] = [v - factor * p for v, p in zip(aug[r], aug[col])]
    return [aug[r][-1] for r in range(d)]


def vertex_bounds(
    kb: KnowledgeBase,
    ws: WorldSpace,
    target: Sentence,
    given: Sentence = TRUE,
) -> ProbabilityInterval:
    """Exact query bounds by enumerating vertices of the constraint polytope.

    Works on the same homogenized system the LP path uses for conditional
    queries (columns y_0..y_{n-1} and the scale t); every bounded linear
    objective over that pointed polyhedron attains its extrema at basic
    feasible solutions, so enumerating them is exact.  Linear axioms only.
    """
    if kb.assumptions:
        raise OracleSizeError("vertex enumeration handles linear axioms only")
    n = len(ws)
    d = n + 1
    rows = kb_rows(kb, ws)
    if len(rows) + n > 20:
        raise OracleSizeError("instance too large for subset enumeration")

    def dense(coeffs):
        v = [ZERO] * d
        for i, c in coeffs.items():
            v[i] = c
        return v

    eq_rows = []
    ant = [ZERO] * d
    for i in extension(given, ws):
        ant[i] = ONE
    eq_rows.append((ant, ONE))
    scale_row = [ONE] * n + [-ONE]
    eq_rows.append((scale_row, ZERO))

    candidates = [(dense(r.coeffs), ZERO) for r in rows]
    for j in range(d):
        axis = [ZERO] * d
        axis[j] = ONE
        candidates.append((axis, ZERO))

    need = d - len(eq_rows)
    if comb(len(candidates), need) > MAX_VERTEX_SUBSETS:
        raise OracleSizeError("too many active-set subsets to enumerate")

    objective = [ZERO] * d
    for i in extension(conjunction(target, given), ws):
        objective[i] = ONE

    best_lo = None
    best_hi = None
    for chosen in itertools.combinations(range(len(candidates)), need):
        matrix = [row for row, _ in eq_rows] + [candidates[c][0] for c in chosen]
        rhs = [r for _, r in eq_rows] + [candidates[c][1] for c in chosen]
        point = _solve_square(matrix, rhs)
        if point is None:
            continue
        if any(v < ZERO for v in point):
            continue
        ok = True
        for row, drow in zip(rows, candidates[: len(rows)]):
            lhs = sum(c * v for c, v in zip(drow[0], point))
            if row.rel == ">=" and lhs < ZERO:
                ok = False
            elif row.rel == "<=" and lhs > ZERO:
                ok = False
            elif row.rel == "=" and lhs != ZERO:
                ok = False
            if not ok:
                break
        if not ok:
            continue
        value = sum(c * v for c, v in zip(objective, point))
        if best_lo is None or value < best_lo:
            best_lo = value
        if best_hi is None or value > best_hi:
            best_hi = value
    if best_lo is None:
        raise OracleSizeError("no feasible vertex found (infeasible or vacuous)")
    return ProbabilityInterval(best_lo, best_hi)
