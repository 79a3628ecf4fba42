"""Tightest entailed probability intervals via exact rational LP.

A query asks for the range of P(target | given) over every probability
distribution on the world space that satisfies the linearized axioms.
Unconditional queries are the special case given = true.  Conditional
queries are linear-fractional and are homogenized: with scaled weights
y = t*x and t = 1 / P(given), every axiom row stays valid (they are
homogeneous), the antecedent mass becomes sum_{given} y = 1, and the
objective sum_{target & given} y is the conditioned probability.  The
transformed polytope is in exact bijection with the distributions that
give the antecedent positive probability, so reported endpoints are
attained whenever the status is "determined".

When the antecedent is forced to probability zero by the axioms, the
conditional is undefined on every admissible distribution and the result
is the vacuous interval with status "vacuous_by_zero_antecedent".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InfeasibleError
from .kb import (
    KnowledgeBase,
    ProbabilityInterval,
    kb_rows,
    linearize,
)
from .sentences import TRUE, Sentence, WorldSpace, conjunction, extension
from .simplex import LpResult, solve_lp

ZERO = Fraction(0)
ONE = Fraction(1)

DETERMINED = "determined"
VACUOUS = "vacuous_by_zero_antecedent"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class QueryResult:
    """Entailed interval for one conditional query.

    ``lower_attained``/``upper_attained`` record whether some admissible
    distribution realizes the endpoint; for exact LP answers they are
    always true, and the branch-and-bound layer reports false on outer
    bounds it has not certified.
    """

    status: str
    interval: ProbabilityInterval | None
    lower_attained: bool = True
    upper_attained: bool = True
    pivots: int = 0


def _normalization_row(n: int):
    return ({i: ONE for i in range(n)}, "=", ONE)


def probability_bounds(rows, n: int, indices) -> tuple[LpResult, LpResult]:
    """Min and max of sum_{i in indices} x_i over the normalized polytope."""
    lp_rows = [(r.coeffs, r.rel, r.rhs) for r in rows]
    lp_rows.append(_normalization_row(n))
    objective = {i: ONE for i in indices}
    return (
        solve_lp(n, lp_rows, objective, "min"),
        solve_lp(n, lp_rows, objective, "max"),
    )


def feasible(kb: KnowledgeBase, ws: WorldSpace) -> bool:
    """True iff some distribution over ws satisfies every linearized axiom.

    Assumptions are not consulted here; the augmented feasibility check
    lives with the branch-and-bound machinery.
    """
    return feasible_rows(kb_rows(kb, ws), len(ws))


def feasible_rows(rows, n: int) -> bool:
    lp_rows = [(r.coeffs, r.rel, r.rhs) for r in rows]
    lp_rows.append(_normalization_row(n))
    return solve_lp(n, lp_rows, {}, "min").status == "optimal"


def feasible_subset(kb: KnowledgeBase, ws: WorldSpace, axiom_indices) -> bool:
    """Feasibility with only the selected axioms active (assumptions fixed).

    With assumptions present this tests the root McCormick relaxation,
    which can only err on the side of calling an infeasible system
    feasible, so a True here is conservative.
    """
    rows = []
    for i in axiom_indices:
        rows.extend(linearize(kb.axioms[i], ws))
    if kb.assumptions:
        from .assumptions import relaxation_feasible

        return relaxation_feasible(rows, kb.assumptions, ws)
    return feasible_rows(rows, len(ws))


def _conditional_program(rows, ws: WorldSpace, given: Sentence):
    """Charnes-Cooper transform: columns 0..n-1 are y, column n is the scale t."""
    n = len(ws)
    lp_rows = [(r.coeffs, r.rel, r.rhs) for r in rows]
    lp_rows.append(({i: ONE for i in extension(given, ws)}, "=", ONE))
    scale_row = {i: ONE for i in range(n)}
    scale_row[n] = -ONE
    lp_rows.append((scale_row, "=", ZERO))
    return lp_rows, n + 1


def entail_conditional(
    kb: KnowledgeBase, ws: WorldSpace, target: Sentence, given: Sentence = TRUE
) -> QueryResult:
    """Exact [min, max] of P(target | given) over the axiom-feasible set.

    Raises InfeasibleError when no distribution satisfies the axioms.
    """
    rows = kb_rows(kb, ws)
    pivots = 0
    if given != TRUE:
        _, high = probability_bounds(rows, len(ws), extension(given, ws))
        pivots += high.pivots
        if high.status == "infeasible":
            raise InfeasibleError("axiom system admits no distribution")
        if high.value == ZERO:
            return QueryResult(
                VACUOUS,
                ProbabilityInterval.vacuous(),
                lower_attained=False,
                upper_attained=False,
                pivots=pivots,
            )
    lp_rows, ncols = _conditional_program(rows, ws, given)
    objective = {i: ONE for i in extension(conjunction(target, given), ws)}
    low = solve_lp(ncols, lp_rows, objective, "min")
    high = solve_lp(ncols, lp_rows, objective, "max")
    pivots += low.pivots + high.pivots
    if low.status == "infeasible":
        raise InfeasibleError("axiom system admits no distribution")
    assert low.status == "optimal" and high.status == "optimal"
    return QueryResult(
        DETERMINED,
        ProbabilityInterval(low.value, high.value),
        pivots=pivots,
    )


def entail_unconditional(
    kb: KnowledgeBase, ws: WorldSpace, target: Sentence
) -> QueryResult:
    return entail_conditional(kb, ws, target, TRUE)


def entail_all(kb: KnowledgeBase, ws: WorldSpace) -> dict:
    """One QueryResult per registered query, keyed by (target, given)."""
    return {
        (target, given): entail_conditional(kb, ws, target, given)
        for target, given in kb.queries
    }
