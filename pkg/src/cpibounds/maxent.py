"""Maximum-entropy distribution under the linearized axioms.

Entropy maximization is the assumption that collapses every entailed
interval to a single value; comparing the resulting point values with
the intervals entailed without it recovers which probabilities the
axioms actually pinned down and which the assumption invented.

Solver: every axiom row is a homogeneous inequality g . x <= 0 (point
axioms contribute a matched pair, which is merged into one equality),
so the Lagrangian dual of  max { -sum x ln x : Ex = 0, Gx <= 0,
sum x = 1, x >= 0 }  is  min logsumexp(-E^T mu - G^T nu)  over free mu
and nu >= 0, with the primal recovered as a softmax.  Projected
gradient descent with Armijo backtracking drives the iteration (the
projection, a clip of nu at zero, is exact), and a periodic active-set
Newton polish supplies the last digits where nearly parallel rows make
plain gradient steps crawl.  Iteration stops when the primal KKT
residual (feasibility plus complementary slackness; stationarity and
normalization are exact by construction) drops below the tolerance.

Worlds forced to probability zero make the entropy gradient unbounded,
so they are detected exactly by LP beforehand and eliminated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entailment import VACUOUS, entail_conditional, probability_bounds
from .errors import InfeasibleError
from .kb import KnowledgeBase, ProbabilityInterval, kb_rows
from .sentences import Sentence, WorldSpace, conjunction, extension

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
_POLISH_EVERY = 200

PINNED = "pinned_by_k"
PARTIAL = "partially_determined"
UNDETERMINED = "fully_underdetermined"


@dataclass(frozen=True)
class MaxEntSolution:
    distribution: tuple[float, ...]
    entropy: float
    kkt_residual: float
    iterations: int
    converged: bool

    def probability(self, indices) -> float:
        return float(sum(self.distribution[i] for i in indices))


@dataclass(frozen=True)
class PrecisionEntry:
    target: Sentence
    given: Sentence
    interval: ProbabilityInterval
    status: str
    maxent_value: float | None
    classification: str


@dataclass(frozen=True)
class PrecisionReport:
    entries: tuple[PrecisionEntry, ...]
    solution: MaxEntSolution


def _constraint_rows(rows, columns):
    """Rows in <=0 form over the free columns, with exact-negation pairs
    merged into equalities.  Returns (equalities, inequalities) as arrays."""
    col_of = {w: j for j, w in enumerate(columns)}
    vectors = []
    for row in rows:
        items = {}
        for i, c in row.coeffs.items():
            j = col_of.get(i)
            if j is not None:
                items[j] = -c if row.rel == ">=" else c
        if items:
            vectors.append(items)
    eqs, ineqs = [], []
    used = [False] * len(vectors)
    keys = [tuple(sorted(v.items())) for v in vectors]
    negated = {}
    for idx, v in enumerate(vectors):
        negated.setdefault(tuple(sorted((j, -c) for j, c in v.items())), idx)
    for idx, v in enumerate(vectors):
        if used[idx]:
            continue
        partner = negated.get(keys[idx])
        if partner is not None and partner != idx and not used[partner]:
            used[idx] = used[partner] = True
            eqs.append(v)
        else:
            used[idx] = True
            ineqs.append(v)

    def dense(items):
        vec = np.zeros(len(columns))
        for j, c in items.items():
            vec[j] = float(c)
        return vec

    eq = np.vstack([dense(v) for v in eqs]) if eqs else np.zeros((0, len(columns)))
    ineq = (
        np.vstack([dense(v) for v in ineqs]) if ineqs else np.zeros((0, len(columns)))
    )
    return eq, ineq


def _primal(scores: np.ndarray) -> np.ndarray:
    shift = scores.max()
    w = np.exp(scores - shift)
    return w / w.sum()


def _dual_value(scores: np.ndarray) -> float:
    shift = scores.max()
    return float(shift + math.log(np.exp(scores - shift).sum()))


def _residual(eq_vals, in_vals, nu) -> float:
    parts = [0.0]
    if eq_vals.size:
        parts.append(float(np.abs(eq_vals).max()))
    if in_vals.size:
        parts.append(float(np.maximum(in_vals, 0.0).max()))
        parts.append(float(np.abs(nu * in_vals).max()))
    return max(parts)


def _newton_polish(eq, ineq, mu, nu, tol, act_eps):
    """Solve the active-set KKT equalities by damped Newton on the dual.

    Returns (mu, nu) candidates; the caller accepts them only if the true
    residual improves, so a wrong active-set guess is harmless.
    """
    x = _primal(-(eq.T @ mu + ineq.T @ nu))
    in_vals = ineq @ x if len(ineq) else np.zeros(0)
    active = [
        j for j in range(len(ineq)) if nu[j] > 1e-12 or in_vals[j] > -act_eps
    ]
    rows = np.vstack([eq, ineq[active]]) if len(eq) or active else None
    if rows is None or not len(rows):
        return mu, nu
    theta = np.concatenate([mu, nu[active]])
    for _ in range(40):
        x = _primal(-(rows.T @ theta))
        g = rows @ x
        norm = np.abs(g).max()
        if norm < tol / 10:
            break
        rx = rows @ x
        hess = (rows * x) @ rows.T - np.outer(rx, rx)
        try:
            delta = np.linalg.lstsq(hess, g, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        step = 1.0
        improved = False
        for _ in range(25):
            cand = theta + step * delta
            g_cand = rows @ _primal(-(rows.T @ cand))
            if np.abs(g_cand).max() < norm:
                theta = cand
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    new_mu = theta[: len(eq)]
    new_nu = np.zeros_like(nu)
    new_nu[active] = np.maximum(theta[len(eq):], 0.0)
    return new_mu, new_nu


def solve_maxent(
    kb: KnowledgeBase,
    ws: WorldSpace,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> MaxEntSolution:
    """Maximize -sum x ln x over the axiom-feasible distributions.

    Raises InfeasibleError on an infeasible axiom set.  Non-convergence
    within the iteration cap is reported in the result, not raised.
    """
    rows = kb_rows(kb, ws)
    n = len(ws)

    # exact presolve: worlds whose probability the axioms force to zero
    free = []
    for i in range(n):
        _, high = probability_bounds(rows, n, [i])
        if high.status == "infeasible":
            raise InfeasibleError("axiom system admits no distribution")
        if high.value != 0:
            free.append(i)

    eq, ineq = _constraint_rows(rows, free)
    mu = np.zeros(len(eq))
    nu = np.zeros(len(ineq))
    step = 1.0
    iterations = 0

    def state(mu, nu):
        x = _primal(-(eq.T @ mu + ineq.T @ nu))
        eq_vals = eq @ x if len(eq) else np.zeros(0)
        in_vals = ineq @ x if len(ineq) else np.zeros(0)
        return x, eq_vals, in_vals, _residual(eq_vals, in_vals, nu)

    x, eq_vals, in_vals, residual = state(mu, nu)
    while residual >= tol and iterations < max_iter:
        if iterations % _POLISH_EVERY == _POLISH_EVERY - 1:
            act_eps = max(10 * tol, min(1e-5, residual))
            cand_mu, cand_nu = _newton_polish(eq, ineq, mu, nu, tol, act_eps)
            _, _, _, cand_res = state(cand_mu, cand_nu)
            if cand_res < residual:
                mu, nu = cand_mu, cand_nu
                x, eq_vals, in_vals, residual = state(mu, nu)
                iterations += 1
                continue
        # projected gradient step with Armijo backtracking on the dual
        value = _dual_value(-(eq.T @ mu + ineq.T @ nu))
        grad_mu, grad_nu = -eq_vals, -in_vals
        while True:
            cand_mu = mu - step * grad_mu
            cand_nu = np.maximum(0.0, nu - step * grad_nu)
            d_mu, d_nu = cand_mu - mu, cand_nu - nu
            cand_value = _dual_value(-(eq.T @ cand_mu + ineq.T @ cand_nu))
            decrease = (
                grad_mu @ d_mu
                + grad_nu @ d_nu
                + (d_mu @ d_mu + d_nu @ d_nu) / (2 * step)
            )
            if cand_value <= value + decrease or step < 1e-18:
                break
            step *= 0.5
        mu, nu = cand_mu, cand_nu
        step = min(step * 1.5, 1e12)
        iterations += 1
        x, eq_vals, in_vals, residual = state(mu, nu)

    distribution = [0.0] * n
    for j, i in enumerate(free):
        distribution[i] = float(x[j])
    entropy = float(-(x[x > 0] * np.log(x[x > 0])).sum())
    return MaxEntSolution(
        tuple(distribution), entropy, residual, iterations, residual < tol
    )


def classify(interval: ProbabilityInterval) -> str:
    if interval.is_point:
        return PINNED
    if interval.is_vacuous:
        return UNDETERMINED
    return PARTIAL


def precision_report(
    kb: KnowledgeBase,
    ws: WorldSpace,
    queries=None,
    tol: float = DEFAULT_TOL,
) -> PrecisionReport:
    """Entailed interval versus maximum-entropy point value, per query.

    Classifies each query by what the axioms alone determine: a
    degenerate interval was pinned by the axioms, a vacuous one left
    fully underdetermined, anything else partially determined.  The
    maxent value always lies inside the entailed interval (up to solver
    tolerance); conditioning on an event of maxent probability zero
    yields no point value.
    """
    queries = list(queries) if queries is not None else list(kb.queries)
    solution = solve_maxent(kb, ws, tol=tol)
    entries = []
    for target, given in queries:
        result = entail_conditional(kb, ws, target, given)
        numer = solution.probability(extension(conjunction(target, given), ws))
        denom = solution.probability(extension(given, ws))
        value = numer / denom if denom > 0 else None
        if result.status == VACUOUS:
            value = None
        entries.append(
            PrecisionEntry(
                target=target,
                given=given,
                interval=result.interval,
                status=result.status,
                maxent_value=value,
                classification=classify(result.interval),
            )
        )
    return PrecisionReport(tuple(entries), solution)
