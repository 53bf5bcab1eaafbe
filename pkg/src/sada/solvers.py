"""Basic causal solvers: the pluggable component the recursive framework
calls on small variable subsets. Each returns an EdgeSet whose significance
scores share one scale per run: higher means more trusted.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import stats

from .citest import g2_p_value
from .graph import Dag
from .synth import SampleMatrix


class SolverError(ValueError):
    """Invalid solver input."""


class RankDeficientError(SolverError):
    """Regression design has no unique least-squares solution."""


class Edge(NamedTuple):
    parent: int
    child: int
    significance: float


class EdgeSet:
    """Directed edges keyed by ordered pair; a duplicate insertion keeps the
    larger significance, so unions are well defined."""

    __slots__ = ("_sig",)

    def __init__(self, edges=()):
        self._sig = {}
        for parent, child, sig in edges:
            self.add(parent, child, sig)

    def add(self, parent: int, child: int, significance: float) -> None:
        parent, child = int(parent), int(child)
        if parent == child:
            raise SolverError(f"self loop at {parent}")
        sig = float(significance)
        if not np.isfinite(sig) or sig < 0:
            raise SolverError(f"significance must be finite and nonnegative, got {sig}")
        key = (parent, child)
        old = self._sig.get(key)
        if old is None or sig > old:
            self._sig[key] = sig

    def remove(self, parent: int, child: int) -> None:
        del self._sig[(parent, child)]

    def significance(self, parent: int, child: int) -> float:
        return self._sig[(parent, child)]

    def pairs(self) -> frozenset:
        return frozenset(self._sig)

    def variables(self) -> frozenset:
        out = set()
        for u, v in self._sig:
            out.add(u)
            out.add(v)
        return frozenset(out)

    @classmethod
    def union_max(cls, *sets) -> "EdgeSet":
        out = cls()
        for es in sets:
            for e in es:
                out.add(*e)
        return out

    def __contains__(self, pair) -> bool:
        return (int(pair[0]), int(pair[1])) in self._sig

    def __len__(self) -> int:
        return len(self._sig)

    def __iter__(self):
        for (u, v) in sorted(self._sig):
            yield Edge(u, v, self._sig[(u, v)])

    def __eq__(self, other):
        return isinstance(other, EdgeSet) and self._sig == other._sig

    def __repr__(self):
        return f"EdgeSet({[tuple(e) for e in self]})"


def _checked_vars(data: SampleMatrix, variables) -> list:
    vs = sorted({int(v) for v in variables})
    for v in vs:
        if not (0 <= v < data.n):
            raise SolverError(f"variable id {v} out of range for n={data.n}")
    return vs


def _corr_against(x: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Correlation of one vector with each column; degenerate columns give 0."""
    xc = x - x.mean()
    cc = cols - cols.mean(axis=0)
    sx = np.sqrt((xc * xc).mean())
    sc = np.sqrt((cc * cc).mean(axis=0))
    denom = sx * sc
    num = (xc[:, None] * cc).mean(axis=0)
    out = np.zeros(cols.shape[1])
    good = denom > 1e-12
    out[good] = num[good] / denom[good]
    return out


def _exogeneity_order(x: np.ndarray) -> list:
    """Repeatedly take the variable whose removal leaves the least dependence
    between itself and the other variables' regression residuals, deflating
    the rest onto it after each pick."""
    m, k = x.shape
    work = (x - x.mean(axis=0)) / x.std(axis=0)
    remaining = list(range(k))
    order = []
    while len(remaining) > 1:
        best, best_score = None, None
        for pos, _ in enumerate(remaining):
            xi = work[:, pos]
            beta = work.T @ xi / m
            resid = work - np.outer(xi, beta)
            resid[:, pos] = 0.0
            c1 = np.abs(_corr_against(xi, np.tanh(resid)))
            c2 = np.abs(_corr_against(np.tanh(xi), resid))
            score = float(c1.sum() + c2.sum() - c1[pos] - c2[pos])
            if best_score is None or score < best_score:
                best, best_score = pos, score
        order.append(remaining[best])
        xi = work[:, best]
        beta = work.T @ xi / m
        work = work - np.outer(xi, beta)
        work = np.delete(work, best, axis=1)
        sd = work.std(axis=0)
        if np.any(sd <= 1e-12):
            # a deflated column collapsing to a constant pins its order slot
            sd = np.where(sd <= 1e-12, 1.0, sd)
        work = (work - work.mean(axis=0)) / sd
        del remaining[best]
    order.extend(remaining)
    return order


def solve_lingam(data: SampleMatrix, variables, prune_alpha: float = 0.05) -> EdgeSet:
    """Linear non-Gaussian solver: exogeneity-based causal order, then a
    regression of each variable on all its order predecessors, keeping the
    coefficients whose Wald test rejects zero at prune_alpha."""
    if data.kind != "continuous":
        raise SolverError("linear solver needs continuous samples")
    if not (0 < prune_alpha < 1):
        raise SolverError(f"prune_alpha must lie in (0, 1), got {prune_alpha}")
    vs = _checked_vars(data, variables)
    if len(vs) < 2:
        return EdgeSet()
    m = data.m
    if m <= len(vs):
        raise RankDeficientError(f"m={m} too small for {len(vs)} variables")
    x = data.values[:, vs]
    sd = x.std(axis=0)
    if np.any(sd <= 0):
        raise SolverError("constant column in continuous data")
    x = (x - x.mean(axis=0)) / sd
    order = _exogeneity_order(x)
    result = EdgeSet()
    for step in range(1, len(order)):
        child = order[step]
        preds = order[:step]
        design = x[:, preds]
        y = x[:, child]
        gram = design.T @ design
        try:
            gram_inv = np.linalg.inv(gram)
        except np.linalg.LinAlgError:
            raise RankDeficientError("collinear predecessors in regression") from None
        beta = gram_inv @ design.T @ y
        resid = y - design @ beta
        dof = m - len(preds)
        s2 = float(resid @ resid) / dof
        var = s2 * np.diag(gram_inv)
        with np.errstate(divide="ignore", invalid="ignore"):
            wald = np.where(var > 0, beta * beta / var, np.inf)
        p = stats.chi2.sf(wald, 1)
        for j, pred in enumerate(preds):
            if p[j] < prune_alpha:
                result.add(vs[pred], vs[child], 1.0 - float(p[j]))
    return result


def solve_discrete_anm(data: SampleMatrix, variables, alpha: float = 0.05) -> EdgeSet:
    """Pairwise additive-noise solver for discrete data with cyclic residuals.

    For each ordered pair, fit f(x) = the conditional mode of y given x and
    test (y - f(x)) mod k against x with G2. A direction is emitted only when
    its residual test accepts and the reverse one rejects; ambiguity emits
    nothing, and cycles are left for the merge stage to resolve.
    """
    if data.kind != "discrete":
        raise SolverError("additive-noise solver needs discrete samples")
    if not (0 < alpha < 1):
        raise SolverError(f"alpha must lie in (0, 1), got {alpha}")
    vs = _checked_vars(data, variables)
    if len(vs) < 2:
        return EdgeSet()
    k = int(data.num_states)
    cols = {v: data.values[:, v] for v in vs}
    usable = [v for v in vs if cols[v].min() != cols[v].max()]
    forward_p = {}
    for x_var in usable:
        for y_var in usable:
            if x_var == y_var:
                continue
            x, y = cols[x_var], cols[y_var]
            table = np.bincount(y + k * x, minlength=k * k).reshape(k, k)
            mode = table.argmax(axis=1)
            resid = (y - mode[x]) % k
            forward_p[(x_var, y_var)] = g2_p_value(x, resid, k)
    result = EdgeSet()
    for (x_var, y_var), p_fwd in forward_p.items():
        p_bwd = forward_p[(y_var, x_var)]
        if p_fwd > alpha and p_bwd <= alpha:
            result.add(x_var, y_var, p_fwd)
    return result


def oracle_solver(g_true: Dag, variables) -> EdgeSet:
    """Ground-truth solver: the edges of g_true induced on the variable set,
    all at significance 1.0."""
    vs = {int(v) for v in variables}
    for v in vs:
        if not (0 <= v < g_true.n):
            raise SolverError(f"variable id {v} out of range for n={g_true.n}")
    result = EdgeSet()
    for u, v in g_true.edges:
        if u in vs and v in vs:
            result.add(u, v, 1.0)
    return result


def make_oracle_solver(g_true: Dag):
    """Bind the truth into the solve(data, vars) shape the framework takes."""

    def solve(data, variables):
        return oracle_solver(g_true, variables)

    return solve
