"""Recursive split-and-merge causal discovery.

The driver partitions a variable set with causal cuts found through
conditional-independence queries, solves small subproblems with a pluggable
solver, and merges partial edge sets while removing conflicts and
redundant direct edges.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .graph import CausalCut
from .solvers import EdgeSet


class FrameworkError(ValueError):
    pass


@dataclass(frozen=True)
class SadaConfig:
    """Knobs for the recursive driver.

    theta: stop partitioning once a subproblem has at most this many
    variables.  k: independent restarts of the cut search per node.
    max_cond: conditioning-set cap for every CI query (None lifts it).
    """

    theta: int = 10
    k: int = 1
    max_cond: Optional[int] = 3
    alpha_level: float = 0.05
    seed: Optional[int] = None

    def __post_init__(self):
        if int(self.theta) != self.theta or self.theta < 2:
            raise FrameworkError(f"theta must be an integer >= 2, got {self.theta}")
        if int(self.k) != self.k or self.k < 1:
            raise FrameworkError(f"k must be an integer >= 1, got {self.k}")
        if self.max_cond is not None and (int(self.max_cond) != self.max_cond or self.max_cond < 0):
            raise FrameworkError(f"max_cond must be None or an integer >= 0, got {self.max_cond}")
        if not (0.0 < self.alpha_level < 1.0):
            raise FrameworkError(f"alpha_level must lie in (0, 1), got {self.alpha_level}")


class CutRecord(NamedTuple):
    """One accepted cut together with the variable set it partitioned."""

    variables: frozenset
    cut: CausalCut


class SubproblemRecord(NamedTuple):
    """One solver invocation: the variables handed over and the edges returned."""

    variables: frozenset
    edges: EdgeSet


def _grow_from_seed(oracle, ordered_vars, u, v, seed_separator, max_cond):
    """Assign every remaining variable to one side of the seed pair or to the
    cut set, then try to move cut members outward.  Returns (v1, c, v2) sets.

    A variable joins V2 when some subset of the current cut set separates it
    from every member of V1; the V1 test runs first, so a variable separable
    from both sides lands in V2.  The refinement pass re-tests each original
    cut member s against the current sides using the current cut set minus s.
    """
    v1 = {u}
    v2 = {v}
    cut = set(seed_separator)
    for w in ordered_vars:
        if w == u or w == v or w in cut:
            continue
        if all(oracle.separable(w, a, cut, max_cond) for a in v1):
            v2.add(w)
        elif all(oracle.separable(w, b, cut, max_cond) for b in v2):
            v1.add(w)
        else:
            cut.add(w)
    for s in sorted(cut):
        rest = cut - {s}
        if all(oracle.separable(s, a, rest, max_cond) for a in v1):
            cut.remove(s)
            v2.add(s)
        elif all(oracle.separable(s, b, rest, max_cond) for b in v2):
            cut.remove(s)
            v1.add(s)
    return v1, cut, v2


def _sample_seed_pair(oracle, ordered_vars, max_cond, rng):
    """Shuffle all unordered pairs, probe the first 5n of them, and return
    (u, v, smallest separator) for the first separable pair, else None."""
    n = len(ordered_vars)
    pairs = [(ordered_vars[i], ordered_vars[j]) for i in range(n) for j in range(i + 1, n)]
    order = rng.permutation(len(pairs))
    budget = 5 * n
    everyone = set(ordered_vars)
    for idx in order[:budget]:
        u, v = pairs[int(idx)]
        cands = everyone - {u, v}
        # separable() first: a cheap reject for oracles that can decide
        # existence without scanning subsets (queries are cached otherwise)
        if not oracle.separable(u, v, cands, max_cond):
            continue
        sep = oracle.find_separator(u, v, cands, max_cond)
        if sep is not None:
            return u, v, sep
    return None


def find_causal_cut(oracle, variables, cfg: SadaConfig, rng=None):
    """Search for a causal cut of `variables`, best of cfg.k restarts.

    Each restart seeds two separable variables, grows both sides greedily in
    ascending id order, and refines the cut set.  The winner maximizes the
    smaller side size; ties go to the smaller cut set.  Returns None when no
    restart produces a separable seed pair or a cut with two nonempty sides.
    """
    ordered = sorted(int(w) for w in variables)
    if len(ordered) < 3:
        raise FrameworkError(f"cut search needs at least 3 variables, got {len(ordered)}")
    if len(set(ordered)) != len(ordered):
        raise FrameworkError("duplicate variable ids")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    best = None
    best_key = None
    for _ in range(cfg.k):
        seed = _sample_seed_pair(oracle, ordered, cfg.max_cond, rng)
        if seed is None:
            continue
        u, v, sep = seed
        v1, cut, v2 = _grow_from_seed(oracle, ordered, u, v, sep, cfg.max_cond)
        if not v1 or not v2:
            continue
        candidate = CausalCut(frozenset(v1), frozenset(cut), frozenset(v2))
        key = (candidate.min_side, -len(candidate.cut_set))
        if best_key is None or key > best_key:
            best, best_key = candidate, key
    return best


def _simple_path_interiors(children, source, target, max_edges):
    """Interior variable sets of simple directed paths source -> target with
    at least 2 and at most max_edges edges, deduplicated."""
    interiors = []
    seen = set()
    stack = [(source, (source,))]
    while stack:
        node, path = stack.pop()
        if len(path) - 1 >= max_edges:
            continue
        for nxt in children.get(node, ()):
            if nxt == target:
                if len(path) >= 2:
                    inner = frozenset(path[1:])
                    if inner not in seen:
                        seen.add(inner)
                        interiors.append(inner)
            elif nxt not in path and nxt != source:
                stack.append((nxt, path + (nxt,)))
    return interiors


def remove_conflicts_and_redundancy(edges: EdgeSet, oracle, max_cond=3) -> EdgeSet:
    """Two cleanup passes over an edge set, in descending significance.

    Conflict pass: accept edges one by one, dropping any edge whose child
    already reaches its parent through accepted edges (would close a cycle).
    Reachability is maintained incrementally as a transitive closure.

    Redundancy pass: for each surviving edge p -> c with a surviving longer
    directed path p -> ... -> c (depth-limited to 6 edges), drop the edge if
    the oracle finds a separator among some path's interior variables.
    """
    order = sorted(edges, key=lambda e: (-e.significance, e.parent, e.child))
    index = {w: i for i, w in enumerate(sorted({x for e in order for x in (e.parent, e.child)}))}
    # reach[i] = bitset of nodes reachable from i via accepted edges, excluding i
    reach = [0] * len(index)
    kept = []
    for e in order:
        p, c = index[e.parent], index[e.child]
        if (reach[c] >> p) & 1:
            continue
        delta = (1 << c) | reach[c]
        for x in range(len(reach)):
            if x == p or (reach[x] >> p) & 1:
                reach[x] |= delta
        kept.append(e)

    children = {}
    for e in kept:
        children.setdefault(e.parent, set()).add(e.child)
    surviving = []
    for e in kept:
        redundant = False
        children[e.parent].discard(e.child)
        for inner in _simple_path_interiors(children, e.parent, e.child, 6):
            if oracle.find_separator(e.parent, e.child, inner, max_cond) is not None:
                redundant = True
                break
        if not redundant:
            children[e.parent].add(e.child)
            surviving.append(e)
    out = EdgeSet()
    for e in surviving:
        out.add(e.parent, e.child, e.significance)
    return out


def merge_results(g1: EdgeSet, g2: EdgeSet, oracle, max_cond=3) -> EdgeSet:
    """Union two partial results (duplicate pairs keep the larger
    significance), then remove conflicts and redundant direct edges."""
    merged = EdgeSet.union_max(g1, g2)
    return remove_conflicts_and_redundancy(merged, oracle, max_cond)


def run_sada(data, variables, cfg: SadaConfig, solver, oracle, rng=None,
             trace=None, subproblem_log=None) -> EdgeSet:
    """Recursive split-and-merge driver.

    Solves `variables` directly once it is no bigger than cfg.theta or no cut
    can be found; otherwise recurses on both sides of the cut (each side plus
    the cut set) and merges the partial results.  `solver` is called as
    solver(data, variable_set) and must return an EdgeSet.

    Optional hooks: `trace` (a list) receives a CutRecord per accepted cut,
    `subproblem_log` (a list) a SubproblemRecord per solver invocation.
    """
    vs = sorted(int(w) for w in variables)
    if not vs:
        raise FrameworkError("variables must be nonempty")
    if len(set(vs)) != len(vs):
        raise FrameworkError("duplicate variable ids")
    if vs[0] < 0:
        raise FrameworkError(f"negative variable id {vs[0]}")
    if data is not None and vs[-1] >= data.n:
        raise FrameworkError(f"variable id {vs[-1]} out of range for {data.n} columns")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return _run(data, vs, cfg, solver, oracle, rng, trace, subproblem_log)


def _solve_leaf(data, vs, solver, subproblem_log):
    edges = solver(data, set(vs))
    if subproblem_log is not None:
        subproblem_log.append(SubproblemRecord(frozenset(vs), edges))
    return edges


def _run(data, vs, cfg, solver, oracle, rng, trace, subproblem_log):
    if len(vs) <= cfg.theta:
        return _solve_leaf(data, vs, solver, subproblem_log)
    cut = find_causal_cut(oracle, vs, cfg, rng=rng)
    if cut is None:
        return _solve_leaf(data, vs, solver, subproblem_log)
    if trace is not None:
        trace.append(CutRecord(frozenset(vs), cut))
    rng1, rng2 = rng.spawn(2)
    left = sorted(cut.left | cut.cut_set)
    right = sorted(cut.right | cut.cut_set)
    g1 = _run(data, left, cfg, solver, oracle, rng1, trace, subproblem_log)
    g2 = _run(data, right, cfg, solver, oracle, rng2, trace, subproblem_log)
    return merge_results(g1, g2, oracle, max_cond=cfg.max_cond)
