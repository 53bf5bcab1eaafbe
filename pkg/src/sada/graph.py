"""Directed acyclic graphs: construction, random generation, reachability,
d-separation, and a plain-text edge-list format.

Variable ids are dense 0-based integers everywhere, files included.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

VariableId = int


class GraphError(ValueError):
    """Structural problem with a graph or a query against it."""


class CycleError(GraphError):
    """Edge set contains a directed cycle."""


class EdgeListParseError(GraphError):
    """Malformed edge-list text; carries the offending 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class CausalCut:
    """A partition (left, cut_set, right) of a variable set.

    Every path between left and right passes through cut_set; the two sides
    share no variable with each other or with the cut set.
    """

    left: frozenset
    cut_set: frozenset
    right: frozenset

    def __post_init__(self):
        if self.left & self.right or self.left & self.cut_set or self.right & self.cut_set:
            raise GraphError("cut blocks must be pairwise disjoint")

    @property
    def min_side(self) -> int:
        return min(len(self.left), len(self.right))


class Dag:
    """Immutable DAG over variables 0..n-1 with bitset-backed queries.

    Ancestor and descendant closures are Python ints used as bitsets; they are
    built lazily and shared by every d-separation query on the instance.
    """

    __slots__ = ("n", "edges", "_parents", "_children", "_anc", "_desc", "_dsep_cache")

    def __init__(self, n: int, edges=()):
        if n < 0:
            raise GraphError(f"variable count must be nonnegative, got {n}")
        edge_list = []
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphError(f"self loop at {u}")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            edge_list.append((u, v))
        parents = [[] for _ in range(n)]
        children = [[] for _ in range(n)]
        for u, v in edge_list:
            parents[v].append(u)
            children[u].append(v)
        self.n = n
        self.edges = frozenset(edge_list)
        self._parents = tuple(tuple(sorted(p)) for p in parents)
        self._children = tuple(tuple(sorted(c)) for c in children)
        self._anc = None
        self._desc = None
        self._dsep_cache = {}
        self.topological_order()  # rejects cycles at construction time

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def parents(self, v: VariableId) -> tuple:
        return self._parents[v]

    def children(self, v: VariableId) -> tuple:
        return self._children[v]

    def topological_order(self) -> list:
        """Kahn's algorithm; ties broken by smallest id, so the order is
        deterministic for a given edge set."""
        indeg = [len(self._parents[v]) for v in range(self.n)]
        ready = [v for v in range(self.n) if indeg[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != self.n:
            raise CycleError("edge set contains a directed cycle")
        return order

    def _ancestor_bits(self):
        if self._anc is None:
            anc = [0] * self.n
            for v in self.topological_order():
                a = 0
                for p in self._parents[v]:
                    a |= anc[p] | (1 << p)
                anc[v] = a
            self._anc = anc
        return self._anc

    def _descendant_bits(self):
        if self._desc is None:
            desc = [0] * self.n
            for v in reversed(self.topological_order()):
                d = 0
                for c in self._children[v]:
                    d |= desc[c] | (1 << c)
                desc[v] = d
            self._desc = desc
        return self._desc

    def ancestors(self, v: VariableId) -> frozenset:
        """Strict ancestors of v."""
        return _bits_to_set(self._ancestor_bits()[v])

    def descendants(self, v: VariableId) -> frozenset:
        """Strict descendants of v."""
        return _bits_to_set(self._descendant_bits()[v])

    def reachable(self, u: VariableId, v: VariableId) -> bool:
        """True when a directed path of length >= 1 runs from u to v."""
        u, v = int(u), int(v)
        self._check_id(u)
        self._check_id(v)
        return bool((self._descendant_bits()[u] >> v) & 1)

    def d_separated(self, u: VariableId, v: VariableId, z) -> bool:
        """Bayes-ball reachability on the trail graph.

        A path is blocked when some non-collider on it is in z, or some
        collider has neither itself nor any descendant in z.
        """
        u, v = int(u), int(v)
        self._check_id(u)
        self._check_id(v)
        if u == v:
            raise GraphError("d-separation query needs two distinct variables")
        z_bits = 0
        for w in z:
            w = int(w)
            self._check_id(w)
            z_bits |= 1 << w
        if (z_bits >> u) & 1 or (z_bits >> v) & 1:
            raise GraphError("conditioning set must exclude the queried pair")
        return self._d_separated_bits(u, v, z_bits)

    def _d_separated_bits(self, u: int, v: int, z_bits: int) -> bool:
        if u > v:
            u, v = v, u
        key = (u, v, z_bits)
        cached = self._dsep_cache.get(key)
        if cached is not None:
            return cached
        anc = self._ancestor_bits()
        open_colliders = z_bits  # nodes whose conditioning opens a collider
        rest = z_bits
        while rest:
            w = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            # every ancestor of a conditioned node has a conditioned descendant
            open_colliders |= anc[w]
        target = 1 << v
        # direction encodes how the ball arrived: from a child (up) or parent (down)
        up, down = 1 << u, 0
        seen_up, seen_down = up, 0
        stack = [(u, True)]
        connected = False
        while stack:
            x, from_child = stack.pop()
            x_in_z = (z_bits >> x) & 1
            if from_child:
                if x_in_z:
                    continue
                for p in self._parents[x]:
                    b = 1 << p
                    if b & target:
                        connected = True
                        break
                    if not seen_up & b:
                        seen_up |= b
                        stack.append((p, True))
                if connected:
                    break
                for c in self._children[x]:
                    b = 1 << c
                    if b & target:
                        connected = True
                        break
                    if not seen_down & b:
                        seen_down |= b
                        stack.append((c, False))
                if connected:
                    break
            else:
                if (open_colliders >> x) & 1:
                    for p in self._parents[x]:
                        b = 1 << p
                        if b & target:
                            connected = True
                            break
                        if not seen_up & b:
                            seen_up |= b
                            stack.append((p, True))
                    if connected:
                        break
                if not x_in_z:
                    for c in self._children[x]:
                        b = 1 << c
                        if b & target:
                            connected = True
                            break
                        if not seen_down & b:
                            seen_down |= b
                            stack.append((c, False))
                    if connected:
                        break
        result = not connected
        self._dsep_cache[key] = result
        return result

    def _check_id(self, v: int):
        if not (0 <= v < self.n):
            raise GraphError(f"variable id {v} out of range for n={self.n}")

    def __eq__(self, other):
        return isinstance(other, Dag) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Dag(n={self.n}, edges={sorted(self.edges)})"


def _bits_to_set(bits: int) -> frozenset:
    out = []
    while bits:
        out.append((bits & -bits).bit_length() - 1)
        bits &= bits - 1
    return frozenset(out)


def generate_random_dag(n: int, avg_in_degree: float, seed) -> Dag:
    """Random DAG in which variable i draws its parent count from the two-point
    distribution on {floor(d), ceil(d)} with mean d = avg_in_degree, capped at
    i, and picks that many parents uniformly without replacement from 0..i-1.

    The identity permutation is the topological order by construction.
    """
    if n < 1:
        raise GraphError(f"need at least one variable, got n={n}")
    if avg_in_degree < 0:
        raise GraphError(f"average in-degree must be nonnegative, got {avg_in_degree}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lo = math.floor(avg_in_degree)
    hi = math.ceil(avg_in_degree)
    p_hi = avg_in_degree - lo
    edges = []
    for child in range(1, n):
        r = hi if (p_hi > 0 and rng.random() < p_hi) else lo
        k = min(r, child)
        if k > 0:
            for p in rng.choice(child, size=k, replace=False):
                edges.append((int(p), child))
    return Dag(n, edges)


def save_dag(g: Dag, path) -> None:
    """Write one `parent child` pair per line, sorted. The `n=<count>` header
    appears only when the edges alone underdetermine the variable count."""
    top = max((max(u, v) for u, v in g.edges), default=-1)
    with open(path, "w") as fh:
        if top + 1 != g.n:
            fh.write(f"n={g.n}\n")
        for u, v in sorted(g.edges):
            fh.write(f"{u} {v}\n")


def load_dag(path) -> Dag:
    """Parse the edge-list format; the `n=` header is optional and the count
    defaults to max id + 1. Malformed lines raise EdgeListParseError with the
    line number; structural problems raise through the Dag constructor."""
    n = None
    edges = []
    max_id = -1
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("n="):
                if n is not None:
                    raise EdgeListParseError("repeated n= header", line_no)
                if edges:
                    raise EdgeListParseError("n= header must precede edges", line_no)
                try:
                    n = int(line[2:])
                except ValueError:
                    raise EdgeListParseError(f"bad count {line[2:]!r}", line_no) from None
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListParseError(f"expected two ids, got {len(parts)}", line_no)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(f"non-integer id in {line!r}", line_no) from None
            if u < 0 or v < 0:
                raise EdgeListParseError(f"negative id in {line!r}", line_no)
            edges.append((u, v))
            max_id = max(max_id, u, v)
    if n is None:
        n = max_id + 1
    return Dag(n, edges)
