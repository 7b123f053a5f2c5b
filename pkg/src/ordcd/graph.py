"""Directed acyclic graphs over 1-based node ids and the local moves used by search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

from .errors import (
    InapplicableMove,
    NodeOutOfRange,
    ParseError,
    TooManyNodes,
    ValidationError,
    WouldCreateCycle,
)

Edge = tuple[int, int]

MAX_ENUMERATE_NODES = 4


class MoveKind(IntEnum):
    # integer values fix the canonical order Add < Delete < Reverse
    ADD = 0
    DELETE = 1
    REVERSE = 2


@dataclass(frozen=True, order=True)
class Move:
    kind: MoveKind
    edge: Edge

    def __str__(self):
        return f"{self.kind.name.capitalize()}({self.edge[0]},{self.edge[1]})"

    def inverse(self) -> "Move":
        s, t = self.edge
        if self.kind is MoveKind.ADD:
            return Move(MoveKind.DELETE, (s, t))
        if self.kind is MoveKind.DELETE:
            return Move(MoveKind.ADD, (s, t))
        return Move(MoveKind.REVERSE, (t, s))


def Add(s: int, t: int) -> Move:
    return Move(MoveKind.ADD, (s, t))


def Delete(s: int, t: int) -> Move:
    return Move(MoveKind.DELETE, (s, t))


def Reverse(s: int, t: int) -> Move:
    return Move(MoveKind.REVERSE, (s, t))


def _children_map(num_nodes: int, edges: Iterable[Edge]) -> list[list[int]]:
    children: list[list[int]] = [[] for _ in range(num_nodes + 1)]
    for s, t in edges:
        children[s].append(t)
    return children


def is_acyclic(num_nodes: int, edges: Iterable[Edge]) -> bool:
    """Kahn's algorithm; True iff the digraph has no directed cycle."""
    edges = list(edges)
    indeg = [0] * (num_nodes + 1)
    children = _children_map(num_nodes, edges)
    for _, t in edges:
        indeg[t] += 1
    stack = [v for v in range(1, num_nodes + 1) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                stack.append(c)
    return seen == num_nodes


def _reaches(children: Sequence[Sequence[int]], src: int, dst: int, skip: Edge | None = None) -> bool:
    """DFS reachability src ->* dst, optionally ignoring one edge."""
    if src == dst:
        return True
    stack = [src]
    seen = {src}
    while stack:
        v = stack.pop()
        for c in children[v]:
            if skip is not None and (v, c) == skip:
                continue
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


@dataclass(frozen=True)
class Dag:
    """Immutable DAG on nodes ``1..num_nodes``.

    Construction validates the invariants (no self loops, no 2-cycles,
    acyclic); every transformation returns a new value.
    """

    num_nodes: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValidationError("a graph needs at least one node")
        edges = frozenset((int(s), int(t)) for s, t in self.edges)
        object.__setattr__(self, "edges", edges)
        for s, t in edges:
            self._check_node(s)
            self._check_node(t)
            if s == t:
                raise ValidationError(f"self-loop on node {s}")
            if (t, s) in edges:
                raise WouldCreateCycle(f"both {s}->{t} and {t}->{s} present")
        if not is_acyclic(self.num_nodes, edges):
            raise WouldCreateCycle("edge set contains a directed cycle")

    @classmethod
    def empty(cls, num_nodes: int) -> "Dag":
        return cls(num_nodes, frozenset())

    def _check_node(self, j: int):
        if not 1 <= j <= self.num_nodes:
            raise NodeOutOfRange(f"node {j} outside 1..{self.num_nodes}")

    def parents(self, j: int) -> frozenset:
        self._check_node(j)
        return frozenset(s for s, t in self.edges if t == j)

    def parent_sets(self) -> list[tuple[int, ...]]:
        """Sorted parent tuples for nodes 1..p (index 0 is node 1)."""
        pa: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for s, t in self.edges:
            pa[t - 1].append(s)
        return [tuple(sorted(x)) for x in pa]

    def children(self) -> list[list[int]]:
        return _children_map(self.num_nodes, sorted(self.edges))

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def topological_order(self) -> list[int]:
        """Kahn order with smallest-id-first tie breaking (deterministic)."""
        import heapq

        indeg = [0] * (self.num_nodes + 1)
        for _, t in self.edges:
            indeg[t] += 1
        children = self.children()
        heap = [v for v in range(1, self.num_nodes + 1) if indeg[v] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = heapq.heappop(heap)
            order.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        return order

    def canonical_key(self) -> tuple:
        """Fewest edges first, then lexicographic sorted edge list."""
        return (len(self.edges), tuple(sorted(self.edges)))

    def __len__(self):
        return len(self.edges)


def parents(g: Dag, j: int) -> frozenset:
    return g.parents(j)


def apply_move(g: Dag, m: Move) -> Dag:
    s, t = m.edge
    g._check_node(s)
    g._check_node(t)
    if s == t:
        raise InapplicableMove(f"{m}: self-loop")
    if m.kind is MoveKind.ADD:
        if (s, t) in g.edges or (t, s) in g.edges:
            raise InapplicableMove(f"{m}: nodes already adjacent")
        if _reaches(g.children(), t, s):
            raise WouldCreateCycle(f"{m} closes a directed cycle")
        return Dag(g.num_nodes, g.edges | {(s, t)})
    if (s, t) not in g.edges:
        raise InapplicableMove(f"{m}: edge {s}->{t} not present")
    if m.kind is MoveKind.DELETE:
        return Dag(g.num_nodes, g.edges - {(s, t)})
    if _reaches(g.children(), s, t, skip=(s, t)):
        raise WouldCreateCycle(f"{m} closes a directed cycle")
    return Dag(g.num_nodes, (g.edges - {(s, t)}) | {(t, s)})


def _reachability(g: Dag) -> list[set[int]]:
    """reach[v] = nodes reachable from v by a directed path of length >= 1."""
    children = g.children()
    reach: list[set[int]] = [set() for _ in range(g.num_nodes + 1)]
    for v in reversed(g.topological_order()):
        for c in children[v]:
            reach[v].add(c)
            reach[v] |= reach[c]
    return reach


def legal_moves(g: Dag, max_parents: int | None = None) -> list[Move]:
    """All applicable moves in canonical order (Adds, Deletes, Reverses; each lexicographic).

    With ``max_parents`` set, Add and Reverse moves that would give the
    receiving node more than that many parents are dropped.
    """
    p = g.num_nodes
    reach = _reachability(g)
    indeg = [0] * (p + 1)
    for _, t in g.edges:
        indeg[t] += 1
    cap = max_parents

    adds = []
    for s in range(1, p + 1):
        for t in range(1, p + 1):
            if s == t or (s, t) in g.edges or (t, s) in g.edges:
                continue
            if s in reach[t]:
                continue
            if cap is not None and indeg[t] + 1 > cap:
                continue
            adds.append(Add(s, t))

    edges = sorted(g.edges)
    deletes = [Delete(s, t) for s, t in edges]

    reverses = []
    children = g.children()
    for s, t in edges:
        if cap is not None and indeg[s] + 1 > cap:
            continue
        # a second s ->* t path would close a cycle after reversal
        if any(c != t and t in reach[c] for c in children[s]):
            continue
        reverses.append(Reverse(s, t))
    return adds + deletes + reverses


def enumerate_dags(p: int) -> Iterator[Dag]:
    """Every labelled DAG on ``p <= 4`` nodes, once each, in canonical graph order."""
    if p < 1:
        raise ValidationError("p must be positive")
    if p > MAX_ENUMERATE_NODES:
        raise TooManyNodes(f"exhaustive enumeration supports p <= {MAX_ENUMERATE_NODES}, got {p}")
    pairs = list(itertools.combinations(range(1, p + 1), 2))
    found = []
    # each unordered pair: absent, forward, or backward
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), st in zip(pairs, states):
            if st == 1:
                edges.append((a, b))
            elif st == 2:
                edges.append((b, a))
        if is_acyclic(p, edges):
            found.append(Dag(p, frozenset(edges)))
    found.sort(key=Dag.canonical_key)
    yield from found


# -- text formats -----------------------------------------------------------


def to_edgelist(g: Dag, names: Sequence[str]) -> str:
    return "".join(f"{names[s - 1]} -> {names[t - 1]}\n" for s, t in g.sorted_edges())


def parse_edgelist(text: str, names: Sequence[str]) -> Dag:
    """Parse ``source -> target`` lines; blank lines and ``#`` comments are skipped."""
    index = {name: i + 1 for i, name in enumerate(names)}
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ParseError(f"line {lineno}: expected 'source -> target', got {raw!r}")
        src, dst = (x.strip() for x in line.split("->", 1))
        for name in (src, dst):
            if name not in index:
                raise ParseError(f"line {lineno}: unknown node name {name!r}")
        edges.add((index[src], index[dst]))
    return Dag(len(names), frozenset(edges))


def to_dot(g: Dag, names: Sequence[str], graph_name: str = "G") -> str:
    lines = [f"digraph {graph_name} {{"]
    for name in names:
        lines.append(f'  "{name}";')
    for s, t in g.sorted_edges():
        lines.append(f'  "{names[s - 1]}" -> "{names[t - 1]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
