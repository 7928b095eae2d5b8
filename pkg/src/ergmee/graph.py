"""Mutable sparse undirected simple graph with node attributes.

The graph is the state of the Markov chain: the only mutation is toggling
one edge at a time, and every query the change statistics need (degree,
neighbor membership, shared partners) is O(1) or O(degree).

Nodes are dense 0-based integer ids. Any remapping from external labels is
the responsibility of the I/O layer.
"""

from __future__ import annotations

import enum
from typing import Iterable, Iterator, NamedTuple


class ToggleDirection(enum.Enum):
    ADDED = 1
    REMOVED = -1


class Dyad(NamedTuple):
    """Unordered node pair in canonical order i < j."""

    i: int
    j: int


def make_dyad(a: int, b: int) -> Dyad:
    """Canonicalize an unordered pair into a Dyad; rejects self-pairs."""
    if a == b:
        raise ValueError(f"self-loop dyad ({a}, {a}) is not allowed")
    return Dyad(a, b) if a < b else Dyad(b, a)


class Graph:
    """Undirected simple graph on nodes 0..n-1 backed by per-node hash sets.

    Maintains three caches kept consistent by ``toggle``:
      * ``edge_count``  - number of edges,
      * ``adj[i]``      - neighbor set of i (len gives the degree),
      * an edge list with positional index, so a uniformly random edge can
        be drawn in O(1) (needed by fixed-density proposals).

    Single-writer: one simulation or estimation run mutates a graph at a
    time; concurrent runs must operate on private copies.
    """

    __slots__ = ("n", "adj", "edge_count", "_edge_list", "_edge_pos")

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("node count must be non-negative")
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.edge_count = 0
        self._edge_list: list[tuple[int, int]] = []
        self._edge_pos: dict[tuple[int, int], int] = {}

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        g = cls(n)
        for a, b in edges:
            i, j = (a, b) if a < b else (b, a)
            if not g.has_edge(i, j):
                g.toggle(i, j)
        return g

    @classmethod
    def complete(cls, n: int) -> "Graph":
        g = cls(n)
        for i in range(n):
            for j in range(i + 1, n):
                g.toggle(i, j)
        return g

    # -- queries -----------------------------------------------------------

    @property
    def max_edges(self) -> int:
        return self.n * (self.n - 1) // 2

    def density(self) -> float:
        m = self.max_edges
        return self.edge_count / m if m else 0.0

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def degrees(self) -> list[int]:
        return [len(s) for s in self.adj]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.adj[i]

    def neighbors(self, i: int) -> frozenset[int]:
        """Neighbor set of i as an immutable view."""
        return frozenset(self.adj[i])

    def edges(self) -> Iterator[tuple[int, int]]:
        """All edges as canonical (i, j) pairs, i < j."""
        return iter(self._edge_list)

    def _check_pair(self, i: int, j: int) -> None:
        n = self.n
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"node id out of range for n={n}: ({i}, {j})")
        if i == j:
            raise ValueError(f"self-loop ({i}, {i}) is not allowed")

    # -- mutation ----------------------------------------------------------

    def toggle(self, i: int, j: int) -> ToggleDirection:
        """Flip the presence of edge (i, j); returns which direction occurred.

        Keeps edge_count, adjacency and the edge list consistent. Applying
        the same toggle twice restores the exact prior state.
        """
        self._check_pair(i, j)
        if i > j:
            i, j = j, i
        ai = self.adj[i]
        if j in ai:
            ai.discard(j)
            self.adj[j].discard(i)
            self.edge_count -= 1
            pos = self._edge_pos.pop((i, j))
            last = self._edge_list.pop()
            if last != (i, j):
                self._edge_list[pos] = last
                self._edge_pos[last] = pos
            return ToggleDirection.REMOVED
        ai.add(j)
        self.adj[j].add(i)
        self.edge_count += 1
        self._edge_pos[(i, j)] = len(self._edge_list)
        self._edge_list.append((i, j))
        return ToggleDirection.ADDED

    def random_edge(self, rng) -> tuple[int, int]:
        """Uniformly random existing edge. O(1)."""
        if not self._edge_list:
            raise ValueError("graph has no edges")
        return self._edge_list[int(rng.random() * len(self._edge_list))]

    def random_nonedge(self, rng, max_tries: int = 10_000) -> tuple[int, int]:
        """Uniformly random absent dyad, by rejection on sparse graphs."""
        n = self.n
        if self.edge_count >= self.max_edges:
            raise ValueError("graph is complete; no non-edges")
        for _ in range(max_tries):
            i = int(rng.random() * n)
            j = int(rng.random() * (n - 1))
            if j >= i:
                j += 1
            if j not in self.adj[i]:
                return (i, j) if i < j else (j, i)
        # Near-complete graph: fall back to explicit enumeration.
        nonedges = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if j not in self.adj[i]
        ]
        return nonedges[int(rng.random() * len(nonedges))]

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.n = self.n
        g.adj = [set(s) for s in self.adj]
        g.edge_count = self.edge_count
        g._edge_list = list(self._edge_list)
        g._edge_pos = dict(self._edge_pos)
        return g

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


class AttributeTable:
    """Node attribute storage: binary (0/1) and categorical (small int ids).

    Every attribute must cover every node; partial columns are rejected.
    ``categorical_levels`` keeps the original level labels per categorical
    attribute so reports can name them.
    """

    def __init__(self, n: int):
        self.n = n
        self.binary: dict[str, list[int]] = {}
        self.categorical: dict[str, list[int]] = {}
        self.categorical_levels: dict[str, list[str]] = {}

    def add_binary(self, name: str, values: Iterable[int]) -> None:
        vals = [int(v) for v in values]
        if len(vals) != self.n:
            raise ValueError(
                f"binary attribute {name!r} covers {len(vals)} nodes, expected {self.n}"
            )
        bad = sorted({v for v in vals if v not in (0, 1)})
        if bad:
            raise ValueError(f"binary attribute {name!r} has non-0/1 values: {bad}")
        self.binary[name] = vals

    def add_categorical(
        self, name: str, values: Iterable[int], levels: list[str] | None = None
    ) -> None:
        vals = [int(v) for v in values]
        if len(vals) != self.n:
            raise ValueError(
                f"categorical attribute {name!r} covers {len(vals)} nodes, expected {self.n}"
            )
        if any(v < 0 for v in vals):
            raise ValueError(f"categorical attribute {name!r} has negative ids")
        self.categorical[name] = vals
        if levels is not None:
            self.categorical_levels[name] = list(levels)

    def binary_values(self, name: str) -> list[int]:
        try:
            return self.binary[name]
        except KeyError:
            raise ValueError(f"unknown binary attribute {name!r}") from None

    def categorical_values(self, name: str) -> list[int]:
        try:
            return self.categorical[name]
        except KeyError:
            raise ValueError(f"unknown categorical attribute {name!r}") from None


def toggle_edge(g: Graph, d: Dyad) -> ToggleDirection:
    """Toggle the edge named by a canonical dyad."""
    if d.i >= d.j:
        raise ValueError(f"dyad {d} is not canonical (need i < j)")
    return g.toggle(d.i, d.j)


def shared_partner_count(g: Graph, i: int, j: int) -> int:
    """|N(i) ∩ N(j)|, the number of common neighbors of i and j.

    CPython set intersection iterates the smaller operand and probes the
    larger, which is the asymmetry this call depends on for speed.
    """
    g._check_pair(i, j)
    return len(g.adj[i] & g.adj[j])


def isolate_count(g: Graph) -> int:
    """Number of degree-0 nodes."""
    return sum(1 for s in g.adj if not s)
