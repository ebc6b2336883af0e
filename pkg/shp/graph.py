"""Immutable directed graphs over an ordered node set."""

from __future__ import annotations

import dataclasses
import itertools
import typing

import networkx as nx
import numpy as np

from . import base

Node = typing.Hashable
Edge = typing.Tuple[Node, Node]


@dataclasses.dataclass(frozen=True)
class CausalGraph:
    """Directed graph over event types.

    Self loops are not allowed, lagged self-excitation lives on the diagonal
    of the strength matrix instead. The graph itself may be cyclic, search
    states are checked with :func:`is_acyclic`.

    >>> graph = CausalGraph(('a', 'b', 'c'), {('a', 'b'), ('a', 'c')})
    >>> graph.parents('c')
    ('a',)
    >>> sorted(graph.add_edge('b', 'c').edges)
    [('a', 'b'), ('a', 'c'), ('b', 'c')]
    """

    nodes: tuple[Node, ...]
    edges: frozenset[Edge] = frozenset()

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise base.ValidationError(f'Duplicate nodes in {nodes}')

        edges = frozenset((src, dst) for src, dst in self.edges)
        known = set(nodes)
        for src, dst in edges:
            if src == dst:
                raise base.ValidationError(f'Self loop on {src!r}')
            for node in (src, dst):
                if node not in known:
                    raise base.UnknownEventTypeError(node)

        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'edges', edges)

    @classmethod
    def empty(cls, nodes: typing.Iterable[Node]) -> CausalGraph:
        return cls(tuple(nodes))

    @classmethod
    def complete(cls, nodes: typing.Iterable[Node]) -> CausalGraph:
        """All off-diagonal edges, both directions (cyclic for 2+ nodes)."""
        nodes = tuple(nodes)
        return cls(nodes, frozenset(itertools.permutations(nodes, 2)))

    @classmethod
    def from_adjacency(
        cls,
        adjacency: np.ndarray,
        nodes: typing.Sequence[Node],
    ) -> CausalGraph:
        """Edges wherever ``adjacency[i, j]`` is nonzero off the diagonal."""
        matrix = np.asarray(adjacency)
        edges = {
            (nodes[i], nodes[j])
            for i, j in zip(*np.nonzero(matrix))
            if i != j
        }
        return cls(tuple(nodes), frozenset(edges))

    def __len__(self) -> int:
        return len(self.edges)

    def index(self, node: Node) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise base.UnknownEventTypeError(node) from None

    def sorted_edges(self) -> list[Edge]:
        """Edges ordered by (source index, target index)."""
        position = {node: index for index, node in enumerate(self.nodes)}
        return sorted(
            self.edges, key=lambda edge: (position[edge[0]], position[edge[1]])
        )

    def parents(self, node: Node) -> tuple[Node, ...]:
        """Parents of `node` in node order."""
        self.index(node)
        return tuple(src for src in self.nodes if (src, node) in self.edges)

    def children(self, node: Node) -> tuple[Node, ...]:
        self.index(node)
        return tuple(dst for dst in self.nodes if (node, dst) in self.edges)

    def adjacency(self) -> np.ndarray:
        """Boolean matrix, ``[i, j]`` is set for nodes[i] -> nodes[j]."""
        matrix = np.zeros((len(self.nodes), len(self.nodes)), dtype=bool)
        for src, dst in self.edges:
            matrix[self.index(src), self.index(dst)] = True
        return matrix

    def add_edge(self, src: Node, dst: Node) -> CausalGraph:
        return CausalGraph(self.nodes, self.edges | {(src, dst)})

    def remove_edge(self, src: Node, dst: Node) -> CausalGraph:
        if (src, dst) not in self.edges:
            raise base.ValidationError(f'No edge {src!r} -> {dst!r}')
        return CausalGraph(self.nodes, self.edges - {(src, dst)})

    def reverse_edge(self, src: Node, dst: Node) -> CausalGraph:
        return self.remove_edge(src, dst).add_edge(dst, src)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.sorted_edges())
        return graph

    def to_dict(self) -> dict[str, typing.Any]:
        return {
            'nodes': list(self.nodes),
            'edges': [list(edge) for edge in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, data: typing.Mapping[str, typing.Any]) -> CausalGraph:
        return cls(
            tuple(data['nodes']),
            frozenset((src, dst) for src, dst in data.get('edges', [])),
        )


def is_acyclic(graph: CausalGraph) -> bool:
    """
    True when the graph admits a topological order.

    >>> is_acyclic(CausalGraph(('a', 'b', 'c'), {('a', 'b'), ('b', 'c')}))
    True
    >>> is_acyclic(CausalGraph(('a', 'b'), {('a', 'b'), ('b', 'a')}))
    False
    """
    return nx.is_directed_acyclic_graph(graph.to_networkx())


def find_cycle(graph: CausalGraph) -> tuple[Node, ...] | None:
    """One directed cycle as a node tuple, or None for a DAG."""
    try:
        cycle = nx.find_cycle(graph.to_networkx(), orientation='original')
    except nx.NetworkXNoCycle:
        return None
    return tuple(src for src, _dst, _orientation in cycle)


def topological_order(graph: CausalGraph) -> list[Node]:
    """
    Nodes with every parent before its children, ties by declaration order.

    >>> fork = CausalGraph(('a', 'b', 'c'), {('a', 'b'), ('a', 'c')})
    >>> topological_order(fork)
    ['a', 'b', 'c']
    >>> topological_order(CausalGraph(('c', 'a', 'b')))
    ['c', 'a', 'b']
    >>> topological_order(CausalGraph(('a', 'b'), {('a', 'b'), ('b', 'a')}))
    Traceback (most recent call last):
    ...
    shp.base.CyclicGraphError: Graph is cyclic: a -> b -> a
    """
    cycle = find_cycle(graph)
    if cycle is not None:
        raise base.CyclicGraphError(cycle)

    position = {node: index for index, node in enumerate(graph.nodes)}
    return list(
        nx.lexicographical_topological_sort(
            graph.to_networkx(), key=position.__getitem__
        )
    )


def require_acyclic(graph: CausalGraph) -> None:
    cycle = find_cycle(graph)
    if cycle is not None:
        raise base.CyclicGraphError(cycle)
