import numpy as np
import pytest

from shp import base
from shp.graph import (
    CausalGraph,
    find_cycle,
    is_acyclic,
    require_acyclic,
    topological_order,
)


def test_rejects_self_loops_unknown_and_duplicate_nodes():
    with pytest.raises(base.ValidationError, match='Self loop'):
        CausalGraph(('a',), {('a', 'a')})
    with pytest.raises(base.UnknownEventTypeError):
        CausalGraph(('a',), {('a', 'b')})
    with pytest.raises(base.ValidationError, match='Duplicate'):
        CausalGraph(('a', 'a'))


def test_parents_children_and_adjacency(chain_graph):
    assert chain_graph.parents('a') == ()
    assert chain_graph.parents('c') == ('b',)
    assert chain_graph.children('a') == ('b',)
    assert chain_graph.adjacency().tolist() == [
        [False, True, False],
        [False, False, True],
        [False, False, False],
    ]
    with pytest.raises(base.UnknownEventTypeError):
        chain_graph.parents('z')


def test_parents_follow_node_order():
    graph = CausalGraph(('c', 'b', 'a'), {('a', 'b'), ('c', 'b')})
    assert graph.parents('b') == ('c', 'a')
    assert graph.sorted_edges() == [('c', 'b'), ('a', 'b')]


def test_edge_moves(chain_graph):
    assert chain_graph.reverse_edge('a', 'b').edges == {('b', 'a'), ('b', 'c')}
    assert chain_graph.remove_edge('a', 'b').edges == {('b', 'c')}
    with pytest.raises(base.ValidationError):
        chain_graph.remove_edge('a', 'c')
    # Graphs are values, moves never mutate
    assert len(chain_graph) == 2


def test_from_adjacency_ignores_diagonal():
    matrix = np.array([[1.0, 0.5], [0.0, 2.0]])
    graph = CausalGraph.from_adjacency(matrix, ('a', 'b'))
    assert graph.edges == {('a', 'b')}


def test_complete_and_empty():
    complete = CausalGraph.complete(('a', 'b', 'c'))
    assert len(complete) == 6
    assert not is_acyclic(complete)
    assert is_acyclic(CausalGraph.empty(('a', 'b')))


def test_cycles():
    graph = CausalGraph(
        ('a', 'b', 'c'), {('a', 'b'), ('b', 'c'), ('c', 'a')}
    )
    cycle = find_cycle(graph)
    assert cycle is not None
    assert set(cycle) == {'a', 'b', 'c'}
    with pytest.raises(base.CyclicGraphError) as excinfo:
        require_acyclic(graph)
    assert set(excinfo.value.cycle) == {'a', 'b', 'c'}
    assert find_cycle(graph.remove_edge('c', 'a')) is None


def test_topological_order_ties_by_declaration():
    graph = CausalGraph(('d', 'c', 'b', 'a'), {('a', 'b')})
    assert topological_order(graph) == ['d', 'c', 'a', 'b']


def test_dict_round_trip(chain_graph):
    data = chain_graph.to_dict()
    assert data == {
        'nodes': ['a', 'b', 'c'],
        'edges': [['a', 'b'], ['b', 'c']],
    }
    assert CausalGraph.from_dict(data) == chain_graph


def test_networkx_view(chain_graph):
    view = chain_graph.to_networkx()
    assert list(view.nodes) == ['a', 'b', 'c']
    assert set(view.edges) == chain_graph.edges
