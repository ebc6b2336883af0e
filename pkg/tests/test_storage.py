import json
import math

import numpy as np
import pandas
import pytest

from shp import base, storage
from shp.events import BinnedCounts, ContinuousSequence
from shp.graph import CausalGraph
from shp.params import SHPParams


def write(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def test_events_round_trip(tmp_path):
    seq = ContinuousSequence.from_records(
        [('b', 0.1 + 0.2), ('a', 1 / 3), ('a, quoted', 2.5e-7)], horizon=4.0
    )
    path = tmp_path / 'events.csv'
    storage.write_events_csv(seq, path)
    restored = storage.read_events_csv(path, horizon=4.0)
    assert restored == seq
    assert path.read_text().splitlines()[0] == 'event_type,timestamp'
    assert '"a, quoted"' in path.read_text()


def test_events_horizon_defaults_to_last_event(tmp_path):
    path = write(tmp_path / 'events.csv', 'event_type,timestamp\na,2\nb,1\n')
    seq = storage.read_events_csv(path)
    assert seq.horizon == 2.0
    assert [record.event_type for record in seq.records] == ['b', 'a']


@pytest.mark.parametrize(
    'text,line',
    [
        ('event_type,timestamp\na,1\nb,x\n', 3),
        ('event_type,timestamp\na,1\nb,0\n', 3),
        ('event_type,timestamp\na,-1\n', 2),
        ('event_type,timestamp\na,1\n,2\n', 3),
        ('event_type,timestamp\na,1\nb,2,3\n', 3),
        ('type,time\na,1\n', 1),
        ('', 1),
    ],
)
def test_malformed_events(tmp_path, text, line):
    path = write(tmp_path / 'events.csv', text)
    with pytest.raises(base.DataFormatError) as excinfo:
        storage.read_events_csv(path)
    assert excinfo.value.line == line
    assert excinfo.value.exit_code == base.EXIT_IO


def test_events_beyond_the_horizon(tmp_path):
    path = write(tmp_path / 'events.csv', 'event_type,timestamp\na,1\na,5\n')
    with pytest.raises(base.DataFormatError) as excinfo:
        storage.read_events_csv(path, horizon=4.0)
    assert excinfo.value.line == 3


def test_counts_round_trip(tmp_path):
    counts = BinnedCounts(np.array([[0, 2], [3, 1], [0, 0]]), 2.0, ('x', 'y'))
    path = tmp_path / 'counts.csv'
    storage.write_counts_csv(counts, path)
    assert path.read_text() == 'bin,x,y\n1,0,2\n2,3,1\n3,0,0\n'
    restored = storage.read_counts_csv(path, delta=2.0)
    np.testing.assert_array_equal(restored.counts, counts.counts)
    assert restored.node_names == ('x', 'y')
    assert restored.delta == 2.0


def test_counts_accept_integral_floats(tmp_path):
    path = write(tmp_path / 'counts.csv', 'bin,a\n1,2.0\n2,0\n')
    assert storage.read_counts_csv(path, 1.0).counts[:, 0].tolist() == [2, 0]


@pytest.mark.parametrize(
    'text,line',
    [
        ('bin,a\n1,1\n2,1.5\n', 3),
        ('bin,a\n1,-1\n', 2),
        ('bin,a\n1,1\n3,1\n', 3),
        ('bin,a\n1,one\n', 2),
        ('bin,a,a\n1,1,1\n', 1),
        ('a,b\n1,1\n', 1),
        ('bin,a\n1,1\n2,1,1\n', 3),
    ],
)
def test_malformed_counts(tmp_path, text, line):
    path = write(tmp_path / 'counts.csv', text)
    with pytest.raises(base.DataFormatError) as excinfo:
        storage.read_counts_csv(path, 1.0)
    assert excinfo.value.line == line
    assert str(path) in str(excinfo.value)


def test_edges_round_trip(tmp_path):
    graph = CausalGraph(('a', 'b', 'c'), {('b', 'c'), ('a', 'b')})
    path = tmp_path / 'edges.csv'
    storage.write_edges_csv(graph, path)
    assert path.read_text() == 'src,dst\na,b\nb,c\n'
    assert storage.read_edges_csv(path, graph.nodes) == graph
    assert storage.read_edges_csv(path).nodes == ('a', 'b', 'c')


def test_empty_edge_list(tmp_path):
    path = tmp_path / 'edges.csv'
    storage.write_edges_csv(CausalGraph(('a', 'b')), path)
    assert path.read_text() == 'src,dst\n'
    assert len(storage.read_edges_csv(path, ('a', 'b'))) == 0


def test_malformed_edges(tmp_path):
    path = write(tmp_path / 'edges.csv', 'src,dst\na,b\nb,z\n')
    with pytest.raises(base.DataFormatError) as excinfo:
        storage.read_edges_csv(path, ('a', 'b'))
    assert excinfo.value.line == 3

    write(path, 'src,dst\na,a\n')
    with pytest.raises(base.DataFormatError, match='Self loop'):
        storage.read_edges_csv(path)


def test_json_document(tmp_path):
    path = tmp_path / 'out' / 'result.json'
    data = storage.document(
        'fit', {'beta': math.inf}, {'score': -math.inf, 'gaps': [math.nan]}
    )
    storage.write_json(data, path)
    text = path.read_text()
    assert text.endswith('}\n')
    restored = json.loads(text)
    assert restored['schema_version'] == storage.SCHEMA_VERSION
    assert restored['command'] == 'fit'
    assert restored['config'] == {'beta': 'inf'}
    assert restored['score'] == '-inf'
    assert restored['gaps'] == ['nan']
    assert storage.read_json(path) == restored


def test_read_json_errors(tmp_path):
    path = write(tmp_path / 'bad.json', '{\n  "a": 1,\n  oops\n}')
    with pytest.raises(base.DataFormatError) as excinfo:
        storage.read_json(path)
    assert excinfo.value.line == 3

    write(path, '[1]')
    with pytest.raises(base.DataFormatError):
        storage.read_json(path)


def test_params_json(tmp_path):
    params = SHPParams(np.array([[0.1, 0.3], [0, 0]]), [0.5, 1.5], 2.0, 1.0)
    path = tmp_path / 'params.json'
    storage.write_json(
        storage.document('simulate', {}, {'params': params.to_dict('ab')}),
        path,
    )
    restored, nodes = storage.read_params_json(path)
    np.testing.assert_array_equal(restored.A, params.A)
    np.testing.assert_array_equal(restored.mu, params.mu)
    assert nodes == ['a', 'b']

    write(path, '{"params": {"A": [[0]]}}')
    with pytest.raises(base.DataFormatError):
        storage.read_params_json(path)


def test_write_table(tmp_path):
    path = tmp_path / 'nested' / 'table.csv'
    frame = pandas.DataFrame({'x': [0.1, 1 / 3], 'y': ['a', 'b']})
    storage.write_table(frame, path)
    lines = path.read_text().splitlines()
    assert lines[0] == 'x,y'
    assert float(lines[2].split(',')[0]) == 1 / 3
