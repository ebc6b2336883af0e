import math

import numpy as np
import pytest

from shp import base
from shp.events import (
    BinnedCounts,
    ContinuousSequence,
    EventRecord,
    bin_events,
    n_bins_for,
)


@pytest.mark.parametrize('timestamp', [0.0, -1.0, math.inf, math.nan])
def test_event_record_rejects_timestamp(timestamp):
    with pytest.raises(base.ValidationError):
        EventRecord('a', timestamp)


def test_from_records_sorts_and_keeps_ties():
    seq = ContinuousSequence.from_records(
        [('b', 2.0), ('a', 1.0), ('c', 1.0)], horizon=3.0
    )
    assert [record.event_type for record in seq.records] == ['a', 'c', 'b']
    assert seq.horizon == 3.0
    assert len(seq) == 3
    assert seq.event_types() == ['a', 'c', 'b']


def test_sequence_rejects_unsorted_and_late_events():
    with pytest.raises(base.ValidationError, match='sorted'):
        ContinuousSequence(
            (EventRecord('a', 2.0), EventRecord('a', 1.0)), horizon=3.0
        )
    with pytest.raises(base.ValidationError, match='horizon'):
        ContinuousSequence.from_records([('a', 4.0)], horizon=3.0)


def test_empty_sequence():
    seq = ContinuousSequence.from_records([])
    assert seq.horizon == 0.0
    counts = bin_events(seq, 1.0, ['a', 'b'])
    assert counts.counts.shape == (0, 2)


@pytest.mark.parametrize(
    'horizon,delta,expected',
    [
        (10.0, 1.0, 10),
        (10.5, 1.0, 11),
        (0.3, 0.1, 3),
        (1.0, 3.0, 1),
    ],
)
def test_n_bins_for(horizon, delta, expected):
    assert n_bins_for(horizon, delta) == expected


def test_bins_are_left_open_right_closed():
    seq = ContinuousSequence.from_records(
        [('a', 1.0), ('a', 1.0 + 1e-9), ('a', 2.0), ('b', 0.5)], horizon=3.0
    )
    counts = bin_events(seq, 1.0, ['a', 'b'])
    assert counts.counts.tolist() == [[1, 1], [2, 0], [0, 0]]


def test_binning_survives_decimal_rounding():
    seq = ContinuousSequence.from_records(
        [('a', 0.1), ('a', 0.2), ('a', 0.3)], horizon=0.3
    )
    counts = bin_events(seq, 0.1, ['a'])
    assert counts.column('a').tolist() == [1, 1, 1]


def test_partial_final_bin_is_kept():
    seq = ContinuousSequence.from_records([('a', 2.4)], horizon=2.5)
    counts = bin_events(seq, 1.0)
    assert counts.n_bins == 3
    assert counts.column('a').tolist() == [0, 0, 1]


def test_node_order_and_silent_nodes():
    seq = ContinuousSequence.from_records([('b', 0.5)], horizon=1.0)
    counts = bin_events(seq, 1.0, ['a', 'b'])
    assert counts.node_names == ('a', 'b')
    assert counts.totals() == {'a': 0, 'b': 1}


def test_unknown_event_type():
    seq = ContinuousSequence.from_records([('z', 0.5)], horizon=1.0)
    with pytest.raises(base.UnknownEventTypeError) as excinfo:
        bin_events(seq, 1.0, ['a'])
    assert excinfo.value.event_type == 'z'


@pytest.mark.parametrize('delta', [0.0, -1.0, math.nan, math.inf])
def test_bin_events_rejects_delta(delta):
    seq = ContinuousSequence.from_records([('a', 0.5)])
    with pytest.raises(base.ValidationError):
        bin_events(seq, delta)


def test_total_events_are_preserved():
    rng = np.random.default_rng(3)
    timestamps = rng.uniform(0.0, 50.0, size=400)
    types = rng.choice(['a', 'b', 'c'], size=400)
    seq = ContinuousSequence.from_records(
        zip(types.tolist(), timestamps.tolist()), horizon=50.0
    )
    counts = bin_events(seq, 0.7, ['a', 'b', 'c'])
    assert counts.counts.sum() == 400
    for node in 'abc':
        assert counts.totals()[node] == int((types == node).sum())


def test_refinement_then_aggregation_matches_coarse_binning():
    rng = np.random.default_rng(11)
    timestamps = rng.uniform(0.0, 20.0, size=300)
    seq = ContinuousSequence.from_records(
        (('a', t) for t in timestamps.tolist()), horizon=20.0
    )
    fine = bin_events(seq, 0.5)
    coarse = bin_events(seq, 1.0)
    aggregated = fine.aggregate(2)
    assert aggregated.delta == coarse.delta
    np.testing.assert_array_equal(aggregated.counts, coarse.counts)


def test_aggregate_keeps_trailing_group():
    counts = BinnedCounts(np.arange(10).reshape(5, 2), 1.0, ('a', 'b'))
    aggregated = counts.aggregate(2)
    assert aggregated.n_bins == 3
    assert aggregated.delta == 2.0
    assert aggregated.counts.sum() == counts.counts.sum()
    with pytest.raises(base.ValidationError):
        counts.aggregate(0)


@pytest.mark.parametrize(
    'values,names',
    [
        ([[1, -1]], ('a', 'b')),
        ([[1.5, 0]], ('a', 'b')),
        ([[1, 0, 0]], ('a', 'b')),
        ([[1, 0]], ('a', 'a')),
    ],
)
def test_binned_counts_validation(values, names):
    with pytest.raises(base.ValidationError):
        BinnedCounts(np.array(values), 1.0, names)


def test_binned_counts_are_read_only():
    counts = BinnedCounts(np.array([[1.0, 2.0]]), 2.0, ('a', 'b'))
    assert counts.counts.dtype == np.int64
    assert counts.horizon == 2.0
    with pytest.raises(ValueError):
        counts.counts[0, 0] = 5
    with pytest.raises(base.UnknownEventTypeError):
        counts.column('c')
