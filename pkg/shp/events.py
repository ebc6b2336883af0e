"""Event records, continuous sequences and binned counts.

Bins are the half-open intervals ``((k - 1) * delta, k * delta]`` for
``k = 1 .. K`` with ``K = ceil(horizon / delta)``. Events at time zero are
rejected because counting starts strictly after the origin. When the horizon
is not a multiple of `delta` the final partial bin is kept.

Node order is fixed when the counts are created and every matrix downstream
(parameters, intensities) uses that same order.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import typing

import numpy as np

from . import base

logger = logging.getLogger(__name__)

Node = typing.Hashable


@dataclasses.dataclass(frozen=True)
class EventRecord:
    event_type: Node
    timestamp: float

    def __post_init__(self) -> None:
        timestamp = float(self.timestamp)
        if not math.isfinite(timestamp) or timestamp <= 0:
            raise base.ValidationError(
                'Event timestamps must be finite and > 0, '
                f'got {self.timestamp}'
            )
        object.__setattr__(self, 'timestamp', timestamp)


@dataclasses.dataclass(frozen=True)
class ContinuousSequence:
    """Events of all types on ``(0, horizon]``, sorted by timestamp."""

    records: tuple[EventRecord, ...]
    horizon: float

    def __post_init__(self) -> None:
        records = tuple(self.records)
        horizon = float(self.horizon)
        if not math.isfinite(horizon) or horizon < 0:
            raise base.ValidationError(
                f'The horizon must be finite and >= 0, got {self.horizon}'
            )

        previous = 0.0
        for record in records:
            if record.timestamp < previous:
                raise base.ValidationError(
                    'Records must be sorted by timestamp, use '
                    '`ContinuousSequence.from_records` to sort them'
                )
            previous = record.timestamp
        if records and records[-1].timestamp > horizon:
            raise base.ValidationError(
                f'Event at {records[-1].timestamp} lies beyond the horizon '
                f'{horizon}'
            )

        object.__setattr__(self, 'records', records)
        object.__setattr__(self, 'horizon', horizon)

    @classmethod
    def from_records(
        cls,
        records: typing.Iterable[EventRecord | tuple[Node, float]],
        horizon: float | None = None,
    ) -> ContinuousSequence:
        """Build a sequence from unsorted records.

        Ties keep their input order. Without a horizon the last timestamp is
        used.

        >>> seq = ContinuousSequence.from_records([('b', 2.0), ('a', 1.5)])
        >>> [record.event_type for record in seq.records], seq.horizon
        (['a', 'b'], 2.0)
        """
        converted = [
            record if isinstance(record, EventRecord) else EventRecord(*record)
            for record in records
        ]
        converted.sort(key=lambda record: record.timestamp)
        if horizon is None:
            horizon = converted[-1].timestamp if converted else 0.0
        return cls(tuple(converted), horizon)

    def __len__(self) -> int:
        return len(self.records)

    def event_types(self) -> list[Node]:
        """Event types in order of first appearance."""
        types = (record.event_type for record in self.records)
        return list(dict.fromkeys(types))


@dataclasses.dataclass(frozen=True)
class BinnedCounts:
    """Per-bin event counts, one row per bin and one column per node."""

    counts: np.ndarray
    delta: float
    node_names: tuple[Node, ...]

    def __post_init__(self) -> None:
        delta = float(self.delta)
        if not math.isfinite(delta) or delta <= 0:
            raise base.ValidationError(f'delta must be > 0, got {self.delta}')

        node_names = tuple(self.node_names)
        if len(set(node_names)) != len(node_names):
            raise base.ValidationError(f'Duplicate node names in {node_names}')

        raw = np.asarray(self.counts)
        if raw.size == 0:
            raw = raw.reshape(0, len(node_names))
        if raw.ndim != 2 or raw.shape[1] != len(node_names):
            raise base.ValidationError(
                f'Counts of shape {raw.shape} do not match '
                f'{len(node_names)} nodes'
            )
        if raw.dtype.kind not in 'iu':
            if raw.size and not np.all(np.equal(np.mod(raw, 1), 0)):
                raise base.ValidationError('Counts must be integers')
        counts = raw.astype(np.int64)
        if counts.size and counts.min() < 0:
            raise base.ValidationError('Counts must be non-negative')
        counts.flags.writeable = False

        object.__setattr__(self, 'counts', counts)
        object.__setattr__(self, 'delta', delta)
        object.__setattr__(self, 'node_names', node_names)

    @property
    def n_bins(self) -> int:
        return int(self.counts.shape[0])

    @property
    def n_nodes(self) -> int:
        return len(self.node_names)

    @property
    def horizon(self) -> float:
        return self.n_bins * self.delta

    def index(self, node: Node) -> int:
        try:
            return self.node_names.index(node)
        except ValueError:
            raise base.UnknownEventTypeError(node) from None

    def column(self, node: Node) -> np.ndarray:
        return self.counts[:, self.index(node)]

    def totals(self) -> dict[Node, int]:
        return dict(
            zip(self.node_names, (int(x) for x in self.counts.sum(axis=0)))
        )

    def aggregate(self, factor: int) -> BinnedCounts:
        """Sum groups of `factor` adjacent bins into bins of width
        ``factor * delta``, keeping a trailing partial group.

        >>> counts = BinnedCounts(np.array([[1], [2], [3]]), 1.0, ('a',))
        >>> counts.aggregate(2).counts[:, 0].tolist()
        [3, 3]
        """
        if factor < 1:
            raise base.ValidationError(f'factor must be >= 1, got {factor}')
        groups = -(-self.n_bins // factor)
        padded = np.zeros((groups * factor, self.n_nodes), dtype=np.int64)
        padded[: self.n_bins] = self.counts
        summed = padded.reshape(groups, factor, self.n_nodes).sum(axis=1)
        return BinnedCounts(summed, self.delta * factor, self.node_names)


def n_bins_for(horizon: float, delta: float) -> int:
    """
    Number of bins covering ``(0, horizon]``.

    >>> n_bins_for(2.0, 1.0)
    2
    >>> n_bins_for(2.5, 1.0)
    3
    >>> n_bins_for(0.0, 1.0)
    0
    """
    if delta <= 0:
        raise base.ValidationError(f'delta must be > 0, got {delta}')
    # Guard against 3.0000000000000004 style ratios producing an empty bin
    ratio = horizon / delta
    rounded = round(ratio)
    if math.isclose(ratio, rounded, rel_tol=1e-12, abs_tol=1e-12):
        return int(rounded)
    return math.ceil(ratio)


def bin_events(
    seq: ContinuousSequence,
    delta: float,
    nodes: typing.Sequence[Node] | None = None,
) -> BinnedCounts:
    """Count events per type in the bins ``((k - 1) * delta, k * delta]``.

    >>> seq = ContinuousSequence.from_records(
    ...     [('a', 0.5), ('a', 1.2), ('a', 1.9)], horizon=2.0
    ... )
    >>> bin_events(seq, 1.0, ['a']).counts[:, 0].tolist()
    [1, 2]
    """
    delta = float(delta)
    if not math.isfinite(delta) or delta <= 0:
        raise base.ValidationError(f'delta must be > 0, got {delta}')
    if nodes is None:
        nodes = seq.event_types()

    nodes = tuple(nodes)
    column = {node: index for index, node in enumerate(nodes)}
    n_bins = n_bins_for(seq.horizon, delta)
    counts = np.zeros((n_bins, len(nodes)), dtype=np.int64)
    if not seq.records:
        return BinnedCounts(counts, delta, nodes)

    columns = np.empty(len(seq.records), dtype=np.int64)
    timestamps = np.empty(len(seq.records), dtype=float)
    for position, record in enumerate(seq.records):
        try:
            columns[position] = column[record.event_type]
        except KeyError:
            raise base.UnknownEventTypeError(record.event_type) from None
        timestamps[position] = record.timestamp

    # Bin k holds (k - 1) * delta < t <= k * delta, zero-based row k - 1
    rows = np.ceil(timestamps / delta).astype(np.int64) - 1
    # Division can round a timestamp into the neighbouring bin
    rows -= (rows * delta >= timestamps) & (rows > 0)
    rows += (rows + 1) * delta < timestamps
    rows = np.clip(rows, 0, n_bins - 1)
    np.add.at(counts, (rows, columns), 1)
    logger.debug(
        'Binned %d events into %d bins of width %g',
        len(seq.records),
        n_bins,
        delta,
    )
    return BinnedCounts(counts, delta, nodes)
