"""CSV and JSON files.

File formats, all UTF-8 with ``\\n`` line endings and a header line:

- events: ``event_type,timestamp``, one event per line, decimal timestamps.
- counts: ``bin,<node>,<node>,...``, bins numbered 1..K, integer cells.
- edges: ``src,dst``, one directed edge per line.

Fields are quoted only when they contain a comma, a quote or a line break.
Floats are written with the shortest representation that reads back to the
same value. Errors point at the physical line, the header being line 1.

JSON documents start with ``schema_version``, ``command`` and the resolved
``config``.
"""

from __future__ import annotations

import json
import logging
import math
import pathlib
import re
import typing

import numpy as np
import pandas

from . import base
from .events import BinnedCounts, ContinuousSequence, EventRecord
from .graph import CausalGraph
from .params import SHPParams

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EVENT_COLUMNS = ['event_type', 'timestamp']
EDGE_COLUMNS = ['src', 'dst']

PathLike = typing.Union[str, pathlib.Path]

_LINE = re.compile(r'line (\d+)')


def _read_frame(path: PathLike) -> pandas.DataFrame:
    try:
        return pandas.read_csv(
            path, dtype=str, keep_default_na=False, skip_blank_lines=False
        )
    except pandas.errors.EmptyDataError:
        raise base.DataFormatError('File is empty', path, 1) from None
    except pandas.errors.ParserError as exception:
        match = _LINE.search(str(exception))
        raise base.DataFormatError(
            f'Malformed CSV: {exception}',
            path,
            int(match.group(1)) if match else None,
        ) from None
    except UnicodeDecodeError as exception:
        raise base.DataFormatError(f'Not UTF-8: {exception}', path) from None


def _header(path: PathLike) -> list[str]:
    """The header exactly as written, duplicates included."""
    frame = pandas.read_csv(path, header=None, nrows=1, dtype=str)
    return list(frame.iloc[0].fillna(''))


def _expect_columns(
    path: PathLike, frame: pandas.DataFrame, expected: list[str]
) -> None:
    if list(frame.columns) != expected:
        raise base.DataFormatError(
            f'Expected the header {",".join(expected)}, got '
            f'{",".join(map(str, frame.columns))}',
            path,
            1,
        )


def _numbers(
    path: PathLike, frame: pandas.DataFrame, column: str
) -> np.ndarray:
    # float() reads back exactly what repr() wrote
    values = np.empty(len(frame))
    for row, text in enumerate(frame[column]):
        try:
            values[row] = float(text)
        except ValueError:
            raise base.DataFormatError(
                f'{column} {text!r} is not a number', path, row + 2
            ) from None
    return values


def write_table(frame: pandas.DataFrame, path: PathLike) -> None:
    """Write any table (experiment cells, summaries) in the CSV dialect of
    this module."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
    logger.debug('Wrote %d rows to %s', len(frame), path)


def read_events_csv(
    path: PathLike, horizon: float | None = None
) -> ContinuousSequence:
    """Event log as a sequence, sorted by timestamp.

    The horizon defaults to the last timestamp.
    """
    frame = _read_frame(path)
    _expect_columns(path, frame, EVENT_COLUMNS)
    timestamps = _numbers(path, frame, 'timestamp')
    bad = ~np.isfinite(timestamps) | (timestamps <= 0)
    if bad.any():
        row = int(np.argmax(bad))
        raise base.DataFormatError(
            f'Timestamps must be finite and > 0, got {timestamps[row]}',
            path,
            row + 2,
        )
    empty = (frame['event_type'] == '').to_numpy()
    if empty.any():
        raise base.DataFormatError(
            'Empty event type', path, int(np.argmax(empty)) + 2
        )

    records = [
        EventRecord(event_type, timestamp)
        for event_type, timestamp in zip(frame['event_type'], timestamps)
    ]
    if horizon is not None and len(timestamps) and timestamps.max() > horizon:
        row = int(np.argmax(timestamps > horizon))
        raise base.DataFormatError(
            f'Event at {timestamps[row]} lies beyond the horizon {horizon}',
            path,
            row + 2,
        )
    return ContinuousSequence.from_records(records, horizon)


def write_events_csv(seq: ContinuousSequence, path: PathLike) -> None:
    frame = pandas.DataFrame(
        {
            'event_type': [record.event_type for record in seq.records],
            'timestamp': np.array(
                [record.timestamp for record in seq.records], dtype=float
            ),
        },
        columns=EVENT_COLUMNS,
    )
    write_table(frame, path)


def read_counts_csv(path: PathLike, delta: float) -> BinnedCounts:
    """Counts table with a leading ``bin`` column numbered from 1."""
    frame = _read_frame(path)
    header = _header(path)
    if not header or header[0] != 'bin':
        raise base.DataFormatError(
            'The first column must be named bin', path, 1
        )
    nodes = header[1:]
    duplicated = sorted({node for node in nodes if nodes.count(node) > 1})
    if duplicated or '' in nodes:
        raise base.DataFormatError(
            f'Node names must be unique and non-empty, got {nodes}', path, 1
        )

    bins = _numbers(path, frame, 'bin')
    expected = np.arange(1, len(frame) + 1)
    if not np.array_equal(bins, expected):
        row = int(np.argmax(bins != expected))
        raise base.DataFormatError(
            f'Expected bin {row + 1}, got {frame["bin"].iloc[row]}',
            path,
            row + 2,
        )

    counts = np.zeros((len(frame), len(nodes)), dtype=np.int64)
    for position, column in enumerate(frame.columns[1:]):
        values = _numbers(path, frame, column)
        bad = (values < 0) | (np.mod(values, 1) != 0) | ~np.isfinite(values)
        if bad.any():
            row = int(np.argmax(bad))
            raise base.DataFormatError(
                f'Count {frame[column].iloc[row]!r} in column '
                f'{nodes[position]!r} is not a non-negative integer',
                path,
                row + 2,
            )
        counts[:, position] = values.astype(np.int64)
    return BinnedCounts(counts, delta, tuple(nodes))


def write_counts_csv(counts: BinnedCounts, path: PathLike) -> None:
    frame = pandas.DataFrame(
        counts.counts, columns=[str(node) for node in counts.node_names]
    )
    frame.insert(0, 'bin', np.arange(1, counts.n_bins + 1))
    write_table(frame, path)


def read_edges_csv(
    path: PathLike, nodes: typing.Sequence[typing.Hashable] | None = None
) -> CausalGraph:
    """Edge list as a graph over `nodes`.

    Without `nodes` the graph spans the endpoints in order of appearance.
    """
    frame = _read_frame(path)
    _expect_columns(path, frame, EDGE_COLUMNS)
    edges = list(zip(frame['src'], frame['dst']))
    if nodes is None:
        nodes = list(dict.fromkeys(node for edge in edges for node in edge))
    known = set(nodes)
    for row, (src, dst) in enumerate(edges):
        for node in (src, dst):
            if node not in known:
                raise base.DataFormatError(
                    f'Unknown event type {node!r}', path, row + 2
                )
        if src == dst:
            raise base.DataFormatError(f'Self loop on {src!r}', path, row + 2)
    return CausalGraph(tuple(nodes), frozenset(edges))


def write_edges_csv(graph: CausalGraph, path: PathLike) -> None:
    frame = pandas.DataFrame(
        [[str(src), str(dst)] for src, dst in graph.sorted_edges()],
        columns=EDGE_COLUMNS,
    )
    write_table(frame, path)


def document(
    command: str,
    config: typing.Mapping[str, typing.Any],
    payload: typing.Mapping[str, typing.Any],
) -> dict[str, typing.Any]:
    return {
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'config': dict(config),
        **payload,
    }


def _finite_or_text(value: typing.Any) -> typing.Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: _finite_or_text(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_text(item) for item in value]
    return value


def write_json(data: typing.Mapping[str, typing.Any], path: PathLike) -> None:
    """Write `data` as indented JSON, non-finite floats as text."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_finite_or_text(data), indent=2, allow_nan=False)
    path.write_text(text + '\n', encoding='utf-8')
    logger.debug('Wrote %s', path)


def read_json(path: PathLike) -> dict[str, typing.Any]:
    try:
        text = pathlib.Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as exception:
        raise base.DataFormatError(f'Not UTF-8: {exception}', path) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exception:
        raise base.DataFormatError(
            f'Invalid JSON: {exception.msg}', path, exception.lineno
        ) from None
    if not isinstance(data, dict):
        raise base.DataFormatError('Expected a JSON object', path, 1)
    return data


def read_params_json(path: PathLike) -> tuple[SHPParams, list[typing.Any]]:
    """Parameters and node order from a ``simulate`` or ``fit`` document."""
    data = read_json(path)
    block = data.get('params', data)
    try:
        return SHPParams.from_dict(block), list(block.get('nodes', []))
    except (KeyError, TypeError) as exception:
        raise base.DataFormatError(
            f'Missing or malformed parameters: {exception}', path
        ) from None
