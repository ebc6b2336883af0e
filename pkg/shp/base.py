"""Errors raised by the package and their command line exit codes."""

from __future__ import annotations

import typing

#: Exit status used by the command line for each failure class.
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class SHPError(Exception):
    """Base class for every error raised by this package."""

    exit_code: int = 1


class ValidationError(SHPError, ValueError):
    """Invalid parameters, configuration or graph."""

    exit_code = EXIT_VALIDATION


class UnknownEventTypeError(ValidationError):
    def __init__(self, event_type: typing.Hashable) -> None:
        self.event_type = event_type
        super().__init__(f'Unknown event type: {event_type!r}')


class CyclicGraphError(ValidationError):
    """The graph has at least one directed cycle.

    >>> str(CyclicGraphError(('a', 'b')))
    'Graph is cyclic: a -> b -> a'
    """

    def __init__(self, cycle: typing.Sequence[typing.Hashable]) -> None:
        self.cycle = tuple(cycle)
        path = ' -> '.join(str(node) for node in (*self.cycle, self.cycle[0]))
        super().__init__(f'Graph is cyclic: {path}')


class DataFormatError(SHPError, ValueError):
    """Malformed input file, `line` is 1-based and counts the header."""

    exit_code = EXIT_IO

    def __init__(
        self,
        message: str,
        path: typing.Any = None,
        line: int | None = None,
    ) -> None:
        self.path = path
        self.line = line
        location = ''
        if path is not None:
            location = f'{path}'
            if line is not None:
                location += f':{line}'
            location += ': '
        super().__init__(f'{location}{message}')


class NumericError(SHPError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class ZeroIntensityError(NumericError):
    """An observed count has zero probability under the model."""

    def __init__(self, node: typing.Hashable, bin_index: int) -> None:
        self.node = node
        self.bin = bin_index
        super().__init__(
            f'Zero intensity for node {node!r} in bin {bin_index} '
            'with a positive count (log-likelihood is -inf)'
        )


class StabilityError(NumericError):
    def __init__(self, spectral_radius: float, attempts: int) -> None:
        self.spectral_radius = spectral_radius
        self.attempts = attempts
        super().__init__(
            f'No stable parameters after {attempts} attempts, '
            f'last spectral radius {spectral_radius:.4g} >= 1'
        )
