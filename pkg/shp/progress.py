from __future__ import annotations

import typing

import progressbar

T = typing.TypeVar('T')


def track(
    iterable: typing.Iterable[T],
    label: str = '',
    enabled: bool = False,
    max_value: int | None = None,
) -> typing.Iterable[T]:
    """Wrap `iterable` in a progress bar when `enabled`.

    A disabled tracker still goes through a `NullBar` so enabled and disabled
    runs share one code path.

    >>> list(track(range(3)))
    [0, 1, 2]
    """
    bar_class = progressbar.ProgressBar if enabled else progressbar.NullBar
    bar = bar_class(
        prefix=f'{label}: ' if label else None,
        max_value=max_value,
    )
    return bar(iterable, max_value=max_value)
